#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "random_problems.hpp"
#include "renfk/chain_sampler.hpp"
#include "renfk/error.hpp"
#include "renfk/revuz.hpp"
#include "renfk/semilinear.hpp"
#include "renfk/trajectory.hpp"

using namespace renfk;

namespace {

FiniteChainSpec reference_chain() {
    FiniteChainSpec s;
    s.m = Eigen::Vector2d(1.0, 1.0);
    s.L.resize(2, 2);
    s.L << -2.0, 1.0, 1.0, -2.0;
    return s;
}

FiniteChainSpec single_state(double c) {
    FiniteChainSpec s;
    s.m = Eigen::VectorXd::Ones(1);
    s.L = Eigen::MatrixXd::Constant(1, 1, -c);
    return s;
}

}  // namespace

TEST(Trajectory, ExponentialLifetime) {
    const double c = 2.5;
    MomentAccumulator acc;
    for (std::uint64_t seed = 0; seed < 100'000; ++seed) {
        const ChainPath p = simulate_path(single_state(c), 0, std::nullopt, seed);
        ASSERT_TRUE(p.killed);
        ASSERT_EQ(p.sojourns.size(), 1u);
        acc.push(p.lifetime);
    }
    const Estimate e = acc.estimate(0);
    EXPECT_LE(z_score(e.mean, 1.0 / c, e.std_error), 3.0);
}

TEST(Trajectory, NoJumpsWithoutOffDiagonals) {
    FiniteChainSpec s;
    s.m = Eigen::Vector3d::Ones();
    s.L = Eigen::Vector3d(-1.0, -2.0, -0.5).asDiagonal();
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const ChainPath p = simulate_path(s, 1, std::nullopt, seed);
        ASSERT_EQ(p.sojourns.size(), 1u);
        EXPECT_EQ(p.sojourns[0].state, 1u);
    }
}

TEST(Trajectory, SojournsSumToLifetime) {
    Rng rng = substream(1, 0);
    const FiniteChainSpec s = fixtures::random_chain(rng, 8);
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const ChainPath p = simulate_path(s, seed % 8, std::nullopt, seed);
        double total = 0.0;
        for (const auto& so : p.sojourns) {
            EXPECT_GT(so.duration, 0.0);
            total += so.duration;
        }
        EXPECT_NEAR(total, p.lifetime, 1e-9 * std::max(1.0, p.lifetime));
        const ChainPath q = simulate_path(s, seed % 8, 0.3, seed);
        if (!q.killed) EXPECT_DOUBLE_EQ(q.lifetime, 0.3);
    }
}

TEST(Trajectory, AbsorbingConservativeStateHitsTheCap) {
    FiniteChainSpec s;
    s.m = Eigen::Vector2d::Ones();
    s.L = Eigen::Matrix2d::Zero();
    s.L(0, 0) = -1.0;
    s.L(0, 1) = 1.0;
    const ChainPath p = simulate_path(s, 0, std::nullopt, 3);
    EXPECT_FALSE(p.killed);
    EXPECT_TRUE(p.capped);
    EXPECT_DOUBLE_EQ(p.lifetime, until_death_cap);
}

TEST(Trajectory, ReferenceChainMeanLifetime) {
    MomentAccumulator acc;
    for (std::uint64_t seed = 0; seed < 100'000; ++seed) acc.push(simulate_path(reference_chain(), 0, std::nullopt, seed).lifetime);
    const Estimate e = acc.estimate(0);
    EXPECT_LE(z_score(e.mean, 1.0, e.std_error), 3.0);
}

TEST(Trajectory, CsvDump) {
    const ChainPath p = simulate_path(reference_chain(), 0, std::nullopt, 4);
    std::ostringstream os;
    write_csv(p, os);
    const std::string csv = os.str();
    EXPECT_EQ(csv.rfind("state,sojourn\n", 0), 0u);
    EXPECT_EQ(static_cast<std::size_t>(std::count(csv.begin(), csv.end(), '\n')), p.sojourns.size() + 1);
}

TEST(FeynmanKac, ZeroDataIsExactlyZero) {
    const FiniteForm form(reference_chain());
    const Estimate e = feynman_kac_mc(form, FieldVec::Zero(2), StateMeasure::zero(2), 0, {.n_paths = 1000, .seed = 1});
    EXPECT_EQ(e.mean, 0.0);
    EXPECT_EQ(e.std_error, 0.0);
}

TEST(FeynmanKac, ReferencePotential) {
    const FiniteForm form(reference_chain());
    const Estimate e = feynman_kac_mc(form, FieldVec::Zero(2), StateMeasure(Eigen::Vector2d(1.0, 1.0)), 0,
                                      {.n_paths = 100'000, .seed = 2});
    EXPECT_LE(z_score(e.mean, 1.0, e.std_error), 3.0);
}

TEST(FeynmanKac, Linearity) {
    const FiniteForm form(reference_chain());
    const StateMeasure mu(Eigen::Vector2d(1.0, 0.3));
    const McOptions mc{.n_paths = 100'000, .seed = 8};
    const Estimate a = feynman_kac_mc(form, FieldVec::Zero(2), mu, 1, mc);
    const Estimate b = feynman_kac_mc(form, FieldVec::Zero(2), mu * 2.0, 1, {.n_paths = 100'000, .seed = 9});
    EXPECT_LE(z_score(b.mean, 2.0 * a.mean, std::hypot(b.std_error, 2.0 * a.std_error)), 3.0);
}

TEST(FeynmanKac, RejectsRecurrentChain) {
    FiniteChainSpec s;
    s.m = Eigen::Vector2d::Ones();
    s.L.resize(2, 2);
    s.L << -1.0, 1.0, 1.0, -1.0;
    EXPECT_THROW(feynman_kac_mc(FiniteForm(s), FieldVec::Zero(2), StateMeasure::zero(2), 0, {}), InvalidInput);
}

TEST(FeynmanKac, ReproducesTheSemilinearSolution) {
    const FiniteForm form(reference_chain());
    const auto f = builtin_nonlinearity("linear_decay", {{"rate", 1.0}});
    const StateMeasure mu(Eigen::Vector2d(1.0, 1.0));
    const auto sol = solve_elliptic_finite(form, f, mu, {});
    FieldVec fu(2);
    for (int i = 0; i < 2; ++i) fu[i] = f(static_cast<std::size_t>(i), sol.u[i]);
    const Estimate e = feynman_kac_mc(form, fu, mu, 1, {.n_paths = 100'000, .seed = 3});
    EXPECT_LE(z_score(e.mean, sol.u[1], e.std_error), 3.0);
}

TEST(McEngine, DeterministicForFixedWorkers) {
    const FiniteForm form(reference_chain());
    const StateMeasure mu(Eigen::Vector2d(1.0, 0.2));
    for (unsigned w : {1u, 3u}) {
        const McOptions mc{.n_paths = 20'000, .seed = 42, .workers = w};
        const Estimate a = feynman_kac_mc(form, FieldVec::Zero(2), mu, 0, mc);
        const Estimate b = feynman_kac_mc(form, FieldVec::Zero(2), mu, 0, mc);
        EXPECT_EQ(a.mean, b.mean);
        EXPECT_EQ(a.std_error, b.std_error);
        EXPECT_EQ(a.n_paths, 20'000u);
    }
}

TEST(McEngine, MergedMomentsMatchSinglePass) {
    MomentAccumulator all, left, right;
    Rng rng = substream(1, 1);
    for (int i = 0; i < 1000; ++i) {
        const double x = uniform01(rng);
        all.push(x);
        (i < 400 ? left : right).push(x);
    }
    left.merge(right);
    EXPECT_NEAR(left.mean, all.mean, 1e-14);
    EXPECT_NEAR(left.m2, all.m2, 1e-10);
}

TEST(Bsde, ZeroProblemHasZeroMartingale) {
    const FiniteForm form(reference_chain());
    BsdeOptions opts;
    opts.mc = {.n_paths = 1000, .seed = 1};
    const auto r = bsde_residual(form, FieldVec::Zero(2), Nonlinearity::zero(), StateMeasure::zero(2), opts);
    for (const auto& inc : r.increments) {
        EXPECT_EQ(inc.increment.mean, 0.0);
        EXPECT_EQ(inc.increment.std_error, 0.0);
    }
    EXPECT_TRUE(r.passed());
}

TEST(Bsde, ExactSingleStateSolutionPasses) {
    const double c = 1.5, w = 2.0;
    const FiniteForm form(single_state(c));
    const FieldVec u = FieldVec::Constant(1, w / c);
    BsdeOptions opts;
    opts.mc = {.n_paths = 100'000, .seed = 5};
    const auto r = bsde_residual(form, u, Nonlinearity::zero(), StateMeasure(Eigen::VectorXd::Constant(1, w)), opts);
    EXPECT_TRUE(r.passed()) << to_json(r).dump();
    EXPECT_EQ(r.increments.size(), 3u);
}

TEST(Bsde, PlantedErrorIsDetected) {
    const FiniteForm form(reference_chain());
    const auto f = builtin_nonlinearity("linear_decay", {{"rate", 1.0}});
    const StateMeasure mu(Eigen::Vector2d(1.0, 1.0));
    FieldVec u = solve_elliptic_finite(form, f, mu, {}).u;
    u[0] += 0.1 * u.cwiseAbs().maxCoeff();
    BsdeOptions opts;
    opts.mc = {.n_paths = 100'000, .seed = 6};
    const auto r = bsde_residual(form, u, f, mu, opts);
    EXPECT_GE(r.max_abs_z, 5.0);
    EXPECT_FALSE(r.passed());
}

TEST(Bsde, TailExpectationsDecay) {
    const FiniteForm form(reference_chain());
    const auto f = builtin_nonlinearity("linear_decay", {{"rate", 1.0}});
    const StateMeasure mu(Eigen::Vector2d(1.0, 1.0));
    const FieldVec u = solve_elliptic_finite(form, f, mu, {}).u;
    BsdeOptions opts;
    opts.mc = {.n_paths = 20'000, .seed = 7};
    const auto r = bsde_residual(form, u, f, mu, opts);
    for (const auto& tails : r.tail_expectations)
        for (std::size_t l = 1; l < tails.size(); ++l) EXPECT_LE(tails[l], tails[l - 1]);
}

TEST(Revuz, ExactlyZeroForZeroMeasure) {
    const FiniteForm form(reference_chain());
    const auto r = revuz_check_finite(form, StateMeasure::zero(2), 0.01, {.n_paths = 1000, .seed = 1});
    EXPECT_EQ(r.estimate.mean, 0.0);
    EXPECT_EQ(r.target, 0.0);
}

TEST(Revuz, ReferenceChainMatchesFiniteHorizonValue) {
    // mu = m on the two-state chain: (1/t) E_m A_t = 2 (1 - e^{-t}) / t.
    const FiniteForm form(reference_chain());
    const double t = 0.01;
    const auto r = revuz_check_finite(form, StateMeasure(Eigen::Vector2d(1.0, 1.0)), t, {.n_paths = 100'000, .seed = 4});
    EXPECT_NEAR(r.horizon_value, 2.0 * (1.0 - std::exp(-t)) / t, 1e-12);
    EXPECT_DOUBLE_EQ(r.target, 2.0);
    EXPECT_TRUE(r.within_horizon_value()) << to_json(r).dump();
}

TEST(Revuz, RejectsSignedMeasure) {
    const FiniteForm form(reference_chain());
    EXPECT_THROW(revuz_check_finite(form, StateMeasure(Eigen::Vector2d(1.0, -1.0)), 0.01, {.n_paths = 1000}),
                 InvalidInput);
}

TEST(ChainSampler, PiecewiseWalkSplitsAtBreakpoints) {
    FiniteChainSpec a = single_state(0.0);
    a.L(0, 0) = 0.0;
    const PiecewiseChainSampler s({0.5, 1.0}, {a, a});
    Rng rng = substream(0, 0);
    std::vector<double> begins;
    const auto end = s.walk(0, 0.2, 1.0, rng, [&](std::size_t, double b, double) { begins.push_back(b); });
    EXPECT_FALSE(end.killed);
    ASSERT_EQ(begins.size(), 2u);
    EXPECT_DOUBLE_EQ(begins[1], 0.5);
}
