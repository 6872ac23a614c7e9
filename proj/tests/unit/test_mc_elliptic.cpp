#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "oracles.hpp"
#include "renfk/error.hpp"
#include "renfk/mc_elliptic.hpp"

using namespace renfk;

namespace {

const SourceFn one = [](const Point&) { return 1.0; };

double joint(const Estimate& a, const Estimate& b) { return std::hypot(a.std_error, b.std_error); }

}  // namespace

TEST(Wos, ZeroDataIsExactlyZero) {
    const Domain ball = Domain::ball(2, {}, 1.0);
    const auto e = wos_linear(ball, {0.3, 0.1, 0.0}, {}, FieldMeasure::zero(2), {{.n_paths = 1000, .seed = 1}});
    EXPECT_EQ(e.mean, 0.0);
    EXPECT_EQ(e.std_error, 0.0);
    EXPECT_FALSE(e.boundary);
}

TEST(Wos, DiskExitTimeAtCenterAndOffCenter) {
    const Domain ball = Domain::ball(2, {}, 1.0);
    const WosOptions opts{{.n_paths = 100'000, .seed = 2}};
    const auto c = wos_linear(ball, {0.0, 0.0, 0.0}, one, FieldMeasure::zero(2), opts);
    EXPECT_LE(z_score(c.mean, 0.25, c.std_error), 3.0);
    const auto o = wos_linear(ball, {0.6, 0.0, 0.0}, one, FieldMeasure::zero(2), opts);
    EXPECT_LE(z_score(o.mean, 0.16, o.std_error), 3.0);
}

TEST(Wos, ExitTimeFormulaInEveryDimension) {
    for (int d = 1; d <= 3; ++d) {
        const Domain ball = Domain::ball(d, {}, 2.0);
        const Point x{0.5, d > 1 ? -0.4 : 0.0, d > 2 ? 0.3 : 0.0};
        const double r2 = norm(x, d) * norm(x, d);
        const auto e = wos_linear(ball, x, one, FieldMeasure::zero(d), {{.n_paths = 50'000, .seed = 3}});
        // the eps-shell removes O(eps) of expected occupation
        EXPECT_LE(std::abs(e.mean - (4.0 - r2) / (2.0 * d)), 3.0 * e.std_error + 1e-3) << "d=" << d;
    }
}

TEST(Wos, MeasureDensityActsLikeSource) {
    const Domain ball = Domain::ball(3, {}, 1.0);
    const auto e = wos_linear(ball, {}, {}, FieldMeasure::constant(3, 2.0), {{.n_paths = 50'000, .seed = 4}});
    EXPECT_LE(z_score(e.mean, 2.0 / 6.0, e.std_error), 3.0);
}

TEST(Wos, BoundaryShellAndOutsidePoint) {
    const Domain ball = Domain::ball(2, {}, 1.0);
    const auto e = wos_linear(ball, {1.0 - 1e-6, 0.0, 0.0}, one, FieldMeasure::zero(2), {});
    EXPECT_TRUE(e.boundary);
    EXPECT_EQ(e.mean, 0.0);
    EXPECT_THROW(wos_linear(ball, {1.5, 0.0, 0.0}, one, FieldMeasure::zero(2), {}), InvalidInput);
}

TEST(Wos, BoxDomain) {
    // -Laplacian u = 1 on the slab-like box (0,1) x (0,20), far from the short sides:
    // u is close to x (1 - x) / 2.
    const Domain box = Domain::box(2, {0.0, 0.0}, {1.0, 20.0});
    const auto e = wos_linear(box, {0.3, 10.0, 0.0}, one, FieldMeasure::zero(2), {{.n_paths = 50'000, .seed = 5}});
    EXPECT_LE(z_score(e.mean, 0.3 * 0.7 / 2.0, e.std_error), 3.0);
}

TEST(Wos, MaximumPrinciple) {
    const Domain ball = Domain::ball(2, {}, 1.0);
    const SourceFn bump = [](const Point& y) { return y[0] > 0.5 ? 3.0 : 0.0; };
    for (double x : {-0.8, -0.2, 0.4}) {
        const auto e = wos_linear(ball, {x, 0.1, 0.0}, bump, FieldMeasure::zero(2), {{.n_paths = 20'000, .seed = 6}});
        EXPECT_GE(e.mean, -3.0 * e.std_error);
    }
}

TEST(Wos, ShellRegularizationConverges) {
    // Surface mass M on |y| = 1/2 in the unit disk: u(0) = M ln(2) / (2 pi).
    const Domain ball = Domain::ball(2, {}, 1.0);
    const double exact = std::log(2.0) / (2.0 * std::numbers::pi);
    std::vector<Estimate> ests;
    for (double eps : {0.1, 0.05, 0.025}) {
        FieldMeasure mu(2);
        mu.add_shell(SphereShell{{}, 0.5, 1.0, eps});
        ests.push_back(wos_linear(ball, {}, {}, mu, {{.n_paths = 100'000, .seed = 7}}));
    }
    for (std::size_t i = 1; i < ests.size(); ++i)
        EXPECT_LE(z_score(ests[i].mean, ests[i - 1].mean, joint(ests[i], ests[i - 1])), 3.0);
    EXPECT_LE(z_score(ests.back().mean, exact, ests.back().std_error), 3.0);
}

TEST(Wos, GreenOffsetsHaveTheRightMeanRadius) {
    // E s under densities 2(1-s), 4 s log(1/s), 6 s(1-s): 1/3, 4/9, 1/2
    const double expected[] = {1.0 / 3.0, 4.0 / 9.0, 0.5};
    for (int d = 1; d <= 3; ++d) {
        Rng rng = substream(8, static_cast<std::uint64_t>(d));
        MomentAccumulator acc;
        for (int i = 0; i < 200'000; ++i) acc.push(norm(sample_green_offset(d, rng), d));
        const Estimate e = acc.estimate(0);
        EXPECT_LE(z_score(e.mean, expected[d - 1], e.std_error), 3.5) << "d=" << d;
    }
}

TEST(Wos, ReproducibleForFixedWorkers) {
    const Domain ball = Domain::ball(2, {}, 1.0);
    const WosOptions opts{{.n_paths = 10'000, .seed = 11, .workers = 2}};
    const auto a = wos_linear(ball, {0.2, 0.0, 0.0}, one, FieldMeasure::zero(2), opts);
    const auto b = wos_linear(ball, {0.2, 0.0, 0.0}, one, FieldMeasure::zero(2), opts);
    EXPECT_EQ(a.mean, b.mean);
    EXPECT_EQ(a.std_error, b.std_error);
}

TEST(StableKernel, GreenDensityIntegratesToMeanExitTime) {
    using boost::math::quadrature::gauss_kronrod;
    for (int d = 1; d <= 3; ++d)
        for (double alpha : {0.5, 1.0, 1.5, 1.9}) {
            const StableBallKernel k(d, alpha, 64);
            const double w = unit_sphere_area(d);
            // s = t^4 tames the origin singularity
            auto integrand = [&](double t) {
                const double s = std::pow(t, 4.0);
                return w * std::pow(s, d - 1) * k.green_center(s) * 4.0 * t * t * t;
            };
            const double total = gauss_kronrod<double, 61>::integrate(integrand, 0.0, 1.0, 15, 1e-10);
            EXPECT_NEAR(total / k.mean_exit_time_unit(), 1.0, 1e-5) << "d=" << d << " alpha=" << alpha;
        }
}

TEST(StableKernel, CauchyIntervalGreenMatchesClosedForm) {
    const StableBallKernel k(1, 1.0, 64);
    for (double s : {0.05, 0.3, 0.7, 0.95})
        EXPECT_NEAR(k.green_center(s), fixtures::cauchy_interval_green(0.0, s), 1e-10);
    EXPECT_NEAR(k.mean_exit_time_unit(), 1.0, 1e-14);
}

TEST(StableKernel, ExitRadiusMoments) {
    // P(|Y| > rho) for rho = 1/sqrt(b): regularized incomplete beta; check
    // the median of B against simulation instead via E[B] = alpha / 2.
    for (double alpha : {0.5, 1.0, 1.5}) {
        const StableBallKernel k(2, alpha, 64);
        Rng rng = substream(9, 0);
        MomentAccumulator acc;
        for (int i = 0; i < 100'000; ++i) {
            const double r = k.sample_exit_radius(rng);
            ASSERT_GT(r, 1.0);
            acc.push(1.0 / (r * r));
        }
        const Estimate e = acc.estimate(0);
        EXPECT_LE(z_score(e.mean, alpha / 2.0, e.std_error), 3.5);
    }
}

TEST(StableKernel, RejectsBadParameters) {
    EXPECT_THROW(StableBallKernel(1, 2.0), InvalidInput);
    EXPECT_THROW(StableBallKernel(1, 0.0), InvalidInput);
    EXPECT_THROW(StableBallKernel(4, 1.0), InvalidInput);
    EXPECT_THROW(OperatorKind::fractional(2.5), InvalidInput);
}

TEST(Stable, ZeroSourceIsExactlyZero) {
    const auto e = stable_linear(Domain::interval(-1.0, 1.0), 1.0, {0.3, 0, 0}, {}, {.n_paths = 100, .seed = 1});
    EXPECT_EQ(e.mean, 0.0);
    EXPECT_EQ(e.std_error, 0.0);
}

TEST(Stable, BoxIsUnsupported) {
    const Domain box = Domain::box(2, {0, 0}, {1, 1});
    EXPECT_THROW(stable_linear(box, 1.0, {0.5, 0.5, 0}, one, {.n_paths = 100}), Unsupported);
}

TEST(Stable, MeanExitTimeOffCenter) {
    // E_x tau = C (1 - |x|^2)^{alpha/2} on the unit ball.
    for (int d = 1; d <= 3; ++d)
        for (double alpha : {0.7, 1.6}) {
            const StableBallKernel k(d, alpha);
            const Point x{0.6, 0.0, 0.0};
            const auto e = stable_linear(Domain::ball(d, {}, 1.0), k, x, one, {.n_paths = 50'000, .seed = 12});
            const double exact = k.mean_exit_time_unit() * std::pow(1.0 - 0.36, alpha / 2.0);
            EXPECT_LE(z_score(e.mean, exact, e.std_error), 3.5) << "d=" << d << " alpha=" << alpha;
        }
}

TEST(Stable, CauchyQuadratureOracle) {
    const Domain interval = Domain::interval(-1.0, 1.0);
    const StableBallKernel k(1, 1.0);
    const auto g = [](double y) { return 1.0 + y * y; };
    const SourceFn gs = [&g](const Point& y) { return g(y[0]); };
    for (double x : {-0.5, 0.25}) {
        const double oracle = fixtures::cauchy_interval_potential(x, g);
        const auto e = stable_linear(interval, k, {x, 0, 0}, gs, {.n_paths = 100'000, .seed = 13});
        EXPECT_LE(z_score(e.mean, oracle, e.std_error), 3.0) << "x=" << x;
    }
}

TEST(Stable, OracleReproducesKnownExitTime) {
    for (double x : {-0.9, 0.0, 0.5})
        EXPECT_NEAR(fixtures::cauchy_interval_potential(x, [](double) { return 1.0; }), std::sqrt(1.0 - x * x), 1e-9);
}

TEST(Grid, InterpolationIsExactForMultilinearFunctions) {
    const Domain box = Domain::box(2, {-1, 0}, {1, 2});
    const EvaluationGrid grid(box, 5);
    std::vector<double> vals(grid.node_count());
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const Point p = grid.node(i);
        vals[i] = 1.0 + 2.0 * p[0] - p[1] + 0.5 * p[0] * p[1];
    }
    const Point q{0.33, 1.41, 0.0};
    EXPECT_NEAR(grid.interpolate(vals, q), 1.0 + 0.66 - 1.41 + 0.5 * 0.33 * 1.41, 1e-12);
    EXPECT_EQ(grid.interior().size(), 3u * 3u);
}

TEST(PicardMc, ConstantNonlinearityTakesOneSweep) {
    const Domain interval = Domain::interval(-1.0, 1.0);
    PicardMcOptions opts;
    opts.mc = {.n_paths = 2000, .seed = 1};
    opts.per_axis = 9;
    const auto field = picard_mc(interval, OperatorKind::laplacian(), Nonlinearity::zero(), FieldMeasure::constant(1, 1.0),
                                 {}, opts);
    EXPECT_EQ(field.iterations, 1);
    ASSERT_EQ(field.points.size(), 7u);
    for (std::size_t p = 0; p < field.points.size(); ++p) {
        const double x = field.points[p][0];
        EXPECT_LE(z_score(field.estimates[p].mean, (1.0 - x * x) / 2.0, field.estimates[p].std_error), 4.0);
    }
}

TEST(PicardMc, ReactionProblemMatchesOdeOracle) {
    const Domain interval = Domain::interval(-1.0, 1.0);
    const auto f = builtin_nonlinearity("linear_decay", {{"rate", 1.0}});
    PicardMcOptions opts;
    opts.mc = {.n_paths = 20'000, .seed = 2};
    const auto field = picard_mc(interval, OperatorKind::laplacian(), f, FieldMeasure::constant(1, 1.0), {}, opts);
    const fixtures::ReactionOdeOracle ode;
    const double h = 2.0 / 32.0;
    const double interp = h * h / 8.0 * fixtures::ReactionOdeOracle::second_derivative_bound();
    int misses = 0;
    for (std::size_t p = 0; p < field.points.size(); ++p) {
        const double x = field.points[p][0];
        const auto& e = field.estimates[p];
        if (std::abs(e.mean - ode(x)) > 3.0 * e.std_error + interp) ++misses;
    }
    EXPECT_LE(misses, 1) << to_json(field).dump();
    EXPECT_NEAR(ode(0.3), fixtures::reaction_ode_exact(0.3), 1e-7);
}

TEST(PicardMc, DoublingTheMeasureRaisesTheField) {
    const Domain ball = Domain::ball(2, {}, 1.0);
    const auto f = builtin_nonlinearity("linear_decay", {{"rate", 1.0}});
    PicardMcOptions opts;
    opts.mc = {.n_paths = 2000, .seed = 3};
    opts.per_axis = 7;
    const auto a = picard_mc(ball, OperatorKind::laplacian(), f, FieldMeasure::constant(2, 1.0), {}, opts);
    const auto b = picard_mc(ball, OperatorKind::laplacian(), f, FieldMeasure::constant(2, 2.0), {}, opts);
    for (std::size_t p = 0; p < a.points.size(); ++p)
        EXPECT_GE(b.estimates[p].mean - a.estimates[p].mean, -3.0 * joint(a.estimates[p], b.estimates[p]));
}

TEST(PicardMc, FractionalOperatorRuns) {
    const Domain interval = Domain::interval(-1.0, 1.0);
    const auto f = builtin_nonlinearity("saturating", {{"rate", 0.5}, {"source", 1.0}});
    PicardMcOptions opts;
    opts.mc = {.n_paths = 2000, .seed = 4};
    opts.per_axis = 9;
    const auto field = picard_mc(interval, OperatorKind::fractional(1.0), f, FieldMeasure::zero(1), {}, opts);
    EXPECT_GE(field.iterations, 1);
    std::ostringstream os;
    write_csv(field, os);
    EXPECT_EQ(os.str().rfind("x,mean,stderr,n\n", 0), 0u);
}

TEST(PicardMc, StiffNonlinearityStillConverges) {
    // Lipschitz 20 times the largest exit time needs the relaxed update.
    const Domain interval = Domain::interval(-1.0, 1.0);
    const auto f = builtin_nonlinearity("linear_decay", {{"rate", 20.0}, {"source", 20.0}});
    PicardMcOptions opts;
    opts.mc = {.n_paths = 10'000, .seed = 5};
    const auto field = picard_mc(interval, OperatorKind::laplacian(), f, FieldMeasure::zero(1), {}, opts);
    EXPECT_GT(field.iterations, 1);
    // u = 1 - cosh(sqrt(20) x) / cosh(sqrt(20)); node 15 is x = 0
    ASSERT_EQ(field.points[15][0], 0.0);
    const auto& e = field.estimates[15];
    EXPECT_NEAR(e.mean, 1.0 - 1.0 / std::cosh(std::sqrt(20.0)), 3.0 * e.std_error + 0.01);
}

TEST(PicardMc, RejectsUndeclaredMonotonicity) {
    const Nonlinearity f([](const Site&, double y) { return std::sin(y); }, 1.0, Monotonicity::none);
    EXPECT_THROW(picard_mc(Domain::interval(-1, 1), OperatorKind::laplacian(), f, FieldMeasure::zero(1), {}, {}),
                 HypothesisViolation);
}
