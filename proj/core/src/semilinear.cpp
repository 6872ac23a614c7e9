#include "renfk/semilinear.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "renfk/error.hpp"

namespace renfk {

namespace {

FieldVec apply_f(const Nonlinearity& f, const FieldVec& u) {
    FieldVec out(u.size());
    for (Eigen::Index i = 0; i < u.size(); ++i) out[i] = f(static_cast<std::size_t>(i), u[i]);
    return out;
}

void require_sizes(const FiniteForm& form, const StateMeasure& mu) {
    if (mu.size() != form.size()) throw InvalidInput("measure has the wrong number of states");
}

}  // namespace

double equation_residual(const FiniteForm& form, const Nonlinearity& f, const StateMeasure& mu, const FieldVec& u) {
    const FieldVec r = -(form.generator() * u) - apply_f(f, u) - mu.density(form.reference());
    return r.cwiseAbs().maxCoeff();
}

SemilinearSolution solve_elliptic_finite(const FiniteForm& form, const Nonlinearity& f, const StateMeasure& mu,
                                         const SolveConfig& cfg, const std::optional<FieldVec>& initial) {
    require_sizes(form, mu);
    if (!form.transient()) throw InvalidInput("semilinear solve requires a transient form");
    if (!(cfg.tolerance > 0.0)) throw InvalidInput("tolerance must be positive");
    if (f.monotonicity() != Monotonicity::dissipative)
        throw HypothesisViolation("elliptic solve requires a dissipative (monotone nonincreasing) nonlinearity");
    const double lambda = cfg.shift < 0.0 ? f.lipschitz() : cfg.shift;
    if (lambda < f.lipschitz()) throw InvalidInput("shift must be at least the Lipschitz constant of f");

    SpotCheckOptions sc = cfg.spot_check;
    sc.seed ^= cfg.seed;
    spot_check(f, state_sites(form.size()), sc);

    const auto n = static_cast<Eigen::Index>(form.size());
    const Eigen::VectorXd source = mu.density(form.reference());
    const Eigen::MatrixXd shifted = lambda * Eigen::MatrixXd::Identity(n, n) - form.generator();
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(shifted);

    SemilinearSolution sol;
    sol.u = initial.value_or(FieldVec::Zero(n));
    if (sol.u.size() != n) throw InvalidInput("initial guess has the wrong length");

    auto residual_of = [&](const FieldVec& u, FieldVec& fu) {
        fu = apply_f(f, u);
        return (-(form.generator() * u) - fu - source).cwiseAbs().maxCoeff();
    };

    FieldVec fu;
    sol.residual = residual_of(sol.u, fu);
    sol.residual_trace.push_back(sol.residual);
    while (sol.residual > cfg.tolerance) {
        if (sol.iterations >= cfg.max_iterations) {
            std::ostringstream os;
            os << "Picard iteration did not converge in " << cfg.max_iterations << " iterations (residual "
               << sol.residual << ")";
            throw NotConverged(os.str(), sol.residual_trace);
        }
        sol.u = lu.solve(fu + lambda * sol.u + source);
        if (!sol.u.allFinite()) throw NotConverged("Picard iterate became non-finite", sol.residual_trace);
        ++sol.iterations;
        sol.residual = residual_of(sol.u, fu);
        sol.residual_trace.push_back(sol.residual);
    }
    return sol;
}

ComparisonReport comparison_check(const FiniteForm& form, const Nonlinearity& f1, const StateMeasure& mu1,
                                  const Nonlinearity& f2, const StateMeasure& mu2, const SolveConfig& cfg) {
    ComparisonReport report;
    require_sizes(form, mu1);
    require_sizes(form, mu2);
    if ((mu1.weights().array() > mu2.weights().array()).any()) {
        report.reason = "mu1 <= mu2 fails";
        return report;
    }
    const auto s1 = solve_elliptic_finite(form, f1, mu1, cfg);
    const auto s2 = solve_elliptic_finite(form, f2, mu2, cfg);
    report.u1 = s1.u;
    report.u2 = s2.u;

    auto ordered_at = [&](const FieldVec& u) {
        for (Eigen::Index i = 0; i < u.size(); ++i) {
            const auto st = static_cast<std::size_t>(i);
            if (f1(st, u[i]) > f2(st, u[i]) + 1e-12 * (1.0 + std::abs(f2(st, u[i])))) return false;
        }
        return true;
    };
    const bool first = f2.monotonicity() == Monotonicity::dissipative && ordered_at(s1.u);
    const bool second = f1.monotonicity() == Monotonicity::dissipative && ordered_at(s2.u);
    if (!first && !second) {
        report.reason = "neither f1(., u1) <= f2(., u1) with f2 monotone nor f1(., u2) <= f2(., u2) with f1 monotone";
        return report;
    }

    const FieldVec excess = s1.u - s2.u;
    report.max_excess = excess.maxCoeff();
    // Each solution carries residual <= tol; the solution error is bounded by
    // tol * |G1|_inf, so allow that much before calling it a counterexample.
    const FieldVec g1 = form.solve_potential_system(FieldVec::Ones(excess.size()));
    const double slack = 2.0 * cfg.tolerance * std::max(1.0, g1.maxCoeff());
    report.verdict = ComparisonVerdict::holds;
    for (Eigen::Index i = 0; i < excess.size(); ++i) {
        if (excess[i] > slack) {
            report.verdict = ComparisonVerdict::counterexample;
            report.witness = static_cast<std::size_t>(i);
            std::ostringstream os;
            os << "u1 exceeds u2 by " << excess[i] << " at state " << i;
            report.reason = os.str();
            break;
        }
    }
    return report;
}

UniquenessReport uniqueness_probe(const FiniteForm& form, const Nonlinearity& f, const StateMeasure& mu,
                                  const SolveConfig& cfg, const std::vector<FieldVec>& starts) {
    if (f.monotonicity() != Monotonicity::dissipative) throw HypothesisViolation("uniqueness probe requires a dissipative f");
    UniquenessReport report;
    // A residual of r bounds the solution error by r * |G1|_inf, so tighten
    // the residual target until it certifies the solution to `tolerance`.
    SolveConfig tight = cfg;
    const FieldVec g1 = form.solve_potential_system(FieldVec::Ones(static_cast<Eigen::Index>(form.size())));
    tight.tolerance = cfg.tolerance / std::max(1.0, g1.maxCoeff());
    for (const auto& start : starts) report.solutions.push_back(solve_elliptic_finite(form, f, mu, tight, start).u);
    for (std::size_t a = 0; a < report.solutions.size(); ++a)
        for (std::size_t b = a + 1; b < report.solutions.size(); ++b)
            report.max_pairwise_distance = std::max(
                report.max_pairwise_distance, (report.solutions[a] - report.solutions[b]).cwiseAbs().maxCoeff());
    report.agree = report.max_pairwise_distance <= 10.0 * cfg.tolerance;
    return report;
}

}  // namespace renfk
