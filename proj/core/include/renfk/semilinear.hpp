#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "renfk/finite_form.hpp"
#include "renfk/measures.hpp"
#include "renfk/nonlinearity.hpp"

namespace renfk {

struct SolveConfig {
    /// Shift lambda of the Picard map; negative selects the declared
    /// Lipschitz constant of f.
    double shift = -1.0;
    double tolerance = 1e-10;
    int max_iterations = 10'000;
    std::uint64_t seed = 0;
    SpotCheckOptions spot_check{};
};

struct SemilinearSolution {
    FieldVec u;
    int iterations = 0;
    /// sup-norm of (-L)u - f(., u) - dmu/dm
    double residual = 0.0;
    std::vector<double> residual_trace;
};

/// sup-norm of (-L)u - f(., u) - dmu/dm.
double equation_residual(const FiniteForm& form, const Nonlinearity& f, const StateMeasure& mu, const FieldVec& u);

/// Solves -Lu = f(., u) + mu on a transient finite chain by the shifted
/// Picard iteration u <- (lambda - L)^{-1}(f(., u) + lambda u + dmu/dm).
/// Starts from zero unless `initial` is given; stops on the equation
/// residual.
SemilinearSolution solve_elliptic_finite(const FiniteForm& form, const Nonlinearity& f, const StateMeasure& mu,
                                         const SolveConfig& cfg, const std::optional<FieldVec>& initial = {});

enum class ComparisonVerdict { holds, counterexample, inapplicable };

struct ComparisonReport {
    ComparisonVerdict verdict = ComparisonVerdict::inapplicable;
    /// First state with u1 > u2 + tolerance (counterexample only).
    std::optional<std::size_t> witness;
    double max_excess = 0.0;  ///< max_i (u1 - u2)_i
    FieldVec u1;
    FieldVec u2;
    std::string reason;

    bool holds() const noexcept { return verdict == ComparisonVerdict::holds; }
};

/// Solves both problems and checks u1 <= u2. Applicable when mu1 <= mu2 and
/// either f1(., u1) <= f2(., u1) with f2 dissipative, or f1(., u2) <= f2(., u2)
/// with f1 dissipative.
ComparisonReport comparison_check(const FiniteForm& form, const Nonlinearity& f1, const StateMeasure& mu1,
                                  const Nonlinearity& f2, const StateMeasure& mu2, const SolveConfig& cfg);

struct UniquenessReport {
    std::vector<FieldVec> solutions;
    double max_pairwise_distance = 0.0;
    bool agree = true;
};

/// Runs the solver from every start and checks all solutions agree within
/// 10 * tolerance. Requires a dissipative f.
UniquenessReport uniqueness_probe(const FiniteForm& form, const Nonlinearity& f, const StateMeasure& mu,
                                  const SolveConfig& cfg, const std::vector<FieldVec>& starts);

}  // namespace renfk
