#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

namespace renfk {

/// Function on the state space {0, ..., n-1}.
using FieldVec = Eigen::VectorXd;

class StateMeasure;

/// Killed continuous-time Markov chain on n states.
///
/// `L` is the generator: off-diagonal entries are jump rates, row sums are
/// nonpositive and the row-sum deficit is the killing rate of that state.
/// The cemetery state is implicit, so functions vanish there automatically.
struct FiniteChainSpec {
    Eigen::VectorXd m;  ///< reference measure, strictly positive
    Eigen::MatrixXd L;

    std::size_t size() const noexcept { return static_cast<std::size_t>(m.size()); }
};

/// Throws InvalidInput naming the first offending entry.
void validate(const FiniteChainSpec& spec);

/// Killing rate -sum_j L_ij per state (clamped at zero against roundoff).
Eigen::VectorXd killing_rates(const Eigen::MatrixXd& L);

/// Dirichlet form E(u, v) = -<Lu, v>_m of a finite chain.
///
/// Immutable after construction. The factorization of -L is computed once
/// when the chain is transient and reused by potential().
class FiniteForm {
public:
    explicit FiniteForm(FiniteChainSpec spec);

    const FiniteChainSpec& spec() const noexcept { return spec_; }
    const Eigen::MatrixXd& generator() const noexcept { return spec_.L; }
    const Eigen::VectorXd& reference() const noexcept { return spec_.m; }
    std::size_t size() const noexcept { return spec_.size(); }

    /// <a, b>_m
    double inner(const FieldVec& a, const FieldVec& b) const;
    double energy(const FieldVec& u, const FieldVec& v) const;
    /// E_alpha(u, v) = E(u, v) + alpha <u, v>_m
    double energy(double alpha, const FieldVec& u, const FieldVec& v) const;

    bool transient() const noexcept { return transient_; }

    /// Solves (-L) x = b; requires a transient form.
    FieldVec solve_potential_system(const FieldVec& b) const;

private:
    FiniteChainSpec spec_;
    bool transient_ = false;
    std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>> minus_l_lu_;
};

FiniteForm assemble_form(FiniteChainSpec spec);

/// True iff G1 = (-L)^{-1} 1 is finite and nonnegative, i.e. every state is
/// eventually killed.
bool check_transience(const FiniteForm& form);

/// G_alpha f: the solution of (alpha - L) u = f.
FieldVec resolvent_apply(const FiniteForm& form, double alpha, const FieldVec& f);

/// R_alpha mu = G_alpha (dmu/dm).
FieldVec resolvent_apply(const FiniteForm& form, double alpha, const StateMeasure& mu);

/// R mu: the solution of -L u = dmu/dm. Throws InvalidInput ("potential
/// undefined") when the form is not transient.
FieldVec potential(const FiniteForm& form, const StateMeasure& mu);

}  // namespace renfk
