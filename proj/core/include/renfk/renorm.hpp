#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "renfk/finite_form.hpp"
#include "renfk/measures.hpp"
#include "renfk/nonlinearity.hpp"

namespace renfk {

/// T_k u = ((-k) v u) ^ k componentwise.
FieldVec truncate(const FieldVec& u, double k);

/// The residual measure of the truncated identity:
///   nu_k({i}) = ((-L) T_k u)_i m_i - f(i, u_i) m_i - mu({i}).
/// It is the unique measure with E(T_k u, v) = <f_u m + mu + nu_k, v> for
/// every v.
StateMeasure nu_k_finite(const FiniteForm& form, const FieldVec& u, const Nonlinearity& f, const StateMeasure& mu,
                         double k);

/// n coordinate vectors plus `extra` seeded random vectors in [-1, 1]^n.
std::vector<FieldVec> default_test_basis(std::size_t n, std::uint64_t seed = 0, std::size_t extra = 10);

/// max over v of |E(T_k u, v) - <f_u m + mu + nu_k, v>| / (1 + |v|_inf).
double verify_identity(const FiniteForm& form, const FieldVec& u, const Nonlinearity& f, const StateMeasure& mu,
                       const StateMeasure& nu_k, double k, const std::vector<FieldVec>& test_basis);

struct RenormEntry {
    double k = 0.0;
    /// Weights of nu_k. For time-dependent problems the layout is
    /// time-major: index j * n + i is node j, state i.
    Eigen::VectorXd nu;
    double tv = 0.0;
    double identity_residual = 0.0;
};

struct RenormReport {
    std::vector<RenormEntry> entries;
    std::string problem_hash;
    double identity_tolerance = 1e-8;
    double zero_tolerance = 0.0;
    /// sup |u| (and sup |phi| for terminal-value problems)
    double sup_u = 0.0;

    bool identity_ok = true;
    /// tv <= zero_tolerance for every k > sup_u
    bool tail_zero_ok = true;
    /// tv nonincreasing from the last k <= sup_u onwards
    bool tail_monotone_ok = true;

    bool passed() const noexcept { return identity_ok && tail_zero_ok && tail_monotone_ok; }
    void evaluate_flags();
};

struct RenormOptions {
    double identity_tolerance = 1e-8;
    /// Solver tolerance; tv is treated as zero below
    /// 10 * solver_tolerance * max(1, m(E)).
    double solver_tolerance = 1e-10;
    std::uint64_t basis_seed = 0;
};

RenormReport tv_decay_report(const FiniteForm& form, const FieldVec& u, const Nonlinearity& f, const StateMeasure& mu,
                             const std::vector<double>& k_grid, const RenormOptions& opts = {});

nlohmann::json to_json(const RenormReport& report);
/// Columns: k,tv,identity_residual
void write_csv(const RenormReport& report, std::ostream& os);

}  // namespace renfk
