#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "renfk/finite_form.hpp"
#include "renfk/mc_engine.hpp"
#include "renfk/measures.hpp"
#include "renfk/nonlinearity.hpp"

namespace renfk {

struct Sojourn {
    std::size_t state = 0;
    double duration = 0.0;
};

/// One realized chain trajectory.
struct ChainPath {
    std::vector<Sojourn> sojourns;
    /// zeta when killed, otherwise the truncation horizon
    double lifetime = 0.0;
    bool killed = false;
    /// Set when an until-death run hit the safety cap.
    bool capped = false;
    std::uint64_t seed = 0;
};

/// Safety horizon for until-death simulation of chains that may never die.
inline constexpr double until_death_cap = 1e6;

/// Exact path from `start`; with no horizon the path runs until killing
/// (capped at until_death_cap).
ChainPath simulate_path(const FiniteChainSpec& chain, std::size_t start, std::optional<double> horizon,
                        std::uint64_t seed);

/// Dump as CSV with columns state,sojourn.
void write_csv(const ChainPath& path, std::ostream& os);

/// MC estimate of E_x[ int_0^zeta f_frozen(X_t) dt + A^mu_zeta ].
Estimate feynman_kac_mc(const FiniteForm& form, const FieldVec& f_frozen, const StateMeasure& mu, std::size_t start,
                        const McOptions& mc);

struct BsdeIncrement {
    std::size_t start = 0;
    double t0 = 0.0;
    double t1 = 0.0;
    Estimate increment;  ///< E[M_t1 - M_t0]
    double z = 0.0;
};

struct BsdeReport {
    std::vector<BsdeIncrement> increments;
    /// Uniform-integrability surrogate: E|M_T| 1{|M_T| > level} at the last
    /// checkpoint, per start and truncation level.
    std::vector<double> tail_levels;
    std::vector<std::vector<double>> tail_expectations;
    double max_abs_z = 0.0;
    double threshold = 3.0;

    bool passed() const noexcept { return max_abs_z <= threshold; }
};

struct BsdeOptions {
    std::vector<double> checkpoints{0.0, 0.5, 1.0, 2.0};
    /// Start states; empty means every state.
    std::vector<std::size_t> starts;
    McOptions mc{};
    double threshold = 3.0;
};

/// Rebuilds M_t = u(X_{t^zeta}) - u(X_0) + int_0^{t^zeta} (f(X_s, u(X_s)) ds + dA^mu_s)
/// pathwise and reports the mean of each consecutive checkpoint increment.
BsdeReport bsde_residual(const FiniteForm& form, const FieldVec& u, const Nonlinearity& f, const StateMeasure& mu,
                         const BsdeOptions& opts);

nlohmann::json to_json(const BsdeReport& report);

}  // namespace renfk
