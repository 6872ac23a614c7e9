#pragma once

#include <cstdint>

#include <nlohmann/json.hpp>

#include "renfk/finite_form.hpp"
#include "renfk/mc_engine.hpp"
#include "renfk/measures.hpp"

namespace renfk {

struct RevuzReport {
    Estimate estimate;          ///< (1/t) E_m int_0^t dA^mu_s
    double target = 0.0;        ///< mu(E)
    double horizon_value = 0.0; ///< the same expectation computed exactly at this t
    double horizon = 0.0;
    double z_target = 0.0;
    double z_horizon = 0.0;

    bool within_target(double sigmas = 3.0) const noexcept { return z_target <= sigmas; }
    bool within_horizon_value(double sigmas = 3.0) const noexcept { return z_horizon <= sigmas; }
};

/// Small-time Monte Carlo check of the Revuz correspondence with f = 1:
/// starts are drawn from m / m(E), so the estimator is
/// m(E) / t * mean(A_t). The exact finite-horizon value is computed from the
/// matrix exponential for comparison; it differs from mu(E) by O(t).
/// Requires mu >= 0 and n_paths >= 100.
RevuzReport revuz_check_finite(const FiniteForm& form, const StateMeasure& mu, double horizon, const McOptions& mc);

/// (1/t) int_0^t <m, e^{sL} g> ds via an augmented matrix exponential.
double revuz_horizon_value(const FiniteForm& form, const StateMeasure& mu, double horizon);

nlohmann::json to_json(const RevuzReport& report);

}  // namespace renfk
