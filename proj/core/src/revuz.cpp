#include "renfk/revuz.hpp"

#include <algorithm>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "renfk/chain_sampler.hpp"
#include "renfk/error.hpp"

namespace renfk {

double revuz_horizon_value(const FiniteForm& form, const StateMeasure& mu, double horizon) {
    const auto n = static_cast<Eigen::Index>(form.size());
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = form.generator();
    aug.topRightCorner(n, 1) = mu.density(form.reference());
    const Eigen::MatrixXd e = (aug * horizon).exp();
    const Eigen::VectorXd integral = e.topRightCorner(n, 1);
    return form.reference().dot(integral) / horizon;
}

RevuzReport revuz_check_finite(const FiniteForm& form, const StateMeasure& mu, double horizon, const McOptions& mc) {
    if (mc.n_paths < 100) throw InvalidInput("revuz check needs at least 100 paths");
    if (!(horizon > 0.0)) throw InvalidInput("horizon must be positive");
    if (mu.size() != form.size()) throw InvalidInput("measure has the wrong number of states");
    if (!mu.nonnegative()) throw InvalidInput("revuz check requires a nonnegative measure");

    const ChainSampler sampler(form.spec());
    const Eigen::VectorXd density = mu.density(form.reference());
    const double mass = form.reference().sum();
    std::vector<double> cumulative(form.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < form.size(); ++i) {
        acc += form.reference()[static_cast<Eigen::Index>(i)] / mass;
        cumulative[i] = acc;
    }
    cumulative.back() = 1.0;

    RevuzReport report;
    report.horizon = horizon;
    report.target = mu.total();
    if (mu.weights().isZero(0.0)) {
        report.estimate = Estimate{0.0, 0.0, mc.n_paths, mc.seed};
        return report;
    }
    const Estimate raw = run_paths(mc, [&](Rng& rng) {
        const double u = uniform01(rng);
        const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        const auto start = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative.begin()), form.size() - 1);
        AdditiveFunctional af(density);
        sampler.walk(start, horizon, rng, [&](std::size_t state, double, double duration) { af.hold(state, duration); });
        return af.value();
    });
    const double scale = mass / horizon;
    report.estimate = raw;
    report.estimate.mean = raw.mean * scale;
    report.estimate.std_error = raw.std_error * scale;
    report.horizon_value = revuz_horizon_value(form, mu, horizon);
    report.z_target = z_score(report.estimate.mean, report.target, report.estimate.std_error);
    report.z_horizon = z_score(report.estimate.mean, report.horizon_value, report.estimate.std_error);
    return report;
}

nlohmann::json to_json(const RevuzReport& report) {
    return {{"estimate", report.estimate.mean},
            {"stderr", report.estimate.std_error},
            {"n", report.estimate.n_paths},
            {"seed", report.estimate.seed},
            {"horizon", report.horizon},
            {"target_mu_E", report.target},
            {"horizon_value", report.horizon_value},
            {"z_target", report.z_target},
            {"z_horizon", report.z_horizon}};
}

}  // namespace renfk
