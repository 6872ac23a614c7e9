#include "renfk/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "renfk/chain_sampler.hpp"
#include "renfk/error.hpp"
#include "renfk/format.hpp"

namespace renfk {

ChainPath simulate_path(const FiniteChainSpec& chain, std::size_t start, std::optional<double> horizon,
                        std::uint64_t seed) {
    const ChainSampler sampler(chain);
    if (start >= sampler.size()) throw InvalidInput("start state out of range");
    const double limit = horizon.value_or(until_death_cap);
    if (!(limit >= 0.0)) throw InvalidInput("horizon must be nonnegative");
    Rng rng = substream(seed, 0);
    ChainPath path;
    path.seed = seed;
    const auto end = sampler.walk(start, limit, rng, [&](std::size_t state, double, double duration) {
        path.sojourns.push_back({state, duration});
    });
    path.killed = end.killed;
    path.lifetime = end.time;
    path.capped = !horizon.has_value() && !end.killed;
    return path;
}

void write_csv(const ChainPath& path, std::ostream& os) {
    os << "state,sojourn\n";
    for (const auto& s : path.sojourns) os << s.state << ',' << format_double(s.duration) << '\n';
}

Estimate feynman_kac_mc(const FiniteForm& form, const FieldVec& f_frozen, const StateMeasure& mu, std::size_t start,
                        const McOptions& mc) {
    if (!form.transient()) throw InvalidInput("Feynman-Kac estimate requires a transient chain");
    if (start >= form.size()) throw InvalidInput("start state out of range");
    if (f_frozen.size() != static_cast<Eigen::Index>(form.size()) || mu.size() != form.size())
        throw InvalidInput("frozen nonlinearity or measure has the wrong length");
    const ChainSampler sampler(form.spec());
    const Eigen::VectorXd rate = f_frozen + mu.density(form.reference());
    return run_paths(mc, [&](Rng& rng) {
        AdditiveFunctional af(rate);
        sampler.walk(start, std::numeric_limits<double>::infinity(), rng,
                     [&](std::size_t state, double, double duration) { af.hold(state, duration); });
        return af.value();
    });
}

BsdeReport bsde_residual(const FiniteForm& form, const FieldVec& u, const Nonlinearity& f, const StateMeasure& mu,
                         const BsdeOptions& opts) {
    const auto n = form.size();
    if (u.size() != static_cast<Eigen::Index>(n) || mu.size() != n) throw InvalidInput("solution or measure has the wrong length");
    std::vector<double> cps = opts.checkpoints;
    if (cps.size() < 2 || !std::is_sorted(cps.begin(), cps.end()) || cps.front() < 0.0)
        throw InvalidInput("need at least two increasing nonnegative checkpoints");
    std::vector<std::size_t> starts = opts.starts;
    if (starts.empty())
        for (std::size_t i = 0; i < n; ++i) starts.push_back(i);

    const ChainSampler sampler(form.spec());
    Eigen::VectorXd rate = mu.density(form.reference());
    for (Eigen::Index i = 0; i < rate.size(); ++i) rate[i] += f(static_cast<std::size_t>(i), u[i]);

    BsdeReport report;
    report.threshold = opts.threshold;
    const double scale = std::max(1.0, u.cwiseAbs().maxCoeff());
    report.tail_levels = {scale, 2.0 * scale, 4.0 * scale, 8.0 * scale};
    const std::size_t pairs = cps.size() - 1;
    const std::size_t width = pairs + report.tail_levels.size();
    const double horizon = cps.back();

    for (std::size_t s_idx = 0; s_idx < starts.size(); ++s_idx) {
        const std::size_t start = starts[s_idx];
        if (start >= n) throw InvalidInput("start state out of range");
        McOptions mc = opts.mc;
        mc.seed = opts.mc.seed + 0x100000001ULL * s_idx;
        const double u0 = u[static_cast<Eigen::Index>(start)];
        const auto est = run_paths(mc, width, [&](Rng& rng, std::span<double> out) {
            std::vector<double> m_at(cps.size());
            double integral = 0.0;
            std::size_t next = 0;
            const auto end = sampler.walk(start, horizon, rng, [&](std::size_t state, double begin, double duration) {
                const auto si = static_cast<Eigen::Index>(state);
                while (next < cps.size() && cps[next] < begin + duration) {
                    m_at[next] = u[si] - u0 + integral + rate[si] * (cps[next] - begin);
                    ++next;
                }
                integral += rate[si] * duration;
            });
            const double u_end = end.killed ? 0.0 : u[static_cast<Eigen::Index>(end.state)];
            for (; next < cps.size(); ++next) m_at[next] = u_end - u0 + integral;
            for (std::size_t p = 0; p < pairs; ++p) out[p] = m_at[p + 1] - m_at[p];
            const double last = std::abs(m_at.back());
            for (std::size_t l = 0; l < report.tail_levels.size(); ++l)
                out[pairs + l] = last > report.tail_levels[l] ? last : 0.0;
        });
        for (std::size_t p = 0; p < pairs; ++p) {
            BsdeIncrement inc;
            inc.start = start;
            inc.t0 = cps[p];
            inc.t1 = cps[p + 1];
            inc.increment = est[p];
            inc.z = z_score(est[p].mean, 0.0, est[p].std_error);
            report.max_abs_z = std::max(report.max_abs_z, inc.z);
            report.increments.push_back(inc);
        }
        std::vector<double> tails;
        for (std::size_t l = 0; l < report.tail_levels.size(); ++l) tails.push_back(est[pairs + l].mean);
        report.tail_expectations.push_back(std::move(tails));
    }
    return report;
}

nlohmann::json to_json(const BsdeReport& report) {
    nlohmann::json j;
    j["threshold"] = report.threshold;
    j["max_abs_z"] = report.max_abs_z;
    j["passed"] = report.passed();
    auto& incs = j["increments"] = nlohmann::json::array();
    for (const auto& i : report.increments) {
        incs.push_back({{"start", i.start},
                        {"t0", i.t0},
                        {"t1", i.t1},
                        {"mean", i.increment.mean},
                        {"stderr", i.increment.std_error},
                        {"n", i.increment.n_paths},
                        {"z", i.z}});
    }
    j["tail_levels"] = report.tail_levels;
    j["tail_expectations"] = report.tail_expectations;
    return j;
}

}  // namespace renfk
