#include "renfk/nonlinearity.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "renfk/error.hpp"
#include "renfk/mc_engine.hpp"

namespace renfk {

Nonlinearity::Nonlinearity(Fn fn, double lipschitz, Monotonicity mono, double alpha, std::string name)
    : fn_(std::move(fn)), lipschitz_(lipschitz), mono_(mono), alpha_(alpha), name_(std::move(name)) {
    if (!fn_) throw InvalidInput("nonlinearity needs a callable");
    if (!(lipschitz_ >= 0.0) || !std::isfinite(lipschitz_)) throw InvalidInput("Lipschitz constant must be finite and nonnegative");
    if (mono_ == Monotonicity::dissipative) alpha_ = 0.0;
}

Nonlinearity Nonlinearity::zero() {
    return Nonlinearity([](const Site&, double) { return 0.0; }, 0.0, Monotonicity::dissipative, 0.0, "zero");
}

double Nonlinearity::alpha() const noexcept {
    switch (mono_) {
        case Monotonicity::dissipative: return 0.0;
        case Monotonicity::quasi_monotone: return alpha_;
        case Monotonicity::none: break;
    }
    return std::numeric_limits<double>::infinity();
}

SiteSampler state_sites(std::size_t n, double horizon) {
    return [n, horizon](std::uint64_t draw) {
        Site s;
        s.state = static_cast<std::size_t>(draw % n);
        if (horizon > 0.0) s.t = horizon * static_cast<double>((draw * 2654435761ULL) % 1024) / 1023.0;
        return s;
    };
}

void spot_check(const Nonlinearity& f, const SiteSampler& sites, const SpotCheckOptions& opts) {
    Rng rng = substream(opts.seed, 0x5eed);
    std::uniform_real_distribution<double> y_dist(-opts.y_bound, opts.y_bound);
    const double alpha = f.monotonicity() == Monotonicity::quasi_monotone ? f.alpha() : 0.0;
    for (std::size_t k = 0; k < opts.samples; ++k) {
        const Site site = sites(k);
        const double y1 = y_dist(rng);
        const double y2 = y_dist(rng);
        const double f1 = f(site, y1);
        const double f2 = f(site, y2);
        if (!std::isfinite(f1) || !std::isfinite(f2)) throw HypothesisViolation("nonlinearity returned a non-finite value");
        const double dy = y1 - y2;
        const double df = f1 - f2;
        const double slack = 1e-12 * (1.0 + std::abs(f1) + std::abs(f2)) * (1.0 + std::abs(dy));
        if (f.monotonicity() != Monotonicity::none && df * dy > alpha * dy * dy + slack) {
            std::ostringstream os;
            os << "nonlinearity '" << f.name() << "' violates its declared monotonicity at state " << site.state
               << ", y1=" << y1 << ", y2=" << y2;
            throw HypothesisViolation(os.str());
        }
        if (std::abs(df) > f.lipschitz() * std::abs(dy) + slack) {
            std::ostringstream os;
            os << "nonlinearity '" << f.name() << "' violates its declared Lipschitz constant " << f.lipschitz()
               << " at state " << site.state << ", y1=" << y1 << ", y2=" << y2;
            throw HypothesisViolation(os.str());
        }
    }
}

namespace {

double param(const std::map<std::string, double>& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

}  // namespace

Nonlinearity builtin_nonlinearity(std::string_view name, const std::map<std::string, double>& params) {
    const double rate = param(params, "rate", 1.0);
    const double source = param(params, "source", 0.0);
    const std::string label(name);
    if (name == "zero") return Nonlinearity::zero();
    if (name == "linear_decay") {
        if (rate < 0.0) throw InvalidInput("linear_decay needs rate >= 0");
        return Nonlinearity([rate, source](const Site&, double y) { return source - rate * y; }, rate,
                            Monotonicity::dissipative, 0.0, label);
    }
    if (name == "saturating") {
        if (rate < 0.0) throw InvalidInput("saturating needs rate >= 0");
        return Nonlinearity([rate, source](const Site&, double y) { return source - rate * std::tanh(y); }, rate,
                            Monotonicity::dissipative, 0.0, label);
    }
    if (name == "power_decay") {
        const double power = param(params, "power", 3.0);
        const double bound = param(params, "bound", 10.0);
        if (rate < 0.0 || power < 1.0 || !(bound > 0.0)) throw InvalidInput("power_decay needs rate >= 0, power >= 1, bound > 0");
        const double lip = rate * power * std::pow(bound, power - 1.0);
        return Nonlinearity(
            [rate, power, source](const Site&, double y) { return source - rate * std::copysign(std::pow(std::abs(y), power), y); },
            lip, Monotonicity::dissipative, 0.0, label);
    }
    if (name == "linear_growth") {
        if (rate < 0.0) throw InvalidInput("linear_growth needs rate >= 0");
        return Nonlinearity([rate, source](const Site&, double y) { return source + rate * y; }, rate,
                            Monotonicity::quasi_monotone, rate, label);
    }
    throw InvalidInput("unknown nonlinearity '" + label + "'");
}

}  // namespace renfk
