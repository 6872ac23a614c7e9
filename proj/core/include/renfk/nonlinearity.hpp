#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <string_view>

#include "renfk/domain.hpp"

namespace renfk {

/// Where a nonlinearity is evaluated: a chain state or a continuum point,
/// optionally at a time.
struct Site {
    double t = 0.0;
    std::size_t state = 0;
    Point x{};
};

enum class Monotonicity {
    none,
    /// (f(y1) - f(y2))(y1 - y2) <= 0
    dissipative,
    /// (f(y1) - f(y2))(y1 - y2) <= alpha |y1 - y2|^2
    quasi_monotone,
};

/// f(x, y) with user-declared structure. The declarations are what the
/// solvers rely on; spot_check() samples them.
class Nonlinearity {
public:
    using Fn = std::function<double(const Site&, double)>;

    Nonlinearity(Fn fn, double lipschitz, Monotonicity mono, double alpha = 0.0, std::string name = "custom");

    static Nonlinearity zero();

    double operator()(const Site& site, double y) const { return fn_(site, y); }
    double operator()(std::size_t state, double y) const { return fn_(Site{0.0, state, {}}, y); }

    double lipschitz() const noexcept { return lipschitz_; }
    Monotonicity monotonicity() const noexcept { return mono_; }
    /// Quasi-monotonicity constant; 0 for dissipative, +inf for none.
    double alpha() const noexcept;
    const std::string& name() const noexcept { return name_; }
    /// True when f does not depend on y (declared Lipschitz constant 0).
    bool constant_in_y() const noexcept { return lipschitz_ == 0.0; }

private:
    Fn fn_;
    double lipschitz_;
    Monotonicity mono_;
    double alpha_;
    std::string name_;
};

/// Sampling box for spot checks.
struct SpotCheckOptions {
    std::size_t samples = 1000;
    double y_bound = 10.0;
    std::uint64_t seed = 0;
};

/// Draws sites for spot checks.
using SiteSampler = std::function<Site(std::uint64_t draw)>;

/// Sites spread over the states {0, ..., n-1}.
SiteSampler state_sites(std::size_t n, double horizon = 0.0);

/// Randomized check of the declared monotonicity and Lipschitz bound;
/// throws HypothesisViolation on the first violating triple.
void spot_check(const Nonlinearity& f, const SiteSampler& sites, const SpotCheckOptions& opts);

/// Built-in registry used by experiment configs.
///
///   zero                           f = 0
///   linear_decay  {rate, source}   f = source - rate * y
///   saturating    {rate, source}   f = source - rate * tanh(y)
///   power_decay   {rate, power, bound, source}
///                                  f = source - rate * sign(y) |y|^power
///                                  (Lipschitz on |y| <= bound)
///   linear_growth {rate, source}   f = source + rate * y  (quasi-monotone)
///
/// Missing parameters default to rate = 1, power = 3, bound = 10, source = 0.
Nonlinearity builtin_nonlinearity(std::string_view name, const std::map<std::string, double>& params = {});

}  // namespace renfk
