#include "renfk/stable.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "renfk/error.hpp"

namespace renfk {

namespace {

using boost::math::quadrature::gauss_kronrod;

/// int_0^X s^{a-1} (1 + s)^{-d/2} ds, i.e. the incomplete beta B_z(a, b) at
/// z = X / (1 + X) with b = d/2 - a.
double riesz_integral(double X, double a, int d) {
    if (X <= 0.0) return 0.0;
    const double b = 0.5 * d - a;
    const double z = X / (1.0 + X);
    if (b > 0.0) return boost::math::beta(a, b, z);
    if (b == 0.0) return 2.0 * std::asinh(std::sqrt(X));  // d = 1, alpha = 1
    // b in (-1/2, 0): continue B_z(a, b) = ((a + b) B_z(a, b + 1) - z^a (1 - z)^b) / b.
    // 1 - z is formed as 1 / (1 + X) so large X keeps its precision.
    return ((a + b) * boost::math::beta(a, b + 1.0, z) - std::pow(z, a) * std::pow(1.0 + X, -b)) / b;
}

}  // namespace

StableBallKernel::StableBallKernel(int dim, double alpha, std::size_t table_cells) : dim_(dim), alpha_(alpha) {
    if (dim < 1 || dim > 3) throw InvalidInput("dimension must be 1, 2 or 3");
    if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidInput("stable index alpha must lie in (0, 2)");
    if (table_cells < 16) throw InvalidInput("table needs at least 16 cells");
    const double d = dim;
    kappa_ = std::tgamma(0.5 * d) /
             (std::pow(2.0, alpha) * std::pow(std::numbers::pi, 0.5 * d) * std::pow(std::tgamma(0.5 * alpha), 2));
    mean_exit_unit_ = std::tgamma(0.5 * d) /
                      (std::pow(2.0, alpha) * std::tgamma(1.0 + 0.5 * alpha) * std::tgamma(0.5 * (d + alpha)));
    exponent_ = dim == 1 ? (alpha < 1.0 ? 1.0 / alpha : 2.0) : 1.0 / alpha;

    const double area = unit_sphere_area(dim);
    auto density_t = [&](double t) {
        if (t <= 0.0 || t >= 1.0) return 0.0;
        const double s = std::pow(t, exponent_);
        const double ds = exponent_ * std::pow(t, exponent_ - 1.0);
        return area * std::pow(s, d - 1.0) * green_center(s) * ds;
    };
    table_t_.resize(table_cells + 1);
    table_cdf_.resize(table_cells + 1);
    table_cdf_[0] = 0.0;
    for (std::size_t c = 0; c <= table_cells; ++c) table_t_[c] = static_cast<double>(c) / static_cast<double>(table_cells);
    for (std::size_t c = 0; c < table_cells; ++c) {
        const double piece = gauss_kronrod<double, 15>::integrate(density_t, table_t_[c], table_t_[c + 1], 2, 1e-9);
        table_cdf_[c + 1] = table_cdf_[c] + piece;
    }
}

double StableBallKernel::mean_exit_time(double r) const noexcept { return mean_exit_unit_ * std::pow(r, alpha_); }

double StableBallKernel::green_center(double s) const {
    if (!(s > 0.0) || s >= 1.0) return 0.0;
    const double X = (1.0 - s * s) / (s * s);
    return kappa_ * std::pow(s, alpha_ - dim_) * riesz_integral(X, 0.5 * alpha_, dim_);
}

double StableBallKernel::sample_occupation_radius(Rng& rng) const {
    const double target = uniform01(rng) * table_cdf_.back();
    auto it = std::upper_bound(table_cdf_.begin(), table_cdf_.end(), target);
    std::size_t c = it == table_cdf_.begin() ? 0 : static_cast<std::size_t>(it - table_cdf_.begin()) - 1;
    c = std::min(c, table_cdf_.size() - 2);
    const double width = table_cdf_[c + 1] - table_cdf_[c];
    const double frac = width > 0.0 ? (target - table_cdf_[c]) / width : 0.5;
    const double t = table_t_[c] + frac * (table_t_[c + 1] - table_t_[c]);
    return std::pow(t, exponent_);
}

double StableBallKernel::sample_exit_radius(Rng& rng) const {
    std::gamma_distribution<double> ga(0.5 * alpha_, 1.0);
    std::gamma_distribution<double> gb(1.0 - 0.5 * alpha_, 1.0);
    double b = 0.0;
    do {
        const double x = ga(rng);
        const double y = gb(rng);
        b = x / (x + y);
    } while (!(b > 0.0 && b < 1.0));
    return 1.0 / std::sqrt(b);
}

double stable_path(const Domain& domain, const StableBallKernel& kernel, const Point& x0, const SourceFn& g, Rng& rng) {
    const int d = domain.dim();
    Point x = x0;
    double value = 0.0;
    for (std::size_t step = 0; step < 10'000'000; ++step) {
        const double r = domain.distance_to_boundary(x);
        if (!(r > 0.0)) break;
        if (g) {
            const double s = kernel.sample_occupation_radius(rng);
            const Point dir = sample_sphere_direction(d, rng);
            Point y{};
            for (int k = 0; k < d; ++k) y[k] = x[k] + r * s * dir[k];
            value += kernel.mean_exit_time(r) * g(y);
        }
        const double rho = kernel.sample_exit_radius(rng);
        const Point dir = sample_sphere_direction(d, rng);
        for (int k = 0; k < d; ++k) x[k] += r * rho * dir[k];
        if (!domain.contains(x)) break;
    }
    return value;
}

Estimate stable_linear(const Domain& domain, const StableBallKernel& kernel, const Point& x, const SourceFn& g,
                       const McOptions& mc) {
    if (!domain.is_round()) throw Unsupported("the stable solver supports balls and intervals only");
    if (kernel.dim() != domain.dim()) throw InvalidInput("kernel and domain dimensions differ");
    if (!domain.contains(x)) throw InvalidInput("evaluation point lies outside the domain");
    if (!g) return Estimate{0.0, 0.0, mc.n_paths, mc.seed};
    return run_paths(mc, [&](Rng& rng) { return stable_path(domain, kernel, x, g, rng); });
}

Estimate stable_linear(const Domain& domain, double alpha, const Point& x, const SourceFn& g, const McOptions& mc) {
    if (!domain.is_round()) throw Unsupported("the stable solver supports balls and intervals only");
    const StableBallKernel kernel(domain.dim(), alpha);
    return stable_linear(domain, kernel, x, g, mc);
}

}  // namespace renfk
