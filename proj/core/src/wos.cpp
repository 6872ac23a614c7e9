#include "renfk/wos.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "renfk/error.hpp"

namespace renfk {

Point sample_sphere_direction(int dim, Rng& rng) {
    Point p{};
    switch (dim) {
        case 1:
            p[0] = uniform01(rng) < 0.5 ? -1.0 : 1.0;
            break;
        case 2: {
            const double phi = 2.0 * std::numbers::pi * uniform01(rng);
            p[0] = std::cos(phi);
            p[1] = std::sin(phi);
            break;
        }
        default: {
            const double z = 2.0 * uniform01(rng) - 1.0;
            const double phi = 2.0 * std::numbers::pi * uniform01(rng);
            const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
            p[0] = rho * std::cos(phi);
            p[1] = rho * std::sin(phi);
            p[2] = z;
            break;
        }
    }
    return p;
}

Point sample_green_offset(int dim, Rng& rng) {
    double s = 0.0;
    switch (dim) {
        case 1:  // density 2(1 - s)
            s = 1.0 - std::sqrt(uniform01(rng));
            break;
        case 2:  // density 4 s log(1/s): square root of a product of two uniforms
            s = std::sqrt(uniform01(rng) * uniform01(rng));
            break;
        default: {  // density 6 s (1 - s): median of three uniforms
            double a = uniform01(rng), b = uniform01(rng), c = uniform01(rng);
            s = std::max(std::min(a, b), std::min(std::max(a, b), c));
            break;
        }
    }
    Point dir = sample_sphere_direction(dim, rng);
    for (auto& c : dir) c *= s;
    return dir;
}

double wos_path(const Domain& domain, const Point& x0, const SourceFn& g, const FieldMeasure& mu, double eps_shell,
                Rng& rng) {
    const int d = domain.dim();
    const bool has_mu = !mu.empty();
    const double occupation = 1.0 / (2.0 * d);
    Point x = x0;
    double value = 0.0;
    while (true) {
        const double r = domain.distance_to_boundary(x);
        if (r < eps_shell) break;
        const Point off = sample_green_offset(d, rng);
        Point y{};
        for (int k = 0; k < d; ++k) y[k] = x[k] + r * off[k];
        double src = g ? g(y) : 0.0;
        if (has_mu) src += mu.density(y);
        value += r * r * occupation * src;
        const Point dir = sample_sphere_direction(d, rng);
        for (int k = 0; k < d; ++k) x[k] += r * dir[k];
    }
    return value;
}

WosEstimate wos_linear(const Domain& domain, const Point& x, const SourceFn& g, const FieldMeasure& mu,
                       const WosOptions& opts) {
    if (!mu.empty() && mu.dim() != domain.dim()) throw InvalidInput("measure and domain dimensions differ");
    if (!domain.contains(x)) throw InvalidInput("evaluation point lies outside the domain");
    const double eps = opts.eps_shell > 0.0 ? opts.eps_shell : 1e-4 * domain.radius();
    WosEstimate out;
    out.seed = opts.mc.seed;
    out.n_paths = opts.mc.n_paths;
    if (domain.distance_to_boundary(x) < eps) {
        out.boundary = true;
        return out;
    }
    if (!g && mu.empty()) return out;
    const Estimate e = run_paths(opts.mc, [&](Rng& rng) { return wos_path(domain, x, g, mu, eps, rng); });
    static_cast<Estimate&>(out) = e;
    return out;
}

}  // namespace renfk
