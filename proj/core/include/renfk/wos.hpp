#pragma once

#include <functional>

#include "renfk/domain.hpp"
#include "renfk/mc_engine.hpp"
#include "renfk/measures.hpp"

namespace renfk {

/// Bounded source term g(x) (no dependence on the solution).
using SourceFn = std::function<double(const Point&)>;

struct WosOptions {
    McOptions mc{};
    /// Absorption shell; values <= 0 select 1e-4 * domain radius.
    double eps_shell = -1.0;
};

struct WosEstimate : Estimate {
    /// x was inside the absorption shell; the estimate is exactly 0.
    bool boundary = false;
};

/// Offset from the center of the unit ball in R^d drawn from the
/// normalized Green density of -Laplacian with Dirichlet conditions, pole
/// at the center. The unnormalized mass is 1 / (2d).
Point sample_green_offset(int dim, Rng& rng);
/// Uniform point on the unit sphere in R^d (+-1 for d = 1).
Point sample_sphere_direction(int dim, Rng& rng);

/// One walk-on-spheres path value: sum over spheres of
/// r^2 / (2d) * (g + density of mu) at a Green-distributed point.
double wos_path(const Domain& domain, const Point& x, const SourceFn& g, const FieldMeasure& mu, double eps_shell,
                Rng& rng);

/// E_x[ int_0^zeta g(X_t) dt + A^mu_zeta ] for Brownian motion with
/// generator Laplacian killed at the boundary of `domain`.
WosEstimate wos_linear(const Domain& domain, const Point& x, const SourceFn& g, const FieldMeasure& mu,
                       const WosOptions& opts);

}  // namespace renfk
