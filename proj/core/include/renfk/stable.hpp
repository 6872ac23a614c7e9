#pragma once

#include <vector>

#include "renfk/domain.hpp"
#include "renfk/mc_engine.hpp"
#include "renfk/wos.hpp"

namespace renfk {

/// Ball exit data of the isotropic alpha-stable process with generator
/// -(-Laplacian)^{alpha/2} in R^d, started at the center of a ball.
///
/// Exit positions follow |Y| = r / sqrt(B), B ~ Beta(alpha/2, 1 - alpha/2),
/// uniform direction. Occupation points follow the normalized radial Green
/// density, tabulated once at construction from the closed-form kernel.
class StableBallKernel {
public:
    StableBallKernel(int dim, double alpha, std::size_t table_cells = 4096);

    int dim() const noexcept { return dim_; }
    double alpha() const noexcept { return alpha_; }

    /// E_0 tau of the unit ball.
    double mean_exit_time_unit() const noexcept { return mean_exit_unit_; }
    /// E_0 tau of a ball of radius r.
    double mean_exit_time(double r) const noexcept;

    /// Green function G_1(0, y) at |y| = s in (0, 1).
    double green_center(double s) const;

    /// |y| / r of an occupation point.
    double sample_occupation_radius(Rng& rng) const;
    /// |y| / r of the exit position (> 1).
    double sample_exit_radius(Rng& rng) const;

private:
    int dim_;
    double alpha_;
    double kappa_;
    double mean_exit_unit_;
    double exponent_;  // s = t^exponent_ on the table grid
    std::vector<double> table_t_;
    std::vector<double> table_cdf_;
};

/// E_x int_0^zeta g(X_t) dt for the alpha-stable process killed on leaving
/// a ball (or interval).
Estimate stable_linear(const Domain& domain, double alpha, const Point& x, const SourceFn& g, const McOptions& mc);

/// Same, reusing a prebuilt kernel.
Estimate stable_linear(const Domain& domain, const StableBallKernel& kernel, const Point& x, const SourceFn& g,
                       const McOptions& mc);

double stable_path(const Domain& domain, const StableBallKernel& kernel, const Point& x, const SourceFn& g, Rng& rng);

}  // namespace renfk
