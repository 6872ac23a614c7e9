#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "renfk/domain.hpp"

namespace renfk {

struct ChainPath;

/// Signed finite measure on the states of a finite chain, stored as raw
/// weights mu({i}). Densities against m are computed on demand.
class StateMeasure {
public:
    StateMeasure() = default;
    explicit StateMeasure(Eigen::VectorXd weights);

    static StateMeasure zero(std::size_t n);
    /// The measure with density `density` against `m`.
    static StateMeasure from_density(const Eigen::VectorXd& density, const Eigen::VectorXd& m);

    const Eigen::VectorXd& weights() const noexcept { return weights_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(weights_.size()); }

    /// dmu/dm
    Eigen::VectorXd density(const Eigen::VectorXd& m) const;
    /// mu(E)
    double total() const { return weights_.sum(); }
    bool nonnegative() const { return (weights_.array() >= 0.0).all(); }

    StateMeasure operator+(const StateMeasure& other) const;
    StateMeasure operator*(double scale) const;

private:
    Eigen::VectorXd weights_;
};

/// Uniform mass spread over the shell {r - w/2 <= |x - c| <= r + w/2}; the
/// smooth stand-in for a surface measure on the sphere |x - c| = r.
struct SphereShell {
    Point center{};
    double radius = 0.0;
    double mass = 0.0;
    double width = 0.0;
};

/// Slab {|x_axis - offset| <= w/2} carrying `surface_density / w`; the smooth
/// stand-in for a surface measure on a coordinate hyperplane.
struct PlaneSlab {
    int axis = 0;
    double offset = 0.0;
    double surface_density = 0.0;
    double width = 0.0;
};

/// Signed measure on R^d given by a bounded density plus regularized
/// surface components. All parts are densities, so every such measure is
/// smooth and its additive functional is an occupation integral.
class FieldMeasure {
public:
    using DensityFn = std::function<double(const Point&)>;

    explicit FieldMeasure(int dim, DensityFn density = {});

    static FieldMeasure zero(int dim) { return FieldMeasure(dim); }
    static FieldMeasure constant(int dim, double value);

    FieldMeasure& add_shell(const SphereShell& shell);
    FieldMeasure& add_slab(const PlaneSlab& slab);
    /// Zeroes the measure outside {x : keep(x)}.
    FieldMeasure& restrict_to(std::function<bool(const Point&)> keep);

    int dim() const noexcept { return dim_; }
    bool empty() const noexcept { return !density_ && shells_.empty() && slabs_.empty(); }
    const std::vector<SphereShell>& shells() const noexcept { return shells_; }
    const std::vector<PlaneSlab>& slabs() const noexcept { return slabs_; }
    /// Smallest regularization width, or +inf without surface parts.
    double min_width() const noexcept;

    double density(const Point& x) const;

private:
    int dim_;
    DensityFn density_;
    std::vector<SphereShell> shells_;
    std::vector<PlaneSlab> slabs_;
    std::vector<std::function<bool(const Point&)>> masks_;
};

struct QuadratureOptions {
    /// Cells per axis; 0 selects a default resolving the thinnest shell.
    std::size_t cells_per_axis = 0;
    /// Upper bound on the total number of cells.
    std::size_t max_cells = 20'000'000;
};

double tv_norm(const StateMeasure& mu);
/// Midpoint-rule integral of |density| over the domain.
double tv_norm(const FieldMeasure& mu, const Domain& domain, const QuadratureOptions& opts = {});

StateMeasure indicator_restrict(const StateMeasure& mu, const std::function<bool(std::size_t)>& keep);
FieldMeasure indicator_restrict(const FieldMeasure& mu, std::function<bool(const Point&)> keep);

/// Additive functional of a density-driven measure, accumulated along one
/// trajectory. Single owner per path.
class AdditiveFunctional {
public:
    /// `density` is dmu/dm indexed by state; it must outlive the accumulator.
    explicit AdditiveFunctional(const Eigen::VectorXd& density) : density_(&density) {}

    void hold(std::size_t state, double duration) { value_ += (*density_)[static_cast<Eigen::Index>(state)] * duration; }
    double value() const noexcept { return value_; }
    void reset() noexcept { value_ = 0.0; }

private:
    const Eigen::VectorXd* density_;
    double value_ = 0.0;
};

/// Piecewise-linear trajectory sampled at a fixed time step.
struct DiscretePath {
    std::vector<Point> points;
    double dt = 0.0;
};

/// A_zeta along a chain path: sum over sojourns of (w_i / m_i) * duration.
double af_integrate(const StateMeasure& mu, const Eigen::VectorXd& m, const ChainPath& path);

/// Left-point time quadrature of the density along `path`, stopped at the
/// first exit from `domain` (the exit step contributes the fraction of dt
/// spent inside).
double af_integrate(const FieldMeasure& mu, const Domain& domain, const DiscretePath& path);

}  // namespace renfk
