#include "renfk/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "renfk/error.hpp"
#include "renfk/trajectory.hpp"

namespace renfk {

StateMeasure::StateMeasure(Eigen::VectorXd weights) : weights_(std::move(weights)) {
    if (!weights_.allFinite()) throw InvalidInput("measure weights must be finite");
}

StateMeasure StateMeasure::zero(std::size_t n) {
    return StateMeasure(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n)));
}

StateMeasure StateMeasure::from_density(const Eigen::VectorXd& density, const Eigen::VectorXd& m) {
    if (density.size() != m.size()) throw InvalidInput("density and reference measure differ in length");
    return StateMeasure(density.cwiseProduct(m));
}

Eigen::VectorXd StateMeasure::density(const Eigen::VectorXd& m) const {
    if (m.size() != weights_.size()) throw InvalidInput("measure and reference measure differ in length");
    return weights_.cwiseQuotient(m);
}

StateMeasure StateMeasure::operator+(const StateMeasure& other) const {
    if (other.size() != size()) throw InvalidInput("measures differ in length");
    return StateMeasure(weights_ + other.weights_);
}

StateMeasure StateMeasure::operator*(double scale) const { return StateMeasure(weights_ * scale); }

FieldMeasure::FieldMeasure(int dim, DensityFn density) : dim_(dim), density_(std::move(density)) {
    if (dim < 1 || dim > 3) throw InvalidInput("measure dimension must be 1, 2 or 3");
}

FieldMeasure FieldMeasure::constant(int dim, double value) {
    return FieldMeasure(dim, [value](const Point&) { return value; });
}

FieldMeasure& FieldMeasure::add_shell(const SphereShell& shell) {
    if (!(shell.width > 0.0)) throw InvalidInput("surface components need a positive regularization width");
    if (!(shell.radius > 0.5 * shell.width)) throw InvalidInput("shell width must be below twice its radius");
    shells_.push_back(shell);
    return *this;
}

FieldMeasure& FieldMeasure::add_slab(const PlaneSlab& slab) {
    if (!(slab.width > 0.0)) throw InvalidInput("surface components need a positive regularization width");
    if (slab.axis < 0 || slab.axis >= dim_) throw InvalidInput("slab axis out of range");
    slabs_.push_back(slab);
    return *this;
}

FieldMeasure& FieldMeasure::restrict_to(std::function<bool(const Point&)> keep) {
    masks_.push_back(std::move(keep));
    return *this;
}

double FieldMeasure::min_width() const noexcept {
    double w = std::numeric_limits<double>::infinity();
    for (const auto& s : shells_) w = std::min(w, s.width);
    for (const auto& s : slabs_) w = std::min(w, s.width);
    return w;
}

double FieldMeasure::density(const Point& x) const {
    for (const auto& keep : masks_)
        if (!keep(x)) return 0.0;
    double value = density_ ? density_(x) : 0.0;
    for (const auto& s : shells_) {
        const double r = distance(x, s.center, dim_);
        const double lo = s.radius - 0.5 * s.width;
        const double hi = s.radius + 0.5 * s.width;
        if (r >= lo && r <= hi) {
            const double vol = unit_ball_volume(dim_) * (std::pow(hi, dim_) - std::pow(lo, dim_));
            value += s.mass / vol;
        }
    }
    for (const auto& s : slabs_) {
        if (std::abs(x[static_cast<std::size_t>(s.axis)] - s.offset) <= 0.5 * s.width) value += s.surface_density / s.width;
    }
    return value;
}

double tv_norm(const StateMeasure& mu) { return mu.weights().cwiseAbs().sum(); }

double tv_norm(const FieldMeasure& mu, const Domain& domain, const QuadratureOptions& opts) {
    const int d = domain.dim();
    if (mu.dim() != d) throw InvalidInput("measure and domain dimensions differ");
    std::size_t cells = opts.cells_per_axis;
    if (cells == 0) {
        static constexpr std::size_t base[] = {0, 4096, 512, 96};
        cells = base[d];
        const double w = mu.min_width();
        if (std::isfinite(w)) {
            double extent = 0.0;
            for (int k = 0; k < d; ++k) extent = std::max(extent, domain.upper()[k] - domain.lower()[k]);
            cells = std::max(cells, static_cast<std::size_t>(std::ceil(64.0 * extent / w)));
        }
    }
    const auto budget = static_cast<std::size_t>(std::floor(std::pow(static_cast<double>(opts.max_cells), 1.0 / d)));
    cells = std::max<std::size_t>(1, std::min(cells, budget));

    Point h{};
    double cell_volume = 1.0;
    for (int k = 0; k < d; ++k) {
        h[k] = (domain.upper()[k] - domain.lower()[k]) / static_cast<double>(cells);
        cell_volume *= h[k];
    }
    const std::size_t ny = d >= 2 ? cells : 1;
    const std::size_t nz = d >= 3 ? cells : 1;
    double total = 0.0;
    Point x{};
    for (std::size_t k = 0; k < nz; ++k) {
        if (d >= 3) x[2] = domain.lower()[2] + (static_cast<double>(k) + 0.5) * h[2];
        for (std::size_t j = 0; j < ny; ++j) {
            if (d >= 2) x[1] = domain.lower()[1] + (static_cast<double>(j) + 0.5) * h[1];
            for (std::size_t i = 0; i < cells; ++i) {
                x[0] = domain.lower()[0] + (static_cast<double>(i) + 0.5) * h[0];
                if (domain.contains(x)) total += std::abs(mu.density(x));
            }
        }
    }
    return total * cell_volume;
}

StateMeasure indicator_restrict(const StateMeasure& mu, const std::function<bool(std::size_t)>& keep) {
    Eigen::VectorXd w = mu.weights();
    for (Eigen::Index i = 0; i < w.size(); ++i)
        if (!keep(static_cast<std::size_t>(i))) w[i] = 0.0;
    return StateMeasure(std::move(w));
}

FieldMeasure indicator_restrict(const FieldMeasure& mu, std::function<bool(const Point&)> keep) {
    FieldMeasure out = mu;
    out.restrict_to(std::move(keep));
    return out;
}

double af_integrate(const StateMeasure& mu, const Eigen::VectorXd& m, const ChainPath& path) {
    const Eigen::VectorXd density = mu.density(m);
    AdditiveFunctional af(density);
    for (const auto& s : path.sojourns) {
        if (s.state >= mu.size()) throw InvalidInput("path visits a state outside the measure");
        af.hold(s.state, s.duration);
    }
    return af.value();
}

double af_integrate(const FieldMeasure& mu, const Domain& domain, const DiscretePath& path) {
    if (!(path.dt > 0.0)) throw InvalidInput("path time step must be positive");
    double total = 0.0;
    for (std::size_t k = 0; k + 1 < path.points.size(); ++k) {
        const Point& a = path.points[k];
        if (!domain.contains(a)) break;
        const Point& b = path.points[k + 1];
        if (domain.contains(b)) {
            total += mu.density(a) * path.dt;
            continue;
        }
        // Exit inside this step: bisect for the crossing fraction.
        double lo = 0.0;
        double hi = 1.0;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            Point p{};
            for (int c = 0; c < 3; ++c) p[c] = a[c] + mid * (b[c] - a[c]);
            (domain.contains(p) ? lo : hi) = mid;
        }
        total += mu.density(a) * lo * path.dt;
        break;
    }
    return total;
}

}  // namespace renfk
