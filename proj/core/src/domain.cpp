#include "renfk/domain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "renfk/error.hpp"

namespace renfk {

namespace {

void check_dim(int dim) {
    if (dim < 1 || dim > 3) throw InvalidInput("dimension must be 1, 2 or 3");
}

}  // namespace

Domain Domain::ball(int dim, const Point& center, double radius) {
    check_dim(dim);
    if (!(radius > 0.0)) throw InvalidInput("ball radius must be positive");
    Domain d;
    d.kind_ = DomainKind::ball;
    d.dim_ = dim;
    d.center_ = center;
    d.radius_ = radius;
    for (int k = 0; k < 3; ++k) {
        d.lo_[k] = k < dim ? center[k] - radius : 0.0;
        d.hi_[k] = k < dim ? center[k] + radius : 0.0;
    }
    return d;
}

Domain Domain::box(int dim, const Point& lo, const Point& hi) {
    check_dim(dim);
    Domain d;
    d.kind_ = DomainKind::box;
    d.dim_ = dim;
    d.radius_ = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 3; ++k) {
        if (k < dim && !(hi[k] > lo[k])) throw InvalidInput("box extents must be positive");
        d.lo_[k] = k < dim ? lo[k] : 0.0;
        d.hi_[k] = k < dim ? hi[k] : 0.0;
        d.center_[k] = 0.5 * (d.lo_[k] + d.hi_[k]);
        if (k < dim) d.radius_ = std::min(d.radius_, 0.5 * (hi[k] - lo[k]));
    }
    return d;
}

Domain Domain::interval(double lo, double hi) {
    if (!(hi > lo)) throw InvalidInput("interval must have lo < hi");
    Domain d = ball(1, Point{0.5 * (lo + hi), 0.0, 0.0}, 0.5 * (hi - lo));
    d.kind_ = DomainKind::interval;
    return d;
}

bool Domain::contains(const Point& x) const noexcept { return distance_to_boundary(x) > 0.0; }

double Domain::distance_to_boundary(const Point& x) const noexcept {
    if (kind_ != DomainKind::box) return radius_ - distance(x, center_, dim_);
    double d = std::numeric_limits<double>::infinity();
    for (int k = 0; k < dim_; ++k) d = std::min({d, x[k] - lo_[k], hi_[k] - x[k]});
    return d;
}

double Domain::volume() const noexcept {
    if (kind_ != DomainKind::box) return unit_ball_volume(dim_) * std::pow(radius_, dim_);
    double v = 1.0;
    for (int k = 0; k < dim_; ++k) v *= hi_[k] - lo_[k];
    return v;
}

double norm(const Point& x, int dim) noexcept {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += x[k] * x[k];
    return std::sqrt(s);
}

double distance(const Point& a, const Point& b, int dim) noexcept {
    double s = 0.0;
    for (int k = 0; k < dim; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

double unit_ball_volume(int dim) noexcept {
    switch (dim) {
        case 1: return 2.0;
        case 2: return std::numbers::pi;
        default: return 4.0 * std::numbers::pi / 3.0;
    }
}

double unit_sphere_area(int dim) noexcept {
    switch (dim) {
        case 1: return 2.0;
        case 2: return 2.0 * std::numbers::pi;
        default: return 4.0 * std::numbers::pi;
    }
}

}  // namespace renfk
