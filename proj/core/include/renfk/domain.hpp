#pragma once

#include <array>
#include <cstddef>

namespace renfk {

/// Point in R^d, d <= 3; trailing coordinates are zero.
using Point = std::array<double, 3>;

enum class DomainKind { ball, box, interval };

/// Model domain for continuum solvers.
///
/// An interval is the one-dimensional ball; it is kept as a separate kind
/// because configs and reports describe it by its endpoints.
class Domain {
public:
    static Domain ball(int dim, const Point& center, double radius);
    static Domain box(int dim, const Point& lo, const Point& hi);
    static Domain interval(double lo, double hi);

    DomainKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return dim_; }
    const Point& center() const noexcept { return center_; }
    /// Radius of a ball/interval; half the shortest side of a box.
    double radius() const noexcept { return radius_; }
    const Point& lower() const noexcept { return lo_; }
    const Point& upper() const noexcept { return hi_; }

    /// True for balls and intervals.
    bool is_round() const noexcept { return kind_ != DomainKind::box; }

    bool contains(const Point& x) const noexcept;
    /// Distance to the boundary; negative outside.
    double distance_to_boundary(const Point& x) const noexcept;
    double volume() const noexcept;

private:
    Domain() = default;

    DomainKind kind_ = DomainKind::ball;
    int dim_ = 1;
    Point center_{};
    double radius_ = 1.0;
    Point lo_{};
    Point hi_{};
};

double norm(const Point& x, int dim) noexcept;
double distance(const Point& a, const Point& b, int dim) noexcept;

/// Volume of the unit ball in R^d.
double unit_ball_volume(int dim) noexcept;
/// Surface area of the unit sphere in R^d (2 for d = 1).
double unit_sphere_area(int dim) noexcept;

}  // namespace renfk
