#include "oracles.hpp"

#include <cmath>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <unsupported/Eigen/MatrixFunctions>

namespace renfk::fixtures {

double cauchy_interval_green(double x, double y) {
    const double num = 1.0 - x * y + std::sqrt((1.0 - x * x) * (1.0 - y * y));
    return std::log(num / std::abs(x - y)) / std::numbers::pi;
}

double cauchy_interval_potential(double x, const std::function<double(double)>& g) {
    boost::math::quadrature::tanh_sinh<double> q;
    auto integrand = [&](double y) { return y == x ? 0.0 : cauchy_interval_green(x, y) * g(y); };
    return q.integrate(integrand, -1.0, x, 1e-12) + q.integrate(integrand, x, 1.0, 1e-12);
}

ReactionOdeOracle::ReactionOdeOracle(std::size_t nodes) : h_(2.0 / static_cast<double>(nodes - 1)), u_(nodes, 0.0) {
    // (-u_{i-1} + (2 + h^2) u_i - u_{i+1}) / h^2 = 1, Thomas algorithm.
    const std::size_t m = nodes - 2;
    const double diag = 2.0 + h_ * h_;
    std::vector<double> c(m), d(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double denom = diag + (i > 0 ? c[i - 1] : 0.0);
        c[i] = -1.0 / denom;
        d[i] = (h_ * h_ + (i > 0 ? d[i - 1] : 0.0)) / denom;
    }
    for (std::size_t i = m; i-- > 0;) u_[i + 1] = d[i] - c[i] * (i + 1 < m ? u_[i + 2] : 0.0);
}

double ReactionOdeOracle::operator()(double x) const {
    const double pos = (x + 1.0) / h_;
    if (pos <= 0.0 || pos >= static_cast<double>(u_.size() - 1)) return 0.0;
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return (1.0 - frac) * u_[i] + frac * u_[i + 1];
}

double reaction_ode_exact(double x) { return 1.0 - std::cosh(x) / std::cosh(1.0); }

Eigen::VectorXd linear_backward_exact(const Eigen::MatrixXd& L, const Eigen::VectorXd& h, const Eigen::VectorXd& phi,
                                      double elapsed) {
    const auto n = L.rows();
    Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(n + 1, n + 1);
    aug.topLeftCorner(n, n) = L * elapsed;
    aug.topRightCorner(n, 1) = h * elapsed;
    const Eigen::MatrixXd e = aug.exp();
    return e.topLeftCorner(n, n) * phi + e.topRightCorner(n, 1);
}

}  // namespace renfk::fixtures
