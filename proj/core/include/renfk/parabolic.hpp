#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "renfk/finite_form.hpp"
#include "renfk/mc_engine.hpp"
#include "renfk/nonlinearity.hpp"
#include "renfk/renorm.hpp"
#include "renfk/semilinear.hpp"

namespace renfk {

struct TimeSpacePoint {
    double s = 0.0;
    std::size_t x = 0;
};

/// Generator in force on [previous until, until).
struct GeneratorPiece {
    double until = 0.0;
    Eigen::MatrixXd L;
};

/// Point mass in time: mu gets `weights` (per state) at time `time`.
struct TimeAtom {
    double time = 0.0;
    Eigen::VectorXd weights;
};

/// -du/dt - L_t u = f(t, x, u) + mu on (0, T] x E, u(T) = phi, with
/// mu = h dt (x) m + sum of time atoms.
struct ParabolicProblem {
    double horizon = 1.0;
    Eigen::VectorXd m;
    std::vector<GeneratorPiece> generators;
    Nonlinearity f = Nonlinearity::zero();
    Eigen::VectorXd source;  ///< h, per state; empty means zero
    std::vector<TimeAtom> atoms;
    Eigen::VectorXd terminal;  ///< phi

    std::size_t size() const noexcept { return static_cast<std::size_t>(m.size()); }
    /// Throws InvalidInput on malformed pieces, atoms or sizes.
    void validate() const;
    /// Index of the generator in force at time t.
    std::size_t piece_at(double t) const;
};

/// Values on the node grid t_j = j dt. values(j, i) = u(t_j, i), the
/// right-continuous value (a time atom at t_j is not yet included).
struct ParabolicField {
    double dt = 0.0;
    std::vector<double> times;
    Eigen::MatrixXd values;
    std::vector<Eigen::VectorXd> atom_jumps;  ///< per node: atom density added at t_j^-

    std::size_t nodes() const noexcept { return times.size(); }
    Eigen::VectorXd at(std::size_t j) const { return values.row(static_cast<Eigen::Index>(j)).transpose(); }
    /// u(t_j^-) = u(t_j) + atom_j / m
    Eigen::VectorXd left_limit(std::size_t j) const;
    double sup_abs() const { return values.cwiseAbs().maxCoeff(); }
};

/// Backward Euler, implicit in L_t and explicit in f:
///   (I - dt L_j) u_j = u_{j+1} + atom_{j+1}/m + dt (f(t_j, ., u_{j+1}) + h).
/// Requires dt to divide T and every breakpoint, atoms on nodes in (0, T]
/// and dt (alpha + Lipschitz) < 1.
ParabolicField solve_parabolic_finite(const ParabolicProblem& prob, double dt, const SolveConfig& cfg = {});

/// E_z[ phi(X_{zeta_tau}) 1{survives to T} + int_0^{zeta_tau} f_u dt + A^mu ]
/// with f_u frozen from `frozen` exactly as the grid scheme sees it.
Estimate mc_parabolic_estimate(const ParabolicProblem& prob, const ParabolicField& frozen, const TimeSpacePoint& z,
                               const McOptions& mc);

/// Residual measures of the discrete truncated identity
///   sum_{j>=1} <T_k u_j, v_j - v_{j-1}>_m + dt sum_{j<N} E_j(T_k u_j, v_j)
///     = <T_k phi, v_N>_m + <f_u m + mu, v> + <nu_k, v>
/// over grid functions with v_0 = 0. nu_k lives on nodes 0..N-1 (time-major).
RenormReport renorm_parabolic_finite(const ParabolicProblem& prob, const ParabolicField& u,
                                     const std::vector<double>& k_grid, const RenormOptions& opts = {});

/// Left side minus right side of the discrete identity for one test
/// function (rows = nodes, cols = states, row 0 ignored).
double parabolic_identity_defect(const ParabolicProblem& prob, const ParabolicField& u, double k,
                                 const Eigen::VectorXd& nu_k, const Eigen::MatrixXd& v);

/// Columns: t,state,value,stderr
void write_csv(const ParabolicField& field, std::ostream& os,
               const std::optional<Eigen::MatrixXd>& stderr_values = std::nullopt);

}  // namespace renfk
