#include "renfk/parabolic.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <sstream>

#include "renfk/chain_sampler.hpp"
#include "renfk/error.hpp"
#include "renfk/format.hpp"

namespace renfk {

namespace {

constexpr double grid_slack = 1e-9;

// Number of steps of size dt in t, or -1 when t is not a multiple of dt.
long steps_of(double t, double dt) {
    const double q = t / dt;
    const double r = std::round(q);
    return std::abs(q - r) <= grid_slack * std::max(1.0, q) ? static_cast<long>(r) : -1;
}

Eigen::VectorXd or_zero(const Eigen::VectorXd& v, Eigen::Index n) { return v.size() == 0 ? Eigen::VectorXd::Zero(n) : v; }

// Node index of each atom, summed per node (atoms at node j as weights).
std::vector<Eigen::VectorXd> atoms_on_nodes(const ParabolicProblem& prob, double dt, std::size_t nodes) {
    const auto n = static_cast<Eigen::Index>(prob.size());
    std::vector<Eigen::VectorXd> out(nodes, Eigen::VectorXd::Zero(n));
    for (const auto& a : prob.atoms) {
        const long j = steps_of(a.time, dt);
        if (j <= 0 || static_cast<std::size_t>(j) >= nodes) {
            std::ostringstream os;
            os << "time atom at t=" << a.time << " does not lie on a grid node in (0, T]";
            throw InvalidInput(os.str());
        }
        out[static_cast<std::size_t>(j)] += a.weights;
    }
    return out;
}

// F(j, i) = f(t_j, i, u_{j+1, i}) + h_i, the explicit source on [t_j, t_{j+1}).
Eigen::MatrixXd frozen_source(const ParabolicProblem& prob, const ParabolicField& u) {
    const auto n = static_cast<Eigen::Index>(prob.size());
    const auto steps = static_cast<Eigen::Index>(u.nodes()) - 1;
    const Eigen::VectorXd h = or_zero(prob.source, n);
    Eigen::MatrixXd F(steps, n);
    for (Eigen::Index j = 0; j < steps; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            F(j, i) = prob.f(Site{u.times[static_cast<std::size_t>(j)], static_cast<std::size_t>(i), {}},
                             u.values(j + 1, i)) +
                      h[i];
    return F;
}

void check_field(const ParabolicProblem& prob, const ParabolicField& u) {
    if (u.nodes() < 2 || u.values.rows() != static_cast<Eigen::Index>(u.nodes()) ||
        u.values.cols() != static_cast<Eigen::Index>(prob.size()))
        throw InvalidInput("parabolic field does not match the problem");
    if (steps_of(prob.horizon, u.dt) != static_cast<long>(u.nodes()) - 1)
        throw InvalidInput("parabolic field grid does not cover [0, T]");
}

const Eigen::MatrixXd& generator_on_step(const ParabolicProblem& prob, double dt, std::size_t j) {
    return prob.generators[prob.piece_at((static_cast<double>(j) + 0.5) * dt)].L;
}

}  // namespace

void ParabolicProblem::validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw InvalidInput("horizon T must be positive");
    if (m.size() == 0) throw InvalidInput("reference measure m is empty");
    if (generators.empty()) throw InvalidInput("at least one generator piece is required");
    double prev = 0.0;
    for (std::size_t p = 0; p < generators.size(); ++p) {
        const auto& g = generators[p];
        if (!(g.until > prev)) throw InvalidInput("generator breakpoints must be positive and increasing");
        prev = g.until;
        try {
            renfk::validate(FiniteChainSpec{m, g.L});
        } catch (const InvalidInput& e) {
            std::ostringstream os;
            os << "generators[" << p << "]: " << e.what();
            throw InvalidInput(os.str());
        }
    }
    if (prev < horizon * (1.0 - grid_slack)) throw InvalidInput("generator pieces must cover [0, T]");
    const auto n = m.size();
    if (source.size() != 0 && source.size() != n) throw InvalidInput("source h has the wrong length");
    if (terminal.size() != 0 && terminal.size() != n) throw InvalidInput("terminal condition phi has the wrong length");
    if (source.size() != 0 && !source.allFinite()) throw InvalidInput("source h must be finite");
    if (terminal.size() != 0 && !terminal.allFinite()) throw InvalidInput("terminal condition phi must be finite");
    for (const auto& a : atoms) {
        if (!(a.time > 0.0 && a.time <= horizon * (1.0 + grid_slack)))
            throw InvalidInput("time atoms must lie in (0, T]");
        if (a.weights.size() != n || !a.weights.allFinite()) throw InvalidInput("time atom weights have the wrong length");
    }
}

std::size_t ParabolicProblem::piece_at(double t) const {
    for (std::size_t p = 0; p < generators.size(); ++p)
        if (t < generators[p].until) return p;
    return generators.size() - 1;
}

Eigen::VectorXd ParabolicField::left_limit(std::size_t j) const {
    Eigen::VectorXd v = at(j);
    if (j < atom_jumps.size()) v += atom_jumps[j];
    return v;
}

ParabolicField solve_parabolic_finite(const ParabolicProblem& prob, double dt, const SolveConfig& cfg) {
    prob.validate();
    if (!(dt > 0.0)) throw InvalidInput("dt must be positive");
    const long steps = steps_of(prob.horizon, dt);
    if (steps < 1) throw InvalidInput("dt must divide the horizon T");
    for (std::size_t p = 0; p + 1 < prob.generators.size(); ++p) {
        const double b = prob.generators[p].until;
        if (b < prob.horizon && steps_of(b, dt) < 0) throw InvalidInput("dt must divide every generator breakpoint");
    }
    const double growth = std::max(prob.f.alpha(), 0.0) + prob.f.lipschitz();
    if (!(dt * growth < 1.0)) {
        std::ostringstream os;
        os << "explicit step unstable: dt (alpha + Lipschitz) = " << dt * growth
           << " must be < 1; use dt < " << (growth > 0.0 ? 1.0 / growth : 0.0);
        throw InvalidInput(os.str());
    }
    const std::size_t n = prob.size();
    SpotCheckOptions sc = cfg.spot_check;
    sc.seed ^= cfg.seed;
    spot_check(prob.f, state_sites(n, prob.horizon), sc);

    const auto N = static_cast<std::size_t>(steps);
    const auto nn = static_cast<Eigen::Index>(n);
    ParabolicField out;
    out.dt = dt;
    out.times.resize(N + 1);
    for (std::size_t j = 0; j <= N; ++j) out.times[j] = static_cast<double>(j) * dt;
    out.times[N] = prob.horizon;
    const auto atoms = atoms_on_nodes(prob, dt, N + 1);
    out.atom_jumps.resize(N + 1);
    for (std::size_t j = 0; j <= N; ++j) out.atom_jumps[j] = atoms[j].cwiseQuotient(prob.m);

    out.values.resize(static_cast<Eigen::Index>(N + 1), nn);
    out.values.row(static_cast<Eigen::Index>(N)) = or_zero(prob.terminal, nn).transpose();
    const Eigen::VectorXd h = or_zero(prob.source, nn);

    std::vector<std::optional<Eigen::PartialPivLU<Eigen::MatrixXd>>> lu(prob.generators.size());
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(nn, nn);
    Eigen::VectorXd rhs(nn);
    for (std::size_t j = N; j-- > 0;) {
        const std::size_t piece = prob.piece_at((static_cast<double>(j) + 0.5) * dt);
        if (!lu[piece]) lu[piece].emplace(I - dt * prob.generators[piece].L);
        const Eigen::VectorXd next = out.at(j + 1);
        for (Eigen::Index i = 0; i < nn; ++i)
            rhs[i] = next[i] + out.atom_jumps[j + 1][i] +
                     dt * (prob.f(Site{out.times[j], static_cast<std::size_t>(i), {}}, next[i]) + h[i]);
        const Eigen::VectorXd uj = lu[piece]->solve(rhs);
        if (!uj.allFinite()) throw NotConverged("backward step produced non-finite values");
        out.values.row(static_cast<Eigen::Index>(j)) = uj.transpose();
    }
    return out;
}

Estimate mc_parabolic_estimate(const ParabolicProblem& prob, const ParabolicField& frozen, const TimeSpacePoint& z,
                               const McOptions& mc) {
    prob.validate();
    check_field(prob, frozen);
    if (!(z.s >= 0.0 && z.s <= prob.horizon)) throw InvalidInput("time-space point must satisfy 0 <= s <= T");
    if (z.x >= prob.size()) throw InvalidInput("time-space point state out of range");

    const auto n = static_cast<Eigen::Index>(prob.size());
    const double dt = frozen.dt;
    const std::size_t N = frozen.nodes() - 1;
    const Eigen::MatrixXd F = frozen_source(prob, frozen);
    const Eigen::VectorXd phi = or_zero(prob.terminal, n);

    std::vector<std::pair<double, Eigen::VectorXd>> atoms;
    for (const auto& a : prob.atoms)
        if (a.time > z.s) atoms.emplace_back(a.time, a.weights.cwiseQuotient(prob.m));

    if (F.isZero(0.0) && phi.isZero(0.0) && atoms.empty()) return Estimate{0.0, 0.0, mc.n_paths, mc.seed};

    // C(j, i) = int_0^{t_j} F(., i)
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(N + 1), n);
    for (std::size_t j = 0; j < N; ++j)
        C.row(static_cast<Eigen::Index>(j + 1)) = C.row(static_cast<Eigen::Index>(j)) + dt * F.row(static_cast<Eigen::Index>(j));
    auto cumulative = [&](double t, Eigen::Index i) {
        auto j = static_cast<Eigen::Index>(std::floor(t / dt));
        j = std::clamp<Eigen::Index>(j, 0, static_cast<Eigen::Index>(N) - 1);
        return C(j, i) + (t - static_cast<double>(j) * dt) * F(j, i);
    };

    std::vector<double> until;
    std::vector<FiniteChainSpec> pieces;
    for (const auto& g : prob.generators) {
        until.push_back(g.until);
        pieces.push_back(FiniteChainSpec{prob.m, g.L});
    }
    until.back() = std::max(until.back(), prob.horizon);
    const PiecewiseChainSampler sampler(std::move(until), pieces);

    return run_paths(mc, [&](Rng& rng) {
        double value = 0.0;
        const auto end = sampler.walk(z.x, z.s, prob.horizon, rng, [&](std::size_t state, double begin, double dur) {
            const auto i = static_cast<Eigen::Index>(state);
            value += cumulative(begin + dur, i) - cumulative(begin, i);
            // The atom AF jumps at tau with the state just before tau.
            for (const auto& [tau, density] : atoms)
                if (begin < tau && tau <= begin + dur) value += density[i];
        });
        if (!end.killed) value += phi[static_cast<Eigen::Index>(end.state)];
        return value;
    });
}

namespace {

struct DiscreteData {
    std::size_t N = 0;
    Eigen::MatrixXd rho;  // N x n; row j pairs with v^j
    Eigen::VectorXd terminal;
};

DiscreteData discrete_data(const ParabolicProblem& prob, const ParabolicField& u) {
    DiscreteData d;
    d.N = u.nodes() - 1;
    const auto n = static_cast<Eigen::Index>(prob.size());
    const auto atoms = atoms_on_nodes(prob, u.dt, u.nodes());
    d.rho = frozen_source(prob, u);
    for (Eigen::Index j = 0; j < static_cast<Eigen::Index>(d.N); ++j) {
        d.rho.row(j) = d.rho.row(j).cwiseProduct(prob.m.transpose()) * u.dt;
        d.rho.row(j) += atoms[static_cast<std::size_t>(j + 1)].transpose();
    }
    d.terminal = or_zero(prob.terminal, n);
    return d;
}

Eigen::MatrixXd truncate_rows(const Eigen::MatrixXd& a, double k) { return a.cwiseMax(-k).cwiseMin(k); }

Eigen::VectorXd nu_parabolic(const ParabolicProblem& prob, const ParabolicField& u, const DiscreteData& d, double k) {
    const auto n = static_cast<Eigen::Index>(prob.size());
    const Eigen::MatrixXd w = truncate_rows(u.values, k);
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d.N) * n);
    for (std::size_t j = 1; j < d.N; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const Eigen::VectorXd wj = w.row(jj).transpose();
        const Eigen::VectorXd flux = (wj - w.row(jj + 1).transpose()) - u.dt * (generator_on_step(prob, u.dt, j) * wj);
        nu.segment(jj * n, n) = flux.cwiseProduct(prob.m) - d.rho.row(jj).transpose();
    }
    return nu;
}

double defect(const ParabolicProblem& prob, const ParabolicField& u, const DiscreteData& d, double k,
              const Eigen::VectorXd& nu_k, const Eigen::MatrixXd& v) {
    const auto n = static_cast<Eigen::Index>(prob.size());
    const Eigen::MatrixXd w = truncate_rows(u.values, k);
    auto vrow = [&](std::size_t j) -> Eigen::VectorXd {
        if (j == 0) return Eigen::VectorXd::Zero(n);
        return v.row(static_cast<Eigen::Index>(j)).transpose();
    };
    double lhs = 0.0;
    for (std::size_t j = 1; j <= d.N; ++j) {
        const Eigen::VectorXd wj = w.row(static_cast<Eigen::Index>(j)).transpose();
        lhs += wj.cwiseProduct(prob.m).dot(vrow(j) - vrow(j - 1));
    }
    for (std::size_t j = 1; j < d.N; ++j) {
        const Eigen::VectorXd wj = w.row(static_cast<Eigen::Index>(j)).transpose();
        lhs += u.dt * (-(generator_on_step(prob, u.dt, j) * wj)).cwiseProduct(prob.m).dot(vrow(j));
    }
    const Eigen::VectorXd tphi = d.terminal.cwiseMax(-k).cwiseMin(k);
    double rhs = tphi.cwiseProduct(prob.m).dot(vrow(d.N));
    for (std::size_t j = 1; j < d.N; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        rhs += (d.rho.row(jj).transpose() + nu_k.segment(jj * n, n)).dot(vrow(j));
    }
    return lhs - rhs;
}

std::string hash_parabolic(const ParabolicProblem& prob, const ParabolicField& u) {
    std::string bytes;
    auto append = [&bytes](const Eigen::MatrixXd& a) {
        bytes.append(reinterpret_cast<const char*>(a.data()), static_cast<std::size_t>(a.size()) * sizeof(double));
    };
    auto scalar = [&bytes](double x) { bytes.append(reinterpret_cast<const char*>(&x), sizeof x); };
    scalar(prob.horizon);
    append(prob.m);
    for (const auto& g : prob.generators) {
        scalar(g.until);
        append(g.L);
    }
    append(prob.source);
    append(prob.terminal);
    for (const auto& a : prob.atoms) {
        scalar(a.time);
        append(a.weights);
    }
    scalar(u.dt);
    append(u.values);
    return fnv1a_hex(bytes);
}

}  // namespace

RenormReport renorm_parabolic_finite(const ParabolicProblem& prob, const ParabolicField& u,
                                     const std::vector<double>& k_grid, const RenormOptions& opts) {
    prob.validate();
    check_field(prob, u);
    if (!std::is_sorted(k_grid.begin(), k_grid.end())) throw InvalidInput("k_grid must be increasing");
    const DiscreteData d = discrete_data(prob, u);
    const auto n = static_cast<Eigen::Index>(prob.size());
    const auto rows = static_cast<Eigen::Index>(d.N + 1);

    // Discrete test class: grid functions with v^0 = 0.
    std::vector<Eigen::MatrixXd> tests;
    Rng rng = substream(opts.basis_seed, 0x7e57);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (int r = 0; r < 12; ++r) {
        Eigen::MatrixXd v(rows, n);
        for (Eigen::Index j = 0; j < rows; ++j)
            for (Eigen::Index i = 0; i < n; ++i) v(j, i) = dist(rng);
        v.row(0).setZero();
        tests.push_back(std::move(v));
    }
    Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(rows, n);
    ones.row(0).setZero();
    tests.push_back(std::move(ones));

    RenormReport report;
    report.problem_hash = hash_parabolic(prob, u);
    report.identity_tolerance = opts.identity_tolerance;
    report.zero_tolerance = 10.0 * opts.solver_tolerance * std::max(1.0, prob.m.sum());
    report.sup_u = std::max(u.sup_abs(), d.terminal.size() ? d.terminal.cwiseAbs().maxCoeff() : 0.0);
    for (double k : k_grid) {
        if (!(k > 0.0)) throw InvalidInput("truncation level must be positive");
        RenormEntry e;
        e.k = k;
        e.nu = nu_parabolic(prob, u, d, k);
        e.tv = e.nu.cwiseAbs().sum();
        for (const auto& v : tests)
            e.identity_residual = std::max(e.identity_residual,
                                           std::abs(defect(prob, u, d, k, e.nu, v)) / (1.0 + v.cwiseAbs().maxCoeff()));
        report.entries.push_back(std::move(e));
    }
    report.evaluate_flags();
    return report;
}

double parabolic_identity_defect(const ParabolicProblem& prob, const ParabolicField& u, double k,
                                 const Eigen::VectorXd& nu_k, const Eigen::MatrixXd& v) {
    check_field(prob, u);
    const DiscreteData d = discrete_data(prob, u);
    if (v.rows() != static_cast<Eigen::Index>(d.N + 1) || v.cols() != static_cast<Eigen::Index>(prob.size()))
        throw InvalidInput("test function has the wrong shape");
    if (nu_k.size() != static_cast<Eigen::Index>(d.N * prob.size())) throw InvalidInput("nu_k has the wrong length");
    return defect(prob, u, d, k, nu_k, v);
}

void write_csv(const ParabolicField& field, std::ostream& os, const std::optional<Eigen::MatrixXd>& stderr_values) {
    os << "t,state,value,stderr\n";
    for (Eigen::Index j = 0; j < field.values.rows(); ++j)
        for (Eigen::Index i = 0; i < field.values.cols(); ++i) {
            const double se = stderr_values ? (*stderr_values)(j, i) : 0.0;
            os << format_double(field.times[static_cast<std::size_t>(j)]) << ',' << i << ','
               << format_double(field.values(j, i)) << ',' << format_double(se) << '\n';
        }
}

}  // namespace renfk
