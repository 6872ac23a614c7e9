#include "random_problems.hpp"

#include <random>

namespace renfk::fixtures {

FiniteChainSpec random_chain(Rng& rng, std::size_t n, const ChainOptions& opts) {
    std::uniform_real_distribution<double> rate(opts.rate_lo, opts.rate_hi);
    std::uniform_real_distribution<double> kill(opts.kill_lo, opts.kill_hi);
    std::uniform_real_distribution<double> weight(0.5, 2.0);
    std::bernoulli_distribution edge(opts.edge_density);
    const auto nn = static_cast<Eigen::Index>(n);

    FiniteChainSpec spec;
    spec.m.resize(nn);
    for (Eigen::Index i = 0; i < nn; ++i) spec.m[i] = weight(rng);
    spec.L = Eigen::MatrixXd::Zero(nn, nn);
    auto connect = [&](Eigen::Index i, Eigen::Index j) {
        if (opts.symmetric) {
            const double c = rate(rng);  // conductance m_i L_ij
            spec.L(i, j) += c / spec.m[i];
            spec.L(j, i) += c / spec.m[j];
        } else {
            spec.L(i, j) += rate(rng);
            spec.L(j, i) += rate(rng);
        }
    };
    for (Eigen::Index i = 0; i + 1 < nn; ++i) connect(i, i + 1);
    for (Eigen::Index i = 0; i < nn; ++i)
        for (Eigen::Index j = i + 2; j < nn; ++j)
            if (edge(rng)) connect(i, j);
    for (Eigen::Index i = 0; i < nn; ++i) spec.L(i, i) = -spec.L.row(i).sum() - kill(rng);
    return spec;
}

StateMeasure random_measure(Rng& rng, std::size_t n, double lo, double hi) {
    std::uniform_real_distribution<double> w(lo, hi);
    Eigen::VectorXd v(static_cast<Eigen::Index>(n));
    for (auto& x : v) x = w(rng);
    return StateMeasure(std::move(v));
}

Nonlinearity random_monotone(Rng& rng) {
    std::uniform_real_distribution<double> rate(0.1, 2.0);
    std::uniform_real_distribution<double> source(-1.0, 1.0);
    std::map<std::string, double> params{{"rate", rate(rng)}, {"source", source(rng)}};
    switch (rng() % 3) {
        case 0: return builtin_nonlinearity("linear_decay", params);
        case 1: return builtin_nonlinearity("saturating", params);
        default:
            params["power"] = 3.0;
            params["rate"] *= 0.05;
            params["bound"] = 10.0;
            return builtin_nonlinearity("power_decay", params);
    }
}

ParabolicProblem random_parabolic(Rng& rng, std::size_t n, double dt, bool with_atom) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    ParabolicProblem p;
    p.horizon = 1.0;
    ChainOptions opts;
    opts.symmetric = false;
    const FiniteChainSpec a = random_chain(rng, n, opts);
    FiniteChainSpec b = random_chain(rng, n, opts);
    p.m = a.m;
    p.generators = {GeneratorPiece{0.5, a.L}, GeneratorPiece{1.0, b.L}};
    std::uniform_real_distribution<double> rate(0.1, 2.0);
    std::uniform_real_distribution<double> source(-1.0, 1.0);
    p.f = builtin_nonlinearity(rng() % 2 ? "linear_decay" : "saturating",
                               {{"rate", rate(rng)}, {"source", source(rng)}});
    p.source = Eigen::VectorXd(static_cast<Eigen::Index>(n));
    p.terminal = Eigen::VectorXd(static_cast<Eigen::Index>(n));
    for (auto& x : p.source) x = source(rng);
    for (auto& x : p.terminal) x = 2.0 * source(rng);
    if (with_atom) {
        const auto steps = static_cast<long>(std::lround(p.horizon / dt));
        const long node = 1 + static_cast<long>(u01(rng) * static_cast<double>(steps - 1));
        TimeAtom atom;
        atom.time = static_cast<double>(node) * dt;
        atom.weights = Eigen::VectorXd(static_cast<Eigen::Index>(n));
        for (auto& x : atom.weights) x = u01(rng);
        p.atoms.push_back(std::move(atom));
    }
    return p;
}

}  // namespace renfk::fixtures
