#include "renfk/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>

#include "renfk/error.hpp"
#include "renfk/format.hpp"
#include "renfk/mc_engine.hpp"

namespace renfk {

FieldVec truncate(const FieldVec& u, double k) {
    if (!(k > 0.0)) throw InvalidInput("truncation level must be positive");
    return u.cwiseMax(-k).cwiseMin(k);
}

StateMeasure nu_k_finite(const FiniteForm& form, const FieldVec& u, const Nonlinearity& f, const StateMeasure& mu,
                         double k) {
    const auto n = static_cast<Eigen::Index>(form.size());
    if (u.size() != n || mu.size() != form.size()) throw InvalidInput("solution or measure has the wrong length");
    const FieldVec tu = truncate(u, k);
    const FieldVec lhs = -(form.generator() * tu);
    Eigen::VectorXd nu(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double mi = form.reference()[i];
        nu[i] = lhs[i] * mi - f(static_cast<std::size_t>(i), u[i]) * mi - mu.weights()[i];
    }
    return StateMeasure(std::move(nu));
}

std::vector<FieldVec> default_test_basis(std::size_t n, std::uint64_t seed, std::size_t extra) {
    std::vector<FieldVec> basis;
    basis.reserve(n + extra);
    const auto nn = static_cast<Eigen::Index>(n);
    for (Eigen::Index i = 0; i < nn; ++i) basis.push_back(FieldVec::Unit(nn, i));
    Rng rng = substream(seed, 0xba515);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    for (std::size_t r = 0; r < extra; ++r) {
        FieldVec v(nn);
        for (Eigen::Index i = 0; i < nn; ++i) v[i] = dist(rng);
        basis.push_back(std::move(v));
    }
    return basis;
}

double verify_identity(const FiniteForm& form, const FieldVec& u, const Nonlinearity& f, const StateMeasure& mu,
                       const StateMeasure& nu_k, double k, const std::vector<FieldVec>& test_basis) {
    const auto n = static_cast<Eigen::Index>(form.size());
    const FieldVec tu = truncate(u, k);
    Eigen::VectorXd rhs_measure(n);
    for (Eigen::Index i = 0; i < n; ++i)
        rhs_measure[i] = f(static_cast<std::size_t>(i), u[i]) * form.reference()[i] + mu.weights()[i] + nu_k.weights()[i];
    double worst = 0.0;
    for (const auto& v : test_basis) {
        if (v.size() != n) throw InvalidInput("test function has the wrong length");
        const double lhs = form.energy(tu, v);
        const double rhs = rhs_measure.dot(v);
        worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + v.cwiseAbs().maxCoeff()));
    }
    return worst;
}

void RenormReport::evaluate_flags() {
    identity_ok = true;
    tail_zero_ok = true;
    tail_monotone_ok = true;
    std::size_t tail_start = entries.size();
    for (std::size_t i = 0; i < entries.size(); ++i) {
        const auto& e = entries[i];
        if (!(e.identity_residual <= identity_tolerance)) identity_ok = false;
        if (e.k > sup_u && !(e.tv <= zero_tolerance)) tail_zero_ok = false;
        if (e.k > sup_u && tail_start == entries.size()) tail_start = i;
    }
    // The tail begins at the last level not exceeding sup |u|.
    if (tail_start > 0) --tail_start;
    for (std::size_t i = tail_start + 1; i < entries.size(); ++i)
        if (entries[i].tv > entries[i - 1].tv + zero_tolerance) tail_monotone_ok = false;
}

namespace {

std::string hash_problem(const FiniteForm& form, const FieldVec& u, const StateMeasure& mu) {
    std::string bytes;
    auto append = [&bytes](const Eigen::MatrixXd& a) {
        bytes.append(reinterpret_cast<const char*>(a.data()), static_cast<std::size_t>(a.size()) * sizeof(double));
    };
    append(form.generator());
    append(form.reference());
    append(u);
    append(mu.weights());
    return fnv1a_hex(bytes);
}

}  // namespace

RenormReport tv_decay_report(const FiniteForm& form, const FieldVec& u, const Nonlinearity& f, const StateMeasure& mu,
                             const std::vector<double>& k_grid, const RenormOptions& opts) {
    if (!std::is_sorted(k_grid.begin(), k_grid.end())) throw InvalidInput("k_grid must be increasing");
    RenormReport report;
    report.problem_hash = hash_problem(form, u, mu);
    report.identity_tolerance = opts.identity_tolerance;
    report.zero_tolerance = 10.0 * opts.solver_tolerance * std::max(1.0, form.reference().sum());
    report.sup_u = u.cwiseAbs().maxCoeff();
    const auto basis = default_test_basis(form.size(), opts.basis_seed);
    for (double k : k_grid) {
        RenormEntry e;
        e.k = k;
        const StateMeasure nu = nu_k_finite(form, u, f, mu, k);
        e.tv = tv_norm(nu);
        e.identity_residual = verify_identity(form, u, f, mu, nu, k, basis);
        e.nu = nu.weights();
        report.entries.push_back(std::move(e));
    }
    report.evaluate_flags();
    return report;
}

nlohmann::json to_json(const RenormReport& report) {
    nlohmann::json j;
    j["problem_hash"] = report.problem_hash;
    j["identity_tolerance"] = report.identity_tolerance;
    j["zero_tolerance"] = report.zero_tolerance;
    j["sup_u"] = report.sup_u;
    j["identity_ok"] = report.identity_ok;
    j["tail_zero_ok"] = report.tail_zero_ok;
    j["tail_monotone_ok"] = report.tail_monotone_ok;
    j["passed"] = report.passed();
    auto& entries = j["entries"] = nlohmann::json::array();
    for (const auto& e : report.entries) {
        entries.push_back({{"k", e.k},
                           {"tv", e.tv},
                           {"identity_residual", e.identity_residual},
                           {"nu", std::vector<double>(e.nu.data(), e.nu.data() + e.nu.size())}});
    }
    return j;
}

void write_csv(const RenormReport& report, std::ostream& os) {
    os << "k,tv,identity_residual\n";
    for (const auto& e : report.entries)
        os << format_double(e.k) << ',' << format_double(e.tv) << ',' << format_double(e.identity_residual) << '\n';
}

}  // namespace renfk
