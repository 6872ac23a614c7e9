#include "renfk/finite_form.hpp"

#include <cmath>
#include <sstream>

#include "renfk/error.hpp"
#include "renfk/measures.hpp"

namespace renfk {

namespace {

constexpr double kTransienceTol = 1e-12;

bool all_finite(const Eigen::VectorXd& v) { return v.allFinite(); }

}  // namespace

void validate(const FiniteChainSpec& spec) {
    const auto n = spec.m.size();
    if (n < 1) throw InvalidInput("chain must have at least one state");
    if (spec.L.rows() != n || spec.L.cols() != n) {
        std::ostringstream os;
        os << "generator must be " << n << "x" << n << ", got " << spec.L.rows() << "x" << spec.L.cols();
        throw InvalidInput(os.str());
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (!(spec.m[i] > 0.0) || !std::isfinite(spec.m[i])) {
            std::ostringstream os;
            os << "reference measure m[" << i << "] must be positive and finite";
            throw InvalidInput(os.str());
        }
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        double row_sum = 0.0;
        double scale = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            const double v = spec.L(i, j);
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os << "generator entry L[" << i << "][" << j << "] is not finite";
                throw InvalidInput(os.str());
            }
            if (i != j && v < 0.0) {
                std::ostringstream os;
                os << "generator entry L[" << i << "][" << j << "] is negative off the diagonal";
                throw InvalidInput(os.str());
            }
            row_sum += v;
            scale += std::abs(v);
        }
        if (row_sum > 1e-12 * std::max(1.0, scale)) {
            std::ostringstream os;
            os << "generator row " << i << " has positive sum " << row_sum;
            throw InvalidInput(os.str());
        }
    }
}

Eigen::VectorXd killing_rates(const Eigen::MatrixXd& L) {
    Eigen::VectorXd k = -L.rowwise().sum();
    return k.cwiseMax(0.0);
}

FiniteForm::FiniteForm(FiniteChainSpec spec) : spec_(std::move(spec)) {
    validate(spec_);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(-spec_.L);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(spec_.m.size());
    const Eigen::VectorXd g1 = lu.solve(ones);
    const double scale = std::max(1.0, spec_.L.cwiseAbs().maxCoeff());
    const double defect = (-spec_.L * g1 - ones).cwiseAbs().maxCoeff();
    transient_ = lu.rcond() > 1e-14 && all_finite(g1) && defect <= 1e-8 * scale * std::max(1.0, g1.cwiseAbs().maxCoeff()) &&
                 g1.minCoeff() >= -kTransienceTol;
    if (transient_) minus_l_lu_.emplace(std::move(lu));
}

double FiniteForm::inner(const FieldVec& a, const FieldVec& b) const {
    return (a.array() * b.array() * spec_.m.array()).sum();
}

double FiniteForm::energy(const FieldVec& u, const FieldVec& v) const { return inner(-(spec_.L * u), v); }

double FiniteForm::energy(double alpha, const FieldVec& u, const FieldVec& v) const {
    return energy(u, v) + alpha * inner(u, v);
}

FieldVec FiniteForm::solve_potential_system(const FieldVec& b) const {
    if (!transient_) throw InvalidInput("potential undefined: the form is not transient");
    FieldVec x = minus_l_lu_->solve(b);
    if (!x.allFinite()) throw NotConverged("linear solve for the potential produced non-finite values");
    return x;
}

FiniteForm assemble_form(FiniteChainSpec spec) { return FiniteForm(std::move(spec)); }

bool check_transience(const FiniteForm& form) { return form.transient(); }

FieldVec resolvent_apply(const FiniteForm& form, double alpha, const FieldVec& f) {
    if (!(alpha > 0.0)) throw InvalidInput("resolvent parameter alpha must be positive");
    const auto n = static_cast<Eigen::Index>(form.size());
    if (f.size() != n) throw InvalidInput("resolvent argument has the wrong length");
    const Eigen::MatrixXd a = alpha * Eigen::MatrixXd::Identity(n, n) - form.generator();
    FieldVec u = a.partialPivLu().solve(f);
    const double defect = (a * u - f).cwiseAbs().maxCoeff();
    const double scale = std::max(1.0, f.cwiseAbs().maxCoeff());
    if (!u.allFinite() || defect > 1e-9 * scale) throw NotConverged("resolvent solve failed to converge");
    return u;
}

FieldVec resolvent_apply(const FiniteForm& form, double alpha, const StateMeasure& mu) {
    return resolvent_apply(form, alpha, mu.density(form.reference()));
}

FieldVec potential(const FiniteForm& form, const StateMeasure& mu) {
    if (mu.size() != form.size()) throw InvalidInput("measure has the wrong number of states");
    return form.solve_potential_system(mu.density(form.reference()));
}

}  // namespace renfk
