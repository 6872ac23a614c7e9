#include "renfk/mc_elliptic.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <ostream>

#include "renfk/error.hpp"
#include "renfk/format.hpp"

namespace renfk {

OperatorKind OperatorKind::fractional(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw InvalidInput("fractional order alpha must lie in (0, 2)");
    return {Kind::fractional, alpha};
}

namespace {

// Bounding box of the domain.
void bounding_box(const Domain& domain, Point& lo, Point& hi) {
    lo = {};
    hi = {};
    for (int k = 0; k < domain.dim(); ++k) {
        if (domain.is_round()) {
            lo[k] = domain.center()[k] - domain.radius();
            hi[k] = domain.center()[k] + domain.radius();
        } else {
            lo[k] = domain.lower()[k];
            hi[k] = domain.upper()[k];
        }
    }
}

// Radius of a ball containing the domain, centered inside it.
double enclosing_radius(const Domain& domain) {
    if (domain.is_round()) return domain.radius();
    double s = 0.0;
    for (int k = 0; k < domain.dim(); ++k) s += std::pow(0.5 * (domain.upper()[k] - domain.lower()[k]), 2);
    return std::sqrt(s);
}

std::uint64_t node_seed(std::uint64_t seed, std::size_t node) {
    // splitmix64 finalizer over (seed, node)
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(node) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

EvaluationGrid::EvaluationGrid(const Domain& domain, std::size_t per_axis) : dim_(domain.dim()), per_axis_(per_axis) {
    if (per_axis < 2) throw InvalidInput("evaluation grid needs at least 2 points per axis");
    Point hi{};
    bounding_box(domain, lo_, hi);
    step_ = {};
    node_count_ = 1;
    for (int k = 0; k < dim_; ++k) {
        step_[k] = (hi[k] - lo_[k]) / static_cast<double>(per_axis - 1);
        node_count_ *= per_axis;
    }
    for (std::size_t flat = 0; flat < node_count_; ++flat)
        if (domain.contains(node(flat))) interior_.push_back(flat);
}

Point EvaluationGrid::node(std::size_t flat) const {
    Point p{};
    for (int k = 0; k < dim_; ++k) {
        p[k] = lo_[k] + step_[k] * static_cast<double>(flat % per_axis_);
        flat /= per_axis_;
    }
    return p;
}

double EvaluationGrid::interpolate(const std::vector<double>& node_values, const Point& x) const {
    std::array<std::size_t, 3> base{};
    std::array<double, 3> frac{};
    const double last = static_cast<double>(per_axis_ - 1);
    for (int k = 0; k < dim_; ++k) {
        const double pos = (x[k] - lo_[k]) / step_[k];
        if (pos < 0.0 || pos > last) return 0.0;
        const double cell = std::min(std::floor(pos), last - 1.0);
        base[k] = static_cast<std::size_t>(cell);
        frac[k] = pos - cell;
    }
    double value = 0.0;
    for (unsigned corner = 0; corner < (1u << dim_); ++corner) {
        double w = 1.0;
        std::size_t flat = 0;
        std::size_t stride = 1;
        for (int k = 0; k < dim_; ++k) {
            const bool up = (corner >> k) & 1u;
            w *= up ? frac[k] : 1.0 - frac[k];
            flat += (base[k] + (up ? 1 : 0)) * stride;
            stride *= per_axis_;
        }
        if (w != 0.0) value += w * node_values[flat];
    }
    return value;
}

Estimate linear_estimate(const Domain& domain, const OperatorKind& op, const Point& x, const SourceFn& g,
                         const FieldMeasure& mu, const PicardMcOptions& opts, const StableBallKernel* kernel) {
    if (op.kind == OperatorKind::Kind::laplacian) return wos_linear(domain, x, g, mu, WosOptions{opts.mc, opts.eps_shell});
    // The stable walk has no sphere decomposition for surface parts, so the
    // regularized density of mu is folded into the source.
    SourceFn src = g;
    if (!mu.empty()) {
        src = [&g, &mu](const Point& y) { return (g ? g(y) : 0.0) + mu.density(y); };
    }
    if (kernel) return stable_linear(domain, *kernel, x, src, opts.mc);
    return stable_linear(domain, op.alpha, x, src, opts.mc);
}

SolutionField picard_mc(const Domain& domain, const OperatorKind& op, const Nonlinearity& f, const FieldMeasure& mu,
                        const SolveConfig& cfg, const PicardMcOptions& opts) {
    if (f.monotonicity() == Monotonicity::none)
        throw HypothesisViolation("picard_mc requires a declared monotone nonlinearity");
    if (!std::isfinite(f.lipschitz())) throw HypothesisViolation("picard_mc requires a Lipschitz nonlinearity");
    if (op.kind == OperatorKind::Kind::fractional && !domain.is_round())
        throw Unsupported("the stable solver supports balls and intervals only");

    Point lo{}, hi{};
    bounding_box(domain, lo, hi);
    const int d = domain.dim();
    const SiteSampler sites = [&, d](std::uint64_t draw) {
        Rng rng = substream(cfg.spot_check.seed, draw);
        Site s;
        do {
            for (int k = 0; k < d; ++k) s.x[k] = lo[k] + (hi[k] - lo[k]) * uniform01(rng);
        } while (!domain.contains(s.x));
        return s;
    };
    spot_check(f, sites, cfg.spot_check);

    std::unique_ptr<StableBallKernel> kernel;
    double max_exit = 0.0;
    const double radius = enclosing_radius(domain);
    if (op.kind == OperatorKind::Kind::fractional) {
        kernel = std::make_unique<StableBallKernel>(d, op.alpha);
        max_exit = kernel->mean_exit_time(radius);
    } else {
        max_exit = radius * radius / (2.0 * d);
    }
    // Plain Picard contracts when Lipschitz * sup E tau < 1; otherwise the
    // update is relaxed so the linearized map has spectrum in [0, 1).
    const double gain = f.lipschitz() * max_exit;
    const double relax = gain < 1.0 ? 1.0 : 1.0 / (1.0 + gain);

    const EvaluationGrid grid(domain, opts.per_axis);
    const auto& interior = grid.interior();
    SolutionField field;
    field.dim = d;
    for (std::size_t node : interior) field.points.push_back(grid.node(node));
    field.estimates.resize(interior.size());

    std::vector<double> current(grid.node_count(), 0.0);
    const std::size_t sweeps = f.constant_in_y() ? 1 : static_cast<std::size_t>(std::max(cfg.max_iterations, 1));
    for (std::size_t sweep = 0; sweep < sweeps; ++sweep) {
        const SourceFn g = [&](const Point& y) { return f(Site{0.0, 0, y}, grid.interpolate(current, y)); };
        std::vector<double> next = current;
        double diff = 0.0;
        double max_se = 0.0;
        for (std::size_t p = 0; p < interior.size(); ++p) {
            PicardMcOptions node_opts = opts;
            node_opts.mc.seed = node_seed(opts.mc.seed, interior[p]);
            Estimate e = linear_estimate(domain, op, field.points[p], g, mu, node_opts, kernel.get());
            const double prev = current[interior[p]];
            // Convergence is judged on the unrelaxed fixed-point residual.
            diff = std::max(diff, std::abs(e.mean - prev));
            const double updated = prev + relax * (e.mean - prev);
            e.mean = updated;
            e.seed = opts.mc.seed;
            max_se = std::max(max_se, e.std_error);
            next[interior[p]] = updated;
            field.estimates[p] = e;
        }
        current = std::move(next);
        field.iterations = static_cast<int>(sweep + 1);
        field.difference_trace.push_back(diff);
        if (f.constant_in_y() || diff <= cfg.tolerance + 3.0 * max_se) return field;
    }
    throw NotConverged("picard_mc did not converge within max_iterations", field.difference_trace);
}

void write_csv(const SolutionField& field, std::ostream& os) {
    static constexpr const char* axes[] = {"x", "y", "z"};
    for (int k = 0; k < field.dim; ++k) os << axes[k] << ',';
    os << "mean,stderr,n\n";
    for (std::size_t p = 0; p < field.points.size(); ++p) {
        for (int k = 0; k < field.dim; ++k) os << format_double(field.points[p][k]) << ',';
        const auto& e = field.estimates[p];
        os << format_double(e.mean) << ',' << format_double(e.std_error) << ',' << e.n_paths << '\n';
    }
}

nlohmann::json to_json(const SolutionField& field) {
    nlohmann::json j;
    j["dim"] = field.dim;
    j["iterations"] = field.iterations;
    j["difference_trace"] = field.difference_trace;
    auto& pts = j["points"] = nlohmann::json::array();
    for (std::size_t p = 0; p < field.points.size(); ++p) {
        const auto& e = field.estimates[p];
        pts.push_back({{"x", std::vector<double>(field.points[p].begin(), field.points[p].begin() + field.dim)},
                       {"mean", e.mean},
                       {"stderr", e.std_error},
                       {"n", e.n_paths}});
    }
    return j;
}

}  // namespace renfk
