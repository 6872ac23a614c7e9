#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "renfk/domain.hpp"
#include "renfk/mc_engine.hpp"
#include "renfk/measures.hpp"
#include "renfk/nonlinearity.hpp"
#include "renfk/semilinear.hpp"
#include "renfk/stable.hpp"
#include "renfk/wos.hpp"

namespace renfk {

/// The continuum generator. `laplacian` means generator Laplacian (Brownian
/// motion at speed sqrt 2), so -Laplacian u = g is solved.
struct OperatorKind {
    enum class Kind { laplacian, fractional };
    Kind kind = Kind::laplacian;
    double alpha = 2.0;

    static OperatorKind laplacian() { return {}; }
    static OperatorKind fractional(double alpha);
};

/// Regular lattice on the domain's bounding box; `interior` lists the
/// lattice nodes strictly inside the domain.
class EvaluationGrid {
public:
    EvaluationGrid(const Domain& domain, std::size_t per_axis = 33);

    std::size_t per_axis() const noexcept { return per_axis_; }
    std::size_t node_count() const noexcept { return node_count_; }
    const std::vector<std::size_t>& interior() const noexcept { return interior_; }
    Point node(std::size_t flat) const;

    /// Multilinear interpolation of node values (exterior nodes hold 0).
    double interpolate(const std::vector<double>& node_values, const Point& x) const;

private:
    int dim_;
    std::size_t per_axis_;
    std::size_t node_count_;
    Point lo_;
    Point step_;
    std::vector<std::size_t> interior_;
};

struct SolutionField {
    std::vector<Point> points;
    std::vector<Estimate> estimates;
    int dim = 1;
    int iterations = 0;
    /// sup over points of |estimate - u_m| per sweep
    std::vector<double> difference_trace;
};

struct PicardMcOptions {
    McOptions mc{};
    double eps_shell = -1.0;
    std::size_t per_axis = 33;
};

/// Linear estimate at one point for either operator; `mu` must be empty
/// for the fractional operator unless folded into g.
Estimate linear_estimate(const Domain& domain, const OperatorKind& op, const Point& x, const SourceFn& g,
                         const FieldMeasure& mu, const PicardMcOptions& opts, const StableBallKernel* kernel = nullptr);

/// Grid-frozen Picard iteration for -Lu = f(x, u) + mu: each sweep estimates
/// u_{m+1} at the interior lattice nodes with g = f(., interp(u_m)). Every
/// node reuses its own substream across sweeps, so sweeps differ only
/// through u_m. When Lipschitz(f) * sup E tau >= 1 the update is relaxed,
/// u_{m+1} = u_m + theta (estimate - u_m). Stops when the sup of
/// |estimate - u_m| is at most cfg.tolerance + 3 * max stderr; throws
/// NotConverged otherwise.
SolutionField picard_mc(const Domain& domain, const OperatorKind& op, const Nonlinearity& f, const FieldMeasure& mu,
                        const SolveConfig& cfg, const PicardMcOptions& opts);

/// Columns: x[,y[,z]],mean,stderr,n
void write_csv(const SolutionField& field, std::ostream& os);
nlohmann::json to_json(const SolutionField& field);

}  // namespace renfk
