#include "experiment.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include <spdlog/spdlog.h>

#include "renfk/error.hpp"
#include "renfk/format.hpp"
#include "renfk/mc_elliptic.hpp"
#include "renfk/parabolic.hpp"
#include "renfk/renorm.hpp"
#include "renfk/revuz.hpp"
#include "renfk/semilinear.hpp"
#include "renfk/trajectory.hpp"

#ifndef RENFK_VERSION
#define RENFK_VERSION "0.0.0"
#endif

namespace renfk::cli {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double sigma_gate = 3.0;

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Output directory, file inventory and stage clock for one run.
class RunContext {
public:
    RunContext(const ExperimentConfig& cfg, RunManifest& manifest) : cfg_(cfg), manifest_(manifest) {
        std::filesystem::create_directories(cfg.out_dir);
    }

    template <class Fn>
    auto stage(const std::string& name, Fn&& fn) {
        spdlog::debug("stage {}", name);
        const auto t0 = Clock::now();
        struct Record {
            RunManifest& m;
            std::string name;
            Clock::time_point t0;
            ~Record() { m.stages.push_back({name, std::chrono::duration<double>(Clock::now() - t0).count()}); }
        } record{manifest_, name, t0};
        return fn();
    }

    void write(const std::string& name, const std::string& content) {
        const auto path = cfg_.out_dir / name;
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write " + path.string());
        out << content;
        out.close();
        if (!out) throw std::runtime_error("write failed for " + path.string());
        manifest_.files.push_back({name, static_cast<std::uintmax_t>(content.size()), fnv1a_hex(content)});
    }

    void write_json(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

private:
    const ExperimentConfig& cfg_;
    RunManifest& manifest_;
};

struct Outcome {
    bool verified = true;
    std::vector<std::string> failures;

    void require(bool ok, std::string what) {
        if (!ok) {
            verified = false;
            failures.push_back(std::move(what));
        }
    }
};

std::string fmt(double x) { return format_double(x); }

json vec_json(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json estimate_json(const Estimate& e) {
    return {{"mean", e.mean}, {"stderr", e.std_error}, {"n", e.n_paths}, {"seed", e.seed}};
}

std::string summary_text(const ExperimentConfig& cfg, const Outcome& out, const std::vector<std::string>& lines) {
    std::ostringstream os;
    os << "experiment: " << to_string(cfg.kind) << "\n";
    os << "config hash: " << cfg.config_hash() << "\n";
    if (cfg.seed) os << "seed: " << *cfg.seed << "  workers: " << cfg.workers << "  paths: " << cfg.paths << "\n";
    for (const auto& l : lines) os << l << "\n";
    os << "verdict: " << (out.verified ? "PASS" : "FAIL") << "\n";
    for (const auto& f : out.failures) os << "  failed: " << f << "\n";
    return os.str();
}

FiniteForm finite_form(const ExperimentConfig& cfg) {
    FiniteForm form = assemble_form(*cfg.chain);
    if (!check_transience(form)) throw InvalidInput("chain is not transient: (-L)^{-1} 1 is not finite and nonnegative");
    return form;
}

std::vector<double> default_k_grid(double sup_u) {
    const double base = sup_u > 0.0 ? sup_u : 1.0;
    std::vector<double> grid;
    for (int i = 1; i <= 10; ++i) grid.push_back(base * i / 6.0);
    return grid;
}

// u from the solution file, or a fresh solve.
FieldVec finite_solution(RunContext& ctx, const ExperimentConfig& cfg, const FiniteForm& form, const Nonlinearity& f,
                         const StateMeasure& mu, json& results) {
    if (cfg.solution_file) {
        FieldVec u = ctx.stage("load_solution", [&] { return read_solution_file(*cfg.solution_file); });
        if (static_cast<std::size_t>(u.size()) != form.size())
            throw InvalidInput("solution file has " + std::to_string(u.size()) + " values, chain has " +
                               std::to_string(form.size()) + " states");
        results["solution_source"] = "file";
        return u;
    }
    auto sol = ctx.stage("solve", [&] { return solve_elliptic_finite(form, f, mu, cfg.solver); });
    results["solution_source"] = "solve";
    results["solve_iterations"] = sol.iterations;
    return sol.u;
}

Outcome run_solve_finite(RunContext& ctx, const ExperimentConfig& cfg) {
    const FiniteForm form = finite_form(cfg);
    const Nonlinearity f = cfg.nonlinearity.build();
    const StateMeasure mu(cfg.measure_weights);
    const auto sol = ctx.stage("solve", [&] { return solve_elliptic_finite(form, f, mu, cfg.solver); });

    std::ostringstream csv;
    csv << "state,value\n";
    std::ostringstream dat;
    dat << "# state u\n";
    for (Eigen::Index i = 0; i < sol.u.size(); ++i) {
        csv << i << ',' << fmt(sol.u[i]) << '\n';
        dat << i << ' ' << fmt(sol.u[i]) << '\n';
    }
    Outcome out;
    const double residual = equation_residual(form, f, mu, sol.u);
    out.require(residual <= cfg.solver.tolerance, "equation residual " + fmt(residual) + " exceeds the tolerance");

    ctx.stage("emit", [&] {
        ctx.write("solution.csv", csv.str());
        ctx.write("solution.dat", dat.str());
        ctx.write_json("results.json", {{"u", vec_json(sol.u)},
                                        {"iterations", sol.iterations},
                                        {"residual", residual},
                                        {"residual_trace", sol.residual_trace},
                                        {"sup_u", sol.u.cwiseAbs().maxCoeff()}});
        ctx.write("summary.txt", summary_text(cfg, out,
                                              {"states: " + std::to_string(form.size()),
                                               "iterations: " + std::to_string(sol.iterations),
                                               "equation residual: " + fmt(residual),
                                               "sup |u|: " + fmt(sol.u.cwiseAbs().maxCoeff())}));
        return 0;
    });
    return out;
}

void emit_renorm(RunContext& ctx, const RenormReport& report, json& results) {
    std::ostringstream dat;
    dat << "# k tv\n";
    for (const auto& e : report.entries) dat << fmt(e.k) << ' ' << fmt(e.tv) << '\n';
    std::ostringstream csv;
    write_csv(report, csv);
    ctx.write("tv_decay.dat", dat.str());
    ctx.write("renorm.csv", csv.str());
    results["renorm"] = to_json(report);
}

std::vector<std::string> renorm_lines(const RenormReport& report) {
    std::vector<std::string> lines{"sup |u|: " + fmt(report.sup_u), "k tv identity_residual"};
    for (const auto& e : report.entries) lines.push_back("  " + fmt(e.k) + " " + fmt(e.tv) + " " + fmt(e.identity_residual));
    lines.push_back(std::string("identity within tolerance: ") + (report.identity_ok ? "yes" : "no"));
    lines.push_back(std::string("tail tv zero: ") + (report.tail_zero_ok ? "yes" : "no"));
    lines.push_back(std::string("tail tv nonincreasing: ") + (report.tail_monotone_ok ? "yes" : "no"));
    return lines;
}

Outcome run_verify_renorm(RunContext& ctx, const ExperimentConfig& cfg) {
    const FiniteForm form = finite_form(cfg);
    const Nonlinearity f = cfg.nonlinearity.build();
    const StateMeasure mu(cfg.measure_weights);
    json results;
    const FieldVec u = finite_solution(ctx, cfg, form, f, mu, results);
    const double residual = equation_residual(form, f, mu, u);
    const auto grid = cfg.k_grid.empty() ? default_k_grid(u.cwiseAbs().maxCoeff()) : cfg.k_grid;
    RenormOptions opts;
    opts.solver_tolerance = cfg.solver.tolerance;
    opts.basis_seed = cfg.seed.value_or(0);
    const auto report = ctx.stage("renorm", [&] { return tv_decay_report(form, u, f, mu, grid, opts); });

    Outcome out;
    out.require(report.identity_ok, "truncated identity residual above tolerance");
    out.require(report.tail_zero_ok, "tv of nu_k not zero for k > sup |u|");
    out.require(report.tail_monotone_ok, "tv of nu_k not nonincreasing on the tail");
    results["equation_residual"] = residual;
    results["u"] = vec_json(u);
    ctx.stage("emit", [&] {
        emit_renorm(ctx, report, results);
        ctx.write_json("results.json", results);
        auto lines = renorm_lines(report);
        lines.insert(lines.begin(), "equation residual of u: " + fmt(residual));
        ctx.write("summary.txt", summary_text(cfg, out, lines));
        return 0;
    });
    return out;
}

std::vector<std::size_t> default_starts(const ExperimentConfig& cfg, std::size_t n) {
    if (!cfg.starts.empty()) return cfg.starts;
    std::vector<std::size_t> s;
    for (std::size_t i = 0; i < std::min<std::size_t>(n, 3); ++i) s.push_back(i);
    return s;
}

Outcome run_revuz(RunContext& ctx, const ExperimentConfig& cfg) {
    const FiniteForm form = finite_form(cfg);
    const StateMeasure mu(cfg.measure_weights);
    if (!mu.nonnegative()) throw InvalidInput("revuz-check requires a nonnegative measure");
    const auto report = ctx.stage("revuz", [&] { return revuz_check_finite(form, mu, cfg.horizon, cfg.mc()); });

    const FieldVec pot = potential(form, mu);
    const FieldVec zero_f = FieldVec::Zero(static_cast<Eigen::Index>(form.size()));
    const auto starts = default_starts(cfg, form.size());
    std::ostringstream csv;
    csv << "state,mean,stderr,n,potential,z\n";
    json rows = json::array();
    double max_z = 0.0;
    ctx.stage("potential", [&] {
        for (std::size_t k = 0; k < starts.size(); ++k) {
            McOptions mc = cfg.mc();
            mc.seed = mix_seed(mc.seed, k);
            const auto est = feynman_kac_mc(form, zero_f, mu, starts[k], mc);
            const double target = pot[static_cast<Eigen::Index>(starts[k])];
            const double z = z_score(est.mean, target, est.std_error);
            max_z = std::max(max_z, z);
            csv << starts[k] << ',' << fmt(est.mean) << ',' << fmt(est.std_error) << ',' << est.n_paths << ','
                << fmt(target) << ',' << fmt(z) << '\n';
            rows.push_back({{"state", starts[k]}, {"estimate", estimate_json(est)}, {"potential", target}, {"z", z}});
        }
        return 0;
    });

    Outcome out;
    out.require(report.within_horizon_value(sigma_gate),
                "Revuz estimate is " + fmt(report.z_horizon) + " stderr from the finite-horizon value");
    out.require(max_z <= sigma_gate, "E_x[A_zeta] is " + fmt(max_z) + " stderr from the potential");
    ctx.stage("emit", [&] {
        ctx.write("potential.csv", csv.str());
        ctx.write_json("results.json", {{"revuz", to_json(report)}, {"potential_check", rows}});
        ctx.write("summary.txt",
                  summary_text(cfg, out,
                               {"horizon t: " + fmt(report.horizon),
                                "estimate: " + fmt(report.estimate.mean) + " +- " + fmt(report.estimate.std_error),
                                "mu(E): " + fmt(report.target) + "  z = " + fmt(report.z_target),
                                "finite-horizon value: " + fmt(report.horizon_value) + "  z = " + fmt(report.z_horizon),
                                "max z, E_x[A_zeta] vs potential: " + fmt(max_z)}));
        return 0;
    });
    return out;
}

Outcome run_bsde(RunContext& ctx, const ExperimentConfig& cfg) {
    const FiniteForm form = finite_form(cfg);
    const Nonlinearity f = cfg.nonlinearity.build();
    const StateMeasure mu(cfg.measure_weights);
    json results;
    FieldVec u = finite_solution(ctx, cfg, form, f, mu, results);
    if (cfg.perturb) {
        const double bump = cfg.perturb->relative * u.cwiseAbs().maxCoeff();
        u[static_cast<Eigen::Index>(cfg.perturb->state)] += bump;
        results["perturbation"] = {{"state", cfg.perturb->state}, {"added", bump}};
    }
    BsdeOptions opts;
    opts.checkpoints = cfg.checkpoints;
    opts.starts = cfg.starts;
    opts.mc = cfg.mc();
    opts.threshold = sigma_gate;
    const auto report = ctx.stage("bsde", [&] { return bsde_residual(form, u, f, mu, opts); });

    std::ostringstream csv;
    csv << "start,t0,t1,mean,stderr,n,z\n";
    for (const auto& inc : report.increments)
        csv << inc.start << ',' << fmt(inc.t0) << ',' << fmt(inc.t1) << ',' << fmt(inc.increment.mean) << ','
            << fmt(inc.increment.std_error) << ',' << inc.increment.n_paths << ',' << fmt(inc.z) << '\n';
    Outcome out;
    out.require(report.passed(), "martingale increment mean at " + fmt(report.max_abs_z) + " stderr");
    results["bsde"] = to_json(report);
    ctx.stage("emit", [&] {
        ctx.write("increments.csv", csv.str());
        ctx.write_json("results.json", results);
        ctx.write("summary.txt", summary_text(cfg, out,
                                              {"increments: " + std::to_string(report.increments.size()),
                                               "max |z|: " + fmt(report.max_abs_z)}));
        return 0;
    });
    return out;
}

Outcome run_mc_elliptic(RunContext& ctx, const ExperimentConfig& cfg) {
    const EllipticSpec& spec = *cfg.elliptic;
    const Nonlinearity f = cfg.nonlinearity.build();
    const FieldMeasure mu = spec.measure();
    PicardMcOptions opts;
    opts.mc = cfg.mc();
    opts.eps_shell = spec.eps_shell;
    opts.per_axis = spec.per_axis;
    const int dim = spec.domain.dim();
    const bool fractional = spec.op.kind == OperatorKind::Kind::fractional;

    std::vector<Point> points;
    std::vector<Estimate> estimates;
    json results;
    if (f.constant_in_y() && !spec.points.empty()) {
        const SourceFn g = [&](const Point& x) {
            const double base = spec.source + f(Site{0.0, 0, x}, 0.0);
            return fractional ? base + mu.density(x) : base;
        };
        const FieldMeasure none = FieldMeasure::zero(dim);
        std::unique_ptr<StableBallKernel> kernel;
        if (fractional) kernel = std::make_unique<StableBallKernel>(dim, spec.op.alpha);
        ctx.stage("linear", [&] {
            for (std::size_t k = 0; k < spec.points.size(); ++k) {
                PicardMcOptions local = opts;
                local.mc.seed = mix_seed(opts.mc.seed, k);
                estimates.push_back(
                    linear_estimate(spec.domain, spec.op, spec.points[k], g, fractional ? none : mu, local, kernel.get()));
            }
            return 0;
        });
        points = spec.points;
        results["method"] = "linear";
    } else {
        const Nonlinearity shifted(
            [&](const Site& s, double y) { return f(s, y) + spec.source; }, f.lipschitz(), f.monotonicity(), f.alpha(),
            f.name());
        const auto field = ctx.stage("picard", [&] { return picard_mc(spec.domain, spec.op, shifted, mu, cfg.solver, opts); });
        points = field.points;
        estimates = field.estimates;
        results["method"] = "picard";
        results["iterations"] = field.iterations;
        results["difference_trace"] = field.difference_trace;
    }

    Outcome out;
    const bool nonneg_data = spec.data_nonnegative() && std::all_of(points.begin(), points.end(), [&](const Point& x) {
                                 return f(Site{0.0, 0, x}, 0.0) >= 0.0;
                             });
    std::size_t below = 0;
    if (nonneg_data)
        for (const auto& e : estimates)
            if (e.mean < -sigma_gate * e.std_error - 1e-12) ++below;
    out.require(below == 0, std::to_string(below) + " estimates violate u >= 0 for nonnegative data");
    results["nonnegative_data"] = nonneg_data;

    std::ostringstream csv;
    std::ostringstream dat;
    const char* axes[] = {"x", "y", "z"};
    for (int d = 0; d < dim; ++d) csv << axes[d] << ',';
    csv << "mean,stderr,n\n";
    dat << "#";
    for (int d = 0; d < dim; ++d) dat << ' ' << axes[d];
    dat << " mean stderr\n";
    json rows = json::array();
    for (std::size_t k = 0; k < points.size(); ++k) {
        std::vector<double> coords;
        for (int d = 0; d < dim; ++d) {
            csv << fmt(points[k][d]) << ',';
            dat << fmt(points[k][d]) << ' ';
            coords.push_back(points[k][d]);
        }
        csv << fmt(estimates[k].mean) << ',' << fmt(estimates[k].std_error) << ',' << estimates[k].n_paths << '\n';
        dat << fmt(estimates[k].mean) << ' ' << fmt(estimates[k].std_error) << '\n';
        rows.push_back({{"x", coords}, {"estimate", estimate_json(estimates[k])}});
    }
    results["points"] = rows;
    ctx.stage("emit", [&] {
        ctx.write("field.csv", csv.str());
        ctx.write("profile.dat", dat.str());
        ctx.write_json("results.json", results);
        double max_se = 0.0;
        for (const auto& e : estimates) max_se = std::max(max_se, e.std_error);
        ctx.write("summary.txt", summary_text(cfg, out,
                                              {"operator: " + std::string(fractional ? "fractional alpha = " + fmt(spec.op.alpha)
                                                                                     : "laplacian"),
                                               "method: " + results["method"].get<std::string>(),
                                               "points: " + std::to_string(points.size()),
                                               "max stderr: " + fmt(max_se)}));
        return 0;
    });
    return out;
}

std::size_t node_of(double s, double dt, double horizon) {
    const double j = std::round(s / dt);
    if (std::abs(j * dt - s) > 1e-9 * std::max(1.0, horizon))
        throw InvalidInput("time point " + format_double(s) + " is not a grid node for dt = " + format_double(dt));
    return static_cast<std::size_t>(j);
}

Outcome run_mc_parabolic(RunContext& ctx, const ExperimentConfig& cfg) {
    const ParabolicProblem& prob = *cfg.parabolic;
    const auto field = ctx.stage("grid", [&] { return solve_parabolic_finite(prob, cfg.dt, cfg.solver); });
    const auto fine = ctx.stage("grid_half_step", [&] { return solve_parabolic_finite(prob, cfg.dt / 2.0, cfg.solver); });

    std::vector<TimeSpacePoint> points = cfg.time_points;
    if (points.empty()) {
        std::mt19937_64 rng(*cfg.seed);
        const std::size_t last = field.nodes() - 1;
        for (int k = 0; k < 5; ++k) {
            const std::size_t j = std::uniform_int_distribution<std::size_t>(0, last - 1)(rng);
            const std::size_t x = std::uniform_int_distribution<std::size_t>(0, prob.size() - 1)(rng);
            points.push_back({field.times[j], x});
        }
    }

    Outcome out;
    std::ostringstream csv;
    csv << "t,state,mean,stderr,n,grid,grid_half_step,tolerance\n";
    json rows = json::array();
    ctx.stage("mc", [&] {
        for (std::size_t k = 0; k < points.size(); ++k) {
            const auto& z = points[k];
            const std::size_t j = node_of(z.s, cfg.dt, prob.horizon);
            const double grid = field.values(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(z.x));
            const double half = fine.values(static_cast<Eigen::Index>(2 * j), static_cast<Eigen::Index>(z.x));
            McOptions mc = cfg.mc();
            mc.seed = mix_seed(mc.seed, k);
            const auto est = mc_parabolic_estimate(prob, field, z, mc);
            const double tol = sigma_gate * est.std_error + 4.0 * std::abs(grid - half) + 1e-12;
            const bool ok = std::abs(est.mean - grid) <= tol;
            out.require(ok, "MC at (t=" + fmt(z.s) + ", x=" + std::to_string(z.x) + ") differs from the grid by " +
                                fmt(std::abs(est.mean - grid)) + " > " + fmt(tol));
            csv << fmt(z.s) << ',' << z.x << ',' << fmt(est.mean) << ',' << fmt(est.std_error) << ',' << est.n_paths << ','
                << fmt(grid) << ',' << fmt(half) << ',' << fmt(tol) << '\n';
            rows.push_back({{"t", z.s}, {"state", z.x}, {"estimate", estimate_json(est)}, {"grid", grid},
                            {"grid_half_step", half}, {"tolerance", tol}, {"agree", ok}});
        }
        return 0;
    });

    double sup = field.sup_abs();
    if (prob.terminal.size()) sup = std::max(sup, prob.terminal.cwiseAbs().maxCoeff());
    const auto grid = cfg.k_grid.empty() ? default_k_grid(sup) : cfg.k_grid;
    RenormOptions ropts;
    ropts.solver_tolerance = cfg.solver.tolerance;
    ropts.basis_seed = *cfg.seed;
    const auto report = ctx.stage("renorm", [&] { return renorm_parabolic_finite(prob, field, grid, ropts); });
    out.require(report.identity_ok, "discrete truncated identity residual above tolerance");
    out.require(report.tail_zero_ok, "tv of nu_k not zero for k > sup |u|");
    out.require(report.tail_monotone_ok, "tv of nu_k not nonincreasing on the tail");

    json results{{"dt", cfg.dt}, {"nodes", field.nodes()}, {"mc_points", rows}};
    ctx.stage("emit", [&] {
        std::ostringstream fcsv;
        write_csv(field, fcsv);
        ctx.write("field.csv", fcsv.str());
        ctx.write("mc_points.csv", csv.str());
        emit_renorm(ctx, report, results);
        ctx.write_json("results.json", results);
        auto lines = renorm_lines(report);
        lines.insert(lines.begin(), "dt: " + fmt(cfg.dt) + "  nodes: " + std::to_string(field.nodes()));
        lines.insert(lines.begin() + 1, "MC points checked: " + std::to_string(points.size()));
        ctx.write("summary.txt", summary_text(cfg, out, lines));
        return 0;
    });
    return out;
}

}  // namespace

std::string_view to_string(RunStatus status) {
    switch (status) {
        case RunStatus::ok: return "ok";
        case RunStatus::verification_failed: return "verification_failed";
        case RunStatus::error: return "error";
    }
    return "error";
}

int RunManifest::exit_code() const noexcept {
    switch (status) {
        case RunStatus::ok: return 0;
        case RunStatus::verification_failed: return 2;
        case RunStatus::error: return 1;
    }
    return 1;
}

nlohmann::json RunManifest::to_json() const {
    json stage_list = json::array();
    for (const auto& s : stages) stage_list.push_back({{"name", s.name}, {"seconds", s.seconds}});
    json file_list = json::array();
    for (const auto& f : files) file_list.push_back({{"name", f.name}, {"bytes", f.bytes}, {"fnv1a", f.fnv1a}});
    return {{"config_hash", config_hash}, {"version", version},           {"started_utc", started_utc},
            {"finished_utc", finished_utc}, {"wall_clock_seconds", wall_clock_seconds},
            {"stages", stage_list},         {"files", file_list},         {"status", to_string(status)},
            {"exit_code", exit_code()},     {"message", message}};
}

const char* tool_version() noexcept { return RENFK_VERSION; }

RunManifest run_experiment(const ExperimentConfig& cfg) {
    RunManifest manifest;
    manifest.config_hash = cfg.config_hash();
    manifest.version = tool_version();
    manifest.started_utc = utc_now();
    const auto t0 = Clock::now();

    RunContext ctx(cfg, manifest);
    ctx.write_json("config.effective.json", cfg.effective);
    try {
        Outcome out;
        switch (cfg.kind) {
            case ExperimentKind::solve_finite: out = run_solve_finite(ctx, cfg); break;
            case ExperimentKind::verify_renorm: out = run_verify_renorm(ctx, cfg); break;
            case ExperimentKind::mc_elliptic: out = run_mc_elliptic(ctx, cfg); break;
            case ExperimentKind::mc_parabolic: out = run_mc_parabolic(ctx, cfg); break;
            case ExperimentKind::revuz_check: out = run_revuz(ctx, cfg); break;
            case ExperimentKind::bsde_check: out = run_bsde(ctx, cfg); break;
        }
        manifest.status = out.verified ? RunStatus::ok : RunStatus::verification_failed;
        for (const auto& f : out.failures) manifest.message += (manifest.message.empty() ? "" : "; ") + f;
    } catch (const NotConverged& e) {
        manifest.status = RunStatus::error;
        manifest.message = std::string("solver did not converge: ") + e.what();
    } catch (const std::exception& e) {
        manifest.status = RunStatus::error;
        manifest.message = e.what();
    }

    manifest.finished_utc = utc_now();
    manifest.wall_clock_seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    const auto path = cfg.out_dir / "manifest.json";
    std::ofstream out(path);
    out << manifest.to_json().dump(2) << "\n";
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return manifest;
}

}  // namespace renfk::cli
