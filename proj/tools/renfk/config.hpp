#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "renfk/domain.hpp"
#include "renfk/finite_form.hpp"
#include "renfk/measures.hpp"
#include "renfk/mc_elliptic.hpp"
#include "renfk/nonlinearity.hpp"
#include "renfk/parabolic.hpp"
#include "renfk/semilinear.hpp"

namespace renfk::cli {

enum class ExperimentKind { solve_finite, verify_renorm, mc_elliptic, mc_parabolic, revuz_check, bsde_check };

std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_kind(std::string_view name);
bool is_stochastic(ExperimentKind kind);

/// One schema violation, located by JSON pointer.
struct ConfigIssue {
    std::string pointer;
    std::string message;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

struct NonlinearitySpec {
    std::string name = "zero";
    std::map<std::string, double> params;

    Nonlinearity build() const { return builtin_nonlinearity(name, params); }
};

struct PerturbSpec {
    std::size_t state = 0;
    /// Added to u[state] as a multiple of sup |u|.
    double relative = 0.0;
};

struct EllipticSpec {
    Domain domain = Domain::interval(-1.0, 1.0);
    OperatorKind op{};
    double source = 0.0;  ///< constant g
    double density = 0.0; ///< constant part of mu
    std::vector<SphereShell> shells;
    std::vector<PlaneSlab> slabs;
    std::vector<Point> points;  ///< explicit evaluation points (linear runs)
    std::size_t per_axis = 33;
    double eps_shell = -1.0;

    FieldMeasure measure() const;
    bool data_nonnegative() const;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::solve_finite;
    /// Effective config (overrides applied); hashed for the manifest.
    nlohmann::json effective;
    std::optional<std::uint64_t> seed;
    unsigned workers = 1;
    std::uint64_t paths = 100'000;
    std::filesystem::path out_dir = "out";

    // finite-chain experiments
    std::optional<FiniteChainSpec> chain;
    Eigen::VectorXd measure_weights;
    NonlinearitySpec nonlinearity;
    SolveConfig solver;
    std::vector<double> k_grid;
    std::optional<std::filesystem::path> solution_file;
    double horizon = 0.01;
    std::vector<std::size_t> starts;
    std::vector<double> checkpoints{0.0, 0.5, 1.0, 2.0};
    std::optional<PerturbSpec> perturb;

    std::optional<EllipticSpec> elliptic;

    std::optional<ParabolicProblem> parabolic;
    NonlinearitySpec parabolic_f;
    double dt = 1.0 / 256.0;
    std::vector<TimeSpacePoint> time_points;

    std::string config_hash() const;
    McOptions mc() const { return McOptions{paths, seed.value_or(0), workers}; }
};

/// Command-line overrides applied before validation.
struct Overrides {
    std::optional<ExperimentKind> kind;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> workers;
    std::optional<std::filesystem::path> out_dir;
};

/// Parses and validates a config document; relative file references are
/// resolved against `base_dir`. Throws ConfigError listing every violation.
ExperimentConfig parse_config_json(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                                   const Overrides& overrides = {});

/// Reads `path` and calls parse_config_json.
ExperimentConfig parse_config(const std::filesystem::path& path, const Overrides& overrides = {});

/// Reads a solution vector from CSV (state,value) or a JSON array.
Eigen::VectorXd read_solution_file(const std::filesystem::path& path);

}  // namespace renfk::cli
