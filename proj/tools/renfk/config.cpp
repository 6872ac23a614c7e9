#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "renfk/error.hpp"
#include "renfk/format.hpp"

namespace renfk::cli {

namespace {

using nlohmann::json;

constexpr std::pair<ExperimentKind, std::string_view> kind_names[] = {
    {ExperimentKind::solve_finite, "solve-finite"}, {ExperimentKind::verify_renorm, "verify-renorm"},
    {ExperimentKind::mc_elliptic, "mc-elliptic"},   {ExperimentKind::mc_parabolic, "mc-parabolic"},
    {ExperimentKind::revuz_check, "revuz-check"},   {ExperimentKind::bsde_check, "bsde-check"},
};

std::string join_issues(const std::vector<ConfigIssue>& issues) {
    std::ostringstream os;
    os << "invalid config:";
    for (const auto& i : issues) os << "\n  " << (i.pointer.empty() ? "/" : i.pointer) << ": " << i.message;
    return os.str();
}

// Collects schema violations while walking the document.
class Reader {
public:
    std::vector<ConfigIssue> issues;

    void fail(const std::string& ptr, std::string msg) { issues.push_back({ptr, std::move(msg)}); }

    const json* child(const json& obj, const std::string& ptr, const char* key, bool required) {
        if (!obj.is_object()) {
            fail(ptr, "expected an object");
            return nullptr;
        }
        const auto it = obj.find(key);
        if (it == obj.end()) {
            if (required) fail(ptr + "/" + key, "required field is missing");
            return nullptr;
        }
        return &*it;
    }

    std::optional<double> number(const json& j, const std::string& ptr) {
        if (!j.is_number()) {
            fail(ptr, "expected a number");
            return std::nullopt;
        }
        const double v = j.get<double>();
        if (!std::isfinite(v)) {
            fail(ptr, "must be finite");
            return std::nullopt;
        }
        return v;
    }

    std::optional<std::uint64_t> unsigned_int(const json& j, const std::string& ptr) {
        if (!j.is_number_unsigned() && !(j.is_number_integer() && j.get<long long>() >= 0)) {
            fail(ptr, "expected a nonnegative integer");
            return std::nullopt;
        }
        return j.get<std::uint64_t>();
    }

    std::optional<std::string> string(const json& j, const std::string& ptr) {
        if (!j.is_string()) {
            fail(ptr, "expected a string");
            return std::nullopt;
        }
        return j.get<std::string>();
    }

    std::optional<Eigen::VectorXd> vector(const json& j, const std::string& ptr) {
        if (!j.is_array()) {
            fail(ptr, "expected an array of numbers");
            return std::nullopt;
        }
        Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
        bool ok = true;
        for (std::size_t i = 0; i < j.size(); ++i) {
            const auto x = number(j[i], ptr + "/" + std::to_string(i));
            if (x) v[static_cast<Eigen::Index>(i)] = *x;
            else ok = false;
        }
        return ok ? std::optional(v) : std::nullopt;
    }

    std::optional<Eigen::MatrixXd> matrix(const json& j, const std::string& ptr) {
        if (!j.is_array() || j.empty()) {
            fail(ptr, "expected a nonempty array of rows");
            return std::nullopt;
        }
        const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
        Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(cols));
        bool ok = true;
        for (std::size_t r = 0; r < j.size(); ++r) {
            const std::string rp = ptr + "/" + std::to_string(r);
            if (!j[r].is_array() || j[r].size() != cols) {
                fail(rp, "malformed matrix: rows must be arrays of equal length");
                ok = false;
                continue;
            }
            for (std::size_t c = 0; c < cols; ++c) {
                const auto x = number(j[r][c], rp + "/" + std::to_string(c));
                if (x) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = *x;
                else ok = false;
            }
        }
        return ok ? std::optional(m) : std::nullopt;
    }

    std::optional<Point> point(const json& j, const std::string& ptr, int dim) {
        const auto v = vector(j, ptr);
        if (!v) return std::nullopt;
        if (v->size() != dim) {
            fail(ptr, "expected " + std::to_string(dim) + " coordinates");
            return std::nullopt;
        }
        Point p{};
        for (int k = 0; k < dim; ++k) p[k] = (*v)[k];
        return p;
    }

    void keys(const json& obj, const std::string& ptr, std::initializer_list<const char*> allowed) {
        if (!obj.is_object()) return;
        const std::set<std::string> ok(allowed.begin(), allowed.end());
        for (const auto& [k, v] : obj.items())
            if (!ok.count(k)) fail(ptr + "/" + k, "unknown field");
    }
};

// Entry-level generator checks, so errors point at the offending row.
bool check_generator(Reader& r, const Eigen::MatrixXd& L, const std::string& ptr) {
    bool ok = true;
    for (Eigen::Index i = 0; i < L.rows(); ++i) {
        const std::string rp = ptr + "/" + std::to_string(i);
        double scale = 0.0;
        for (Eigen::Index j = 0; j < L.cols(); ++j) {
            scale += std::abs(L(i, j));
            if (i != j && L(i, j) < 0.0) {
                r.fail(rp + "/" + std::to_string(j), "row " + std::to_string(i) + ": off-diagonal rate is negative");
                ok = false;
            }
        }
        const double sum = L.row(i).sum();
        if (sum > 1e-12 * std::max(1.0, scale)) {
            r.fail(rp, "row " + std::to_string(i) + " has positive sum " + format_double(sum));
            ok = false;
        }
    }
    return ok;
}

std::optional<FiniteChainSpec> read_chain(Reader& r, const json& j, const std::string& ptr) {
    r.keys(j, ptr, {"m", "L"});
    const json* m = r.child(j, ptr, "m", true);
    const json* L = r.child(j, ptr, "L", true);
    if (!m || !L) return std::nullopt;
    auto mv = r.vector(*m, ptr + "/m");
    auto Lm = r.matrix(*L, ptr + "/L");
    if (!mv || !Lm) return std::nullopt;
    FiniteChainSpec spec{*mv, *Lm};
    if (Lm->rows() != mv->size() || Lm->cols() != mv->size()) {
        r.fail(ptr + "/L", "malformed matrix: expected " + std::to_string(mv->size()) + "x" + std::to_string(mv->size()));
        return std::nullopt;
    }
    if (!check_generator(r, *Lm, ptr + "/L")) return std::nullopt;
    try {
        validate(spec);
    } catch (const InvalidInput& e) {
        r.fail(ptr + "/m", e.what());
        return std::nullopt;
    }
    return spec;
}

NonlinearitySpec read_nonlinearity(Reader& r, const json& j, const std::string& ptr) {
    NonlinearitySpec spec;
    r.keys(j, ptr, {"name", "params"});
    if (const json* n = r.child(j, ptr, "name", true))
        if (auto s = r.string(*n, ptr + "/name")) spec.name = *s;
    if (const json* p = r.child(j, ptr, "params", false)) {
        if (!p->is_object()) {
            r.fail(ptr + "/params", "expected an object");
        } else {
            for (const auto& [k, v] : p->items())
                if (auto x = r.number(v, ptr + "/params/" + k)) spec.params[k] = *x;
        }
    }
    try {
        (void)spec.build();
    } catch (const std::exception& e) {
        r.fail(ptr, e.what());
    }
    return spec;
}

Domain read_domain(Reader& r, const json& j, const std::string& ptr, bool& ok) {
    ok = false;
    r.keys(j, ptr, {"kind", "dim", "center", "radius", "lower", "upper"});
    const json* kind = r.child(j, ptr, "kind", true);
    if (!kind) return Domain::interval(-1, 1);
    const auto name = r.string(*kind, ptr + "/kind");
    if (!name) return Domain::interval(-1, 1);
    try {
        if (*name == "interval") {
            const json* lo = r.child(j, ptr, "lower", true);
            const json* hi = r.child(j, ptr, "upper", true);
            if (!lo || !hi) return Domain::interval(-1, 1);
            auto a = r.number(*lo, ptr + "/lower");
            auto b = r.number(*hi, ptr + "/upper");
            if (!a || !b) return Domain::interval(-1, 1);
            ok = true;
            return Domain::interval(*a, *b);
        }
        const json* dj = r.child(j, ptr, "dim", true);
        const auto dim = dj ? r.unsigned_int(*dj, ptr + "/dim") : std::nullopt;
        if (!dim) return Domain::interval(-1, 1);
        if (*dim < 1 || *dim > 3) {
            r.fail(ptr + "/dim", "dimension must be 1, 2 or 3");
            return Domain::interval(-1, 1);
        }
        const int d = static_cast<int>(*dim);
        if (*name == "ball") {
            Point c{};
            if (const json* cj = r.child(j, ptr, "center", false)) {
                auto p = r.point(*cj, ptr + "/center", d);
                if (!p) return Domain::interval(-1, 1);
                c = *p;
            }
            const json* rj = r.child(j, ptr, "radius", true);
            const auto rad = rj ? r.number(*rj, ptr + "/radius") : std::nullopt;
            if (!rad) return Domain::interval(-1, 1);
            ok = true;
            return Domain::ball(d, c, *rad);
        }
        if (*name == "box") {
            const json* lo = r.child(j, ptr, "lower", true);
            const json* hi = r.child(j, ptr, "upper", true);
            if (!lo || !hi) return Domain::interval(-1, 1);
            auto a = r.point(*lo, ptr + "/lower", d);
            auto b = r.point(*hi, ptr + "/upper", d);
            if (!a || !b) return Domain::interval(-1, 1);
            ok = true;
            return Domain::box(d, *a, *b);
        }
        r.fail(ptr + "/kind", "unknown domain kind '" + *name + "' (ball, box, interval)");
    } catch (const InvalidInput& e) {
        ok = false;
        r.fail(ptr, e.what());
    }
    return Domain::interval(-1, 1);
}

void read_elliptic(Reader& r, const json& doc, ExperimentConfig& cfg) {
    EllipticSpec spec;
    bool domain_ok = false;
    if (const json* d = r.child(doc, "", "domain", true)) spec.domain = read_domain(r, *d, "/domain", domain_ok);
    const int dim = spec.domain.dim();
    if (const json* op = r.child(doc, "", "operator", false)) {
        r.keys(*op, "/operator", {"kind", "alpha"});
        const json* k = r.child(*op, "/operator", "kind", true);
        const auto name = k ? r.string(*k, "/operator/kind") : std::nullopt;
        if (name && *name == "fractional") {
            const json* a = r.child(*op, "/operator", "alpha", true);
            if (auto alpha = a ? r.number(*a, "/operator/alpha") : std::nullopt) {
                try {
                    spec.op = OperatorKind::fractional(*alpha);
                } catch (const InvalidInput& e) {
                    r.fail("/operator/alpha", e.what());
                }
            }
            if (domain_ok && !spec.domain.is_round())
                r.fail("/domain/kind", "the fractional operator supports balls and intervals only");
        } else if (name && *name != "laplacian") {
            r.fail("/operator/kind", "unknown operator '" + *name + "' (laplacian, fractional)");
        }
    }
    if (const json* s = r.child(doc, "", "source", false))
        if (auto v = r.number(*s, "/source")) spec.source = *v;
    if (const json* m = r.child(doc, "", "measure", false)) {
        r.keys(*m, "/measure", {"density", "shells", "slabs"});
        if (const json* d = r.child(*m, "/measure", "density", false))
            if (auto v = r.number(*d, "/measure/density")) spec.density = *v;
        if (const json* sh = r.child(*m, "/measure", "shells", false)) {
            if (!sh->is_array()) r.fail("/measure/shells", "expected an array");
            else
                for (std::size_t i = 0; i < sh->size(); ++i) {
                    const std::string p = "/measure/shells/" + std::to_string(i);
                    const json& e = (*sh)[i];
                    r.keys(e, p, {"center", "radius", "mass", "width"});
                    SphereShell s;
                    if (const json* c = r.child(e, p, "center", false))
                        if (auto pt = r.point(*c, p + "/center", dim)) s.center = *pt;
                    const json* rj = r.child(e, p, "radius", true);
                    const json* mj = r.child(e, p, "mass", true);
                    const json* wj = r.child(e, p, "width", true);
                    if (rj) s.radius = r.number(*rj, p + "/radius").value_or(0.0);
                    if (mj) s.mass = r.number(*mj, p + "/mass").value_or(0.0);
                    if (wj) s.width = r.number(*wj, p + "/width").value_or(0.0);
                    if (!(s.width > 0.0) || !(s.radius > 0.5 * s.width)) r.fail(p, "need width > 0 and radius > width / 2");
                    spec.shells.push_back(s);
                }
        }
        if (const json* sl = r.child(*m, "/measure", "slabs", false)) {
            if (!sl->is_array()) r.fail("/measure/slabs", "expected an array");
            else
                for (std::size_t i = 0; i < sl->size(); ++i) {
                    const std::string p = "/measure/slabs/" + std::to_string(i);
                    const json& e = (*sl)[i];
                    r.keys(e, p, {"axis", "offset", "surface_density", "width"});
                    PlaneSlab s;
                    if (const json* a = r.child(e, p, "axis", true))
                        s.axis = static_cast<int>(r.unsigned_int(*a, p + "/axis").value_or(0));
                    if (const json* o = r.child(e, p, "offset", true)) s.offset = r.number(*o, p + "/offset").value_or(0.0);
                    if (const json* d = r.child(e, p, "surface_density", true))
                        s.surface_density = r.number(*d, p + "/surface_density").value_or(0.0);
                    if (const json* w = r.child(e, p, "width", true)) s.width = r.number(*w, p + "/width").value_or(0.0);
                    if (s.axis >= dim) r.fail(p + "/axis", "axis exceeds the domain dimension");
                    if (!(s.width > 0.0)) r.fail(p + "/width", "width must be positive");
                    spec.slabs.push_back(s);
                }
        }
    }
    if (const json* pts = r.child(doc, "", "points", false)) {
        if (!pts->is_array()) {
            r.fail("/points", "expected an array of points");
        } else {
            for (std::size_t i = 0; i < pts->size(); ++i) {
                const std::string p = "/points/" + std::to_string(i);
                if (auto pt = r.point((*pts)[i], p, dim)) {
                    if (domain_ok && !spec.domain.contains(*pt)) r.fail(p, "point lies outside the domain");
                    spec.points.push_back(*pt);
                }
            }
        }
    }
    if (const json* g = r.child(doc, "", "per_axis", false)) {
        const auto v = r.unsigned_int(*g, "/per_axis");
        if (v && *v < 2) r.fail("/per_axis", "need at least 2 points per axis");
        if (v) spec.per_axis = static_cast<std::size_t>(*v);
    }
    if (const json* e = r.child(doc, "", "eps_shell", false)) {
        const auto v = r.number(*e, "/eps_shell");
        if (v && !(*v > 0.0)) r.fail("/eps_shell", "eps_shell must be positive");
        if (v) spec.eps_shell = *v;
    }
    cfg.elliptic = std::move(spec);
}

void read_parabolic(Reader& r, const json& doc, ExperimentConfig& cfg) {
    const json* pj = r.child(doc, "", "problem", true);
    if (!pj) return;
    const std::string pp = "/problem";
    r.keys(*pj, pp, {"T", "m", "generators", "phi", "mu", "f"});
    ParabolicProblem prob;
    bool ok = true;
    if (const json* t = r.child(*pj, pp, "T", true)) {
        if (auto v = r.number(*t, pp + "/T")) prob.horizon = *v;
        else ok = false;
    } else {
        ok = false;
    }
    if (const json* m = r.child(*pj, pp, "m", true)) {
        if (auto v = r.vector(*m, pp + "/m")) prob.m = *v;
        else ok = false;
    } else {
        ok = false;
    }
    if (const json* g = r.child(*pj, pp, "generators", true)) {
        if (!g->is_array() || g->empty()) {
            r.fail(pp + "/generators", "expected a nonempty array");
            ok = false;
        } else {
            for (std::size_t i = 0; i < g->size(); ++i) {
                const std::string p = pp + "/generators/" + std::to_string(i);
                const json& e = (*g)[i];
                r.keys(e, p, {"until", "L"});
                GeneratorPiece piece;
                const json* u = r.child(e, p, "until", true);
                const json* L = r.child(e, p, "L", true);
                auto uv = u ? r.number(*u, p + "/until") : std::nullopt;
                auto Lm = L ? r.matrix(*L, p + "/L") : std::nullopt;
                if (!uv || !Lm) {
                    ok = false;
                    continue;
                }
                piece.until = *uv;
                piece.L = *Lm;
                if (prob.m.size() && (Lm->rows() != prob.m.size() || Lm->cols() != prob.m.size())) {
                    r.fail(p + "/L", "malformed matrix: size does not match m");
                    ok = false;
                    continue;
                }
                if (!check_generator(r, piece.L, p + "/L")) {
                    ok = false;
                    continue;
                }
                if (prob.m.size()) {
                    try {
                        validate(FiniteChainSpec{prob.m, piece.L});
                    } catch (const InvalidInput& e2) {
                        r.fail(p + "/L", e2.what());
                        ok = false;
                    }
                }
                prob.generators.push_back(std::move(piece));
            }
        }
    } else {
        ok = false;
    }
    if (const json* phi = r.child(*pj, pp, "phi", false)) {
        if (auto v = r.vector(*phi, pp + "/phi")) prob.terminal = *v;
        else ok = false;
    }
    if (const json* mu = r.child(*pj, pp, "mu", false)) {
        r.keys(*mu, pp + "/mu", {"density", "atoms"});
        if (const json* d = r.child(*mu, pp + "/mu", "density", false)) {
            if (auto v = r.vector(*d, pp + "/mu/density")) prob.source = *v;
            else ok = false;
        }
        if (const json* a = r.child(*mu, pp + "/mu", "atoms", false)) {
            if (!a->is_array()) {
                r.fail(pp + "/mu/atoms", "expected an array");
                ok = false;
            } else {
                for (std::size_t i = 0; i < a->size(); ++i) {
                    const std::string p = pp + "/mu/atoms/" + std::to_string(i);
                    r.keys((*a)[i], p, {"t", "weights"});
                    const json* t = r.child((*a)[i], p, "t", true);
                    const json* w = r.child((*a)[i], p, "weights", true);
                    auto tv = t ? r.number(*t, p + "/t") : std::nullopt;
                    auto wv = w ? r.vector(*w, p + "/weights") : std::nullopt;
                    if (tv && wv) prob.atoms.push_back(TimeAtom{*tv, *wv});
                    else ok = false;
                }
            }
        }
    }
    if (const json* f = r.child(*pj, pp, "f", false)) cfg.parabolic_f = read_nonlinearity(r, *f, pp + "/f");
    prob.f = cfg.parabolic_f.build();
    if (ok) {
        try {
            prob.validate();
        } catch (const InvalidInput& e) {
            r.fail(pp, e.what());
            ok = false;
        }
    }
    if (const json* dt = r.child(doc, "", "dt", false)) {
        const auto v = r.number(*dt, "/dt");
        if (v && !(*v > 0.0)) r.fail("/dt", "dt must be positive");
        if (v) cfg.dt = *v;
    }
    if (const json* pts = r.child(doc, "", "points", false)) {
        if (!pts->is_array()) {
            r.fail("/points", "expected an array of {t, state}");
        } else {
            for (std::size_t i = 0; i < pts->size(); ++i) {
                const std::string p = "/points/" + std::to_string(i);
                r.keys((*pts)[i], p, {"t", "state"});
                const json* t = r.child((*pts)[i], p, "t", true);
                const json* s = r.child((*pts)[i], p, "state", true);
                auto tv = t ? r.number(*t, p + "/t") : std::nullopt;
                auto sv = s ? r.unsigned_int(*s, p + "/state") : std::nullopt;
                if (!tv || !sv) continue;
                const double time = tv.value_or(0.0);
                const auto state = static_cast<std::size_t>(sv.value_or(0));
                if (ok && (time < 0.0 || time > prob.horizon)) r.fail(p + "/t", "time must lie in [0, T]");
                if (ok && state >= prob.size()) r.fail(p + "/state", "state out of range");
                cfg.time_points.push_back(TimeSpacePoint{time, state});
            }
        }
    }
    if (ok) cfg.parabolic = std::move(prob);
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
    for (const auto& [k, name] : kind_names)
        if (k == kind) return name;
    return "unknown";
}

std::optional<ExperimentKind> parse_kind(std::string_view name) {
    for (const auto& [k, n] : kind_names)
        if (n == name) return k;
    return std::nullopt;
}

bool is_stochastic(ExperimentKind kind) {
    return kind == ExperimentKind::mc_elliptic || kind == ExperimentKind::mc_parabolic ||
           kind == ExperimentKind::revuz_check || kind == ExperimentKind::bsde_check;
}

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

FieldMeasure EllipticSpec::measure() const {
    FieldMeasure mu = density != 0.0 ? FieldMeasure::constant(domain.dim(), density) : FieldMeasure::zero(domain.dim());
    for (const auto& s : shells) mu.add_shell(s);
    for (const auto& s : slabs) mu.add_slab(s);
    return mu;
}

bool EllipticSpec::data_nonnegative() const {
    if (source < 0.0 || density < 0.0) return false;
    for (const auto& s : shells)
        if (s.mass < 0.0) return false;
    for (const auto& s : slabs)
        if (s.surface_density < 0.0) return false;
    return true;
}

std::string ExperimentConfig::config_hash() const { return fnv1a_hex(effective.dump()); }

ExperimentConfig parse_config_json(const nlohmann::json& input, const std::filesystem::path& base_dir,
                                   const Overrides& overrides) {
    Reader r;
    ExperimentConfig cfg;
    json doc = input;
    if (!doc.is_object()) throw ConfigError(std::vector<ConfigIssue>{{"", "config must be a JSON object"}});

    // experiment kind: file and command line must agree
    std::optional<ExperimentKind> kind = overrides.kind;
    if (const json* e = r.child(doc, "", "experiment", !overrides.kind.has_value())) {
        if (auto s = r.string(*e, "/experiment")) {
            const auto k = parse_kind(*s);
            if (!k) r.fail("/experiment", "unknown experiment kind '" + *s + "'");
            else if (kind && *kind != *k)
                r.fail("/experiment", "config is for '" + *s + "' but the command was '" + std::string(to_string(*kind)) + "'");
            else kind = k;
        }
    }
    if (!kind) throw ConfigError(r.issues);
    cfg.kind = *kind;
    doc["experiment"] = std::string(to_string(cfg.kind));
    if (overrides.seed) doc["seed"] = *overrides.seed;
    if (overrides.workers) doc["workers"] = *overrides.workers;

    switch (cfg.kind) {
        case ExperimentKind::solve_finite:
        case ExperimentKind::verify_renorm:
        case ExperimentKind::revuz_check:
        case ExperimentKind::bsde_check:
            r.keys(doc, "", {"experiment", "description", "seed", "workers", "paths", "out", "chain", "chain_file",
                             "measure", "nonlinearity", "solver", "k_grid", "solution_file", "horizon", "starts",
                             "checkpoints", "perturb"});
            break;
        case ExperimentKind::mc_elliptic:
            r.keys(doc, "", {"experiment", "description", "seed", "workers", "paths", "out", "domain", "operator",
                             "source", "measure", "nonlinearity", "solver", "points", "per_axis", "eps_shell"});
            break;
        case ExperimentKind::mc_parabolic:
            r.keys(doc, "", {"experiment", "description", "seed", "workers", "paths", "out", "problem", "dt", "points",
                             "k_grid", "solver"});
            break;
    }

    if (const json* s = r.child(doc, "", "seed", false)) cfg.seed = r.unsigned_int(*s, "/seed");
    if (is_stochastic(cfg.kind) && !cfg.seed) r.fail("/seed", "seed required for stochastic experiments");
    if (const json* w = r.child(doc, "", "workers", false)) {
        const auto v = r.unsigned_int(*w, "/workers");
        if (v && (*v < 1 || *v > 1024)) r.fail("/workers", "workers must be between 1 and 1024");
        else if (v) cfg.workers = static_cast<unsigned>(*v);
    }
    if (const json* p = r.child(doc, "", "paths", false)) {
        const auto v = r.unsigned_int(*p, "/paths");
        if (v && *v < 100) r.fail("/paths", "at least 100 paths are required");
        else if (v) cfg.paths = *v;
    }
    if (const json* o = r.child(doc, "", "out", false))
        if (auto s = r.string(*o, "/out")) cfg.out_dir = base_dir / *s;
    if (overrides.out_dir) cfg.out_dir = *overrides.out_dir;

    if (const json* s = r.child(doc, "", "solver", false)) {
        r.keys(*s, "/solver", {"tolerance", "max_iterations", "shift"});
        if (const json* t = r.child(*s, "/solver", "tolerance", false)) {
            const auto v = r.number(*t, "/solver/tolerance");
            if (v && !(*v > 0.0)) r.fail("/solver/tolerance", "tolerance must be positive");
            else if (v) cfg.solver.tolerance = *v;
        }
        if (const json* m = r.child(*s, "/solver", "max_iterations", false)) {
            const auto v = r.unsigned_int(*m, "/solver/max_iterations");
            if (v && (*v < 1 || *v > 100'000'000)) r.fail("/solver/max_iterations", "must be between 1 and 1e8");
            else if (v) cfg.solver.max_iterations = static_cast<int>(*v);
        }
        if (const json* m = r.child(*s, "/solver", "shift", false))
            if (auto v = r.number(*m, "/solver/shift")) cfg.solver.shift = *v;
    }
    cfg.solver.seed = cfg.seed.value_or(0);

    if (const json* k = r.child(doc, "", "k_grid", false)) {
        if (auto v = r.vector(*k, "/k_grid")) {
            cfg.k_grid.assign(v->data(), v->data() + v->size());
            if (!std::is_sorted(cfg.k_grid.begin(), cfg.k_grid.end()) ||
                std::any_of(cfg.k_grid.begin(), cfg.k_grid.end(), [](double x) { return !(x > 0.0); }))
                r.fail("/k_grid", "truncation levels must be positive and increasing");
        }
    }

    const bool finite = cfg.kind == ExperimentKind::solve_finite || cfg.kind == ExperimentKind::verify_renorm ||
                        cfg.kind == ExperimentKind::revuz_check || cfg.kind == ExperimentKind::bsde_check;
    if (finite) {
        const json* c = r.child(doc, "", "chain", false);
        const json* cf = r.child(doc, "", "chain_file", false);
        if (c && cf) r.fail("/chain_file", "give either chain or chain_file, not both");
        if (c) {
            cfg.chain = read_chain(r, *c, "/chain");
        } else if (cf) {
            if (auto s = r.string(*cf, "/chain_file")) {
                const auto path = base_dir / *s;
                std::ifstream in(path);
                if (!in) {
                    r.fail("/chain_file", "referenced file does not exist: " + path.string());
                } else {
                    try {
                        const json cj = json::parse(in);
                        cfg.chain = read_chain(r, cj, "/chain_file");
                        doc["chain"] = cj;  // hash the content, not the path
                    } catch (const json::parse_error& e) {
                        r.fail("/chain_file", std::string("malformed JSON: ") + e.what());
                    }
                }
            }
        } else {
            r.fail("/chain", "required field is missing");
        }
        const auto n = cfg.chain ? static_cast<Eigen::Index>(cfg.chain->size()) : 0;
        cfg.measure_weights = Eigen::VectorXd::Zero(n);
        if (const json* m = r.child(doc, "", "measure", false)) {
            r.keys(*m, "/measure", {"weights", "density"});
            const json* w = r.child(*m, "/measure", "weights", false);
            const json* d = r.child(*m, "/measure", "density", false);
            if (w && d) r.fail("/measure", "give either weights or density");
            if (w || d) {
                const std::string p = w ? "/measure/weights" : "/measure/density";
                if (auto v = r.vector(w ? *w : *d, p)) {
                    if (cfg.chain && v->size() != n) r.fail(p, "expected " + std::to_string(n) + " entries");
                    else if (cfg.chain) cfg.measure_weights = w ? *v : Eigen::VectorXd(v->cwiseProduct(cfg.chain->m));
                }
            }
        }
        if (const json* f = r.child(doc, "", "nonlinearity", false)) cfg.nonlinearity = read_nonlinearity(r, *f, "/nonlinearity");
        if (const json* s = r.child(doc, "", "solution_file", false)) {
            if (auto p = r.string(*s, "/solution_file")) {
                cfg.solution_file = base_dir / *p;
                if (!std::filesystem::exists(*cfg.solution_file))
                    r.fail("/solution_file", "referenced file does not exist: " + cfg.solution_file->string());
            }
        }
        if (const json* h = r.child(doc, "", "horizon", false)) {
            const auto v = r.number(*h, "/horizon");
            if (v && !(*v > 0.0)) r.fail("/horizon", "horizon must be positive");
            else if (v) cfg.horizon = *v;
        }
        if (const json* s = r.child(doc, "", "starts", false)) {
            if (!s->is_array()) r.fail("/starts", "expected an array of states");
            else
                for (std::size_t i = 0; i < s->size(); ++i)
                    if (auto v = r.unsigned_int((*s)[i], "/starts/" + std::to_string(i))) {
                        if (cfg.chain && *v >= cfg.chain->size()) r.fail("/starts/" + std::to_string(i), "state out of range");
                        cfg.starts.push_back(static_cast<std::size_t>(*v));
                    }
        }
        if (const json* c2 = r.child(doc, "", "checkpoints", false)) {
            if (auto v = r.vector(*c2, "/checkpoints")) {
                cfg.checkpoints.assign(v->data(), v->data() + v->size());
                if (cfg.checkpoints.size() < 2 || !std::is_sorted(cfg.checkpoints.begin(), cfg.checkpoints.end()) ||
                    cfg.checkpoints.front() < 0.0)
                    r.fail("/checkpoints", "need at least two increasing nonnegative times");
            }
        }
        if (const json* p = r.child(doc, "", "perturb", false)) {
            r.keys(*p, "/perturb", {"state", "relative"});
            PerturbSpec ps;
            if (const json* s = r.child(*p, "/perturb", "state", true))
                ps.state = static_cast<std::size_t>(r.unsigned_int(*s, "/perturb/state").value_or(0));
            if (const json* a = r.child(*p, "/perturb", "relative", true))
                ps.relative = r.number(*a, "/perturb/relative").value_or(0.0);
            if (cfg.chain && ps.state >= cfg.chain->size()) r.fail("/perturb/state", "state out of range");
            cfg.perturb = ps;
        }
    } else if (cfg.kind == ExperimentKind::mc_elliptic) {
        read_elliptic(r, doc, cfg);
        if (const json* f = r.child(doc, "", "nonlinearity", false)) cfg.nonlinearity = read_nonlinearity(r, *f, "/nonlinearity");
    } else {
        read_parabolic(r, doc, cfg);
    }

    if (!r.issues.empty()) throw ConfigError(std::move(r.issues));
    cfg.effective = std::move(doc);
    return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path, const Overrides& overrides) {
    std::ifstream in(path);
    if (!in) throw ConfigError(std::vector<ConfigIssue>{{"", "cannot read config file " + path.string()}});
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::vector<ConfigIssue>{{"", std::string("malformed JSON: ") + e.what()}});
    }
    return parse_config_json(doc, path.parent_path(), overrides);
}

Eigen::VectorXd read_solution_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InvalidInput("cannot read solution file " + path.string());
    std::vector<double> values;
    if (path.extension() == ".json") {
        const auto j = nlohmann::json::parse(in);
        const auto& arr = j.is_object() && j.contains("u") ? j["u"] : j;
        if (!arr.is_array()) throw InvalidInput("solution JSON must be an array or {\"u\": [...]}");
        for (const auto& x : arr) values.push_back(x.get<double>());
    } else {
        std::string line;
        std::getline(in, line);
        if (line.rfind("state,value", 0) != 0) throw InvalidInput("solution CSV must start with the header state,value");
        std::size_t expected = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            const auto comma = line.find(',');
            if (comma == std::string::npos) throw InvalidInput("malformed solution CSV line: " + line);
            if (std::stoul(line.substr(0, comma)) != expected++) throw InvalidInput("solution CSV states must be 0..n-1 in order");
            values.push_back(std::stod(line.substr(comma + 1, line.find(',', comma + 1) - comma - 1)));
        }
    }
    return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

}  // namespace renfk::cli
