#include "ips/io.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <toml.hpp>

#include "ips/errors.hpp"

namespace ips {

using nlohmann::json;

namespace {

std::string where(const std::string& origin, const std::string& key) { return origin + ": " + key; }

void check_keys(const toml::table& t, const std::set<std::string>& allowed, const std::string& origin,
                const std::string& section) {
    for (const auto& [k, v] : t) {
        (void)v;
        const std::string key(k.str());
        if (!allowed.count(key))
            throw ConfigError(where(origin, (section.empty() ? "" : section + ".") + key) + " is not a known key");
    }
}

double get_double(const toml::node& n, const std::string& what) {
    if (auto v = n.value<double>()) return *v;
    throw ConfigError(what + " must be a number");
}

int get_int(const toml::node& n, const std::string& what) {
    if (auto v = n.value<int64_t>()) return int(*v);
    throw ConfigError(what + " must be an integer");
}

std::string get_string(const toml::node& n, const std::string& what) {
    if (auto v = n.value<std::string>()) return *v;
    throw ConfigError(what + " must be a string");
}

bool get_bool(const toml::node& n, const std::string& what) {
    if (auto v = n.value<bool>()) return *v;
    throw ConfigError(what + " must be true or false");
}

std::vector<double> get_doubles(const toml::node& n, const std::string& what) {
    const toml::array* a = n.as_array();
    if (!a) throw ConfigError(what + " must be an array of numbers");
    std::vector<double> out;
    for (const auto& e : *a) out.push_back(get_double(e, what));
    return out;
}

Vec2 get_point(const toml::node& n, const std::string& what) {
    const auto v = get_doubles(n, what);
    if (v.size() != 2) throw ConfigError(what + " must be [x, y]");
    return Vec2(v[0], v[1]);
}

std::vector<Vec2> get_points(const toml::node& n, const std::string& what) {
    const toml::array* a = n.as_array();
    if (!a) throw ConfigError(what + " must be an array of [x, y] pairs");
    std::vector<Vec2> out;
    for (const auto& e : *a) out.push_back(get_point(e, what));
    return out;
}

Curve read_curve(const toml::table& t, const std::string& origin, const std::string& section) {
    const std::string pre = where(origin, section);
    if (!t.contains("kind")) throw ConfigError(pre + ".kind is required");
    const CurveKind kind = curve_kind_from_string(get_string(*t.get("kind"), pre + ".kind"));
    if (kind == CurveKind::SmoothPolyline) {
        if (!t.contains("vertices")) throw ConfigError(pre + ".vertices is required for polyline-smooth");
        return Curve::smooth_polyline(get_points(*t.get("vertices"), pre + ".vertices"));
    }
    const Vec2 c = t.contains("center") ? get_point(*t.get("center"), pre + ".center") : Vec2::Zero();
    if (!t.contains("params")) throw ConfigError(pre + ".params is required");
    return Curve::make(kind, c, get_doubles(*t.get("params"), pre + ".params"));
}

}  // namespace

Needle NeedleSpec::build(const Curve& domain) const {
    if (!vertices.empty()) return make_needle(domain, vertices);
    if (!tip) throw NeedleError("needle spec needs a tip or vertices");
    return build_needle(domain, *tip, entry_angle);
}

void RunConfig::validate() const {
    if (mfs.outer_nodes < 16 || mfs.outer_nodes > 20000 || mfs.outer_nodes % 2)
        throw ConfigError("discretization.outer_nodes must be even and in [16, 20000]");
    if (mfs.obstacle_nodes < 16 || mfs.obstacle_nodes > 20000 || mfs.obstacle_nodes % 2)
        throw ConfigError("discretization.obstacle_nodes must be even and in [16, 20000]");
    if (mfs.oversampling < 1 || mfs.oversampling > 8) throw ConfigError("discretization.oversampling must be in [1, 8]");
    if (!(mfs.offset_factor > 0 && mfs.offset_factor < 0.5))
        throw ConfigError("discretization.offset_factor must be in (0, 0.5)");
    if (!(mfs.svd_cutoff > 0 && mfs.svd_cutoff < 1e-2))
        throw ConfigError("discretization.svd_cutoff must be in (0, 1e-2)");
    if (J < 4 || J > 256) throw ConfigError("discretization.J must be in [4, 256]");
    if (2 * J + 1 > mfs.outer_nodes / 2) throw ConfigError("discretization.J too large for the outer grid");
    classify.probe.needle.resolved(scenario).validate();
    if (classify.grid.nx < 1 || classify.grid.ny < 1 || classify.grid.nx > 1000 || classify.grid.ny > 1000)
        throw ConfigError("grid.nx and grid.ny must be in [1, 1000]");
    if (!(classify.grid.margin >= 0.05)) throw ConfigError("grid.margin must be at least 0.05");
    if (!(classify.probe.tolerance > 0)) throw ConfigError("probe.tolerance must be positive");
    if (threads < 1 || threads > 1024) throw ConfigError("threads must be in [1, 1024]");
    if (suite.points < 2 || suite.points > 1000) throw ConfigError("verify.points must be in [2, 1000]");
}

RunConfig parse_config(const std::string& text, const std::string& origin) {
    toml::table root;
    try {
        root = toml::parse(text, origin);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << origin << ": " << e.description() << " at line " << e.source().begin.line;
        throw ConfigError(os.str());
    }
    check_keys(root,
               {"k", "family", "domain", "obstacles", "validation", "discretization", "needle", "grid", "probe",
                "verify", "run"},
               origin, "");
    RunConfig cfg;
    Scenario& sc = cfg.scenario;
    if (auto n = root.get("k")) sc.k = get_double(*n, where(origin, "k"));
    if (auto n = root.get("family")) sc.family = family_from_string(get_string(*n, where(origin, "family")));
    if (auto t = root.get_as<toml::table>("domain")) {
        check_keys(*t, {"kind", "center", "params", "vertices"}, origin, "domain");
        sc.domain = read_curve(*t, origin, "domain");
    }
    if (auto n = root.get("obstacles")) {
        const toml::array* a = n->as_array();
        if (!a) throw ConfigError(where(origin, "obstacles") + " must be an array of tables");
        int i = 0;
        for (const auto& e : *a) {
            const std::string sec = "obstacles[" + std::to_string(i++) + "]";
            const toml::table* t = e.as_table();
            if (!t) throw ConfigError(where(origin, sec) + " must be a table");
            check_keys(*t, {"kind", "center", "params", "vertices", "bc"}, origin, sec);
            if (!t->contains("bc")) throw ConfigError(where(origin, sec) + ".bc is required");
            sc.obstacles.push_back({read_curve(*t, origin, sec), bc_from_string(get_string(*t->get("bc"), sec + ".bc"))});
        }
    }
    if (auto t = root.get_as<toml::table>("validation")) {
        check_keys(*t, {"min_gap"}, origin, "validation");
        if (auto n = t->get("min_gap")) sc.min_gap = get_double(*n, "validation.min_gap");
    }
    if (auto t = root.get_as<toml::table>("discretization")) {
        check_keys(*t, {"outer_nodes", "obstacle_nodes", "oversampling", "offset_factor", "placement", "svd_cutoff", "J"},
                   origin, "discretization");
        MfsSettings& m = cfg.mfs;
        if (auto n = t->get("outer_nodes")) m.outer_nodes = get_int(*n, "discretization.outer_nodes");
        if (auto n = t->get("obstacle_nodes")) m.obstacle_nodes = get_int(*n, "discretization.obstacle_nodes");
        if (auto n = t->get("oversampling")) m.oversampling = get_int(*n, "discretization.oversampling");
        if (auto n = t->get("offset_factor")) m.offset_factor = get_double(*n, "discretization.offset_factor");
        if (auto n = t->get("svd_cutoff")) m.svd_cutoff = get_double(*n, "discretization.svd_cutoff");
        if (auto n = t->get("J")) cfg.J = get_int(*n, "discretization.J");
        if (auto n = t->get("placement")) {
            const std::string p = get_string(*n, "discretization.placement");
            if (p == "continued")
                m.placement = SourcePlacement::Continued;
            else if (p == "normal")
                m.placement = SourcePlacement::Normal;
            else
                throw ConfigError("discretization.placement must be continued or normal");
        }
    }
    NeedleParams& np = cfg.classify.probe.needle;
    np.family = sc.family;
    if (auto t = root.get_as<toml::table>("needle")) {
        check_keys(*t,
                   {"orders", "tube_radius", "boundary_nodes", "rings", "gradient_weight", "alpha0", "alpha_base",
                    "alpha_floor", "exclusion", "wedge_half_angle", "inset", "residual_limit", "tip", "entry_angle",
                    "vertices"},
                   origin, "needle");
        if (auto n = t->get("orders")) {
            np.orders.clear();
            for (double o : get_doubles(*n, "needle.orders")) {
                if (o != std::floor(o)) throw ConfigError("needle.orders must be integers");
                np.orders.push_back(int(o));
            }
        }
        if (auto n = t->get("tube_radius")) np.tube_radius = get_double(*n, "needle.tube_radius");
        if (auto n = t->get("boundary_nodes")) np.boundary_nodes = get_int(*n, "needle.boundary_nodes");
        if (auto n = t->get("rings")) np.rings = get_int(*n, "needle.rings");
        if (auto n = t->get("gradient_weight")) np.gradient_weight = get_double(*n, "needle.gradient_weight");
        if (auto n = t->get("alpha0")) np.alpha0 = get_double(*n, "needle.alpha0");
        if (auto n = t->get("alpha_base")) np.alpha_base = get_double(*n, "needle.alpha_base");
        if (auto n = t->get("alpha_floor")) np.alpha_floor = get_double(*n, "needle.alpha_floor");
        if (auto n = t->get("wedge_half_angle")) np.wedge_half_angle = get_double(*n, "needle.wedge_half_angle");
        if (auto n = t->get("inset")) np.inset = get_double(*n, "needle.inset");
        if (auto n = t->get("residual_limit")) np.residual_limit = get_double(*n, "needle.residual_limit");
        if (auto n = t->get("exclusion")) {
            const std::string e = get_string(*n, "needle.exclusion");
            if (e == "tube")
                np.exclusion = Exclusion::Tube;
            else if (e == "wedge")
                np.exclusion = Exclusion::Wedge;
            else
                throw ConfigError("needle.exclusion must be tube or wedge");
        }
        if (t->contains("tip") || t->contains("vertices")) {
            NeedleSpec ns;
            if (auto n = t->get("vertices")) ns.vertices = get_points(*n, "needle.vertices");
            if (auto n = t->get("tip")) ns.tip = get_point(*n, "needle.tip");
            if (auto n = t->get("entry_angle")) ns.entry_angle = get_double(*n, "needle.entry_angle");
            cfg.needle = ns;
        }
    }
    if (auto t = root.get_as<toml::table>("grid")) {
        check_keys(*t, {"nx", "ny", "margin"}, origin, "grid");
        if (auto n = t->get("nx")) cfg.classify.grid.nx = get_int(*n, "grid.nx");
        if (auto n = t->get("ny")) cfg.classify.grid.ny = get_int(*n, "grid.ny");
        if (auto n = t->get("margin")) cfg.classify.grid.margin = get_double(*n, "grid.margin");
    }
    if (auto t = root.get_as<toml::table>("probe")) {
        check_keys(*t, {"strategy", "tolerance", "richardson", "T", "B", "T_factor", "B_factor"}, origin, "probe");
        auto& c = cfg.classify;
        if (auto n = t->get("strategy")) c.strategy = needle_strategy_from_string(get_string(*n, "probe.strategy"));
        if (auto n = t->get("tolerance")) c.probe.tolerance = get_double(*n, "probe.tolerance");
        if (auto n = t->get("richardson")) c.probe.richardson = get_bool(*n, "probe.richardson");
        if (auto n = t->get("T")) c.T = get_double(*n, "probe.T");
        if (auto n = t->get("B")) c.B = get_double(*n, "probe.B");
        if (auto n = t->get("T_factor")) c.T_factor = get_double(*n, "probe.T_factor");
        if (auto n = t->get("B_factor")) c.B_factor = get_double(*n, "probe.B_factor");
    }
    if (auto t = root.get_as<toml::table>("verify")) {
        check_keys(*t, {"points", "pairs", "orders"}, origin, "verify");
        if (auto n = t->get("points")) cfg.suite.points = get_int(*n, "verify.points");
        if (auto n = t->get("pairs")) cfg.suite.pairs = get_int(*n, "verify.pairs");
        if (auto n = t->get("orders")) {
            cfg.suite.needle_orders.clear();
            for (double o : get_doubles(*n, "verify.orders")) cfg.suite.needle_orders.push_back(int(o));
        }
    }
    if (auto t = root.get_as<toml::table>("run")) {
        check_keys(*t, {"seed", "threads", "out"}, origin, "run");
        if (auto n = t->get("seed")) {
            const int64_t s = get_int(*n, "run.seed");
            if (s < 0) throw ConfigError("run.seed must be non-negative");
            cfg.seed = std::uint64_t(s);
        }
        if (auto n = t->get("threads")) cfg.threads = get_int(*n, "run.threads");
        if (auto n = t->get("out")) cfg.out_dir = get_string(*n, "run.out");
    }
    cfg.suite.seed = cfg.seed;
    cfg.suite.needle.family = sc.family;
    cfg.classify.threads = cfg.threads;
    cfg.suite.threads = cfg.threads;
    return cfg;
}

RunConfig load_config(const std::string& path) {
    RunConfig cfg = parse_config(read_text(path), path);
    cfg.scenario_path = path;
    return cfg;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string toml_number(double v) {
    std::string s = format_double(v);
    if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
    return s;
}

std::string toml_point(const Vec2& p) { return "[" + toml_number(p.x()) + ", " + toml_number(p.y()) + "]"; }

void print_curve(std::ostream& os, const Curve& c) {
    os << "kind = \"" << to_string(c.kind()) << "\"\n";
    if (c.kind() == CurveKind::SmoothPolyline) {
        os << "vertices = [";
        for (std::size_t i = 0; i < c.vertices().size(); ++i) os << (i ? ", " : "") << toml_point(c.vertices()[i]);
        os << "]\n";
        return;
    }
    os << "center = " << toml_point(c.center()) << "\n";
    os << "params = [";
    for (std::size_t i = 0; i < c.params().size(); ++i) os << (i ? ", " : "") << toml_number(c.params()[i]);
    os << "]\n";
}

}  // namespace

std::string print_config(const RunConfig& cfg) {
    const Scenario& sc = cfg.scenario;
    const NeedleParams& np = cfg.classify.probe.needle;
    std::ostringstream os;
    os << "k = " << toml_number(sc.k) << "\n";
    os << "family = \"" << to_string(sc.family) << "\"\n\n";
    os << "[domain]\n";
    print_curve(os, sc.domain);
    for (const auto& o : sc.obstacles) {
        os << "\n[[obstacles]]\n";
        print_curve(os, o.curve);
        os << "bc = \"" << to_string(o.bc) << "\"\n";
    }
    os << "\n[validation]\nmin_gap = " << toml_number(sc.effective_min_gap()) << "\n";
    os << "\n[discretization]\n";
    os << "outer_nodes = " << cfg.mfs.outer_nodes << "\n";
    os << "obstacle_nodes = " << cfg.mfs.obstacle_nodes << "\n";
    os << "oversampling = " << cfg.mfs.oversampling << "\n";
    os << "offset_factor = " << toml_number(cfg.mfs.offset_factor) << "\n";
    os << "placement = \"" << (cfg.mfs.placement == SourcePlacement::Continued ? "continued" : "normal") << "\"\n";
    os << "svd_cutoff = " << toml_number(cfg.mfs.svd_cutoff) << "\n";
    os << "J = " << cfg.J << "\n";
    os << "\n[needle]\norders = [";
    for (std::size_t i = 0; i < np.orders.size(); ++i) os << (i ? ", " : "") << np.orders[i];
    os << "]\n";
    os << "tube_radius = " << toml_number(np.tube(sc.domain)) << "\n";
    os << "exclusion = \"" << (np.exclusion == Exclusion::Wedge ? "wedge" : "tube") << "\"\n";
    os << "wedge_half_angle = " << toml_number(np.wedge_half_angle) << "\n";
    os << "inset = " << toml_number(np.resolved(sc).inset) << "\n";
    os << "boundary_nodes = " << np.boundary_nodes << "\n";
    os << "rings = " << np.rings << "\n";
    os << "gradient_weight = " << toml_number(np.gradient_weight) << "\n";
    os << "alpha0 = " << toml_number(np.alpha0) << "\n";
    os << "alpha_base = " << toml_number(np.alpha_base) << "\n";
    os << "alpha_floor = " << toml_number(np.alpha_floor) << "\n";
    os << "residual_limit = " << toml_number(np.residual_limit) << "\n";
    if (cfg.needle) {
        if (!cfg.needle->vertices.empty()) {
            os << "vertices = [";
            for (std::size_t i = 0; i < cfg.needle->vertices.size(); ++i)
                os << (i ? ", " : "") << toml_point(cfg.needle->vertices[i]);
            os << "]\n";
        } else if (cfg.needle->tip) {
            os << "tip = " << toml_point(*cfg.needle->tip) << "\n";
            os << "entry_angle = " << toml_number(cfg.needle->entry_angle) << "\n";
        }
    }
    const auto& c = cfg.classify;
    os << "\n[grid]\nnx = " << c.grid.nx << "\nny = " << c.grid.ny << "\nmargin = " << toml_number(c.grid.margin) << "\n";
    os << "\n[probe]\nstrategy = \"" << to_string(c.strategy) << "\"\n";
    os << "tolerance = " << toml_number(c.probe.tolerance) << "\n";
    os << "richardson = " << (c.probe.richardson ? "true" : "false") << "\n";
    os << "T = " << toml_number(c.T) << "  # negative: T_factor x median |value|\n";
    os << "B = " << toml_number(c.B) << "  # negative: B_factor x median |value|\n";
    os << "T_factor = " << toml_number(c.T_factor) << "\n";
    os << "B_factor = " << toml_number(c.B_factor) << "\n";
    os << "\n[verify]\npoints = " << cfg.suite.points << "\npairs = " << cfg.suite.pairs << "\norders = [";
    for (std::size_t i = 0; i < cfg.suite.needle_orders.size(); ++i) os << (i ? ", " : "") << cfg.suite.needle_orders[i];
    os << "]\n";
    os << "\n[run]\nseed = " << cfg.seed << "\nthreads = " << cfg.threads << "\nout = \"" << cfg.out_dir << "\"\n";
    return os.str();
}

// ---------------------------------------------------------------------------

std::string dn_to_json(const DtNMatrix& M) {
    json j;
    j["k"] = M.k;
    j["J"] = M.J;
    j["basis"] = M.basis;
    json rows = json::array();
    for (int r = 0; r < M.matrix.rows(); ++r) {
        json row = json::array();
        for (int c = 0; c < M.matrix.cols(); ++c) row.push_back(M.matrix(r, c));
        rows.push_back(std::move(row));
    }
    j["matrix"] = std::move(rows);
    j["scenario_fingerprint"] = M.scenario_fingerprint;
    j["residual_stats"] = {{"max", M.residual_stats.max}, {"mean", M.residual_stats.mean}};
    return j.dump(1) + "\n";
}

DtNMatrix dn_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("DN file: ") + e.what());
    }
    DtNMatrix M;
    try {
        M.k = j.at("k").get<double>();
        M.J = j.at("J").get<int>();
        M.basis = j.at("basis").get<std::string>();
        M.scenario_fingerprint = j.at("scenario_fingerprint").get<std::string>();
        M.residual_stats.max = j.at("residual_stats").at("max").get<double>();
        M.residual_stats.mean = j.at("residual_stats").at("mean").get<double>();
        const auto& rows = j.at("matrix");
        const int n = int(rows.size());
        if (n != 2 * M.J + 1) throw ConfigError("DN file: matrix size does not match J");
        M.matrix.resize(n, n);
        for (int r = 0; r < n; ++r) {
            if (int(rows[r].size()) != n) throw ConfigError("DN file: matrix is not square");
            for (int c = 0; c < n; ++c) M.matrix(r, c) = rows[r][c].get<double>();
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("DN file: ") + e.what());
    }
    if (M.basis != "trig") throw ConfigError("DN file: unsupported basis '" + M.basis + "'");
    return M;
}

void write_dn(const std::string& path, const DtNMatrix& M) { write_text(path, dn_to_json(M)); }

DtNMatrix read_dn(const std::string& path) { return dn_from_json(read_text(path)); }

// ---------------------------------------------------------------------------

std::string field_to_csv(const IndicatorField& field) {
    std::ostringstream os;
    os << "x,y,value,converged,label,needle_entry_angle\n";
    for (const auto& p : field.points)
        os << format_double(p.x.x()) << "," << format_double(p.x.y()) << "," << format_double(p.value) << ","
           << (p.converged ? 1 : 0) << "," << to_string(p.label) << "," << format_double(p.entry_angle) << "\n";
    return os.str();
}

namespace {

json report_json(const IdentityReport& r) {
    return {{"id", r.id},         {"lhs", r.lhs},       {"rhs", r.rhs},
            {"residual", r.residual}, {"tolerance", r.tolerance}, {"pass", r.pass},
            {"fingerprint", r.fingerprint}, {"detail", r.detail}};
}

json smallness_json(const SmallnessReport& s) {
    json comps = json::array();
    for (const auto& c : s.components)
        comps.push_back({{"bc", to_string(c.bc)},
                         {"constant", c.constant},
                         {"exact", c.exact},
                         {"condition", c.condition},
                         {"pass", c.pass}});
    return {{"id", "smallness"},
            {"k", s.k},
            {"exterior_constant_raw", s.exterior_raw},
            {"exterior_constant", s.exterior_constant},
            {"safety_factor", s.safety_factor},
            {"exterior_condition", s.exterior_condition},
            {"exterior_pass", s.exterior_pass},
            {"estimated", true},
            {"components", comps},
            {"k_max", s.k_max},
            {"grid", s.grid},
            {"pass", s.pass},
            {"fingerprint", s.fingerprint}};
}

json nan_safe(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json label_json(const LabelScore& l) {
    return {{"truth", l.truth}, {"predicted", l.predicted}, {"correct", l.correct},
            {"precision", l.precision()}, {"recall", l.recall()}};
}

}  // namespace

std::string identity_reports_json(const SuiteResult& res) {
    json a = json::array();
    for (const auto& r : res.identities) a.push_back(report_json(r));
    a.push_back(smallness_json(res.smallness));
    return a.dump(1) + "\n";
}

std::string summary_table(const SuiteResult& res) {
    struct Row {
        int total = 0, passed = 0;
        double worst = 0, tol = 0;
    };
    std::vector<std::pair<std::string, Row>> rows;
    for (const auto& r : res.identities) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& p) { return p.first == r.id; });
        if (it == rows.end()) {
            rows.push_back({r.id, {}});
            it = rows.end() - 1;
        }
        Row& row = it->second;
        ++row.total;
        row.passed += r.pass;
        row.worst = std::max(row.worst, r.residual);
        row.tol = r.tolerance;
    }
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-20s %7s %12s %10s  %s\n", "identity", "pass", "max resid", "tol", "status");
    os << buf;
    for (const auto& [id, r] : rows) {
        std::snprintf(buf, sizeof buf, "%-20s %3d/%-3d %12.3e %10.1e  %s\n", id.c_str(), r.passed, r.total, r.worst,
                      r.tol, r.passed == r.total ? "PASS" : "FAIL");
        os << buf;
    }
    const auto& s = res.smallness;
    std::snprintf(buf, sizeof buf, "%-20s C(ext)=%.6f (raw %.6f x %.2f, estimated)  k=%.4g  k_max=%.4f  %s\n",
                  "smallness", s.exterior_constant, s.exterior_raw, s.safety_factor, s.k, s.k_max,
                  s.pass ? "PASS" : "FAIL");
    os << buf;
    for (std::size_t i = 0; i < s.components.size(); ++i) {
        const auto& c = s.components[i];
        std::snprintf(buf, sizeof buf, "  obstacle %zu (%s): C=%.6f%s  8C^2k^2=%.4f  %s\n", i, to_string(c.bc).c_str(),
                      c.constant, c.exact ? " exact" : " bound", c.condition, c.pass ? "PASS" : "FAIL");
        os << buf;
    }
    return os.str();
}

std::string probe_report_json(const IndicatorField& field, const ClassifyOptions& opt,
                              const std::optional<FieldScore>& score, const std::string& fingerprint) {
    int counts[4] = {0, 0, 0, 0};
    int failed = 0;
    for (const auto& p : field.points) {
        ++counts[int(p.label)];
        failed += p.failed;
    }
    json j;
    j["fingerprint"] = fingerprint;
    j["thresholds"] = {{"T", field.T}, {"B", field.B}, {"median_abs", field.median_abs},
                       {"T_factor", opt.T_factor}, {"B_factor", opt.B_factor}};
    j["grid"] = {{"nx", opt.grid.nx}, {"ny", opt.grid.ny}, {"margin", opt.grid.margin}, {"points", field.points.size()}};
    j["strategy"] = to_string(opt.strategy);
    j["orders"] = opt.probe.needle.orders;
    j["tolerance"] = opt.probe.tolerance;
    j["labels"] = {{"neumann-near", counts[int(Label::NeumannNear)]},
                   {"dirichlet-near", counts[int(Label::DirichletNear)]},
                   {"background", counts[int(Label::Background)]},
                   {"unresolved", counts[int(Label::Unresolved)]}};
    j["failed_points"] = failed;
    json errors = json::array();
    for (const auto& p : field.points)
        if (p.failed) errors.push_back({{"x", p.x.x()}, {"y", p.x.y()}, {"error", p.error}});
    j["errors"] = errors;
    if (score) {
        j["score"] = {{"neumann-near", label_json(score->neumann)},
                      {"dirichlet-near", label_json(score->dirichlet)},
                      {"background", label_json(score->background)},
                      {"far_points", score->far_points},
                      {"far_obstacle_labels", score->far_obstacle_labels},
                      {"near_distance", score->near_distance},
                      {"far_distance", score->far_distance}};
    }
    return j.dump(1) + "\n";
}

std::string needle_dump_json(const std::vector<NeedleFunction>& members) {
    json orders = json::array(), coefs = json::array(), res = json::array();
    for (const auto& m : members) {
        orders.push_back(m.order);
        coefs.push_back(std::vector<double>(m.coef.data(), m.coef.data() + m.coef.size()));
        res.push_back({{"collocation", m.diagnostics.collocation_residual},
                       {"heldout", nan_safe(m.diagnostics.heldout_error)},
                       {"coefficient_norm", m.diagnostics.coefficient_norm}});
    }
    json j = {{"orders", orders}, {"coefficients", coefs}, {"residuals", res}};
    if (!members.empty()) {
        const auto& b = members.front().basis;
        j["basis"] = {{"k", b.k}, {"center", {b.center.x(), b.center.y()}}, {"scale", b.scale}};
        json nd = json::array();
        for (const auto& v : members.front().needle.vertices) nd.push_back({v.x(), v.y()});
        j["needle"] = nd;
        j["family"] = to_string(members.front().family);
    }
    return j.dump(1) + "\n";
}

std::string timing_json(const std::vector<std::pair<std::string, double>>& phases) {
    json j = json::object();
    for (const auto& [name, t] : phases) j[name] = t;
    return j.dump(1) + "\n";
}

void write_text(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw ConfigError("cannot write " + path);
    f << text;
    if (!f) throw ConfigError("write failed for " + path);
}

std::string read_text(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read " + path);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

}  // namespace ips
