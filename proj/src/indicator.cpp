#include "ips/indicator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "ips/errors.hpp"
#include "ips/parallel.hpp"

namespace ips {

Context Context::build(const Scenario& sc, int J, const MfsSettings& s) {
    validate_scenario(sc);
    Context c;
    c.scenario = sc;
    c.J = J;
    c.mfs = s;
    c.model = ForwardModel::for_scenario(sc, s);
    c.free_model = ForwardModel::obstacle_free(sc, s);
    c.dn = assemble_dn(sc, *c.model, *c.free_model, J);
    c.pairing = std::make_shared<DnPairing>(c.dn, c.free_model->layout().grids[0]);
    return c;
}

Context Context::with_dn(const Scenario& sc, const DtNPair& dn, const MfsSettings& s) {
    validate_scenario(sc);
    Context c;
    c.scenario = sc;
    c.J = dn.lambda_D.J;
    c.mfs = s;
    c.model = ForwardModel::for_scenario(sc, s);
    c.free_model = ForwardModel::obstacle_free(sc, s);
    c.dn = dn;
    c.pairing = std::make_shared<DnPairing>(c.dn, c.free_model->layout().grids[0]);
    return c;
}

Context Context::blind_from(const Scenario& sc, const DtNPair& dn, const MfsSettings& s) {
    Context c;
    c.scenario = sc.without_obstacles();
    c.J = dn.lambda_D.J;
    c.mfs = s;
    c.free_model = ForwardModel::obstacle_free(c.scenario, s);
    c.dn = dn;
    c.pairing = std::make_shared<DnPairing>(c.dn, c.free_model->layout().grids[0]);
    return c;
}

// ---------------------------------------------------------------------------

namespace {

double grid_flux(const BoundaryGrid& g, const ScalarField& f, const ScalarField& h) {
    double s = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        const Vec2 p = g.nodes.col(i);
        s += g.weights[i] * f.value(p) * h.grad(p).dot(g.normals.col(i));
    }
    return s;
}

void require_truth(const Context& ctx) {
    if (ctx.blind()) throw ConfigError("this quantity needs the obstacle geometry");
}

}  // namespace

double exterior_energy(const ForwardSolution& u) {
    const auto& L = u.layout();
    double e = 0.0;
    for (int c = 0; c < L.components(); ++c) {
        const double part = L.grids[c].weights.dot(u.trace(c).cwiseProduct(u.normal_derivative(c)));
        e += c == 0 ? part : -part;
    }
    return e;
}

double obstacle_energy(const ForwardModel& model, const Scenario& sc, const ScalarField& f, BC which) {
    const auto& L = model.layout();
    if (L.components() != int(sc.obstacles.size()) + 1) throw ConfigError("model does not match the scenario");
    double e = 0.0;
    for (std::size_t i = 0; i < sc.obstacles.size(); ++i)
        if (sc.obstacles[i].bc == which) e += grid_flux(L.grids[i + 1], f, f);
    return e;
}

double outer_flux(const ForwardModel& model, const ScalarField& f, const ScalarField& g) {
    return grid_flux(model.layout().grids[0], f, g);
}

double outer_flux(const ForwardModel& model, const ScalarField& f, const ForwardSolution& g) {
    const auto& grid = model.layout().grids[0];
    if (g.layout().grids[0].size() != grid.size()) throw ConfigError("outer grids differ");
    const Eigen::VectorXd dn = g.normal_derivative(0);
    double s = 0.0;
    for (int i = 0; i < grid.size(); ++i) s += grid.weights[i] * f.value(grid.nodes.col(i)) * dn[i];
    return s;
}

AuxiliarySolutions solve_auxiliary(const ForwardModel& model, const Scenario& sc, const ScalarField& f, bool with_W) {
    const auto& L = model.layout();
    const int nc = L.components();
    if (nc != int(sc.obstacles.size()) + 1) throw ConfigError("model does not match the scenario");
    double scale = 0.0;
    for (int c = 0; c < nc; ++c) scale = std::max(scale, model.dirichlet_data(c, f).cwiseAbs().maxCoeff());
    auto spec = [&](auto outer, auto on_obstacle) {
        BvpSpec s;
        s.scale = scale;
        s.conditions.push_back(outer);
        for (int c = 1; c < nc; ++c) s.conditions.push_back(on_obstacle(c, sc.obstacles[c - 1].bc));
        return s;
    };
    const Condition outer_f{CondType::Dirichlet, model.dirichlet_data(0, f)};
    const Condition outer_0{CondType::Dirichlet, model.zero_data(0)};
    auto reflect = [&](int c, BC bc) {
        return bc == BC::Neumann ? Condition{CondType::Neumann, -model.neumann_data(c, f)}
                                 : Condition{CondType::Dirichlet, -model.dirichlet_data(c, f)};
    };
    auto homogeneous = [&](int c, BC bc) {
        return Condition{bc == BC::Neumann ? CondType::Neumann : CondType::Dirichlet, model.zero_data(c)};
    };
    AuxiliarySolutions a;
    if (with_W) a.W = model.solve(spec(outer_f, reflect));
    a.w = model.solve(spec(outer_0, reflect));
    a.w1 = model.solve(spec(outer_f, homogeneous));
    a.eps_n = model.solve(spec(outer_0, [&](int c, BC bc) {
        return bc == BC::Neumann ? Condition{CondType::Dirichlet, model.zero_data(c)}
                                 : Condition{CondType::Dirichlet, model.dirichlet_data(c, f)};
    }));
    a.eps_d = model.solve(spec(outer_0, [&](int c, BC bc) {
        return bc == BC::Neumann ? Condition{CondType::Neumann, model.neumann_data(c, f)}
                                 : Condition{CondType::Neumann, model.zero_data(c)};
    }));
    return a;
}

// ---------------------------------------------------------------------------

void check_probe_point(const Context& ctx, const Vec2& x, double limit) {
    if (!contains(ctx.domain(), x)) throw DomainError("probe point outside the domain");
    const double d_outer = distance_to_curve(ctx.domain(), x);
    if (d_outer < limit) throw ProximityError("probe point within " + std::to_string(limit) + " of the outer boundary");
    if (!ctx.scenario.obstacles.empty()) {
        if (inside_obstacle(ctx.scenario, x)) throw DomainError("probe point inside an obstacle");
        if (distance_to_obstacles(ctx.scenario, x) < limit)
            throw ProximityError("probe point within " + std::to_string(limit) + " of an obstacle");
    }
}

DirectIndicator indicator_direct(const Context& ctx, const Vec2& x, Family family) {
    require_truth(ctx);
    check_probe_point(ctx, x);
    const SingularSolution G = singular_solution(*ctx.free_model, x, family);
    const ScalarField g = G.field();
    const AuxiliarySolutions a = solve_auxiliary(*ctx.model, ctx.scenario, g);
    DirectIndicator d;
    d.x = x;
    d.family = family;
    d.W = a.W.value(x);
    d.w = a.w.value(x);
    d.w1 = a.w1.value(x);
    d.lambda_D_GG = outer_flux(*ctx.model, g, a.w1);
    const double gg = outer_flux(*ctx.model, g, g);
    d.value = d.W - d.lambda_D_GG + gg;
    d.alternative = d.w - outer_flux(*ctx.model, g, a.w);
    return d;
}

IpsDecomposition ips_decompositions(const Context& ctx, const Vec2& x, Family family) {
    require_truth(ctx);
    check_probe_point(ctx, x);
    const SingularSolution G = singular_solution(*ctx.free_model, x, family);
    const ScalarField g = G.field();
    const auto& sc = ctx.scenario;
    const AuxiliarySolutions a = solve_auxiliary(*ctx.model, sc, g);
    const double En = obstacle_energy(*ctx.model, sc, g, BC::Neumann);
    const double Ed = obstacle_energy(*ctx.model, sc, g, BC::Dirichlet);
    const double gg = outer_flux(*ctx.model, g, g);
    const double E1 = exterior_energy(a.w1);
    IpsDecomposition r;
    r.x = x;
    r.family = family;
    r.W = a.W.value(x);
    r.w = a.w.value(x);
    r.w1 = a.w1.value(x);
    r.neumann = En + exterior_energy(a.w + a.eps_n) - gg + E1 - exterior_energy(a.eps_n) - Ed;
    r.dirichlet = -Ed - exterior_energy(a.w + a.eps_d) - gg + E1 + exterior_energy(a.eps_d) + En;
    return r;
}

Eigen::VectorXd trace_coefficients(const Context& ctx, const ScalarField& f) {
    return ctx.pairing->space().coefficients(f);
}

double i1(const Context& ctx, const Vec2& x, Family family) {
    if (family == Family::Gstar) return 0.0;
    const ScalarField g = fundamental_field(ctx.k(), x);
    const Eigen::VectorXd a = trace_coefficients(ctx, g);
    return ctx.pairing->lambda_D(a, a) - outer_flux(*ctx.free_model, g, g);
}

namespace {

Eigen::VectorXd needle_trace(const DnPairing& pairing, const NeedleFunction& v) {
    const auto& g = pairing.space().grid();
    Eigen::VectorXd nodal(g.size());
    for (int i = 0; i < g.size(); ++i) nodal[i] = v.value(g.nodes.col(i));
    return pairing.coefficients(nodal);
}

}  // namespace

double indicator_term(const DnPairing& pairing, const NeedleFunction& v) {
    const Eigen::VectorXd a = needle_trace(pairing, v);
    return pairing.difference(a, a);
}

double indicator_term(const Context& ctx, const NeedleFunction& v) { return indicator_term(*ctx.pairing, v); }

double extrapolate(const std::vector<int>& orders, const std::vector<double>& terms) {
    if (terms.empty()) throw ConfigError("nothing to extrapolate");
    const std::size_t m = terms.size();
    if (m < 3 || orders.size() != m) return terms.back();
    const double n1 = orders[m - 3], n2 = orders[m - 2], n3 = orders[m - 1];
    const double d1 = terms[m - 2] - terms[m - 3], d2 = terms[m - 1] - terms[m - 2];
    if (d2 == 0.0) return terms.back();
    const double ratio = d1 / d2;
    if (!(ratio > 0)) return terms.back();
    auto model = [&](double p) {
        return (std::pow(n1, -p) - std::pow(n2, -p)) / (std::pow(n2, -p) - std::pow(n3, -p));
    };
    double lo = 1e-3, hi = 20.0;
    const double flo = model(lo) - ratio, fhi = model(hi) - ratio;
    if (flo * fhi > 0) return terms.back();
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((model(mid) - ratio) * flo > 0)
            lo = mid;
        else
            hi = mid;
    }
    const double p = 0.5 * (lo + hi);
    const double c = -d2 / (std::pow(n2, -p) - std::pow(n3, -p));
    return terms.back() - c * std::pow(n3, -p);
}

IndicatorEstimate probe(const Context& ctx, const Needle& needle, const ProbeOptions& opt) {
    const NeedleFitter fitter(ctx.domain(), ctx.k(), needle, opt.needle.resolved(ctx.scenario), ctx.free_model.get());
    IndicatorEstimate e;
    e.needle = needle;
    e.family = opt.needle.family;
    e.orders = opt.needle.orders;
    for (int n : e.orders) {
        const NeedleFunction v = fitter.fit(n);
        e.terms.push_back(indicator_term(*ctx.pairing, v));
        e.fits.push_back(v.diagnostics);
    }
    const double last = e.terms.back();
    const double prev = e.terms.size() > 1 ? e.terms[e.terms.size() - 2] : last;
    e.relative_change = std::abs(last - prev) / std::max(std::abs(last), 1.0);
    e.converged = e.terms.size() > 1 && e.relative_change < opt.tolerance;
    e.value = opt.richardson ? extrapolate(e.orders, e.terms) : last;
    return e;
}

LiftedEstimate lifted_indicator(const Context& ctx, const Needle& nx, const Needle& ny, const ProbeOptions& opt) {
    const NeedleParams np = opt.needle.resolved(ctx.scenario);
    const NeedleFitter fx(ctx.domain(), ctx.k(), nx, np, ctx.free_model.get());
    const NeedleFitter fy(ctx.domain(), ctx.k(), ny, np, ctx.free_model.get());
    LiftedEstimate e;
    e.orders = opt.needle.orders;
    for (int n : e.orders) {
        const Eigen::VectorXd a = needle_trace(*ctx.pairing, fx.fit(n));
        const Eigen::VectorXd b = needle_trace(*ctx.pairing, fy.fit(n));
        e.terms.push_back(ctx.pairing->difference(a, b));
    }
    e.value = opt.richardson ? extrapolate(e.orders, e.terms) : e.terms.back();
    return e;
}

double lifted_direct(const Context& ctx, const Vec2& x, const Vec2& y, Family family) {
    require_truth(ctx);
    check_probe_point(ctx, x);
    check_probe_point(ctx, y);
    const ScalarField gx = singular_solution(*ctx.free_model, x, family).field();
    const ScalarField gy = singular_solution(*ctx.free_model, y, family).field();
    const AuxiliarySolutions a = solve_auxiliary(*ctx.model, ctx.scenario, gx, false);
    return a.w.value(y) - outer_flux(*ctx.model, gy, a.w);
}

TwistedSymmetry twisted_symmetry(const Context& ctx, const Vec2& x, const Vec2& y, Family family) {
    require_truth(ctx);
    check_probe_point(ctx, x);
    check_probe_point(ctx, y);
    const ScalarField gx = singular_solution(*ctx.free_model, x, family).field();
    const ScalarField gy = singular_solution(*ctx.free_model, y, family).field();
    const AuxiliarySolutions ax = solve_auxiliary(*ctx.model, ctx.scenario, gx, false);
    const AuxiliarySolutions ay = solve_auxiliary(*ctx.model, ctx.scenario, gy, false);
    return {ax.w.value(y) - ax.w1.value(y), ay.w.value(x) - ay.w1.value(x)};
}

SourcesEstimate sources_indicator(const Context& ctx, const Needle& needle, const ProbeOptions& opt) {
    ProbeOptions o = opt;
    o.needle.family = Family::G0;
    const NeedleFitter fitter(ctx.domain(), ctx.k(), needle, o.needle.resolved(ctx.scenario), nullptr);
    const Eigen::VectorXd g = trace_coefficients(ctx, fundamental_field(ctx.k(), needle.tip()));
    const DnPairing& P = *ctx.pairing;
    SourcesEstimate e;
    e.orders = o.needle.orders;
    e.J_G = P.difference(g, g);
    for (int n : e.orders) {
        const Eigen::VectorXd a = needle_trace(P, fitter.fit(n));
        const Eigen::VectorXd r = g - a;
        e.pairing_terms.push_back(-P.difference(a, r));
        e.identity_terms.push_back(0.5 * (P.difference(a, a) + P.difference(r, r) - e.J_G));
    }
    e.pairing_route = o.richardson ? extrapolate(e.orders, e.pairing_terms) : e.pairing_terms.back();
    e.identity_route = o.richardson ? extrapolate(e.orders, e.identity_terms) : e.identity_terms.back();
    return e;
}

SourcesDirect sources_direct(const Context& ctx, const Vec2& x) {
    const DirectIndicator i0 = indicator_direct(ctx, x, Family::G0);
    const DirectIndicator is = indicator_direct(ctx, x, Family::Gstar);
    const ScalarField g = fundamental_field(ctx.k(), x);
    BvpSpec spec;
    spec.conditions.push_back({CondType::Dirichlet, ctx.free_model->dirichlet_data(0, g)});
    const ForwardSolution u0 = ctx.free_model->solve(spec);
    const double lambda0 = outer_flux(*ctx.free_model, g, u0);
    SourcesDirect s;
    s.w0 = i0.w;
    s.combination = 0.5 * (i0.value + is.value - (lambda0 - i0.lambda_D_GG));
    return s;
}

double w1_trace_norm(const Context& ctx, const Vec2& x, Family family) {
    require_truth(ctx);
    const ScalarField g = singular_solution(*ctx.free_model, x, family).field();
    const AuxiliarySolutions a = solve_auxiliary(*ctx.model, ctx.scenario, g, false);
    double m = 0.0;
    for (int c = 0; c < a.w1.layout().components(); ++c) m = std::max(m, a.w1.trace(c).cwiseAbs().maxCoeff());
    return m;
}

double reflected_trace_norm(const Context& ctx, const Vec2& x, Family family) {
    require_truth(ctx);
    const ScalarField g = singular_solution(*ctx.free_model, x, family).field();
    const AuxiliarySolutions a = solve_auxiliary(*ctx.model, ctx.scenario, g, false);
    double s = 0.0;
    for (int c = 1; c < a.w.layout().components(); ++c)
        s += a.w.layout().grids[c].weights.dot(a.w.trace(c).cwiseAbs2());
    return std::sqrt(s);
}

// ---------------------------------------------------------------------------

std::string to_string(Label l) {
    switch (l) {
        case Label::NeumannNear: return "neumann-near";
        case Label::DirichletNear: return "dirichlet-near";
        case Label::Background: return "background";
        case Label::Unresolved: return "unresolved";
    }
    return "unresolved";
}

std::string to_string(NeedleStrategy s) { return s == NeedleStrategy::Radial ? "radial" : "fan"; }

NeedleStrategy needle_strategy_from_string(const std::string& s) {
    if (s == "radial") return NeedleStrategy::Radial;
    if (s == "fan") return NeedleStrategy::Fan;
    throw ConfigError("unknown needle strategy '" + s + "'");
}

std::vector<Vec2> grid_points(const Curve& domain, const GridSpec& g) {
    if (g.nx < 1 || g.ny < 1) throw ConfigError("grid needs at least one point per direction");
    if (!(g.margin >= 0.05)) throw ConfigError("grid margin must be at least 0.05");
    const BoundaryGrid b = discretize_curve(domain, 1024);
    const Eigen::Vector2d lo = b.nodes.rowwise().minCoeff(), hi = b.nodes.rowwise().maxCoeff();
    std::vector<Vec2> pts;
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const Vec2 p(lo.x() + (i + 0.5) * (hi.x() - lo.x()) / g.nx, lo.y() + (j + 0.5) * (hi.y() - lo.y()) / g.ny);
            try {
                if (contains(domain, p) && distance_to_curve(domain, p) >= g.margin) pts.push_back(p);
            } catch (const DegeneratePointError&) {
            }
        }
    return pts;
}

void label_field(IndicatorField& field, const ClassifyOptions& opt) {
    std::vector<double> mags;
    for (const auto& p : field.points)
        if (!p.failed && std::isfinite(p.value)) mags.push_back(std::abs(p.value));
    double med = 0.0;
    if (!mags.empty()) {
        std::sort(mags.begin(), mags.end());
        const std::size_t m = mags.size();
        med = m % 2 ? mags[m / 2] : 0.5 * (mags[m / 2 - 1] + mags[m / 2]);
    }
    field.median_abs = med;
    field.T = opt.T > 0 ? opt.T : opt.T_factor * med;
    field.B = opt.B > 0 ? opt.B : opt.B_factor * med;
    for (auto& p : field.points) {
        if (p.failed || !std::isfinite(p.value))
            p.label = Label::Unresolved;
        else if (p.value > field.T && !p.converged)
            p.label = Label::NeumannNear;
        else if (p.value < -field.T && !p.converged)
            p.label = Label::DirichletNear;
        else if (p.converged && std::abs(p.value) <= field.B)
            p.label = Label::Background;
        else
            p.label = Label::Unresolved;
    }
}

IndicatorField classify_field(const Context& ctx, const ClassifyOptions& opt) {
    opt.probe.needle.resolved(ctx.scenario).validate();
    const std::vector<Vec2> pts = grid_points(ctx.domain(), opt.grid);
    IndicatorField field;
    field.points.resize(pts.size());
    parallel_for(int(pts.size()), opt.threads, [&](int i) {
        FieldPoint& fp = field.points[i];
        fp.x = pts[i];
        try {
            const Needle radial = build_radial_needle(ctx.domain(), fp.x);
            std::vector<Needle> needles{radial};
            if (opt.strategy == NeedleStrategy::Fan) {
                const double a0 = entry_angle(radial);
                for (int j = 1; j < 4; ++j) {
                    try {
                        needles.push_back(build_needle(ctx.domain(), fp.x, a0 + j * std::numbers::pi / 2));
                    } catch (const Error&) {
                    }
                }
            }
            bool have = false;
            IndicatorEstimate best;
            std::string last_error;
            for (const Needle& nd : needles) {
                try {
                    IndicatorEstimate e = probe(ctx, nd, opt.probe);
                    if (!have || e.relative_change < best.relative_change) {
                        best = std::move(e);
                        have = true;
                    }
                } catch (const Error& err) {
                    last_error = err.what();
                }
            }
            if (!have) throw ApproximationError(last_error.empty() ? "no needle succeeded" : last_error);
            fp.value = best.value;
            fp.converged = best.converged;
            fp.entry_angle = entry_angle(best.needle);
            fp.terms = best.terms;
        } catch (const Error& err) {
            fp.failed = true;
            fp.error = err.what();
            fp.value = std::numeric_limits<double>::quiet_NaN();
        }
    });
    label_field(field, opt);
    return field;
}

FieldScore score_field(const IndicatorField& field, const Scenario& truth, double near_distance, double far_distance) {
    FieldScore s;
    s.near_distance = near_distance;
    s.far_distance = far_distance;
    for (const auto& p : field.points) {
        ++s.total;
        if (p.label == Label::Unresolved) ++s.unresolved;
        if (p.label == Label::NeumannNear) ++s.neumann.predicted;
        if (p.label == Label::DirichletNear) ++s.dirichlet.predicted;
        if (p.label == Label::Background) ++s.background.predicted;
        if (truth.obstacles.empty()) {
            ++s.background.truth;
            ++s.far_points;
            if (p.label == Label::Background) ++s.background.correct;
            if (p.label == Label::NeumannNear || p.label == Label::DirichletNear) ++s.far_obstacle_labels;
            continue;
        }
        const bool inside = inside_obstacle(truth, p.x);
        double dmin = std::numeric_limits<double>::infinity();
        BC nearest = BC::Dirichlet;
        for (const auto& o : truth.obstacles) {
            const double d = distance_to_curve(o.curve, p.x);
            if (d < dmin) {
                dmin = d;
                nearest = o.bc;
            }
        }
        if (dmin < near_distance) {
            LabelScore& ls = nearest == BC::Neumann ? s.neumann : s.dirichlet;
            ++ls.truth;
            if (p.label == (nearest == BC::Neumann ? Label::NeumannNear : Label::DirichletNear)) ++ls.correct;
        } else if (!inside && dmin >= far_distance) {
            ++s.background.truth;
            ++s.far_points;
            if (p.label == Label::Background) ++s.background.correct;
            if (p.label == Label::NeumannNear || p.label == Label::DirichletNear) ++s.far_obstacle_labels;
        }
    }
    return s;
}

}  // namespace ips
