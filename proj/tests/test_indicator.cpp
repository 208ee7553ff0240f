#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ips/errors.hpp"
#include "ips/indicator.hpp"

using namespace ips;

namespace {

constexpr double kPi = std::numbers::pi;

Scenario annulus(BC bc, double k = 0.0) {
    Scenario s;
    s.obstacles.push_back({Curve::circle(Vec2::Zero(), 0.5), bc});
    s.k = k;
    s.min_gap = 0.3;
    return s;
}

Scenario two_obstacles(double k) {
    Scenario s;
    s.obstacles.push_back({Curve::circle(Vec2(-0.4, 0), 0.25), BC::Neumann});
    s.obstacles.push_back({Curve::kite(Vec2(0.4, 0), 0.15), BC::Dirichlet});
    s.k = k;
    s.min_gap = 0.3;
    return s;
}

const Context& ctx_dirichlet() {
    static const Context c = Context::build(annulus(BC::Dirichlet));
    return c;
}
const Context& ctx_neumann() {
    static const Context c = Context::build(annulus(BC::Neumann));
    return c;
}
const Context& ctx_empty() {
    static const Context c = [] {
        Scenario s;
        s.min_gap = 0.3;
        return Context::build(s);
    }();
    return c;
}
const Context& ctx_s2(double k) {
    static const Context c0 = Context::build(two_obstacles(0.0));
    static const Context c8 = Context::build(two_obstacles(0.8));
    return k == 0 ? c0 : c8;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

NeedleFunction fixed_member(const Context& ctx, int order, int index) {
    NeedleFunction v;
    v.basis = EntireBasis::for_domain(ctx.k(), ctx.domain());
    v.order = order;
    v.coef = Eigen::VectorXd::Zero(EntireBasis::size(order));
    v.coef(index) = 1.0;
    v.needle = build_radial_needle(ctx.domain(), Vec2(0.8, 0));
    return v;
}

Needle radial(const Context& ctx, const Vec2& x) { return build_radial_needle(ctx.domain(), x); }

}  // namespace

TEST(IndicatorTerm, EmptyObstacleIsZero) {
    const auto& c = ctx_empty();
    for (int i : {0, 1, 4}) EXPECT_NEAR(indicator_term(c, fixed_member(c, 3, i)), 0.0, 1e-10);
    const auto v = fit_needle_sequence(c.domain(), 0.0, radial(c, Vec2(0.3, 0.2)), NeedleParams{}, 20);
    EXPECT_NEAR(indicator_term(c, v), 0.0, 1e-8);
}

TEST(IndicatorTerm, AnnulusConstant) {
    const auto& c = ctx_dirichlet();
    EXPECT_NEAR(indicator_term(c, fixed_member(c, 0, 0)), -9.0647203, 1e-6);
    EXPECT_NEAR(indicator_term(c, fixed_member(c, 0, 0)), -2 * kPi / std::log(2.0), 1e-7);
}

TEST(IndicatorTerm, NeumannAnnulusModeOne) {
    const auto& c = ctx_neumann();
    const double rho2 = 0.25;
    EXPECT_NEAR(indicator_term(c, fixed_member(c, 1, 1)), 2 * kPi * rho2 / (1 + rho2), 1e-7);
    EXPECT_NEAR(indicator_term(c, fixed_member(c, 1, 1)), 1.2566371, 1e-6);
    const ScalarField x{[](const Vec2& p) { return p.x(); }, [](const Vec2&) { return Vec2(1, 0); }};
    const auto a = trace_coefficients(c, x);
    EXPECT_NEAR(c.pairing->difference(a, a), 2 * kPi / 5, 1e-7);
}

TEST(IndicatorDirect, EmptyObstacleVanishes) {
    for (const Vec2 x : {Vec2(0.3, 0), Vec2(-0.2, 0.5), Vec2(0.0, -0.7)}) {
        const auto d = indicator_direct(ctx_empty(), x, Family::G0);
        EXPECT_LT(std::abs(d.value), 1e-7);
        EXPECT_LT(std::abs(d.alternative), 1e-7);
    }
}

TEST(IndicatorDirect, DirichletAnnulusIsNegative) {
    EXPECT_LT(indicator_direct(ctx_dirichlet(), Vec2(0.75, 0), Family::G0).value, 0.0);
    EXPECT_GT(indicator_direct(ctx_neumann(), Vec2(0.75, 0), Family::G0).value, 0.0);
}

TEST(IndicatorDirect, ProximityAndDomainChecks) {
    EXPECT_THROW(indicator_direct(ctx_dirichlet(), Vec2(0.99, 0), Family::G0), ProximityError);
    EXPECT_THROW(indicator_direct(ctx_dirichlet(), Vec2(0.51, 0), Family::G0), ProximityError);
    EXPECT_THROW(indicator_direct(ctx_dirichlet(), Vec2(0.2, 0), Family::G0), DomainError);
    EXPECT_THROW(indicator_direct(ctx_dirichlet(), Vec2(1.2, 0), Family::G0), DomainError);
}

TEST(I1, GreenFamilyIsZero) {
    for (const Vec2 x : {Vec2(0.75, 0), Vec2(-0.1, 0.8)}) {
        EXPECT_NEAR(i1(ctx_dirichlet(), x, Family::Gstar), 0.0, 1e-10);
        EXPECT_LT(w1_trace_norm(ctx_dirichlet(), x, Family::Gstar), 1e-7);
        EXPECT_LT(w1_trace_norm(ctx_s2(0.8), Vec2(0.0, 0.6), Family::Gstar), 1e-7);
    }
}

TEST(I1, EmptyObstacleSeriesOracle) {
    // On the unit disk G(., x) for x = (rho, 0) has trace sum_n rho^n cos(n t) / (2 pi n), so
    // <Lambda_0 G, G> = -ln(1 - rho^2) / (4 pi) and the flux term is its negative.
    const double rho = 0.3;
    EXPECT_NEAR(i1(ctx_empty(), Vec2(rho, 0), Family::G0), -std::log(1 - rho * rho) / (2 * kPi), 1e-9);
}

TEST(InnerDecomposition, AnnulusG0) {
    for (const Vec2 x : {Vec2(0.75, 0), Vec2(-0.3, 0.6), Vec2(0.1, -0.8)}) {
        const auto d = indicator_direct(ctx_dirichlet(), x, Family::G0);
        EXPECT_LT(rel(d.value + i1(ctx_dirichlet(), x, Family::G0), d.W), 1e-5);
        EXPECT_LT(rel(d.alternative, d.value), 1e-6);
    }
}

TEST(Decompositions, TwoObstacleBothFamilies) {
    for (double k : {0.0, 0.8})
        for (Family f : {Family::G0, Family::Gstar})
            for (const Vec2 x : {Vec2(0.0, 0.5), Vec2(-0.4, -0.45), Vec2(0.5, 0.4)}) {
                const auto d = ips_decompositions(ctx_s2(k), x, f);
                EXPECT_LT(rel(d.neumann, d.W), 1e-5) << k << " " << to_string(f);
                EXPECT_LT(rel(d.dirichlet, d.W), 1e-5) << k << " " << to_string(f);
                EXPECT_LT(std::abs(d.W - d.w - d.w1), 1e-7 * std::max(1.0, std::abs(d.W)));
            }
}

TEST(Decompositions, EmptyObstacleCollapses) {
    const Vec2 x(0.3, 0.1);
    const auto d = ips_decompositions(ctx_empty(), x, Family::G0);
    EXPECT_NEAR(d.w, 0.0, 1e-10);
    EXPECT_LT(rel(d.W, d.w1), 1e-9);
    EXPECT_LT(rel(d.neumann, d.W), 1e-5);
}

TEST(Auxiliary, OuterDecompositionPointwise) {
    const auto& c = ctx_s2(0.8);
    const Vec2 x(0.0, 0.5);
    for (Family f : {Family::G0, Family::Gstar}) {
        const auto s = singular_solution(*c.free_model, x, f);
        const auto a = solve_auxiliary(*c.model, c.scenario, s.field());
        for (const Vec2 y : {Vec2(0.1, -0.6), Vec2(-0.6, 0.5), Vec2(0.55, 0.3)})
            EXPECT_NEAR(a.W.value(y), a.w.value(y) + a.w1.value(y), 1e-7);
    }
}

TEST(TwistedSymmetry, SampledPairs) {
    const auto& c = ctx_s2(0.0);
    for (Family f : {Family::G0, Family::Gstar}) {
        const auto t = twisted_symmetry(c, Vec2(0.0, 0.5), Vec2(-0.3, -0.6), f);
        EXPECT_NEAR(t.lhs, t.rhs, 1e-6 * std::max(1.0, std::abs(t.lhs)));
    }
}

TEST(ReflectedSolution, BoundedAcrossPoints) {
    // Trace size of w_x on the obstacles, including points close to D.
    const auto& c = ctx_s2(0.0);
    std::vector<double> v;
    for (const Vec2 x : {Vec2(0.0, 0.7), Vec2(0.0, 0.3), Vec2(-0.4, 0.33), Vec2(0.4, -0.3), Vec2(-0.8, 0.0), Vec2(0.2, 0.0)})
        v.push_back(reflected_trace_norm(c, x, Family::G0));
    const double lo = *std::min_element(v.begin(), v.end()), hi = *std::max_element(v.begin(), v.end());
    EXPECT_GT(lo, 0.0);
    EXPECT_LT(hi / lo, 5.0) << lo << " " << hi;
}

TEST(Probe, ConvergesToDirectAwayFromObstacle) {
    const auto& c = ctx_dirichlet();
    const Vec2 x(0.0, 0.75);
    const auto est = probe(c, radial(c, x), ProbeOptions{});
    const double direct = indicator_direct(c, x, Family::G0).value;
    EXPECT_TRUE(est.converged);
    EXPECT_LT(rel(est.value, direct), 1e-2) << est.value << " vs " << direct;
    EXPECT_EQ(est.terms.size(), 4u);
}

TEST(Probe, BlowUpTrends) {
    for (BC bc : {BC::Dirichlet, BC::Neumann}) {
        const auto& c = bc == BC::Dirichlet ? ctx_dirichlet() : ctx_neumann();
        std::vector<double> v;
        for (double d : {0.2, 0.1, 0.05}) {
            const Vec2 x = (0.5 + d) * Vec2(std::cos(0.3), std::sin(0.3));
            v.push_back(probe(c, radial(c, x), ProbeOptions{}).value);
        }
        if (bc == BC::Dirichlet) {
            EXPECT_GT(v[0], v[1]);
            EXPECT_GT(v[1], v[2]);
        } else {
            EXPECT_LT(v[0], v[1]);
            EXPECT_LT(v[1], v[2]);
        }
    }
}

TEST(Probe, ExtrapolationFallsBack) {
    EXPECT_DOUBLE_EQ(extrapolate({10, 20, 30}, {1.0, 1.0, 1.0}), 1.0);
    // J_n = 2 + 5 / n
    const double e = extrapolate({10, 20, 40}, {2.5, 2.25, 2.125});
    EXPECT_NEAR(e, 2.0, 1e-9);
    EXPECT_DOUBLE_EQ(extrapolate({10, 20, 30}, {1.0, 3.0, 2.0}), 2.0);
}

TEST(Lifted, SymmetryAndDiagonal) {
    const auto& c = ctx_s2(0.0);
    const std::vector<std::pair<Vec2, Vec2>> pairs{{Vec2(0.0, 0.6), Vec2(0.0, -0.6)},
                                                   {Vec2(-0.5, 0.5), Vec2(0.6, 0.4)},
                                                   {Vec2(0.0, 0.75), Vec2(-0.7, -0.2)}};
    for (const auto& [x, y] : pairs) {
        const double a = lifted_indicator(c, radial(c, x), radial(c, y), ProbeOptions{}).value;
        const double b = lifted_indicator(c, radial(c, y), radial(c, x), ProbeOptions{}).value;
        EXPECT_LT(std::abs(a - b), 1e-3 * std::abs(a));
    }
    const Vec2 x(0.0, 0.6);
    const double diag = lifted_indicator(c, radial(c, x), radial(c, x), ProbeOptions{}).value;
    EXPECT_LT(rel(diag, probe(c, radial(c, x), ProbeOptions{}).value), 1e-3);
    EXPECT_NEAR(lifted_indicator(ctx_empty(), radial(ctx_empty(), x), radial(ctx_empty(), Vec2(0.2, -0.3)), ProbeOptions{}).value,
                0.0, 1e-8);
}

TEST(Sources, RoutesAgree) {
    const auto& c = ctx_s2(0.0);
    for (const Vec2 x : {Vec2(0.0, 0.6), Vec2(0.6, 0.45)}) {
        const auto s = sources_indicator(c, radial(c, x), ProbeOptions{});
        EXPECT_LT(std::abs(s.pairing_route - s.identity_route), 1e-3 * std::max(1.0, std::abs(s.pairing_route)));
    }
}

TEST(Sources, DirectCombination) {
    for (const Vec2 x : {Vec2(0.0, 0.6), Vec2(-0.7, 0.3)}) {
        const auto d = sources_direct(ctx_s2(0.0), x);
        EXPECT_LT(std::abs(d.w0 - d.combination), 1e-3 * std::max(1.0, std::abs(d.w0)));
    }
}

TEST(Sources, DecreasesTowardDirichletBoundary) {
    const auto& c = ctx_dirichlet();
    std::vector<double> v;
    for (double d : {0.2, 0.1, 0.05}) {
        const Vec2 x = (0.5 + d) * Vec2(std::cos(1.1), std::sin(1.1));
        v.push_back(sources_indicator(c, radial(c, x), ProbeOptions{}).pairing_route);
    }
    EXPECT_GT(v[0], v[1]);
    EXPECT_GT(v[1], v[2]);
}

TEST(Classify, EmptyObstacleAllBackground) {
    ClassifyOptions opt;
    opt.grid = GridSpec{10, 10, 0.05};
    const auto f = classify_field(ctx_empty(), opt);
    ASSERT_FALSE(f.points.empty());
    for (const auto& p : f.points) EXPECT_EQ(p.label, Label::Background) << p.x.transpose();
}

TEST(Classify, SweepCompletesOnTwoObstacles) {
    const auto& c = ctx_s2(0.0);
    const DtNPair dn = c.dn;
    const Context blind = Context::blind_from(c.scenario, dn);
    EXPECT_TRUE(blind.blind());
    ClassifyOptions opt;
    opt.grid = GridSpec{8, 8, 0.05};
    const auto f = classify_field(blind, opt);
    EXPECT_EQ(f.points.size(), grid_points(c.domain(), opt.grid).size());
    for (const auto& p : f.points) EXPECT_FALSE(p.failed) << p.error;
    // Parallel sweep is identical to the serial one.
    opt.threads = 3;
    const auto g = classify_field(blind, opt);
    for (std::size_t i = 0; i < f.points.size(); ++i) {
        EXPECT_EQ(f.points[i].value, g.points[i].value);
        EXPECT_EQ(f.points[i].label, g.points[i].label);
    }
}

TEST(Classify, GridPointsRespectMargin) {
    const auto pts = grid_points(Curve::circle(Vec2::Zero(), 1.0), GridSpec{40, 40, 0.05});
    EXPECT_GT(pts.size(), 1000u);
    for (const auto& p : pts) EXPECT_LE(p.norm(), 0.95 + 1e-12);
}

TEST(Classify, LabelRules) {
    IndicatorField f;
    auto add = [&](double v, bool conv) {
        FieldPoint p;
        p.value = v;
        p.converged = conv;
        f.points.push_back(p);
    };
    add(10, false);   // neumann-near
    add(-10, false);  // dirichlet-near
    add(0.5, true);   // background
    add(10, true);    // converged but large: unresolved
    add(1.5, false);  // small and not converged: unresolved
    FieldPoint broken;
    broken.failed = true;
    f.points.push_back(broken);
    ClassifyOptions opt;
    opt.T = 5;
    opt.B = 1;
    label_field(f, opt);
    EXPECT_EQ(f.points[0].label, Label::NeumannNear);
    EXPECT_EQ(f.points[1].label, Label::DirichletNear);
    EXPECT_EQ(f.points[2].label, Label::Background);
    EXPECT_EQ(f.points[3].label, Label::Unresolved);
    EXPECT_EQ(f.points[4].label, Label::Unresolved);
    EXPECT_EQ(f.points[5].label, Label::Unresolved);
    EXPECT_DOUBLE_EQ(f.T, 5);
    EXPECT_DOUBLE_EQ(f.B, 1);

    // Thresholds from the median |value| when not fixed.
    ClassifyOptions auto_opt;
    label_field(f, auto_opt);
    EXPECT_GT(f.median_abs, 0);
    EXPECT_DOUBLE_EQ(f.T, 5 * f.median_abs);
    EXPECT_DOUBLE_EQ(f.B, 2 * f.median_abs);
}

TEST(Classify, ScoreAgainstGeometry) {
    const Scenario s = two_obstacles(0.0);
    IndicatorField f;
    auto add = [&](Vec2 x, Label l) {
        FieldPoint p;
        p.x = x;
        p.label = l;
        f.points.push_back(p);
    };
    add(Vec2(-0.4, 0.28), Label::NeumannNear);    // near D_n, correct
    add(Vec2(-0.4, -0.23), Label::Background);    // near D_n inside, missed
    add(Vec2(0.0, 0.8), Label::Background);       // far, correct
    add(Vec2(0.1, -0.7), Label::DirichletNear);   // far, wrong
    add(Vec2(-0.1, 0.1), Label::Unresolved);
    const auto sc = score_field(f, s);
    EXPECT_EQ(sc.neumann.truth, 2);
    EXPECT_EQ(sc.neumann.correct, 1);
    EXPECT_DOUBLE_EQ(sc.neumann.recall(), 0.5);
    EXPECT_EQ(sc.far_points, 2);
    EXPECT_EQ(sc.far_obstacle_labels, 1);
    EXPECT_EQ(sc.unresolved, 1);
    EXPECT_EQ(sc.total, 5);
    EXPECT_DOUBLE_EQ(sc.dirichlet.precision(), 0.0);
}

TEST(Labels, Strings) {
    EXPECT_EQ(to_string(Label::NeumannNear), "neumann-near");
    EXPECT_EQ(to_string(Label::DirichletNear), "dirichlet-near");
    EXPECT_EQ(to_string(Label::Background), "background");
    EXPECT_EQ(to_string(Label::Unresolved), "unresolved");
    EXPECT_EQ(needle_strategy_from_string("fan"), NeedleStrategy::Fan);
    EXPECT_THROW(needle_strategy_from_string("zigzag"), ConfigError);
}
