#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "ips/errors.hpp"
#include "ips/identities.hpp"

using namespace ips;

namespace {

constexpr double kPi = std::numbers::pi;

Scenario disk_with(std::vector<Obstacle> obs, double k = 0.0) {
    Scenario s;
    s.obstacles = std::move(obs);
    s.k = k;
    s.min_gap = 0.3;
    return s;
}

Scenario two_obstacles(double k) {
    return disk_with({{Curve::circle(Vec2(-0.4, 0), 0.25), BC::Neumann}, {Curve::kite(Vec2(0.4, 0), 0.15), BC::Dirichlet}}, k);
}

const Context& ctx_s1() {
    static const Context c = Context::build(disk_with({{Curve::circle(Vec2::Zero(), 0.5), BC::Dirichlet}}));
    return c;
}
const Context& ctx_s2(double k) {
    static const Context c0 = Context::build(two_obstacles(0.0));
    static const Context c8 = Context::build(two_obstacles(0.8));
    return k == 0 ? c0 : c8;
}
const Context& ctx_empty(double k) {
    static const Context c0 = Context::build(disk_with({}, 0.0));
    static const Context c8 = Context::build(disk_with({}, 0.8));
    return k == 0 ? c0 : c8;
}

std::vector<OrientedGrid> unit_disk_boundary() {
    return {OrientedGrid{discretize_curve(Curve::circle(Vec2::Zero(), 1.0), 256), 1.0}};
}

// Integral of |grad v|^2 - k^2 v^2 over a0 < r < a1 about the origin by Gauss-Legendre in r
// and the trapezoidal rule in theta.
double area_energy(const ScalarField& v, double k, double a0, double a1) {
    std::vector<double> x, w;
    gauss_legendre(60, x, w);
    const int nt = 256;
    double s = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = 0.5 * (a1 - a0) * x[i] + 0.5 * (a1 + a0);
        const double wr = 0.5 * (a1 - a0) * w[i] * r;
        for (int j = 0; j < nt; ++j) {
            const double t = 2 * kPi * j / nt;
            const Vec2 p(r * std::cos(t), r * std::sin(t));
            const double val = v.value(p);
            s += wr * (2 * kPi / nt) * (v.grad(p).squaredNorm() - k * k * val * val);
        }
    }
    return s;
}

}  // namespace

TEST(Reports, ResidualAndPassFlag) {
    EXPECT_DOUBLE_EQ(relative_residual(2.0, 1.0), 0.5);
    EXPECT_DOUBLE_EQ(relative_residual(0.0, 1e-3, 1.0), 1e-3);
    const auto r = make_report("outer-decomp", 1.0, 1.0 + 1e-8, 1e-7, 1.0, "abc", "x");
    EXPECT_TRUE(r.pass);
    EXPECT_EQ(r.fingerprint, "abc");
    const auto f = make_report("outer-decomp", 1.0, 1.1, 1e-7, 1.0, "abc");
    EXPECT_FALSE(f.pass);
    const auto edge = make_report("dn-symmetry", 1.0, 1.0 + 1e-8, 1e-8, 0.0, "abc");
    EXPECT_EQ(edge.pass, edge.residual < 1e-8);
}

TEST(EnergyBoundary, Examples) {
    const auto re_z = harmonic_polynomial(1, Part::Cos);
    EXPECT_NEAR(energy_boundary(re_z.field, unit_disk_boundary()), kPi, 1e-12);
    const ScalarField one{[](const Vec2&) { return 1.0; }, [](const Vec2&) { return Vec2(0, 0); }};
    EXPECT_DOUBLE_EQ(energy_boundary(one, unit_disk_boundary()), 0.0);
    const auto j0 = fourier_bessel(1.0, 0, Part::Cos);
    const double ref = -2 * kPi * std::cyl_bessel_j(0.0, 1.0) * std::cyl_bessel_j(1.0, 1.0);
    EXPECT_NEAR(energy_boundary(j0.field, unit_disk_boundary()), ref, 1e-12);
    EXPECT_NEAR(energy_boundary(j0.field, unit_disk_boundary()), -2.1157099, 1e-6);
}

TEST(EnergyBoundary, MatchesAreaQuadrature) {
    for (double k : {0.0, 0.8}) {
        for (const auto& v : closed_form_catalog(k)) {
            const double disk = energy_boundary(v.field, unit_disk_boundary());
            EXPECT_LT(relative_residual(disk, area_energy(v.field, k, 0.0, 1.0), 1e-12), 1e-6) << v.name;
            // Annulus 0.5 < r < 1: inner circle counts negatively.
            std::vector<OrientedGrid> ring = unit_disk_boundary();
            ring.push_back(OrientedGrid{discretize_curve(Curve::circle(Vec2::Zero(), 0.5), 256), -1.0});
            EXPECT_LT(relative_residual(energy_boundary(v.field, ring), area_energy(v.field, k, 0.5, 1.0), 1e-12), 1e-6)
                << v.name;
        }
    }
}

TEST(EnergyBoundary, ForwardSolutionOverload) {
    const auto& c = ctx_s1();
    const auto v = harmonic_polynomial(1, Part::Cos);
    const auto aux = solve_auxiliary(*c.model, c.scenario, v.field);
    // w1 has outer data Re z and vanishes on the inner circle: energy = <Lambda_D v, v>.
    const auto a = trace_coefficients(c, v.field);
    EXPECT_NEAR(energy_boundary(aux.w1), c.pairing->lambda_D(a, a), 1e-8);
}

TEST(Catalog, MembersSolveHelmholtz) {
    for (double k : {0.0, 0.8}) {
        const auto cat = closed_form_catalog(k);
        EXPECT_EQ(cat.size(), 3u);
        for (const auto& v : cat) {
            for (const Vec2 p : {Vec2(0.3, -0.2), Vec2(-0.5, 0.6)}) {
                const double h = 1e-3;
                const auto& f = v.field.value;
                const double lap = (f(p + Vec2(h, 0)) + f(p - Vec2(h, 0)) + f(p + Vec2(0, h)) + f(p - Vec2(0, h)) - 4 * f(p)) / (h * h);
                EXPECT_LT(std::abs(lap + k * k * f(p)), 1e-5) << v.name;
                const double hg = 1e-6;
                const Vec2 fd((f(p + Vec2(hg, 0)) - f(p - Vec2(hg, 0))) / (2 * hg), (f(p + Vec2(0, hg)) - f(p - Vec2(0, hg))) / (2 * hg));
                EXPECT_LT((v.field.grad(p) - fd).norm(), 1e-7) << v.name;
            }
        }
    }
    EXPECT_THROW(fourier_bessel(0.0, 1, Part::Cos), ConfigError);
    EXPECT_THROW(plane_wave(1.0, Vec2::Zero()), ConfigError);
    const auto pw = plane_wave(0.8, Vec2(3, 4));
    EXPECT_NEAR(pw.field.value(Vec2(1, 1)), std::cos(0.8 * 7.0 / 5.0), 1e-15);
}

TEST(EnergyFormsVsDirect, TwoObstacle) {
    for (double k : {0.0, 0.8})
        for (Family f : {Family::G0, Family::Gstar}) {
            const auto reps = verify_thm11(ctx_s2(k), Vec2(0.1, 0.55), f);
            ASSERT_EQ(reps.size(), 2u);
            EXPECT_EQ(reps[0].id, "thm1.1-neumann");
            EXPECT_EQ(reps[1].id, "thm1.1-dirichlet");
            for (const auto& r : reps) EXPECT_TRUE(r.pass) << r.id << " " << r.residual;
        }
}

TEST(DnEnergyIdentity, Examples) {
    for (const auto& r : verify_thm12(ctx_s2(0.0), harmonic_polynomial(2, Part::Cos))) {
        EXPECT_LT(r.residual, 1e-5) << r.id;
        EXPECT_TRUE(r.pass);
    }
    const auto reps = verify_thm12(ctx_s2(0.8), plane_wave(0.8, Vec2(1, 0)));
    ASSERT_EQ(reps.size(), 2u);
    EXPECT_EQ(reps[0].id, "thm1.2-neumann");
    EXPECT_EQ(reps[1].id, "thm1.2-dirichlet");
    for (const auto& r : reps) EXPECT_LT(r.residual, 1e-5) << r.id;
    // The two expressions agree with each other, not only with the left side.
    EXPECT_LT(std::abs(reps[0].rhs - reps[1].rhs) / std::max(std::abs(reps[0].lhs), 1.0), 1e-5);
}

TEST(DnEnergyIdentity, EmptyObstacleCollapses) {
    for (double k : {0.0, 0.8})
        for (const auto& v : closed_form_catalog(k))
            for (const auto& r : verify_thm12(ctx_empty(k), v)) {
                EXPECT_NEAR(r.lhs, 0.0, 1e-10);
                EXPECT_NEAR(r.rhs, 0.0, 1e-8);
                EXPECT_TRUE(r.pass);
            }
}

TEST(NeedleEnergyIdentity, AnnulusAllOrders) {
    const auto& c = ctx_s1();
    const Needle n = build_needle(c.domain(), Vec2(0.0, 0.75), kPi / 2);
    for (int order : {10, 20, 30}) {
        const auto reps = verify_cor31(c, n, NeedleParams{}, order);
        ASSERT_EQ(reps.size(), 2u);
        EXPECT_EQ(reps[0].id, "cor3.1-n");
        EXPECT_EQ(reps[1].id, "cor3.1-d");
        for (const auto& r : reps) EXPECT_LT(r.residual, 1e-4) << order;
    }
}

TEST(NeedleEnergyIdentity, EmptyObstacleBothSidesZero) {
    const auto& c = ctx_empty(0.0);
    const Needle n = build_radial_needle(c.domain(), Vec2(0.2, 0.3));
    for (const auto& r : verify_cor31(c, n, NeedleParams{}, 20)) {
        EXPECT_NEAR(r.lhs, 0.0, 1e-8);
        EXPECT_NEAR(r.rhs, 0.0, 1e-6);
    }
}

TEST(DnSymmetry, AssembledAndNegativeControl) {
    EXPECT_TRUE(verify_dn_symmetry(ctx_s2(0.8).dn.lambda_D).pass);
    EXPECT_TRUE(verify_dn_symmetry(ctx_s2(0.8).dn.lambda_0).pass);
    DtNMatrix bad = ctx_s1().dn.lambda_D;
    bad.matrix(3, 1) += 1e-3 * bad.matrix.cwiseAbs().maxCoeff();
    const auto r = verify_dn_symmetry(bad);
    EXPECT_FALSE(r.pass);
    EXPECT_EQ(r.id, "dn-symmetry");
}

TEST(DnSymmetry, DiskLambda0IsDiagonal) {
    const auto& M = ctx_empty(0.0).dn.lambda_0.matrix;
    EXPECT_TRUE(verify_dn_symmetry(ctx_empty(0.0).dn.lambda_0).pass);
    const double mx = M.cwiseAbs().maxCoeff();
    Eigen::MatrixXd off = M;
    off.diagonal().setZero();
    EXPECT_LT(off.cwiseAbs().maxCoeff() / mx, 1e-8);
}

TEST(Decompositions, OuterInnerTwisted) {
    const auto& c = ctx_s1();
    for (Family f : {Family::G0, Family::Gstar}) {
        EXPECT_TRUE(verify_outer_decomposition(c, Vec2(0.7, 0.1), Vec2(-0.2, -0.65), f).pass);
        const auto in = verify_inner_decomposition(c, Vec2(0.7, 0.1), f);
        EXPECT_TRUE(in.pass) << in.residual;
        EXPECT_EQ(in.id, "inner-decomp");
        const auto tw = verify_twisted_symmetry(c, Vec2(0.7, 0.1), Vec2(-0.2, -0.65), f);
        EXPECT_TRUE(tw.pass) << tw.residual;
        EXPECT_EQ(tw.id, "twisted-symmetry");
    }
}

TEST(Decompositions, CorruptedDnBreaksInnerDecomposition) {
    const auto& good = ctx_s1();
    DtNPair dn = good.dn;
    dn.lambda_D.matrix(1, 1) *= 1.001;
    const Context bad = Context::with_dn(good.scenario, dn);
    EXPECT_FALSE(verify_inner_decomposition(bad, Vec2(0.7, 0.1), Family::G0).pass);
    EXPECT_TRUE(verify_inner_decomposition(good, Vec2(0.7, 0.1), Family::G0).pass);
}

TEST(Poincare, RootsAgreeWithReference) {
    EXPECT_NEAR(bessel_j1_prime_root(), 1.8411838, 1e-7);
    EXPECT_NEAR(bessel_j0_root(), 2.404826, 1e-6);
    EXPECT_NEAR(std::cyl_bessel_j(0.0, bessel_j0_root()), 0.0, 1e-14);
}

TEST(Poincare, UnitDiskNoObstacles) {
    const Scenario s = disk_with({});
    const auto r = poincare_constants(s);
    EXPECT_TRUE(r.pass);
    EXPECT_TRUE(r.exterior_pass);
    EXPECT_TRUE(r.components.empty());
    EXPECT_NEAR(mixed_poincare_raw(s), 1.0 / 2.404826, 0.05 / 2.404826);
    EXPECT_DOUBLE_EQ(r.exterior_constant, r.safety_factor * r.exterior_raw);
}

TEST(Poincare, DiskObstacleConstant) {
    const Scenario s = disk_with({{Curve::circle(Vec2(0.2, 0.1), 0.3), BC::Neumann}});
    const auto r = poincare_constants(s);
    ASSERT_EQ(r.components.size(), 1u);
    EXPECT_TRUE(r.components[0].exact);
    EXPECT_NEAR(r.components[0].constant, 0.3 / 1.8411838, 1e-7);
    EXPECT_NEAR(r.components[0].constant, 0.162939, 1e-6);
    const double kc = 1.0 / (std::sqrt(8.0) * r.components[0].constant);
    EXPECT_NEAR(kc, 2.170, 1e-3);
    EXPECT_LE(r.k_max, kc + 1e-12);
    EXPECT_NEAR(r.k_max, std::min(kc, 1.0 / r.exterior_constant), 1e-12);
}

TEST(Poincare, ConstantScalesWithRadius) {
    const auto a = poincare_constants(disk_with({{Curve::circle(Vec2::Zero(), 0.2), BC::Dirichlet}}));
    const auto b = poincare_constants(disk_with({{Curve::circle(Vec2::Zero(), 0.4), BC::Dirichlet}}));
    EXPECT_NEAR(b.components[0].constant / a.components[0].constant, 2.0, 1e-12);
}

TEST(Poincare, NonDiskUsesContainingDisk) {
    const auto r = poincare_constants(two_obstacles(0.8));
    ASSERT_EQ(r.components.size(), 2u);
    EXPECT_TRUE(r.components[0].exact);
    EXPECT_FALSE(r.components[1].exact);
    const Curve kite = Curve::kite(Vec2(0.4, 0), 0.15);
    EXPECT_NEAR(r.components[1].constant, kite.outer_radius() / 1.8411838, 1e-6);
    for (const auto& c : r.components) EXPECT_NEAR(c.condition, 8 * c.constant * c.constant * 0.64, 1e-12);
}

TEST(Poincare, Errors) {
    PoincareOptions coarse;
    coarse.grid = 8;
    EXPECT_THROW(mixed_poincare_raw(disk_with({{Curve::circle(Vec2::Zero(), 0.5), BC::Neumann}}), coarse), ResolutionError);
    coarse.grid = 4;
    EXPECT_THROW(mixed_poincare_raw(disk_with({}), coarse), ConfigError);
}

TEST(ProbePoints, SeededAndClear) {
    const Scenario s = two_obstacles(0.0);
    const auto a = sample_probe_points(s, 6, 42);
    const auto b = sample_probe_points(s, 6, 42);
    const auto c = sample_probe_points(s, 6, 43);
    ASSERT_EQ(a.size(), 6u);
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i], b[i]);
        EXPECT_GE(distance_to_curve(s.domain, a[i]), 0.1);
        EXPECT_GE(distance_to_obstacles(s, a[i]), 0.1);
        EXPECT_FALSE(inside_obstacle(s, a[i]));
    }
    EXPECT_NE(a[0], c[0]);
}

TEST(Suite, AnnulusPassesAndIsThreadIndependent) {
    SuiteOptions opt;
    const auto r1 = run_identity_suite(ctx_s1(), opt);
    EXPECT_TRUE(r1.pass()) << ::testing::PrintToString(r1.failing());
    opt.threads = 3;
    const auto r3 = run_identity_suite(ctx_s1(), opt);
    ASSERT_EQ(r1.identities.size(), r3.identities.size());
    for (std::size_t i = 0; i < r1.identities.size(); ++i) {
        EXPECT_EQ(r1.identities[i].id, r3.identities[i].id);
        EXPECT_EQ(r1.identities[i].residual, r3.identities[i].residual);
    }
    std::set<std::string> ids;
    for (const auto& r : r1.identities) ids.insert(r.id);
    for (const char* id : {"thm1.1-neumann", "thm1.1-dirichlet", "thm1.2-neumann", "thm1.2-dirichlet", "cor3.1-n",
                           "cor3.1-d", "dn-symmetry", "outer-decomp", "inner-decomp", "twisted-symmetry"})
        EXPECT_TRUE(ids.count(id)) << id;
}
