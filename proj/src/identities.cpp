#include "ips/identities.hpp"

#include <Eigen/SparseCholesky>
#include <Eigen/SparseCore>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>

#include "ips/bessel.hpp"
#include "ips/errors.hpp"
#include "ips/parallel.hpp"

namespace ips {

namespace {

std::string point_label(const Vec2& p) {
    std::ostringstream os;
    os.precision(6);
    os << "(" << p.x() << ", " << p.y() << ")";
    return os.str();
}

void require_truth(const Context& ctx) {
    if (ctx.blind()) throw ConfigError("identity checks need the obstacle geometry");
}

}  // namespace

double relative_residual(double lhs, double rhs, double floor) {
    const double d = std::abs(lhs - rhs);
    const double s = std::max(std::abs(lhs), floor);
    if (s == 0.0) return d == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return d / s;
}

IdentityReport make_report(std::string id, double lhs, double rhs, double tolerance, double floor,
                           const std::string& fingerprint, std::string detail) {
    IdentityReport r;
    r.id = std::move(id);
    r.lhs = lhs;
    r.rhs = rhs;
    r.residual = relative_residual(lhs, rhs, floor);
    r.tolerance = tolerance;
    r.fingerprint = fingerprint;
    r.detail = std::move(detail);
    r.pass = r.residual < tolerance;
    return r;
}

// ---------------------------------------------------------------------------

double energy_boundary(const ScalarField& v, const std::vector<OrientedGrid>& boundary) {
    double e = 0.0;
    for (const auto& b : boundary) {
        double part = 0.0;
        for (int i = 0; i < b.grid.size(); ++i) {
            const Vec2 p = b.grid.nodes.col(i);
            part += b.grid.weights[i] * v.value(p) * v.grad(p).dot(b.grid.normals.col(i));
        }
        e += b.sign * part;
    }
    return e;
}

double energy_boundary(const ForwardSolution& u) { return exterior_energy(u); }

// ---------------------------------------------------------------------------

ClosedForm harmonic_polynomial(int m, Part part, const Vec2& c) {
    if (m < 0) throw ConfigError("polynomial degree must be non-negative");
    auto zpow = [m, c](const Vec2& p) {
        const std::complex<double> z(p.x() - c.x(), p.y() - c.y());
        return std::pair{std::pow(z, m), m > 0 ? double(m) * std::pow(z, m - 1) : std::complex<double>(0.0)};
    };
    ClosedForm f;
    f.name = (part == Part::Cos ? "re_z" : "im_z") + std::to_string(m);
    if (part == Part::Cos) {
        f.field.value = [zpow](const Vec2& p) { return zpow(p).first.real(); };
        // d/dx Re f = Re f', d/dy Re f = -Im f'
        f.field.grad = [zpow](const Vec2& p) {
            const auto d = zpow(p).second;
            return Vec2(d.real(), -d.imag());
        };
    } else {
        f.field.value = [zpow](const Vec2& p) { return zpow(p).first.imag(); };
        f.field.grad = [zpow](const Vec2& p) {
            const auto d = zpow(p).second;
            return Vec2(d.imag(), d.real());
        };
    }
    return f;
}

ClosedForm plane_wave(double k, const Vec2& direction) {
    if (!(direction.norm() > 0)) throw ConfigError("plane wave direction must be nonzero");
    const Vec2 d = direction.normalized();
    ClosedForm f;
    std::ostringstream os;
    os.precision(4);
    os << "cos_k_(" << d.x() << "," << d.y() << ")";
    f.name = os.str();
    f.field.value = [k, d](const Vec2& p) { return std::cos(k * d.dot(p)); };
    f.field.grad = [k, d](const Vec2& p) -> Vec2 { return -k * std::sin(k * d.dot(p)) * d; };
    return f;
}

ClosedForm fourier_bessel(double k, int m, Part part) {
    if (!(k > 0)) throw ConfigError("Fourier-Bessel modes need k > 0");
    if (m < 0 || m > bessel::kMaxOrder) throw ConfigError("Fourier-Bessel order out of range");
    ClosedForm f;
    f.name = std::string("j") + std::to_string(m) + (part == Part::Cos ? "_cos" : "_sin");
    auto ang = [m, part](double t) { return part == Part::Cos ? std::cos(m * t) : std::sin(m * t); };
    auto dang = [m, part](double t) { return part == Part::Cos ? -m * std::sin(m * t) : m * std::cos(m * t); };
    f.field.value = [=](const Vec2& p) {
        const double r = p.norm();
        if (r == 0.0) return m == 0 ? 1.0 : 0.0;
        return bessel::jn(m, k * r) * ang(std::atan2(p.y(), p.x()));
    };
    f.field.grad = [=](const Vec2& p) -> Vec2 {
        const double r = p.norm();
        if (r == 0.0) {
            if (m != 1) return Vec2::Zero();
            return part == Part::Cos ? Vec2(k / 2, 0) : Vec2(0, k / 2);
        }
        const double t = std::atan2(p.y(), p.x());
        const double dr = k * bessel::jn_prime(m, k * r) * ang(t);
        const double dt = bessel::jn(m, k * r) * dang(t) / r;
        const Vec2 er(std::cos(t), std::sin(t)), et(-std::sin(t), std::cos(t));
        return dr * er + dt * et;
    };
    return f;
}

std::vector<ClosedForm> closed_form_catalog(double k) {
    if (k == 0.0)
        return {harmonic_polynomial(1, Part::Cos), harmonic_polynomial(2, Part::Cos),
                harmonic_polynomial(3, Part::Sin)};
    return {plane_wave(k, Vec2(1, 0)), plane_wave(k, Vec2(1, 1)), fourier_bessel(k, 2, Part::Cos)};
}

// ---------------------------------------------------------------------------

std::vector<IdentityReport> verify_thm11(const Context& ctx, const Vec2& x, Family family, double tol) {
    const IpsDecomposition d = ips_decompositions(ctx, x, family);
    const std::string fp = ctx.dn.lambda_D.scenario_fingerprint;
    const std::string det = to_string(family) + " x=" + point_label(x);
    return {make_report("thm1.1-neumann", d.W, d.neumann, tol, 0.0, fp, det),
            make_report("thm1.1-dirichlet", d.W, d.dirichlet, tol, 0.0, fp, det)};
}

namespace {

std::vector<IdentityReport> energy_identity(const Context& ctx, const ScalarField& v, const std::string& id_n,
                                            const std::string& id_d, double tol, const std::string& detail) {
    require_truth(ctx);
    const auto& sc = ctx.scenario;
    const Eigen::VectorXd a = trace_coefficients(ctx, v);
    const double lhs = ctx.pairing->difference(a, a);
    const AuxiliarySolutions s = solve_auxiliary(*ctx.model, sc, v, false);
    const double En = obstacle_energy(*ctx.model, sc, v, BC::Neumann);
    const double Ed = obstacle_energy(*ctx.model, sc, v, BC::Dirichlet);
    const double rn = En + exterior_energy(s.w + s.eps_n) - exterior_energy(s.eps_n) - Ed;
    const double rd = -Ed - exterior_energy(s.w + s.eps_d) + exterior_energy(s.eps_d) + En;
    const std::string fp = ctx.dn.lambda_D.scenario_fingerprint;
    return {make_report(id_n, lhs, rn, tol, 1.0, fp, detail), make_report(id_d, lhs, rd, tol, 1.0, fp, detail)};
}

}  // namespace

std::vector<IdentityReport> verify_thm12(const Context& ctx, const ClosedForm& v, double tol) {
    return energy_identity(ctx, v.field, "thm1.2-neumann", "thm1.2-dirichlet", tol, v.name);
}

std::vector<IdentityReport> verify_cor31(const Context& ctx, const Needle& needle, const NeedleParams& params,
                                         int order, double tol) {
    require_truth(ctx);
    NeedleParams p = params.resolved(ctx.scenario);
    if (std::find(p.orders.begin(), p.orders.end(), order) == p.orders.end()) p.orders = {order};
    // The identity holds for every entire v, well fitted or not.
    p.residual_limit = std::numeric_limits<double>::infinity();
    const NeedleFunction v = fit_needle_sequence(ctx.domain(), ctx.k(), needle, p, order, ctx.free_model.get());
    const std::string det = to_string(p.family) + " n=" + std::to_string(order) + " tip=" + point_label(needle.tip());
    return energy_identity(ctx, v.field(), "cor3.1-n", "cor3.1-d", tol, det);
}

IdentityReport verify_dn_symmetry(const DtNMatrix& M, double tol, const std::string& name) {
    const double r = dn_symmetry_residual(M.matrix);
    IdentityReport rep;
    rep.id = "dn-symmetry";
    rep.lhs = (M.matrix - M.matrix.transpose()).cwiseAbs().maxCoeff();
    rep.rhs = 0.0;
    rep.residual = r;
    rep.tolerance = tol;
    rep.fingerprint = M.scenario_fingerprint;
    rep.detail = name;
    rep.pass = r < tol;
    return rep;
}

IdentityReport verify_outer_decomposition(const Context& ctx, const Vec2& x, const Vec2& y, Family family,
                                          double tol) {
    require_truth(ctx);
    check_probe_point(ctx, x);
    check_probe_point(ctx, y);
    const ScalarField g = singular_solution(*ctx.free_model, x, family).field();
    const AuxiliarySolutions a = solve_auxiliary(*ctx.model, ctx.scenario, g);
    return make_report("outer-decomp", a.W.value(y), a.w.value(y) + a.w1.value(y), tol, 1.0,
                       ctx.dn.lambda_D.scenario_fingerprint,
                       to_string(family) + " x=" + point_label(x) + " y=" + point_label(y));
}

IdentityReport verify_inner_decomposition(const Context& ctx, const Vec2& x, Family family, double tol) {
    const DirectIndicator d = indicator_direct(ctx, x, family);
    return make_report("inner-decomp", d.W, d.value + i1(ctx, x, family), tol, 0.0,
                       ctx.dn.lambda_D.scenario_fingerprint, to_string(family) + " x=" + point_label(x));
}

IdentityReport verify_twisted_symmetry(const Context& ctx, const Vec2& x, const Vec2& y, Family family,
                                       double tol) {
    const TwistedSymmetry t = twisted_symmetry(ctx, x, y, family);
    return make_report("twisted-symmetry", t.lhs, t.rhs, tol, 1.0, ctx.dn.lambda_D.scenario_fingerprint,
                       to_string(family) + " x=" + point_label(x) + " y=" + point_label(y));
}

// ---------------------------------------------------------------------------

namespace {

double bisect(const std::function<double(double)>& f, double lo, double hi) {
    double flo = f(lo);
    for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

}  // namespace

double bessel_j1_prime_root() {
    static const double r = bisect([](double x) { return bessel::jn_prime(1, x); }, 1.5, 2.2);
    return r;
}

double bessel_j0_root() {
    static const double r = bisect([](double x) { return bessel::j0(x); }, 2.0, 3.0);
    return r;
}

double mixed_poincare_raw(const Scenario& sc, const PoincareOptions& opt) {
    if (opt.grid < 8) throw ConfigError("Poincare grid must have at least 8 cells per side");
    const BoundaryGrid b = discretize_curve(sc.domain, 1024);
    const Eigen::Vector2d lo = b.nodes.rowwise().minCoeff(), hi = b.nodes.rowwise().maxCoeff();
    const double h = (hi - lo).maxCoeff() / opt.grid;

    const ScenarioDiagnostics diag = diagnose_scenario(sc);
    const double gap = std::min(diag.min_obstacle_gap, diag.min_domain_gap);
    if (std::isfinite(gap) && h > 0.5 * gap)
        throw ResolutionError("Poincare grid spacing " + std::to_string(h) + " exceeds half the smallest gap " +
                              std::to_string(gap));

    const int n = opt.grid;
    const CurvePolygon outer(sc.domain);
    std::vector<CurvePolygon> holes;
    for (const auto& o : sc.obstacles) holes.emplace_back(o.curve);
    // 0: outside the domain (Dirichlet), 1: unknown, 2: inside an obstacle (Neumann wall)
    std::vector<int> kind(n * n), index(n * n, -1);
    int unknowns = 0;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const Vec2 p(lo.x() + (i + 0.5) * h, lo.y() + (j + 0.5) * h);
            int k = outer.contains(p) ? 1 : 0;
            if (k == 1)
                for (const auto& hp : holes)
                    if (hp.contains(p)) k = 2;
            kind[j * n + i] = k;
            if (k == 1) index[j * n + i] = unknowns++;
        }
    if (unknowns == 0) throw ResolutionError("Poincare grid has no interior cells");

    std::vector<Eigen::Triplet<double>> trip;
    const double s = 1.0 / (h * h);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) {
            const int r = index[j * n + i];
            if (r < 0) continue;
            double diag_entry = 0.0;
            const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
            for (int q = 0; q < 4; ++q) {
                const int ii = i + di[q], jj = j + dj[q];
                const int kk = (ii < 0 || jj < 0 || ii >= n || jj >= n) ? 0 : kind[jj * n + ii];
                if (kk == 2) continue;
                diag_entry += s;
                if (kk == 1) trip.emplace_back(r, index[jj * n + ii], -s);
            }
            trip.emplace_back(r, r, diag_entry);
        }
    Eigen::SparseMatrix<double> A(unknowns, unknowns);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
    if (ldlt.info() != Eigen::Success) throw ResolutionError("Poincare matrix factorisation failed");

    Eigen::VectorXd x = Eigen::VectorXd::Ones(unknowns);
    x.normalize();
    double lambda = x.dot(A * x);
    for (int it = 0; it < opt.max_iterations; ++it) {
        Eigen::VectorXd y = ldlt.solve(x);
        y.normalize();
        const double next = y.dot(A * y);
        x = std::move(y);
        const bool done = std::abs(next - lambda) <= opt.tolerance * next;
        lambda = next;
        if (done) break;
    }
    return 1.0 / std::sqrt(lambda);
}

SmallnessReport poincare_constants(const Scenario& sc, const PoincareOptions& opt) {
    SmallnessReport r;
    r.k = sc.k;
    r.grid = opt.grid;
    r.safety_factor = opt.safety_factor;
    r.fingerprint = scenario_fingerprint(sc);
    r.exterior_raw = mixed_poincare_raw(sc, opt);
    r.exterior_constant = opt.safety_factor * r.exterior_raw;
    const double k2 = sc.k * sc.k;
    r.exterior_condition = r.exterior_constant * r.exterior_constant * k2;
    r.exterior_pass = r.exterior_condition <= 1.0;
    r.k_max = 1.0 / r.exterior_constant;
    r.pass = r.exterior_pass;
    const double jp = bessel_j1_prime_root();
    for (const auto& o : sc.obstacles) {
        ComponentConstant c;
        c.bc = o.bc;
        if (o.curve.kind() == CurveKind::Circle) {
            c.constant = o.curve.params()[0] / jp;
            c.exact = true;
        } else {
            c.constant = o.curve.outer_radius() / jp;
        }
        c.condition = 8.0 * c.constant * c.constant * k2;
        c.pass = c.condition < 1.0;
        r.k_max = std::min(r.k_max, 1.0 / (std::sqrt(8.0) * c.constant));
        r.pass = r.pass && c.pass;
        r.components.push_back(c);
    }
    return r;
}

// ---------------------------------------------------------------------------

bool SuiteResult::pass() const {
    for (const auto& r : identities)
        if (!r.pass) return false;
    return smallness.pass;
}

std::vector<std::string> SuiteResult::failing() const {
    std::vector<std::string> ids;
    for (const auto& r : identities)
        if (!r.pass && std::find(ids.begin(), ids.end(), r.id) == ids.end()) ids.push_back(r.id);
    if (!smallness.pass) ids.push_back("smallness");
    return ids;
}

std::vector<Vec2> sample_probe_points(const Scenario& sc, int count, std::uint64_t seed, double clearance) {
    std::mt19937_64 rng(seed);
    // Explicit 53-bit mapping; distribution objects differ between standard libraries.
    auto unit = [&rng] { return double(rng() >> 11) * 0x1.0p-53; };
    const BoundaryGrid b = discretize_curve(sc.domain, 512);
    const Eigen::Vector2d lo = b.nodes.rowwise().minCoeff(), hi = b.nodes.rowwise().maxCoeff();
    std::vector<Vec2> pts;
    for (int tries = 0; int(pts.size()) < count; ++tries) {
        if (tries > 100000) throw ConfigError("could not place probe points with the requested clearance");
        const Vec2 p(lo.x() + unit() * (hi.x() - lo.x()), lo.y() + unit() * (hi.y() - lo.y()));
        try {
            if (!contains(sc.domain, p) || distance_to_curve(sc.domain, p) < clearance) continue;
            if (!sc.obstacles.empty() && (inside_obstacle(sc, p) || distance_to_obstacles(sc, p) < clearance)) continue;
        } catch (const DegeneratePointError&) {
            continue;
        }
        pts.push_back(p);
    }
    return pts;
}

SuiteResult run_identity_suite(const Context& ctx, const SuiteOptions& opt) {
    require_truth(ctx);
    const auto& sc = ctx.scenario;
    const std::vector<Vec2> pts = sample_probe_points(sc, std::max(opt.points, 2), opt.seed);
    const std::vector<ClosedForm> catalog = closed_form_catalog(sc.k);

    // Each task writes its own slot so the report order is independent of the thread count.
    std::vector<std::function<std::vector<IdentityReport>()>> tasks;
    tasks.push_back([&] {
        return std::vector<IdentityReport>{verify_dn_symmetry(ctx.dn.lambda_D, 1e-8, "lambda_D"),
                                           verify_dn_symmetry(ctx.dn.lambda_0, 1e-8, "lambda_0")};
    });
    for (Family fam : {Family::G0, Family::Gstar})
        for (int i = 0; i < opt.points; ++i)
            tasks.push_back([&, fam, i] {
                const Vec2& x = pts[i];
                std::vector<IdentityReport> out = verify_thm11(ctx, x, fam);
                out.push_back(verify_inner_decomposition(ctx, x, fam));
                out.push_back(verify_outer_decomposition(ctx, x, pts[(i + 1) % pts.size()], fam));
                return out;
            });
    if (opt.twisted)
        for (Family fam : {Family::G0, Family::Gstar})
            for (int i = 0; i < opt.pairs; ++i)
                tasks.push_back([&, fam, i] {
                    const std::size_t a = i % pts.size(), b = (i + 2) % pts.size();
                    return std::vector<IdentityReport>{verify_twisted_symmetry(ctx, pts[a], pts[b], fam)};
                });
    for (std::size_t i = 0; i < catalog.size(); ++i)
        tasks.push_back([&, i] { return verify_thm12(ctx, catalog[i]); });
    for (int n : opt.needle_orders)
        tasks.push_back([&, n] {
            NeedleParams p = opt.needle;
            p.orders = {n};
            return verify_cor31(ctx, build_radial_needle(sc.domain, pts[0]), p, n);
        });

    std::vector<std::vector<IdentityReport>> slots(tasks.size());
    parallel_for(int(tasks.size()), opt.threads, [&](int i) { slots[i] = tasks[i](); });
    SuiteResult res;
    for (auto& s : slots) res.identities.insert(res.identities.end(), s.begin(), s.end());
    res.smallness = poincare_constants(sc);
    return res;
}

}  // namespace ips
