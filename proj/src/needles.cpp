#include "ips/needles.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "ips/bessel.hpp"
#include "ips/errors.hpp"

namespace ips {

int NeedleParams::max_order() const {
    return orders.empty() ? 0 : *std::max_element(orders.begin(), orders.end());
}

double NeedleParams::alpha(int n) const {
    return std::max(alpha_floor, alpha0 * std::pow(alpha_base, -double(n) / 5.0));
}

NeedleParams NeedleParams::probing() {
    NeedleParams p;
    p.exclusion = Exclusion::Wedge;
    p.wedge_half_angle = 1.5;
    p.tube_radius = 0.05;
    p.rings = 24;
    p.inset = -1.0;
    return p;
}

NeedleParams NeedleParams::resolved(const Scenario& sc) const {
    NeedleParams p = *this;
    if (p.inset < 0) p.inset = 0.75 * sc.effective_min_gap();
    return p;
}

void NeedleParams::validate() const {
    if (orders.empty()) throw ConfigError("needle orders must not be empty");
    for (std::size_t i = 0; i < orders.size(); ++i) {
        if (orders[i] < 1 || orders[i] >= bessel::kMaxOrder)
            throw ConfigError("needle order " + std::to_string(orders[i]) + " outside [1, " +
                              std::to_string(bessel::kMaxOrder - 1) + "]");
        if (i > 0 && orders[i] <= orders[i - 1]) throw ConfigError("needle orders must increase");
    }
    if (boundary_nodes < 16) throw ConfigError("needle fit needs at least 16 boundary nodes");
    if (rings < 0) throw ConfigError("needle ring count must be non-negative");
    if (!(gradient_weight >= 0)) throw ConfigError("gradient weight must be non-negative");
    if (!(alpha0 > 0) || !(alpha_base > 1) || !(alpha_floor >= 0)) throw ConfigError("bad regularisation schedule");
    if (!(wedge_half_angle > 0 && wedge_half_angle < std::numbers::pi / 2))
        throw ConfigError("wedge half angle must lie in (0, pi/2)");
    if (!(inset >= 0)) throw ConfigError("collocation inset must be non-negative");
}

// ---------------------------------------------------------------------------

double NeedleFunction::entire_value(const Vec2& p) const {
    const int n = EntireBasis::size(order);
    std::vector<double> v(n);
    eval_entire_values(basis, order, p, v.data());
    return Eigen::Map<const Eigen::VectorXd>(v.data(), n).dot(coef);
}

double NeedleFunction::value(const Vec2& p) const {
    double s = entire_value(p);
    if (!shift.empty()) s += shift.value(p);
    return s;
}

Vec2 NeedleFunction::grad(const Vec2& p) const {
    const int n = EntireBasis::size(order);
    std::vector<double> v(n), gx(n), gy(n);
    eval_entire_all(basis, order, p, v.data(), gx.data(), gy.data());
    Vec2 g(Eigen::Map<const Eigen::VectorXd>(gx.data(), n).dot(coef),
           Eigen::Map<const Eigen::VectorXd>(gy.data(), n).dot(coef));
    if (!shift.empty()) g += shift.grad(p);
    return g;
}

ScalarField NeedleFunction::field() const {
    auto self = std::make_shared<NeedleFunction>(*this);
    return {[self](const Vec2& p) { return self->value(p); }, [self](const Vec2& p) { return self->grad(p); }};
}

// ---------------------------------------------------------------------------

namespace {

bool excluded(const Vec2& p, const Needle& needle, const NeedleParams& params, double tube) {
    if (distance_to_needle(p, needle) < tube) return true;
    if (params.exclusion == Exclusion::Wedge) {
        const Vec2 axis = (needle.vertices[needle.vertices.size() - 2] - needle.tip()).normalized();
        const Vec2 d = p - needle.tip();
        const double r = d.norm();
        if (r > 0 && d.dot(axis) / r > std::cos(params.wedge_half_angle)) return true;
    }
    return false;
}


}  // namespace

Eigen::Matrix2Xd needle_collocation(const Curve& domain, const Needle& needle, const NeedleParams& params) {
    const double tube = params.tube(domain);
    std::vector<Vec2> pts;
    const BoundaryGrid g = discretize_curve(domain, params.boundary_nodes + params.boundary_nodes % 2);
    const CurvePolygon poly(domain);
    auto keep = [&](const Vec2& p) {
        if (excluded(p, needle, params, tube)) return;
        if (params.inset > 0 && poly.distance(p) < params.inset) return;
        pts.push_back(p);
    };
    if (params.inset <= 0)
        for (int j = 0; j < g.size(); ++j) keep(g.nodes.col(j));
    const Vec2 c = domain.centroid();
    for (int r = 1; r <= params.rings; ++r) {
        const double s = double(r) / (params.rings + 1);
        const int m = std::max(8, int(std::lround(params.boundary_nodes * s)));
        for (int j = 0; j < m; ++j) {
            const double t = 2.0 * std::numbers::pi * j / m;
            const Vec2 p = c + s * (domain.position(t) - c);
            if (poly.contains(p)) keep(p);
        }
    }
    if (poly.contains(c)) keep(c);
    Eigen::Matrix2Xd out(2, pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) out.col(i) = pts[i];
    return out;
}

Eigen::Matrix2Xd needle_check_set(const Curve& domain, const Needle& needle, double tube, int count) {
    const double d = 2.0 * tube;
    std::vector<Vec2> cand;
    const int per = 256;
    for (std::size_t s = 0; s + 1 < needle.vertices.size(); ++s) {
        const Vec2 a = needle.vertices[s], b = needle.vertices[s + 1];
        const Vec2 t = (b - a).normalized();
        const Vec2 n(-t.y(), t.x());
        for (int j = 0; j <= per; ++j) {
            const Vec2 q = a + (b - a) * (double(j) / per);
            cand.push_back(q + d * n);
            cand.push_back(q - d * n);
        }
    }
    for (int j = 0; j < per; ++j) {
        const double th = 2.0 * std::numbers::pi * j / per;
        cand.push_back(needle.tip() + d * Vec2(std::cos(th), std::sin(th)));
    }
    const CurvePolygon poly(domain);
    std::vector<Vec2> ok;
    for (const Vec2& p : cand)
        if (distance_to_needle(p, needle) >= d * (1 - 1e-9) && poly.contains(p)) ok.push_back(p);
    if (ok.empty()) throw NeedleError("no check points at twice the tube radius inside the domain");
    const int m = std::min<int>(count, int(ok.size()));
    Eigen::Matrix2Xd out(2, m);
    for (int i = 0; i < m; ++i) out.col(i) = ok[std::size_t(i) * ok.size() / m];
    return out;
}

NeedleFitter::NeedleFitter(const Curve& domain, double k, const Needle& needle, const NeedleParams& params,
                           const ForwardModel* free_model)
    : domain_(domain), k_(k), needle_(needle), params_(params), basis_(EntireBasis::for_domain(k, domain)) {
    params_.validate();
    if (params_.family == Family::Gstar && !free_model)
        throw ConfigError("the Green-function family needs the obstacle-free forward model");
    nmax_ = params_.max_order();
    const Vec2 x = needle.tip();
    points_ = needle_collocation(domain, needle, params_);
    const int np = int(points_.cols());
    // Scale the basis to the collocation set so that |z| <= 1 on it.
    double reach = 0.0;
    for (int i = 0; i < np; ++i) reach = std::max(reach, (Vec2(points_.col(i)) - basis_.center).norm());
    if (reach > 0) basis_.scale = reach;
    const int nb = EntireBasis::size(nmax_);
    if (np < 3) throw ApproximationError("needle leaves fewer than 3 collocation points");

    const double sw = std::sqrt(params_.gradient_weight);
    Eigen::MatrixXd A(3 * np, nb);
    Eigen::VectorXd b(3 * np);
    std::vector<double> v(nb), gx(nb), gy(nb);
    for (int i = 0; i < np; ++i) {
        const Vec2 p = points_.col(i);
        eval_entire_all(basis_, nmax_, p, v.data(), gx.data(), gy.data());
        for (int j = 0; j < nb; ++j) {
            A(3 * i, j) = v[j];
            A(3 * i + 1, j) = sw * gx[j];
            A(3 * i + 2, j) = sw * gy[j];
        }
        const double r = (p - x).norm();
        const Vec2 gG = eval_grad_G(k, x, p);
        b(3 * i) = eval_G(k, r);
        b(3 * i + 1) = sw * gG.x();
        b(3 * i + 2) = sw * gG.y();
    }
    normal_ = A.transpose() * A;
    rhs_ = A.transpose() * b;
    target_norm2_ = b.squaredNorm();
    A_ = std::move(A);
    b_ = std::move(b);

    check_ = needle_check_set(domain, needle, params_.tube(domain));
    check_basis_.resize(check_.cols(), nb);
    check_target_.resize(check_.cols());
    for (int i = 0; i < check_.cols(); ++i) {
        eval_entire_values(basis_, nmax_, check_.col(i), v.data());
        for (int j = 0; j < nb; ++j) check_basis_(i, j) = v[j];
        check_target_(i) = eval_G(k, (Vec2(check_.col(i)) - x).norm());
    }
    if (params_.family == Family::Gstar) shift_ = singular_solution(*free_model, x, Family::Gstar).H;
}

NeedleFunction NeedleFitter::fit(int order) const {
    if (order < 1 || order > nmax_) throw ConfigError("needle order outside the fitted range");
    const int s = EntireBasis::size(order);
    Eigen::MatrixXd N = normal_.topLeftCorner(s, s);
    N.diagonal().array() += params_.alpha(order);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(N);
    if (ldlt.info() != Eigen::Success) throw ApproximationError("needle normal equations are singular");
    NeedleFunction f;
    f.basis = basis_;
    f.order = order;
    f.coef = ldlt.solve(rhs_.head(s));
    f.needle = needle_;
    f.family = params_.family;
    f.shift = shift_;
    const double res = (A_.leftCols(s) * f.coef - b_).norm();
    f.diagnostics.collocation_residual = res / std::sqrt(std::max(target_norm2_, 1e-300));
    f.diagnostics.coefficient_norm = f.coef.norm();
    f.diagnostics.collocation_points = int(points_.cols());
    const Eigen::VectorXd err = check_basis_.leftCols(s) * f.coef - check_target_;
    f.diagnostics.heldout_error = err.cwiseAbs().maxCoeff() / std::max(check_target_.cwiseAbs().maxCoeff(), 1e-300);
    if (order == nmax_ && f.diagnostics.collocation_residual > params_.residual_limit)
        throw ApproximationError("needle fit residual " + std::to_string(f.diagnostics.collocation_residual) +
                                 " at order " + std::to_string(order) + " exceeds the limit");
    return f;
}

NeedleFunction fit_needle_sequence(const Curve& domain, double k, const Needle& needle, const NeedleParams& params,
                                   int order, const ForwardModel* free_model) {
    NeedleParams p = params;
    if (std::find(p.orders.begin(), p.orders.end(), order) == p.orders.end()) {
        p.orders.push_back(order);
        std::sort(p.orders.begin(), p.orders.end());
    }
    return NeedleFitter(domain, k, needle, p, free_model).fit(order);
}

// ---------------------------------------------------------------------------

double gradient_energy(const ScalarField& v, const Region& region, int nr, int nt) {
    if (!(region.r1 > region.r0) || region.r0 < 0) throw DomainError("bad quadrature region radii");
    std::vector<double> xr, wr;
    gauss_legendre(nr, xr, wr);
    std::vector<double> th, wt;
    const bool full = region.kind == Region::Kind::Disk;
    if (full) {
        for (int j = 0; j < nt; ++j) {
            th.push_back(2.0 * std::numbers::pi * j / nt);
            wt.push_back(2.0 * std::numbers::pi / nt);
        }
    } else {
        std::vector<double> x, w;
        gauss_legendre(nt, x, w);
        const double h = 0.5 * (region.theta1 - region.theta0);
        for (int j = 0; j < nt; ++j) {
            th.push_back(region.theta0 + h * (x[j] + 1));
            wt.push_back(h * w[j]);
        }
    }
    const double hr = 0.5 * (region.r1 - region.r0);
    double sum = 0.0;
    for (int i = 0; i < nr; ++i) {
        const double r = region.r0 + hr * (xr[i] + 1);
        for (std::size_t j = 0; j < th.size(); ++j) {
            const Vec2 p = region.center + r * Vec2(std::cos(th[j]), std::sin(th[j]));
            sum += hr * wr[i] * wt[j] * r * v.grad(p).squaredNorm();
        }
    }
    return sum;
}

double gradient_energy(const NeedleFunction& v, const Region& region, int nr, int nt) {
    return gradient_energy(v.field(), region, nr, nt);
}

}  // namespace ips
