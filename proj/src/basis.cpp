#include "ips/basis.hpp"

#include <cmath>
#include <complex>
#include <numbers>

#include "ips/bessel.hpp"
#include "ips/errors.hpp"

namespace ips {

double eval_G(double k, double r) {
    if (!(r > 0)) throw DomainError("fundamental solution needs r > 0");
    if (k == 0.0) return -std::log(r) / (2.0 * std::numbers::pi);
    return -0.25 * bessel::y0(k * r);
}

double eval_dG_dr(double k, double r) {
    if (!(r > 0)) throw DomainError("fundamental solution needs r > 0");
    if (k == 0.0) return -1.0 / (2.0 * std::numbers::pi * r);
    return 0.25 * k * bessel::y1(k * r);
}

Vec2 eval_grad_G(double k, const Vec2& x, const Vec2& y) {
    const Vec2 d = y - x;
    const double r = d.norm();
    if (!(r > 0)) throw DomainError("gradient of the fundamental solution at coincident points");
    return eval_dG_dr(k, r) / r * d;
}

ScalarField fundamental_field(double k, const Vec2& x) {
    return {[k, x](const Vec2& y) { return eval_G(k, (y - x).norm()); },
            [k, x](const Vec2& y) { return eval_grad_G(k, x, y); }};
}

EntireBasis EntireBasis::for_domain(double k, const Curve& domain) {
    return EntireBasis{k, domain.centroid(), domain.outer_radius()};
}

namespace {

using cplx = std::complex<double>;

// psi_m = Lambda_m(k r) z^m for m = 0..n.
void members(const EntireBasis& b, int n, const Vec2& p, std::vector<cplx>& psi) {
    const Vec2 d = p - b.center;
    const cplx z(d.x() / b.scale, d.y() / b.scale);
    psi.resize(n + 1);
    std::vector<double> lam;
    if (b.k > 0) lam = bessel::scaled_jn_all(n, b.k * d.norm());
    cplx zm(1.0, 0.0);
    for (int m = 0; m <= n; ++m) {
        psi[m] = (b.k > 0 ? lam[m] : 1.0) * zm;
        zm *= z;
    }
}

}  // namespace

void eval_entire_all(const EntireBasis& b, int order, const Vec2& p, double* value, double* gx, double* gy) {
    std::vector<cplx> psi;
    members(b, order + 1, p, psi);
    const double R = b.scale, k2 = b.k * b.k;
    const cplx I(0.0, 1.0);
    for (int m = 0; m <= order; ++m) {
        // d psi_m = (m/R) psi_{m-1}; for m = 0 the J_{-1} term folds onto conj(psi_1).
        const cplx lower = m > 0 ? double(m) / R * psi[m - 1] : -k2 * R / 4.0 * std::conj(psi[1]);
        const cplx upper = k2 * R / (4.0 * (m + 1)) * psi[m + 1];
        const cplx dx = lower - upper;
        const cplx dy = I * (lower + upper);
        const int ic = EntireBasis::index(m, Part::Cos);
        value[ic] = psi[m].real();
        gx[ic] = dx.real();
        gy[ic] = dy.real();
        if (m > 0) {
            const int is = EntireBasis::index(m, Part::Sin);
            value[is] = psi[m].imag();
            gx[is] = dx.imag();
            gy[is] = dy.imag();
        }
    }
}

void eval_entire_values(const EntireBasis& b, int order, const Vec2& p, double* value) {
    std::vector<cplx> psi;
    members(b, order, p, psi);
    for (int m = 0; m <= order; ++m) {
        value[EntireBasis::index(m, Part::Cos)] = psi[m].real();
        if (m > 0) value[EntireBasis::index(m, Part::Sin)] = psi[m].imag();
    }
}

ValueGrad eval_entire(const EntireBasis& b, int m, Part part, const Vec2& p) {
    if (m < 0 || m > bessel::kMaxOrder) throw DomainError("entire basis order out of range");
    if (m == 0 && part == Part::Sin) return {0.0, Vec2::Zero()};
    const int n = EntireBasis::size(m);
    std::vector<double> v(n), gx(n), gy(n);
    eval_entire_all(b, m, p, v.data(), gx.data(), gy.data());
    const int i = EntireBasis::index(m, part);
    return {v[i], Vec2(gx[i], gy[i])};
}

}  // namespace ips
