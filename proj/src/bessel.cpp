#include "ips/bessel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "ips/errors.hpp"

namespace ips::bessel {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kEuler = std::numbers::egamma;
constexpr double kSeriesMax = 2.0;
constexpr double kAsymptoticMin = 60.0;

void check_order(int n) {
    if (n < 0 || n > kMaxOrder)
        throw DomainError("bessel order " + std::to_string(n) + " outside [0, 60]");
}

// sum_j (-x^2/4)^j m! / (j! (m+j)!)
double ascending_core(int m, double x) {
    const double q = -0.25 * x * x;
    double term = 1.0, sum = 1.0;
    for (int j = 1; j < 200; ++j) {
        term *= q / (double(j) * double(m + j));
        sum += term;
        if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

std::vector<double> series_j(int nmax, double x) {
    std::vector<double> out(nmax + 1);
    double pref = 1.0;  // (x/2)^m / m!
    for (int m = 0; m <= nmax; ++m) {
        if (m > 0) pref *= 0.5 * x / m;
        out[m] = pref * ascending_core(m, x);
    }
    return out;
}

// Miller's backward recurrence normalised by J_0 + 2 sum J_2k = 1.
std::vector<double> miller_j(int nmax, double x) {
    const double big = std::max<double>(nmax, x);
    int start = int(big + 40.0 + 6.0 * std::sqrt(big));
    if (start % 2) ++start;
    std::vector<double> j(start + 2, 0.0);
    j[start + 1] = 0.0;
    j[start] = 1e-30;
    for (int m = start; m >= 1; --m) {
        j[m - 1] = 2.0 * m / x * j[m] - j[m + 1];
        if (std::abs(j[m - 1]) > 1e250) {
            for (int i = m - 1; i <= start; ++i) j[i] *= 1e-250;
        }
    }
    double norm = j[0];
    for (int m = 2; m <= start; m += 2) norm += 2.0 * j[m];
    std::vector<double> out(nmax + 1);
    for (int m = 0; m <= nmax; ++m) out[m] = j[m] / norm;
    return out;
}

// Hankel expansion; returns (J_n, Y_n).
std::pair<double, double> hankel(int n, double x) {
    const double mu = 4.0 * n * n;
    double p = 0.0, q = 0.0, term = 1.0, prev = 1e300;
    for (int k = 0; k < 100; ++k) {
        if (k > 0) term *= (mu - (2.0 * k - 1) * (2.0 * k - 1)) / (k * 8.0 * x);
        if (std::abs(term) > prev) break;
        prev = std::abs(term);
        const int r = k % 4;
        if (r == 0) p += term;
        else if (r == 1) q += term;
        else if (r == 2) p -= term;
        else q -= term;
        if (std::abs(term) < 1e-17) break;
    }
    const double chi = x - (0.5 * n + 0.25) * kPi;
    const double a = std::sqrt(2.0 / (kPi * x));
    return {a * (p * std::cos(chi) - q * std::sin(chi)), a * (p * std::sin(chi) + q * std::cos(chi))};
}

std::pair<double, double> y01_series(double x) {
    const double q = 0.25 * x * x;
    const double l = std::log(0.5 * x) + kEuler;
    const double jz = ascending_core(0, x);
    const double jo = 0.5 * x * ascending_core(1, x);
    // Y0
    double term = 1.0, h = 0.0, s0 = 0.0;
    for (int k = 1; k < 200; ++k) {
        term *= q / (double(k) * k);
        h += 1.0 / k;
        const double t = ((k % 2) ? 1.0 : -1.0) * h * term;
        s0 += t;
        if (std::abs(t) < 1e-18) break;
    }
    const double yz = 2.0 / kPi * (l * jz + s0);
    // Y1 = -2/(pi x) + (2/pi) ln(x/2) J1 - (1/pi) sum (-1)^k (psi(k+1)+psi(k+2)) (x/2)^(2k+1)/(k!(k+1)!)
    double s1 = 0.0;
    term = 0.5 * x;  // (x/2)^(2k+1)/(k!(k+1)!) at k = 0
    double hk = 0.0;
    for (int k = 0; k < 200; ++k) {
        if (k > 0) {
            term *= q / (double(k) * (k + 1));
            hk += 1.0 / k;
        }
        const double psi_sum = (hk - kEuler) + (hk + 1.0 / (k + 1) - kEuler);
        const double t = ((k % 2) ? -1.0 : 1.0) * psi_sum * term;
        s1 += t;
        if (std::abs(t) < 1e-18 && k > 2) break;
    }
    const double yo = -2.0 / (kPi * x) + 2.0 / kPi * std::log(0.5 * x) * jo - s1 / kPi;
    return {yz, yo};
}

// Neumann series in terms of J_n, valid for every x > 0 given accurate J_n.
std::pair<double, double> y01_neumann(double x) {
    const int n = int(x + 40.0 + 6.0 * std::sqrt(x));
    const auto j = miller_j(n + 1, x);
    const double l = std::log(0.5 * x) + kEuler;
    double s0 = 0.0, s1 = 0.0;
    for (int k = 1; 2 * k + 1 <= n + 1; ++k) {
        const double sg = (k % 2) ? -1.0 : 1.0;
        s0 += sg * j[2 * k] / k;
        s1 += sg * (j[2 * k - 1] - j[2 * k + 1]) / k;
    }
    const double yz = 2.0 / kPi * l * j[0] - 4.0 / kPi * s0;
    const double yo = -2.0 / (kPi * x) * j[0] + 2.0 / kPi * l * j[1] + 2.0 / kPi * s1;
    return {yz, yo};
}

std::pair<double, double> y01(double x) {
    if (x <= kSeriesMax) return y01_series(x);
    if (x < kAsymptoticMin) return y01_neumann(x);
    return {hankel(0, x).second, hankel(1, x).second};
}

}  // namespace

std::vector<double> jn_all(int nmax, double x) {
    if (nmax < 0) throw DomainError("negative bessel order");
    if (x < 0.0 || !std::isfinite(x)) throw DomainError("bessel J argument must be finite and >= 0");
    if (x == 0.0) {
        std::vector<double> out(nmax + 1, 0.0);
        out[0] = 1.0;
        return out;
    }
    if (x <= kSeriesMax) return series_j(nmax, x);
    return miller_j(nmax, x);
}

std::vector<double> yn_all(int nmax, double x) {
    if (nmax < 0) throw DomainError("negative bessel order");
    if (!(x > 0.0) || !std::isfinite(x)) throw DomainError("bessel Y argument must be finite and > 0");
    std::vector<double> out(nmax + 1);
    const auto [a, b] = y01(x);
    out[0] = a;
    if (nmax >= 1) out[1] = b;
    for (int m = 1; m < nmax; ++m) out[m + 1] = 2.0 * m / x * out[m] - out[m - 1];
    return out;
}

std::vector<double> scaled_jn_all(int nmax, double x) {
    if (nmax < 0) throw DomainError("negative bessel order");
    if (x < 0.0 || !std::isfinite(x)) throw DomainError("bessel J argument must be finite and >= 0");
    std::vector<double> out(nmax + 1);
    if (x <= 4.0) {
        for (int m = 0; m <= nmax; ++m) out[m] = ascending_core(m, x);
        return out;
    }
    const auto j = miller_j(nmax, x);
    for (int m = 0; m <= nmax; ++m) out[m] = j[m] * std::exp(std::lgamma(m + 1.0) + m * std::log(2.0 / x));
    return out;
}

double j0(double x) {
    x = std::abs(x);
    if (x >= kAsymptoticMin) return hankel(0, x).first;
    return jn_all(1, x)[0];
}

double j1(double x) {
    const double s = x < 0 ? -1.0 : 1.0;
    x = std::abs(x);
    if (x >= kAsymptoticMin) return s * hankel(1, x).first;
    return s * jn_all(1, x)[1];
}

double y0(double x) {
    if (!(x > 0.0)) throw DomainError("bessel Y argument must be > 0");
    return y01(x).first;
}

double y1(double x) {
    if (!(x > 0.0)) throw DomainError("bessel Y argument must be > 0");
    return y01(x).second;
}

double jn(int n, double x) {
    check_order(n);
    if (x < 0.0) throw DomainError("bessel J argument must be >= 0");
    if (x >= kAsymptoticMin && x > 2.0 * n * n) return hankel(n, x).first;
    return jn_all(n, x)[n];
}

double yn(int n, double x) {
    check_order(n);
    if (!(x > 0.0)) throw DomainError("bessel Y argument must be > 0");
    return yn_all(n, x)[n];
}

double jn_prime(int n, double x) {
    check_order(n);
    if (n == 0) return -j1(x);
    const auto j = jn_all(n + 1, x);
    return 0.5 * (j[n - 1] - j[n + 1]);
}

double yn_prime(int n, double x) {
    check_order(n);
    if (n == 0) return -y1(x);
    const auto y = yn_all(n + 1, x);
    return 0.5 * (y[n - 1] - y[n + 1]);
}

double eval(Kind kind, int order, double x) {
    return kind == Kind::J ? jn(order, x) : yn(order, x);
}

}  // namespace ips::bessel
