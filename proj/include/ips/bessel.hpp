#pragma once

#include <vector>

namespace ips::bessel {

inline constexpr int kMaxOrder = 60;

enum class Kind { J, Y };

double j0(double x);
double j1(double x);
double y0(double x);
double y1(double x);

// Integer orders 0..kMaxOrder. Throws DomainError outside that range, or for x <= 0 with Y.
double jn(int n, double x);
double yn(int n, double x);
double jn_prime(int n, double x);
double yn_prime(int n, double x);

double eval(Kind kind, int order, double x);

// J_0(x) .. J_nmax(x) in one pass. nmax may exceed kMaxOrder by a few (used by the basis).
std::vector<double> jn_all(int nmax, double x);

// Y_0(x) .. Y_nmax(x), forward recurrence from Y_0 and Y_1.
std::vector<double> yn_all(int nmax, double x);

// J_m(x) * m! * (2/x)^m, which tends to 1 as x -> 0. Entire in x.
std::vector<double> scaled_jn_all(int nmax, double x);

}  // namespace ips::bessel
