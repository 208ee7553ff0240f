#pragma once

#include <functional>
#include <vector>

#include "ips/geometry.hpp"

namespace ips {

// G(r) = -Y0(kr)/4 for k > 0 and -ln(r)/(2 pi) for k = 0.
double eval_G(double k, double r);
// dG/dr.
double eval_dG_dr(double k, double r);
// Gradient of y -> G(|y - x|) with respect to y.
Vec2 eval_grad_G(double k, const Vec2& x, const Vec2& y);

// A real function together with its gradient. Used for boundary data, closed-form
// Helmholtz solutions and singular solutions alike.
struct ScalarField {
    std::function<double(const Vec2&)> value;
    std::function<Vec2(const Vec2&)> grad;
};

ScalarField fundamental_field(double k, const Vec2& x);

enum class Part { Cos, Sin };

// Entire Helmholtz solutions about a center. With z = (p - c)/R the members are
//   k = 0: Re z^m, Im z^m
//   k > 0: J_m(k r) m! (2/(k R))^m {cos m theta, sin m theta}
// The normalisation makes both families behave like |z|^m, so one coefficient
// vector reads the same at every k. Member index 0 is order 0; 2m-1 / 2m are the
// cos / sin members of order m.
struct EntireBasis {
    double k = 0.0;
    Vec2 center = Vec2::Zero();
    double scale = 1.0;

    static EntireBasis for_domain(double k, const Curve& domain);
    static int size(int order) { return 2 * order + 1; }
    static int index(int m, Part part) { return m == 0 ? 0 : (part == Part::Cos ? 2 * m - 1 : 2 * m); }
};

struct ValueGrad {
    double value;
    Vec2 grad;
};

ValueGrad eval_entire(const EntireBasis& basis, int m, Part part, const Vec2& p);

// Values and gradients of all members up to the given order (2*order+1 entries each).
void eval_entire_all(const EntireBasis& basis, int order, const Vec2& p, double* value, double* gx, double* gy);

// Member values only.
void eval_entire_values(const EntireBasis& basis, int order, const Vec2& p, double* value);

}  // namespace ips
