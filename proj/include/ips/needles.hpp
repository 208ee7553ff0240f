#pragma once

#include <vector>

#include "ips/basis.hpp"
#include "ips/forward.hpp"
#include "ips/geometry.hpp"

namespace ips {

enum class Exclusion {
    Tube,   // points closer than tube_radius to the needle are dropped
    Wedge,  // additionally drop a sector at the tip opening toward the entry
};

struct NeedleParams {
    std::vector<int> orders{5, 10, 20, 30};
    double tube_radius = -1.0;  // negative: 0.1 x domain diameter
    int boundary_nodes = 256;
    int rings = 9;
    Family family = Family::G0;
    double gradient_weight = 1.0;
    double alpha0 = 1e-2;
    double alpha_base = 4.0;  // alpha_n = alpha0 * alpha_base^(-n/5)
    double alpha_floor = 1e-12;
    Exclusion exclusion = Exclusion::Tube;
    double wedge_half_angle = 1.0471975511965976;  // pi/3
    // Collocation keeps only points at least this far from the outer boundary.
    // Negative: 0.75 x the scenario min_gap (see resolved()).
    double inset = 0.0;
    // Relative collocation residual above which the top order is reported as a failure
    // (1 is what the zero function achieves).
    double residual_limit = 0.9;

    int max_order() const;
    double alpha(int n) const;
    // Tip exclusion and 0.75 x min_gap inset used by the probe workflows.
    static NeedleParams probing();
    // Replaces the automatic inset (negative) by 0.75 x the scenario min_gap.
    NeedleParams resolved(const Scenario& sc) const;
    double tube(const Curve& domain) const { return tube_radius > 0 ? tube_radius : 0.1 * domain.diameter(); }
    void validate() const;
};

struct FitDiagnostics {
    double collocation_residual = 0.0;  // relative RMS over values and gradients
    double coefficient_norm = 0.0;
    double heldout_error = 0.0;  // sup |v - G| / sup |G| on the check set
    int collocation_points = 0;
};

// Entire Helmholtz solution v_n; for the Green-function family it carries the shift H(., x).
struct NeedleFunction {
    EntireBasis basis;
    int order = 0;
    Eigen::VectorXd coef;
    Needle needle;
    Family family = Family::G0;
    ForwardSolution shift;
    FitDiagnostics diagnostics;

    double value(const Vec2& p) const;
    Vec2 grad(const Vec2& p) const;
    ScalarField field() const;
    // Entire part only (no shift).
    double entire_value(const Vec2& p) const;
};

// Least-squares fit of entire solutions to G(., x) away from a needle. The normal
// matrix is built once for the largest order and reused for every order.
class NeedleFitter {
public:
    NeedleFitter(const Curve& domain, double k, const Needle& needle, const NeedleParams& params,
                 const ForwardModel* free_model = nullptr);
    NeedleFunction fit(int order) const;
    const Eigen::Matrix2Xd& collocation() const { return points_; }
    const Eigen::Matrix2Xd& check_set() const { return check_; }
    const EntireBasis& basis() const { return basis_; }

private:
    Curve domain_;
    double k_;
    Needle needle_;
    NeedleParams params_;
    EntireBasis basis_;
    int nmax_;
    Eigen::Matrix2Xd points_, check_;
    Eigen::MatrixXd A_, normal_;
    Eigen::VectorXd b_;
    Eigen::VectorXd rhs_;
    double target_norm2_ = 0.0;
    Eigen::MatrixXd check_basis_;
    Eigen::VectorXd check_target_;
    ForwardSolution shift_;
};

Eigen::Matrix2Xd needle_collocation(const Curve& domain, const Needle& needle, const NeedleParams& params);
// 64 points at distance 2 tube from the needle, inside the domain.
Eigen::Matrix2Xd needle_check_set(const Curve& domain, const Needle& needle, double tube, int count = 64);

NeedleFunction fit_needle_sequence(const Curve& domain, double k, const Needle& needle, const NeedleParams& params,
                                   int order, const ForwardModel* free_model = nullptr);

struct Region {
    enum class Kind { Disk, Sector } kind = Kind::Disk;
    Vec2 center = Vec2::Zero();
    double r0 = 0.0, r1 = 1.0;
    double theta0 = 0.0, theta1 = 6.283185307179586;

    static Region disk(const Vec2& c, double r) { return Region{Kind::Disk, c, 0.0, r, 0.0, 6.283185307179586}; }
    static Region sector(const Vec2& c, double r0, double r1, double t0, double t1) {
        return Region{Kind::Sector, c, r0, r1, t0, t1};
    }
};

// ||grad v||^2 over the region by tensor Gauss-Legendre quadrature in polar coordinates.
double gradient_energy(const ScalarField& v, const Region& region, int nr = 40, int nt = 80);
double gradient_energy(const NeedleFunction& v, const Region& region, int nr = 40, int nt = 80);

}  // namespace ips
