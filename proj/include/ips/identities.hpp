#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ips/indicator.hpp"

namespace ips {

struct IdentityReport {
    std::string id;
    double lhs = 0, rhs = 0;
    double residual = 0;
    double tolerance = 0;
    std::string fingerprint;
    std::string detail;  // point, v or order the report refers to
    bool pass = false;
};

// |lhs - rhs| / max(|lhs|, floor).
double relative_residual(double lhs, double rhs, double floor = 0.0);
IdentityReport make_report(std::string id, double lhs, double rhs, double tolerance, double floor,
                           const std::string& fingerprint, std::string detail = {});

// ---------------------------------------------------------------------------
// Boundary-reduced energies

struct OrientedGrid {
    BoundaryGrid grid;
    double sign = 1.0;  // +1 for the outer boundary of the region, -1 for holes
};

// sum of sign * integral of v dv/dnu; equals ||grad v||^2 - k^2 ||v||^2 over the region
// when v solves the Helmholtz equation there.
double energy_boundary(const ScalarField& v, const std::vector<OrientedGrid>& boundary);
double energy_boundary(const ForwardSolution& u);

// ---------------------------------------------------------------------------
// Closed-form test solutions

inline constexpr int kCatalogVersion = 1;

struct ClosedForm {
    std::string name;
    ScalarField field;
};

ClosedForm harmonic_polynomial(int m, Part part, const Vec2& center = Vec2::Zero());
// cos(k d.y) with d normalised.
ClosedForm plane_wave(double k, const Vec2& direction);
// J_m(k r) cos(m theta) or sin(m theta) about the origin.
ClosedForm fourier_bessel(double k, int m, Part part);
// Fixed list per wavenumber: harmonic polynomials at k = 0, plane waves and
// Fourier-Bessel modes otherwise.
std::vector<ClosedForm> closed_form_catalog(double k);

// ---------------------------------------------------------------------------
// Identity checks

// ids thm1.1-neumann, thm1.1-dirichlet at x against the direct W_x(x).
std::vector<IdentityReport> verify_thm11(const Context& ctx, const Vec2& x, Family family, double tol = 1e-5);

// <(L0 - LD) v, v> from the DN matrices against the two energy sums.
std::vector<IdentityReport> verify_thm12(const Context& ctx, const ClosedForm& v, double tol = 1e-5);
// The same with v a needle-sequence member.
std::vector<IdentityReport> verify_cor31(const Context& ctx, const Needle& needle, const NeedleParams& params,
                                         int order, double tol = 1e-4);

IdentityReport verify_dn_symmetry(const DtNMatrix& M, double tol = 1e-8, const std::string& name = {});

// W_x(y) = w_x(y) + w1_x(y).
IdentityReport verify_outer_decomposition(const Context& ctx, const Vec2& x, const Vec2& y, Family family,
                                          double tol = 1e-7);
// W_x(x) = I(x) + I1(x), I1 taken from the DN matrix.
IdentityReport verify_inner_decomposition(const Context& ctx, const Vec2& x, Family family, double tol = 1e-5);
IdentityReport verify_twisted_symmetry(const Context& ctx, const Vec2& x, const Vec2& y, Family family,
                                       double tol = 1e-6);

// ---------------------------------------------------------------------------
// Poincare constants and the smallness conditions on k

// First positive root of J_1' (1.8411838...) and of J_0 (2.4048256...).
double bessel_j1_prime_root();
double bessel_j0_root();

struct ComponentConstant {
    BC bc;
    double constant = 0;
    bool exact = false;   // disks; otherwise a containing-disk bound
    double condition = 0; // 8 C^2 k^2
    bool pass = false;    // condition < 1
};

struct SmallnessReport {
    double exterior_raw = 0;       // staircase eigenvalue estimate
    double exterior_constant = 0;  // raw times the safety factor
    double safety_factor = 1.25;
    double exterior_condition = 0; // C^2 k^2
    bool exterior_pass = false;    // condition <= 1
    std::vector<ComponentConstant> components;
    double k = 0;
    double k_max = 0;
    bool pass = false;
    int grid = 128;
    std::string fingerprint;
};

struct PoincareOptions {
    int grid = 128;
    double safety_factor = 1.25;
    double tolerance = 1e-10;  // relative eigenvalue change for inverse iteration
    int max_iterations = 500;
};

// Smallest eigenvalue of -Delta on Omega \ D (Dirichlet on the outer curve, Neumann on D)
// by inverse iteration on a staircase five-point grid; returns 1/sqrt(lambda).
double mixed_poincare_raw(const Scenario& sc, const PoincareOptions& opt = {});
SmallnessReport poincare_constants(const Scenario& sc, const PoincareOptions& opt = {});

// ---------------------------------------------------------------------------
// Full suite

struct SuiteOptions {
    int points = 5;  // random probe points per family
    int pairs = 3;
    std::uint64_t seed = 20240601;
    std::vector<int> needle_orders{10, 20, 30};
    NeedleParams needle;
    int threads = 1;
    bool twisted = true;
};

struct SuiteResult {
    std::vector<IdentityReport> identities;
    SmallnessReport smallness;
    bool pass() const;
    std::vector<std::string> failing() const;
};

// Points of Omega \ D at least `clearance` from every boundary, from a seeded generator.
std::vector<Vec2> sample_probe_points(const Scenario& sc, int count, std::uint64_t seed, double clearance = 0.1);

SuiteResult run_identity_suite(const Context& ctx, const SuiteOptions& opt);

}  // namespace ips
