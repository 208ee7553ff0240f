#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ips {

using Vec2 = Eigen::Vector2d;

enum class CurveKind { Circle, Ellipse, Kite, SmoothPolyline };

std::string to_string(CurveKind kind);
CurveKind curve_kind_from_string(const std::string& s);

// Closed, counterclockwise, smooth parametric curve on [0, 2pi).
//   circle:          params = {R}
//   ellipse:         params = {a, b}, semi-axes along x and y
//   kite:            params = {s}, s * (cos t + 0.65 cos 2t - 0.65, 1.5 sin t)
//   smooth polyline: trigonometric interpolant through the given vertices
class Curve {
public:
    static Curve circle(const Vec2& center, double radius);
    static Curve ellipse(const Vec2& center, double a, double b);
    static Curve kite(const Vec2& center, double scale);
    static Curve smooth_polyline(const std::vector<Vec2>& vertices);
    static Curve make(CurveKind kind, const Vec2& center, const std::vector<double>& params);

    CurveKind kind() const { return kind_; }
    const Vec2& center() const { return center_; }
    const std::vector<double>& params() const { return params_; }
    const std::vector<Vec2>& vertices() const { return vertices_; }

    Vec2 position(double t) const;
    Vec2 derivative(double t) const;
    Vec2 second_derivative(double t) const;
    double speed(double t) const { return derivative(t).norm(); }
    // Analytic continuation gamma(t + i tau) read as a point of the plane. Small tau > 0
    // moves into the enclosed region.
    Vec2 continued_position(double t, double tau) const;
    // Unit normal pointing away from the enclosed region.
    Vec2 normal(double t) const;

    // Max distance between points of a dense sampling.
    double diameter() const { return diameter_; }
    // Area centroid of the enclosed region.
    Vec2 centroid() const { return centroid_; }
    // Largest distance from the centroid to the curve.
    double outer_radius() const { return outer_radius_; }
    double area() const { return area_; }

private:
    Curve(CurveKind kind, const Vec2& center, std::vector<double> params, std::vector<Vec2> vertices);
    void finish();

    CurveKind kind_;
    Vec2 center_;
    std::vector<double> params_;
    std::vector<Vec2> vertices_;
    std::vector<double> ca_, sa_, cb_, sb_;  // Fourier data for the smooth polyline
    double diameter_ = 0, outer_radius_ = 0, area_ = 0;
    Vec2 centroid_ = Vec2::Zero();
};

struct BoundaryGrid {
    Curve parent;
    std::vector<double> t;
    Eigen::Matrix2Xd nodes;
    Eigen::Matrix2Xd normals;
    Eigen::VectorXd weights;
    int size() const { return int(t.size()); }
};

// Equispaced trapezoidal grid, weights (2pi/M) |gamma'(t_j)|. M >= 16 and even.
BoundaryGrid discretize_curve(const Curve& curve, int M);

struct CurveProjection {
    double distance;
    double t;
    Vec2 point;
};

CurveProjection project_to_curve(const Curve& curve, const Vec2& p);
double distance_to_curve(const Curve& curve, const Vec2& p);
double curve_distance(const Curve& a, const Curve& b);

// Winding number test; throws DegeneratePointError within 1e-12 of the curve.
bool contains(const Curve& curve, const Vec2& p);

// Dense inscribed polygon for bulk inside/distance queries (sampling of collocation sets).
// Distances are accurate to the chord sag, about (2 pi / M)^2 |gamma''| / 8.
class CurvePolygon {
public:
    explicit CurvePolygon(const Curve& curve, int M = 2048);
    bool contains(const Vec2& p) const;
    double distance(const Vec2& p) const;

private:
    Eigen::Matrix2Xd v_;
    Eigen::Vector2d lo_, hi_;
};

// -------------------------------------------------------------------------
// Scenarios

enum class BC { Dirichlet, Neumann };
enum class Family { G0, Gstar };

std::string to_string(BC bc);
std::string to_string(Family f);
BC bc_from_string(const std::string& s);
Family family_from_string(const std::string& s);

struct Obstacle {
    Curve curve;
    BC bc;
};

struct Scenario {
    Curve domain = Curve::circle(Vec2::Zero(), 1.0);
    std::vector<Obstacle> obstacles;
    double k = 0.0;
    Family family = Family::G0;
    // Negative means 0.05 * domain diameter.
    double min_gap = -1.0;

    double effective_min_gap() const;
    // Same domain, k and family with the obstacles removed.
    Scenario without_obstacles() const;
};

struct ScenarioDiagnostics {
    double min_obstacle_gap = std::numeric_limits<double>::infinity();
    double min_domain_gap = std::numeric_limits<double>::infinity();
    double required_gap = 0.0;
    std::vector<std::string> problems;
    bool valid() const { return problems.empty(); }
};

ScenarioDiagnostics diagnose_scenario(const Scenario& s);
// Throws InvalidScenarioError naming the offending pair.
ScenarioDiagnostics validate_scenario(const Scenario& s);

// Canonical text form of the scenario and its FNV-1a 64-bit hash (hex).
std::string scenario_canonical(const Scenario& s);
std::string scenario_fingerprint(const Scenario& s);

// Distance from p to the closest obstacle boundary, and whether p lies inside some obstacle.
double distance_to_obstacles(const Scenario& s, const Vec2& p);
bool inside_obstacle(const Scenario& s, const Vec2& p);

// -------------------------------------------------------------------------
// Needles

struct Needle {
    std::vector<Vec2> vertices;  // from the boundary entry point to the tip
    const Vec2& tip() const { return vertices.back(); }
    const Vec2& entry() const { return vertices.front(); }
    double length() const;
};

// Validates a user polyline against the domain. Throws NeedleError.
Needle make_needle(const Curve& domain, std::vector<Vec2> vertices);

// Straight needle reaching x from the boundary point hit by the ray x + s(cos a, sin a), s > 0.
Needle build_needle(const Curve& domain, const Vec2& x, double entry_angle);
Needle build_needle(const Curve& domain, const Vec2& x, const Vec2& direction);
// Straight needle from gamma(t) to x.
Needle build_needle_from_parameter(const Curve& domain, const Vec2& x, double t);
// Straight needle from the nearest boundary point.
Needle build_radial_needle(const Curve& domain, const Vec2& x);

double distance_to_needle(const Vec2& p, const Needle& needle);
double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b);

// Angle of entry - tip.
double entry_angle(const Needle& needle);

// Gauss-Legendre nodes and weights on [-1, 1].
void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace ips
