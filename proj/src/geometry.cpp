#include "ips/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <complex>
#include <numbers>
#include <cstdint>
#include <cstdio>
#include <sstream>

#include "ips/errors.hpp"

namespace ips {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kDense = 1024;

double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

bool segments_intersect(const Vec2& p1, const Vec2& p2, const Vec2& q1, const Vec2& q2) {
    const double d1 = cross(q2 - q1, p1 - q1), d2 = cross(q2 - q1, p2 - q1);
    const double d3 = cross(p2 - p1, q1 - p1), d4 = cross(p2 - p1, q2 - p1);
    if (((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0)))
        return true;
    auto on = [](const Vec2& a, const Vec2& b, const Vec2& p) {
        return std::abs(cross(b - a, p - a)) < 1e-14 && (p - a).dot(p - b) <= 0.0;
    };
    return on(q1, q2, p1) || on(q1, q2, p2) || on(p1, p2, q1) || on(p1, p2, q2);
}

std::string fmt_point(const Vec2& p) {
    std::ostringstream os;
    os << "(" << p.x() << ", " << p.y() << ")";
    return os.str();
}

}  // namespace

std::string to_string(CurveKind kind) {
    switch (kind) {
        case CurveKind::Circle: return "circle";
        case CurveKind::Ellipse: return "ellipse";
        case CurveKind::Kite: return "kite";
        case CurveKind::SmoothPolyline: return "polyline-smooth";
    }
    return "?";
}

CurveKind curve_kind_from_string(const std::string& s) {
    if (s == "circle" || s == "disk") return CurveKind::Circle;
    if (s == "ellipse") return CurveKind::Ellipse;
    if (s == "kite") return CurveKind::Kite;
    if (s == "polyline-smooth") return CurveKind::SmoothPolyline;
    throw ConfigError("unknown curve kind '" + s + "'");
}

Curve::Curve(CurveKind kind, const Vec2& center, std::vector<double> params, std::vector<Vec2> vertices)
    : kind_(kind), center_(center), params_(std::move(params)), vertices_(std::move(vertices)) {}

Curve Curve::circle(const Vec2& center, double radius) {
    if (!(radius > 0)) throw ConfigError("circle radius must be positive");
    Curve c(CurveKind::Circle, center, {radius}, {});
    c.finish();
    return c;
}

Curve Curve::ellipse(const Vec2& center, double a, double b) {
    if (!(a > 0 && b > 0)) throw ConfigError("ellipse semi-axes must be positive");
    Curve c(CurveKind::Ellipse, center, {a, b}, {});
    c.finish();
    return c;
}

Curve Curve::kite(const Vec2& center, double scale) {
    if (!(scale > 0)) throw ConfigError("kite scale must be positive");
    Curve c(CurveKind::Kite, center, {scale}, {});
    c.finish();
    return c;
}

Curve Curve::smooth_polyline(const std::vector<Vec2>& vertices_in) {
    if (vertices_in.size() < 3) throw ConfigError("polyline-smooth needs at least 3 vertices");
    std::vector<Vec2> v = vertices_in;
    double area2 = 0;
    for (size_t i = 0; i < v.size(); ++i) area2 += cross(v[i], v[(i + 1) % v.size()]);
    if (area2 < 0) std::reverse(v.begin(), v.end());
    Vec2 c = Vec2::Zero();
    for (const auto& p : v) c += p;
    c /= double(v.size());
    Curve curve(CurveKind::SmoothPolyline, c, {}, v);
    const int n = int(v.size());
    const int half = n / 2;
    curve.ca_.assign(half + 1, 0.0);
    curve.sa_.assign(half + 1, 0.0);
    curve.cb_.assign(half + 1, 0.0);
    curve.sb_.assign(half + 1, 0.0);
    for (int m = 0; m <= half; ++m) {
        double fac = (m == 0 || (n % 2 == 0 && m == half)) ? 1.0 / n : 2.0 / n;
        for (int j = 0; j < n; ++j) {
            const double t = kTwoPi * j / n;
            curve.ca_[m] += fac * v[j].x() * std::cos(m * t);
            curve.cb_[m] += fac * v[j].y() * std::cos(m * t);
            if (!(n % 2 == 0 && m == half)) {
                curve.sa_[m] += fac * v[j].x() * std::sin(m * t);
                curve.sb_[m] += fac * v[j].y() * std::sin(m * t);
            }
        }
    }
    curve.finish();
    // self intersection check on a dense polygon
    const int M = 512;
    std::vector<Vec2> poly(M);
    for (int i = 0; i < M; ++i) poly[i] = curve.position(kTwoPi * i / M);
    for (int i = 0; i < M; ++i)
        for (int j = i + 2; j < M; ++j) {
            if (i == 0 && j == M - 1) continue;
            if (segments_intersect(poly[i], poly[(i + 1) % M], poly[j], poly[(j + 1) % M]))
                throw ConfigError("polyline-smooth curve self-intersects");
        }
    return curve;
}

Curve Curve::make(CurveKind kind, const Vec2& center, const std::vector<double>& p) {
    switch (kind) {
        case CurveKind::Circle:
            if (p.size() != 1) throw ConfigError("circle expects params = [R]");
            return circle(center, p[0]);
        case CurveKind::Ellipse:
            if (p.size() != 2) throw ConfigError("ellipse expects params = [a, b]");
            return ellipse(center, p[0], p[1]);
        case CurveKind::Kite:
            if (p.size() != 1) throw ConfigError("kite expects params = [scale]");
            return kite(center, p[0]);
        case CurveKind::SmoothPolyline: {
            if (p.size() < 6 || p.size() % 2) throw ConfigError("polyline-smooth expects params = [x0, y0, x1, y1, ...]");
            std::vector<Vec2> v;
            for (size_t i = 0; i < p.size(); i += 2) v.emplace_back(center.x() + p[i], center.y() + p[i + 1]);
            return smooth_polyline(v);
        }
    }
    throw ConfigError("unknown curve kind");
}

Vec2 Curve::position(double t) const {
    switch (kind_) {
        case CurveKind::Circle: return center_ + params_[0] * Vec2(std::cos(t), std::sin(t));
        case CurveKind::Ellipse: return center_ + Vec2(params_[0] * std::cos(t), params_[1] * std::sin(t));
        case CurveKind::Kite:
            return center_ + params_[0] * Vec2(std::cos(t) + 0.65 * std::cos(2 * t) - 0.65, 1.5 * std::sin(t));
        case CurveKind::SmoothPolyline: {
            Vec2 p = Vec2::Zero();
            for (size_t m = 0; m < ca_.size(); ++m) {
                const double c = std::cos(m * t), s = std::sin(m * t);
                p += Vec2(ca_[m] * c + sa_[m] * s, cb_[m] * c + sb_[m] * s);
            }
            return p;
        }
    }
    return center_;
}

Vec2 Curve::continued_position(double t, double tau) const {
    using cplx = std::complex<double>;
    const cplx z(t, tau);
    cplx X, Y;
    switch (kind_) {
        case CurveKind::Circle:
            X = params_[0] * std::cos(z);
            Y = params_[0] * std::sin(z);
            break;
        case CurveKind::Ellipse:
            X = params_[0] * std::cos(z);
            Y = params_[1] * std::sin(z);
            break;
        case CurveKind::Kite:
            X = params_[0] * (std::cos(z) + 0.65 * std::cos(2.0 * z) - 0.65);
            Y = params_[0] * 1.5 * std::sin(z);
            break;
        case CurveKind::SmoothPolyline:
            for (size_t m = 0; m < ca_.size(); ++m) {
                const cplx c = std::cos(double(m) * z), s = std::sin(double(m) * z);
                X += ca_[m] * c + sa_[m] * s;
                Y += cb_[m] * c + sb_[m] * s;
            }
            return Vec2(X.real() - Y.imag(), X.imag() + Y.real());
    }
    return center_ + Vec2(X.real() - Y.imag(), X.imag() + Y.real());
}

Vec2 Curve::derivative(double t) const {
    switch (kind_) {
        case CurveKind::Circle: return params_[0] * Vec2(-std::sin(t), std::cos(t));
        case CurveKind::Ellipse: return Vec2(-params_[0] * std::sin(t), params_[1] * std::cos(t));
        case CurveKind::Kite: return params_[0] * Vec2(-std::sin(t) - 1.3 * std::sin(2 * t), 1.5 * std::cos(t));
        case CurveKind::SmoothPolyline: {
            Vec2 p = Vec2::Zero();
            for (size_t m = 1; m < ca_.size(); ++m) {
                const double c = std::cos(m * t), s = std::sin(m * t);
                p += double(m) * Vec2(-ca_[m] * s + sa_[m] * c, -cb_[m] * s + sb_[m] * c);
            }
            return p;
        }
    }
    return Vec2::Zero();
}

Vec2 Curve::second_derivative(double t) const {
    switch (kind_) {
        case CurveKind::Circle: return -params_[0] * Vec2(std::cos(t), std::sin(t));
        case CurveKind::Ellipse: return Vec2(-params_[0] * std::cos(t), -params_[1] * std::sin(t));
        case CurveKind::Kite: return params_[0] * Vec2(-std::cos(t) - 2.6 * std::cos(2 * t), -1.5 * std::sin(t));
        case CurveKind::SmoothPolyline: {
            Vec2 p = Vec2::Zero();
            for (size_t m = 1; m < ca_.size(); ++m) {
                const double c = std::cos(m * t), s = std::sin(m * t);
                p -= double(m * m) * Vec2(ca_[m] * c + sa_[m] * s, cb_[m] * c + sb_[m] * s);
            }
            return p;
        }
    }
    return Vec2::Zero();
}

Vec2 Curve::normal(double t) const {
    const Vec2 d = derivative(t);
    return Vec2(d.y(), -d.x()) / d.norm();
}

void Curve::finish() {
    std::vector<Vec2> p(kDense);
    double area2 = 0;
    Vec2 c = Vec2::Zero();
    for (int i = 0; i < kDense; ++i) p[i] = position(kTwoPi * i / kDense);
    // spectrally accurate area and centroid from the parametrisation
    for (int i = 0; i < kDense; ++i) {
        const double t = kTwoPi * i / kDense;
        const Vec2 d = derivative(t);
        const double h = kTwoPi / kDense;
        area2 += cross(p[i], d) * h;
        c += Vec2(p[i].x() * p[i].x() * d.y(), -p[i].y() * p[i].y() * d.x()) * h;
    }
    area_ = 0.5 * area2;
    centroid_ = c / area2;
    double dmax = 0, rmax = 0;
    for (int i = 0; i < kDense; ++i) {
        rmax = std::max(rmax, (p[i] - centroid_).norm());
        for (int j = i + 1; j < kDense; ++j) dmax = std::max(dmax, (p[i] - p[j]).squaredNorm());
    }
    diameter_ = std::sqrt(dmax);
    outer_radius_ = rmax;
}

BoundaryGrid discretize_curve(const Curve& curve, int M) {
    if (M < 16 || M % 2) throw ConfigError("boundary grid needs an even node count >= 16, got " + std::to_string(M));
    BoundaryGrid g{curve, std::vector<double>(M), Eigen::Matrix2Xd(2, M), Eigen::Matrix2Xd(2, M), Eigen::VectorXd(M)};
    for (int j = 0; j < M; ++j) {
        const double t = kTwoPi * j / M;
        g.t[j] = t;
        g.nodes.col(j) = curve.position(t);
        g.normals.col(j) = curve.normal(t);
        g.weights[j] = kTwoPi / M * curve.speed(t);
    }
    return g;
}

CurveProjection project_to_curve(const Curve& curve, const Vec2& p) {
    const int M = 720;
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (int i = 0; i < M; ++i) {
        const double d = (curve.position(kTwoPi * i / M) - p).squaredNorm();
        if (d < bd) {
            bd = d;
            best = i;
        }
    }
    // Newton on f(t) = (gamma - p) . gamma', kept inside the bracket around the sample
    const double h = kTwoPi / M;
    double lo = (best - 1) * h, hi = (best + 1) * h, t = best * h;
    auto dist2 = [&](double s) { return (curve.position(s) - p).squaredNorm(); };
    for (int it = 0; it < 60; ++it) {
        const Vec2 r = curve.position(t) - p;
        const Vec2 d1 = curve.derivative(t), d2 = curve.second_derivative(t);
        const double f = r.dot(d1), fp = d1.squaredNorm() + r.dot(d2);
        double tn = fp > 0 ? t - f / fp : t;
        if (!(tn > lo && tn < hi)) {
            // golden section fallback
            double a = lo, b = hi;
            const double g = 0.5 * (std::sqrt(5.0) - 1.0);
            for (int k = 0; k < 100; ++k) {
                const double c = b - g * (b - a), e = a + g * (b - a);
                if (dist2(c) < dist2(e)) b = e;
                else a = c;
            }
            tn = 0.5 * (a + b);
            t = tn;
            break;
        }
        if (std::abs(tn - t) < 1e-15) {
            t = tn;
            break;
        }
        t = tn;
    }
    t = std::fmod(t, kTwoPi);
    if (t < 0) t += kTwoPi;
    const Vec2 q = curve.position(t);
    return {(q - p).norm(), t, q};
}

double distance_to_curve(const Curve& curve, const Vec2& p) { return project_to_curve(curve, p).distance; }

double curve_distance(const Curve& a, const Curve& b) {
    const int M = 256;
    double best = std::numeric_limits<double>::infinity();
    int bi = 0, bj = 0;
    std::vector<Vec2> pb(M);
    for (int j = 0; j < M; ++j) pb[j] = b.position(kTwoPi * j / M);
    for (int i = 0; i < M; ++i) {
        const Vec2 pa = a.position(kTwoPi * i / M);
        for (int j = 0; j < M; ++j) {
            const double d = (pa - pb[j]).squaredNorm();
            if (d < best) {
                best = d;
                bi = i;
                bj = j;
            }
        }
    }
    // alternating projections from the best sampled pair
    Vec2 pa = a.position(kTwoPi * bi / M), q = pb[bj];
    double d = (pa - q).norm();
    for (int it = 0; it < 50; ++it) {
        const auto pq = project_to_curve(b, pa);
        const auto pp = project_to_curve(a, pq.point);
        const double dn = (pp.point - pq.point).norm();
        pa = pp.point;
        if (d - dn < 1e-15) {
            d = std::min(d, dn);
            break;
        }
        d = dn;
    }
    return d;
}

bool contains(const Curve& curve, const Vec2& p) {
    const auto pr = project_to_curve(curve, p);
    if (pr.distance <= 1e-12)
        throw DegeneratePointError("point " + fmt_point(p) + " lies on the curve");
    if (pr.distance < 1e-3 * curve.diameter()) return (p - pr.point).dot(curve.normal(pr.t)) < 0.0;
    const int M = 4096;
    double wind = 0;
    Vec2 prev = curve.position(0) - p;
    for (int i = 1; i <= M; ++i) {
        const Vec2 cur = curve.position(kTwoPi * i / M) - p;
        wind += std::atan2(cross(prev, cur), prev.dot(cur));
        prev = cur;
    }
    return std::lround(wind / kTwoPi) == 1;
}

// -------------------------------------------------------------------------

std::string to_string(BC bc) { return bc == BC::Dirichlet ? "dirichlet" : "neumann"; }
std::string to_string(Family f) { return f == Family::G0 ? "G0" : "Gstar"; }

BC bc_from_string(const std::string& s) {
    if (s == "dirichlet" || s == "soft") return BC::Dirichlet;
    if (s == "neumann" || s == "hard") return BC::Neumann;
    throw ConfigError("unknown boundary condition '" + s + "'");
}

Family family_from_string(const std::string& s) {
    if (s == "G0" || s == "g0") return Family::G0;
    if (s == "Gstar" || s == "gstar" || s == "G*") return Family::Gstar;
    throw ConfigError("unknown family '" + s + "'");
}

double Scenario::effective_min_gap() const { return min_gap >= 0 ? min_gap : 0.05 * domain.diameter(); }

Scenario Scenario::without_obstacles() const {
    Scenario s = *this;
    s.obstacles.clear();
    return s;
}

ScenarioDiagnostics diagnose_scenario(const Scenario& s) {
    ScenarioDiagnostics d;
    d.required_gap = s.effective_min_gap();
    if (s.k < 0 || !std::isfinite(s.k)) d.problems.push_back("wavenumber k must be finite and >= 0");
    const int n = int(s.obstacles.size());
    auto inside_curve = [](const Curve& c, const Vec2& p) {
        try {
            return contains(c, p);
        } catch (const DegeneratePointError&) {
            return true;
        }
    };
    for (int i = 0; i < n; ++i) {
        const Curve& c = s.obstacles[i].curve;
        const double gap = curve_distance(s.domain, c);
        bool crosses = false;
        for (int j = 0; j < 64 && !crosses; ++j)
            if (!inside_curve(s.domain, c.position(kTwoPi * j / 64))) crosses = true;
        const double g = crosses ? 0.0 : gap;
        d.min_domain_gap = std::min(d.min_domain_gap, g);
        if (crosses) {
            d.problems.push_back("obstacle " + std::to_string(i) + " protrudes from the domain");
        } else if (g < d.required_gap) {
            d.problems.push_back("obstacle " + std::to_string(i) + " is " + std::to_string(g) +
                                 " from the domain boundary (minimum " + std::to_string(d.required_gap) + ")");
        }
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const Curve& a = s.obstacles[i].curve;
            const Curve& b = s.obstacles[j].curve;
            bool overlap = false;
            for (int q = 0; q < 64 && !overlap; ++q) {
                if (inside_curve(a, b.position(kTwoPi * q / 64)) || inside_curve(b, a.position(kTwoPi * q / 64)))
                    overlap = true;
            }
            const double g = overlap ? 0.0 : curve_distance(a, b);
            d.min_obstacle_gap = std::min(d.min_obstacle_gap, g);
            if (overlap)
                d.problems.push_back("obstacles " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
            else if (g < d.required_gap)
                d.problems.push_back("obstacles " + std::to_string(i) + " and " + std::to_string(j) + " are " +
                                     std::to_string(g) + " apart (minimum " + std::to_string(d.required_gap) + ")");
        }
    return d;
}

ScenarioDiagnostics validate_scenario(const Scenario& s) {
    auto d = diagnose_scenario(s);
    if (!d.valid()) {
        std::string msg = "invalid scenario: ";
        for (std::size_t i = 0; i < d.problems.size(); ++i) msg += (i ? "; " : "") + d.problems[i];
        throw InvalidScenarioError(msg);
    }
    return d;
}

std::string scenario_canonical(const Scenario& s) {
    std::ostringstream os;
    os.precision(17);
    auto curve = [&](const Curve& c) {
        os << to_string(c.kind()) << "[" << c.center().x() << "," << c.center().y();
        for (double p : c.params()) os << "," << p;
        for (const auto& v : c.vertices()) os << "," << v.x() << "," << v.y();
        os << "]";
    };
    os << "domain=";
    curve(s.domain);
    for (const auto& o : s.obstacles) {
        os << ";obstacle=" << to_string(o.bc) << ":";
        curve(o.curve);
    }
    os << ";k=" << s.k << ";family=" << to_string(s.family);
    return os.str();
}

std::string scenario_fingerprint(const Scenario& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : scenario_canonical(s)) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

double distance_to_obstacles(const Scenario& s, const Vec2& p) {
    double d = std::numeric_limits<double>::infinity();
    for (const auto& o : s.obstacles) d = std::min(d, distance_to_curve(o.curve, p));
    return d;
}

bool inside_obstacle(const Scenario& s, const Vec2& p) {
    for (const auto& o : s.obstacles) {
        try {
            if (contains(o.curve, p)) return true;
        } catch (const DegeneratePointError&) {
            return true;
        }
    }
    return false;
}

// -------------------------------------------------------------------------

double Needle::length() const {
    double l = 0;
    for (size_t i = 1; i < vertices.size(); ++i) l += (vertices[i] - vertices[i - 1]).norm();
    return l;
}

Needle make_needle(const Curve& domain, std::vector<Vec2> v) {
    if (v.size() < 2) throw NeedleError("needle needs at least two vertices");
    if (distance_to_curve(domain, v.front()) > 1e-10)
        throw NeedleError("needle must start on the domain boundary, got " + fmt_point(v.front()));
    for (size_t i = 1; i < v.size(); ++i) {
        bool inside = false;
        try {
            inside = contains(domain, v[i]);
        } catch (const DegeneratePointError&) {
            inside = false;
        }
        if (!inside) throw NeedleError("needle vertex " + fmt_point(v[i]) + " is not inside the domain");
    }
    const double lmin = 1e-3 * domain.diameter();
    for (size_t i = 1; i < v.size(); ++i)
        if ((v[i] - v[i - 1]).norm() < lmin) throw NeedleError("needle segment shorter than 1e-3 x diameter");
    for (size_t i = 0; i + 1 < v.size(); ++i)
        for (size_t j = i + 2; j + 1 < v.size(); ++j)
            if (segments_intersect(v[i], v[i + 1], v[j], v[j + 1])) throw NeedleError("needle self-intersects");
    // the polyline must not leave the domain between vertices
    for (size_t i = 0; i + 1 < v.size(); ++i)
        for (int q = 1; q < 64; ++q) {
            const Vec2 p = v[i] + (v[i + 1] - v[i]) * (q / 64.0);
            bool inside = false;
            try {
                inside = contains(domain, p);
            } catch (const DegeneratePointError&) {
            }
            if (!inside) throw NeedleError("needle leaves the domain near " + fmt_point(p));
        }
    return Needle{std::move(v)};
}

Needle build_needle(const Curve& domain, const Vec2& x, const Vec2& direction) {
    bool inside = false;
    try {
        inside = contains(domain, x);
    } catch (const DegeneratePointError&) {
    }
    if (!inside) throw NeedleError("needle tip " + fmt_point(x) + " is not inside the domain");
    const Vec2 u = direction.normalized();
    const double step = domain.diameter() / 256.0;
    auto in = [&](double s) {
        try {
            return contains(domain, x + s * u);
        } catch (const DegeneratePointError&) {
            return false;
        }
    };
    double a = 0, b = step;
    while (in(b)) {
        a = b;
        b += step;
        if (b > 4 * domain.diameter()) throw NeedleError("ray does not leave the domain");
    }
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double m = 0.5 * (a + b);
        if (in(m)) a = m;
        else b = m;
    }
    const Vec2 hit = x + 0.5 * (a + b) * u;
    const Vec2 entry = project_to_curve(domain, hit).point;
    return make_needle(domain, {entry, x});
}

Needle build_needle(const Curve& domain, const Vec2& x, double angle) {
    return build_needle(domain, x, Vec2(std::cos(angle), std::sin(angle)));
}

Needle build_needle_from_parameter(const Curve& domain, const Vec2& x, double t) {
    return make_needle(domain, {domain.position(t), x});
}

Needle build_radial_needle(const Curve& domain, const Vec2& x) {
    const auto pr = project_to_curve(domain, x);
    return make_needle(domain, {pr.point, x});
}

double distance_to_segment(const Vec2& p, const Vec2& a, const Vec2& b) {
    const Vec2 ab = b - a;
    const double l2 = ab.squaredNorm();
    double t = l2 > 0 ? (p - a).dot(ab) / l2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (p - (a + t * ab)).norm();
}

double distance_to_needle(const Vec2& p, const Needle& needle) {
    double d = std::numeric_limits<double>::infinity();
    const auto& v = needle.vertices;
    if (v.size() == 1) return (p - v[0]).norm();
    for (size_t i = 0; i + 1 < v.size(); ++i) d = std::min(d, distance_to_segment(p, v[i], v[i + 1]));
    return d;
}

double entry_angle(const Needle& needle) {
    const Vec2 d = needle.entry() - needle.tip();
    return std::atan2(d.y(), d.x());
}

void gauss_legendre(int n, std::vector<double>& x, std::vector<double>& w) {
    x.assign(n, 0.0);
    w.assign(n, 0.0);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5)), pp = 0;
        for (int it = 0; it < 100; ++it) {
            double p1 = 1, p2 = 0;
            for (int j = 1; j <= n; ++j) {
                const double p3 = p2;
                p2 = p1;
                p1 = ((2.0 * j - 1) * z * p2 - (j - 1.0) * p3) / j;
            }
            pp = n * (z * p1 - p2) / (z * z - 1);
            const double dz = p1 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-16) break;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = w[n - 1 - i] = 2.0 / ((1 - z * z) * pp * pp);
    }
}

CurvePolygon::CurvePolygon(const Curve& curve, int M) : v_(2, M) {
    for (int j = 0; j < M; ++j) v_.col(j) = curve.position(2.0 * std::numbers::pi * j / M);
    lo_ = v_.rowwise().minCoeff();
    hi_ = v_.rowwise().maxCoeff();
}

bool CurvePolygon::contains(const Vec2& p) const {
    if (p.x() < lo_.x() || p.x() > hi_.x() || p.y() < lo_.y() || p.y() > hi_.y()) return false;
    bool in = false;
    const int M = int(v_.cols());
    for (int i = 0, j = M - 1; i < M; j = i++) {
        const double xi = v_(0, i), yi = v_(1, i), xj = v_(0, j), yj = v_(1, j);
        if ((yi > p.y()) != (yj > p.y()) && p.x() < (xj - xi) * (p.y() - yi) / (yj - yi) + xi) in = !in;
    }
    return in;
}

double CurvePolygon::distance(const Vec2& p) const {
    double d = std::numeric_limits<double>::infinity();
    const int M = int(v_.cols());
    for (int i = 0; i < M; ++i) d = std::min(d, distance_to_segment(p, v_.col(i), v_.col((i + 1) % M)));
    return d;
}

}  // namespace ips
