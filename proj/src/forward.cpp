#include "ips/forward.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "ips/bessel.hpp"
#include "ips/errors.hpp"

namespace ips {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Kernel values and normal derivatives between collocation nodes and sources.
inline double kernel(double k, const Vec2& p, const Vec2& s) { return eval_G(k, (p - s).norm()); }

inline double kernel_dn(double k, const Vec2& p, const Vec2& n, const Vec2& s) {
    const Vec2 d = p - s;
    const double r = d.norm();
    return eval_dG_dr(k, r) / r * d.dot(n);
}

std::string pattern_name(const std::vector<CondType>& p) {
    std::string s;
    for (auto t : p) s += t == CondType::Dirichlet ? 'D' : 'N';
    return s;
}

}  // namespace

// -------------------------------------------------------------------------

SourceLayout SourceLayout::build(const Curve& outer, const std::vector<Curve>& holes, const MfsSettings& s) {
    if (s.oversampling < 2) throw ConfigError("collocation must oversample the sources at least 2x");
    SourceLayout L;
    std::vector<Eigen::Matrix2Xd> src;
    auto add = [&](const Curve& c, int nodes, bool inward, const std::string& name) {
        L.grids.push_back(discretize_curve(c, nodes));
        L.names.push_back(name);
        const int ns = nodes / s.oversampling;
        const double delta0 = s.offset_factor * c.diameter();
        // Sources on gamma(t +- i tau); tau converts the offset with the mean speed.
        double mean_speed = 0;
        for (int j = 0; j < 256; ++j) mean_speed += c.speed(kTwoPi * j / 256) / 256;
        double tau = delta0 / mean_speed;
        Eigen::Matrix2Xd q(2, ns);
        for (int attempt = 0; attempt < 20; ++attempt) {
            bool ok = true;
            for (int j = 0; j < ns; ++j) {
                const double t = kTwoPi * j / ns;
                const Vec2 p = s.placement == SourcePlacement::Continued
                                   ? c.continued_position(t, inward ? tau : -tau)
                                   : c.position(t) + (inward ? -1.0 : 1.0) * tau * mean_speed * c.normal(t);
                q.col(j) = p;
                bool in = false;
                try {
                    in = contains(c, p);
                } catch (const DegeneratePointError&) {
                    in = !inward;
                }
                if (in != inward || distance_to_curve(c, p) < 0.25 * tau * mean_speed) ok = false;
            }
            if (ok) break;
            tau *= 0.8;
        }
        src.push_back(q);
    };
    add(outer, s.outer_nodes, false, "outer");
    for (size_t i = 0; i < holes.size(); ++i) add(holes[i], s.obstacle_nodes, true, "obstacle-" + std::to_string(i));
    int total = 0;
    for (const auto& q : src) total += int(q.cols());
    L.sources.resize(2, total);
    int off = 0;
    for (const auto& q : src) {
        L.source_begin.push_back(off);
        L.sources.middleCols(off, q.cols()) = q;
        off += int(q.cols());
    }
    L.source_begin.push_back(off);
    return L;
}

int SourceLayout::total_nodes() const {
    int n = 0;
    for (const auto& g : grids) n += g.size();
    return n;
}

MfsSpace::MfsSpace(double k_in, SourceLayout L) : k(k_in), layout(std::move(L)) {
    const auto& S = layout.sources;
    for (const auto& g : layout.grids) {
        Eigen::MatrixXd V(g.size(), S.cols()), N(g.size(), S.cols());
        for (int i = 0; i < g.size(); ++i) {
            const Vec2 p = g.nodes.col(i), n = g.normals.col(i);
            for (int j = 0; j < S.cols(); ++j) {
                V(i, j) = kernel(k, p, S.col(j));
                N(i, j) = kernel_dn(k, p, n, S.col(j));
            }
        }
        value.push_back(std::move(V));
        normal.push_back(std::move(N));
    }
}

// -------------------------------------------------------------------------

ForwardSolution::ForwardSolution(std::shared_ptr<const MfsSpace> space, Eigen::VectorXd coef)
    : space_(std::move(space)), coef_(std::move(coef)) {}

double ForwardSolution::value(const Vec2& p) const {
    if (!space_) return 0.0;
    double u = 0;
    const auto& S = space_->layout.sources;
    for (int j = 0; j < S.cols(); ++j) u += coef_[j] * kernel(space_->k, p, S.col(j));
    return u;
}

Vec2 ForwardSolution::grad(const Vec2& p) const {
    if (!space_) return Vec2::Zero();
    Vec2 g = Vec2::Zero();
    const auto& S = space_->layout.sources;
    for (int j = 0; j < S.cols(); ++j) {
        const Vec2 d = p - S.col(j);
        const double r = d.norm();
        g += coef_[j] * eval_dG_dr(space_->k, r) / r * d;
    }
    return g;
}

ScalarField ForwardSolution::field() const {
    auto self = *this;
    return {[self](const Vec2& p) { return self.value(p); }, [self](const Vec2& p) { return self.grad(p); }};
}

Eigen::VectorXd ForwardSolution::trace(int c) const { return space_->value.at(c) * coef_; }

Eigen::VectorXd ForwardSolution::normal_derivative(int c) const { return space_->normal.at(c) * coef_; }

ForwardSolution ForwardSolution::operator+(const ForwardSolution& o) const {
    if (!space_) return o;
    if (!o.space_) return *this;
    if (space_ != o.space_) throw ConfigError("adding solutions on different source layouts");
    return ForwardSolution(space_, coef_ + o.coef_);
}

ForwardSolution ForwardSolution::operator-(const ForwardSolution& o) const { return *this + o * -1.0; }

ForwardSolution ForwardSolution::operator*(double a) const {
    if (!space_) return *this;
    return ForwardSolution(space_, coef_ * a);
}

// -------------------------------------------------------------------------

MfsFactorization::MfsFactorization(std::shared_ptr<const MfsSpace> space, std::vector<CondType> pattern,
                                   const MfsSettings& s)
    : space_(std::move(space)), pattern_(std::move(pattern)), settings_(s) {
    const auto& L = space_->layout;
    if (int(pattern_.size()) != L.components())
        throw ConfigError("condition pattern has " + std::to_string(pattern_.size()) + " entries for " +
                          std::to_string(L.components()) + " boundary components");
    const int rows = L.total_nodes();
    const int cols = int(L.sources.cols());
    A_.resize(rows, cols);
    row_scale_.resize(rows);
    int r = 0;
    for (int c = 0; c < L.components(); ++c) {
        const auto& g = L.grids[c];
        const int nc = L.source_begin[c + 1] - L.source_begin[c];
        if (g.size() < 2 * nc) throw ConfigError("collocation count below 2x the source count");
        A_.middleRows(r, g.size()) = pattern_[c] == CondType::Dirichlet ? space_->value[c] : space_->normal[c];
        for (int i = 0; i < g.size(); ++i, ++r) row_scale_[r] = std::sqrt(g.weights[i]);
    }
    Eigen::MatrixXd As = row_scale_.asDiagonal() * A_;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(As, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    int keep = 0;
    while (keep < sv.size() && sv[keep] > s.svd_cutoff * sv[0]) ++keep;
    if (keep == 0) throw NearEigenvalueError("collocation matrix is numerically zero");
    U_ = svd.matrixU().leftCols(keep);
    V_ = svd.matrixV().leftCols(keep);
    S_ = sv.head(keep);
    condition_ = sv[0] / sv[keep - 1];
    raw_condition_ = sv[sv.size() - 1] > 0 ? sv[0] / sv[sv.size() - 1] : std::numeric_limits<double>::infinity();
    if (condition_ > s.max_condition)
        throw NearEigenvalueError("condition estimate " + std::to_string(condition_) + " for pattern " +
                                  pattern_name(pattern_) + ": k^2 may be close to an interior eigenvalue");
}

ForwardSolution MfsFactorization::solve(const BvpSpec& spec) const {
    const auto& L = space_->layout;
    if (int(spec.conditions.size()) != L.components())
        throw ConfigError("boundary value problem needs one condition per component");
    Eigen::VectorXd b(A_.rows());
    int r = 0;
    for (int c = 0; c < L.components(); ++c) {
        const auto& cond = spec.conditions[c];
        if (cond.type != pattern_[c]) throw ConfigError("condition type does not match the factorization");
        if (cond.data.size() != L.grids[c].size()) throw ConfigError("boundary data size mismatch on " + L.names[c]);
        b.segment(r, cond.data.size()) = cond.data;
        r += int(cond.data.size());
    }
    const Eigen::VectorXd bs = row_scale_.cwiseProduct(b);
    Eigen::VectorXd coef = V_ * (U_.transpose() * bs).cwiseQuotient(S_);
    ForwardSolution sol(space_, coef);
    const Eigen::VectorXd res = A_ * coef - b;
    const double bmax = b.cwiseAbs().maxCoeff();
    const double scale = std::max({bmax, spec.scale, 1e-300});
    r = 0;
    double worst = 0;
    int worst_c = 0;
    for (int c = 0; c < L.components(); ++c) {
        const int n = L.grids[c].size();
        const double rc = std::max(bmax, spec.scale) > 0 ? res.segment(r, n).cwiseAbs().maxCoeff() / scale : 0.0;
        sol.residuals.push_back(rc);
        if (rc > worst) {
            worst = rc;
            worst_c = c;
        }
        r += n;
    }
    sol.condition = condition_;
    sol.warning = worst > settings_.warn_residual;
    if (worst > settings_.hard_residual) {
        std::ostringstream os;
        os << "boundary residual " << worst << " on " << L.names[worst_c] << " exceeds " << settings_.hard_residual;
        throw NonconvergenceError(os.str());
    }
    return sol;
}

// -------------------------------------------------------------------------

ForwardModel::ForwardModel(const Curve& outer, const std::vector<Curve>& holes, double k, MfsSettings s)
    : k_(k), settings_(s) {
    if (k < 0) throw ConfigError("wavenumber must be >= 0");
    space_ = std::make_shared<MfsSpace>(k, SourceLayout::build(outer, holes, s));
}

std::shared_ptr<ForwardModel> ForwardModel::for_scenario(const Scenario& sc, MfsSettings s) {
    std::vector<Curve> holes;
    for (const auto& o : sc.obstacles) holes.push_back(o.curve);
    return std::make_shared<ForwardModel>(sc.domain, holes, sc.k, s);
}

std::shared_ptr<ForwardModel> ForwardModel::obstacle_free(const Scenario& sc, MfsSettings s) {
    return std::make_shared<ForwardModel>(sc.domain, std::vector<Curve>{}, sc.k, s);
}

const MfsFactorization& ForwardModel::factorization(const std::vector<CondType>& pattern) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = cache_.find(pattern);
    if (it == cache_.end())
        it = cache_.emplace(pattern, std::make_shared<MfsFactorization>(space_, pattern, settings_)).first;
    return *it->second;
}

int ForwardModel::factorizations_built() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return int(cache_.size());
}

ForwardSolution ForwardModel::solve(const BvpSpec& spec) const {
    std::vector<CondType> pattern;
    for (const auto& c : spec.conditions) pattern.push_back(c.type);
    return factorization(pattern).solve(spec);
}

Eigen::VectorXd ForwardModel::dirichlet_data(int c, const ScalarField& f) const {
    const auto& g = space_->layout.grids.at(c);
    Eigen::VectorXd v(g.size());
    for (int i = 0; i < g.size(); ++i) v[i] = f.value(g.nodes.col(i));
    return v;
}

Eigen::VectorXd ForwardModel::neumann_data(int c, const ScalarField& f) const {
    const auto& g = space_->layout.grids.at(c);
    Eigen::VectorXd v(g.size());
    for (int i = 0; i < g.size(); ++i) v[i] = f.grad(g.nodes.col(i)).dot(g.normals.col(i));
    return v;
}

Eigen::VectorXd ForwardModel::zero_data(int c) const {
    return Eigen::VectorXd::Zero(space_->layout.grids.at(c).size());
}

// -------------------------------------------------------------------------

TraceSpace::TraceSpace(const BoundaryGrid& grid, int J) : grid_(grid), J_(J) {
    if (J < 0) throw ConfigError("trace order must be >= 0");
    if (grid.size() <= 2 * J) throw ConfigError("boundary grid too coarse for trace order " + std::to_string(J));
    const int M = grid.size();
    E_.resize(M, size());
    for (int i = 0; i < M; ++i) {
        const double t = grid.t[i];
        E_(i, 0) = 1.0;
        for (int j = 1; j <= J; ++j) {
            E_(i, 2 * j - 1) = std::cos(j * t);
            E_(i, 2 * j) = std::sin(j * t);
        }
    }
    gram_ = E_.transpose() * grid.weights.asDiagonal() * E_;
    gram_ = 0.5 * (gram_ + gram_.transpose());
    gram_llt_.compute(gram_);
}

Eigen::VectorXd TraceSpace::coefficients(const Eigen::VectorXd& nodal) const {
    if (nodal.size() != grid_.size()) throw ConfigError("nodal trace has the wrong length");
    const Eigen::VectorXd b = E_.transpose() * grid_.weights.cwiseProduct(nodal);
    return gram_llt_.solve(b);
}

Eigen::VectorXd TraceSpace::coefficients(const ScalarField& f) const {
    Eigen::VectorXd v(grid_.size());
    for (int i = 0; i < grid_.size(); ++i) v[i] = f.value(grid_.nodes.col(i));
    return coefficients(v);
}

// -------------------------------------------------------------------------

DtNMatrix assemble_dn_single(const ForwardModel& model, const std::vector<CondType>& obstacle_types, int J,
                             const std::string& fingerprint) {
    const auto& L = model.layout();
    if (int(obstacle_types.size()) + 1 != L.components()) throw ConfigError("obstacle condition count mismatch");
    const TraceSpace space(L.grids[0], J);
    const int n = space.size();
    std::vector<CondType> pattern{CondType::Dirichlet};
    pattern.insert(pattern.end(), obstacle_types.begin(), obstacle_types.end());
    const auto& fac = model.factorization(pattern);
    DtNMatrix dn;
    dn.k = model.k();
    dn.J = J;
    dn.scenario_fingerprint = fingerprint;
    dn.matrix.resize(n, n);
    const auto& w = L.grids[0].weights;
    double rmax = 0, rsum = 0;
    for (int i = 0; i < n; ++i) {
        BvpSpec spec;
        spec.conditions.push_back({CondType::Dirichlet, space.E().col(i)});
        for (int c = 1; c < L.components(); ++c) spec.conditions.push_back({pattern[c], model.zero_data(c)});
        const auto sol = fac.solve(spec);
        const Eigen::VectorXd dudn = sol.normal_derivative(0);
        dn.matrix.col(i) = space.E().transpose() * w.cwiseProduct(dudn);
        double r = 0;
        for (double x : sol.residuals) r = std::max(r, x);
        rmax = std::max(rmax, r);
        rsum += r;
    }
    dn.residual_stats = {rmax, rsum / n};
    return dn;
}

std::vector<CondType> obstacle_condition_types(const Scenario& sc) {
    std::vector<CondType> types;
    for (const auto& o : sc.obstacles) types.push_back(o.bc == BC::Dirichlet ? CondType::Dirichlet : CondType::Neumann);
    return types;
}

DtNPair assemble_dn(const Scenario& sc, const ForwardModel& model, const ForwardModel& free_model, int J) {
    const std::string fp = scenario_fingerprint(sc);
    return {assemble_dn_single(model, obstacle_condition_types(sc), J, fp), assemble_dn_single(free_model, {}, J, fp)};
}

DtNPair assemble_dn(const Scenario& sc, int J, const MfsSettings& s) {
    auto model = ForwardModel::for_scenario(sc, s);
    auto free = ForwardModel::obstacle_free(sc, s);
    return assemble_dn(sc, *model, *free, J);
}

double dn_symmetry_residual(const Eigen::MatrixXd& M) {
    const double mx = M.cwiseAbs().maxCoeff();
    if (mx == 0) return 0.0;
    return (M - M.transpose()).cwiseAbs().maxCoeff() / mx;
}

double annulus_oracle(double rho, BC bc, double k, int n) {
    if (!(rho > 0 && rho < 1)) throw DomainError("annulus inner radius must lie in (0, 1)");
    if (n < 0) throw DomainError("negative Fourier mode");
    if (k == 0.0) {
        if (bc == BC::Dirichlet) {
            if (n == 0) return 1.0 / std::log(1.0 / rho);
            const double q = std::pow(rho, 2 * n);
            return n * (1 + q) / (1 - q);
        }
        if (n == 0) return 0.0;
        const double q = std::pow(rho, 2 * n);
        return n * (1 - q) / (1 + q);
    }
    const auto ja = bessel::jn_all(n + 1, k), jb = bessel::jn_all(n + 1, k * rho);
    const auto ya = bessel::yn_all(n + 1, k), yb = bessel::yn_all(n + 1, k * rho);
    auto dj = [](const std::vector<double>& v, int m) { return m == 0 ? -v[1] : 0.5 * (v[m - 1] - v[m + 1]); };
    double num, den, mag;
    if (bc == BC::Dirichlet) {
        den = ja[n] * yb[n] - ya[n] * jb[n];
        mag = std::abs(ja[n] * yb[n]) + std::abs(ya[n] * jb[n]);
        num = k * (dj(ja, n) * yb[n] - dj(ya, n) * jb[n]);
    } else {
        den = ja[n] * dj(yb, n) - ya[n] * dj(jb, n);
        mag = std::abs(ja[n] * dj(yb, n)) + std::abs(ya[n] * dj(jb, n));
        num = k * (dj(ja, n) * dj(yb, n) - dj(ya, n) * dj(jb, n));
    }
    if (std::abs(den) < 1e-12 * mag)
        throw ResonanceError("annulus resonance at mode " + std::to_string(n) + " for k = " + std::to_string(k));
    return num / den;
}

double disk_oracle(double k, int n) {
    if (n < 0) throw DomainError("negative Fourier mode");
    if (k == 0.0) return double(n);
    const double j = bessel::jn(n, k);
    // Relative to the neighbouring orders: J_n(k) itself is tiny for n >> k.
    const double mag = std::abs(bessel::jn(n + 1, k)) + (n > 0 ? std::abs(bessel::jn(n - 1, k)) : 0.0);
    if (std::abs(j) < 1e-12 * mag) throw ResonanceError("disk resonance at mode " + std::to_string(n) + " for k = " + std::to_string(k));
    return k * bessel::jn_prime(n, k) / j;
}

// -------------------------------------------------------------------------

DnPairing::DnPairing(const DtNPair& dn, const BoundaryGrid& outer)
    : space_(outer, dn.lambda_D.J), MD_(dn.lambda_D.matrix), M0_(dn.lambda_0.matrix), diff_(M0_ - MD_) {
    if (dn.lambda_D.J != dn.lambda_0.J) throw ConfigError("DN matrices use different trace orders");
    if (MD_.rows() != space_.size() || M0_.rows() != space_.size()) throw ConfigError("DN matrix size mismatch");
}

// -------------------------------------------------------------------------

double SingularSolution::value(const Vec2& y) const {
    const double g = eval_G(k, (y - x).norm());
    return family == Family::G0 ? g : g + H.value(y);
}

Vec2 SingularSolution::grad(const Vec2& y) const {
    const Vec2 g = eval_grad_G(k, x, y);
    return family == Family::G0 ? g : Vec2(g + H.grad(y));
}

ScalarField SingularSolution::field() const {
    auto self = *this;
    return {[self](const Vec2& y) { return self.value(y); }, [self](const Vec2& y) { return self.grad(y); }};
}

SingularSolution singular_solution(const ForwardModel& free_model, const Vec2& x, Family family) {
    SingularSolution s{free_model.k(), x, family, {}};
    if (family == Family::Gstar) {
        if (free_model.layout().components() != 1) throw ConfigError("Green function needs the obstacle-free model");
        const auto g = fundamental_field(free_model.k(), x);
        BvpSpec spec;
        spec.conditions.push_back({CondType::Dirichlet, -free_model.dirichlet_data(0, g)});
        s.H = free_model.solve(spec);
    }
    return s;
}

ScalarField greens_star(const ForwardModel& free_model, const Vec2& x) {
    return singular_solution(free_model, x, Family::Gstar).field();
}

}  // namespace ips
