#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "ips/basis.hpp"
#include "ips/geometry.hpp"

namespace ips {

enum class CondType { Dirichlet, Neumann };

enum class SourcePlacement {
    Continued,  // gamma(t +- i tau), tau = offset / mean speed
    Normal,     // gamma(t) +- offset * normal
};

struct MfsSettings {
    int outer_nodes = 400;
    int obstacle_nodes = 480;
    // Sources per component = nodes / oversampling.
    int oversampling = 2;
    double offset_factor = 0.12;  // times component diameter
    SourcePlacement placement = SourcePlacement::Continued;
    double svd_cutoff = 1e-12;
    double warn_residual = 1e-8;
    double hard_residual = 1e-4;
    double max_condition = 1e14;
};

// Boundary components of Omega \ D: index 0 is the outer curve, then the obstacles in order.
struct SourceLayout {
    std::vector<BoundaryGrid> grids;
    std::vector<std::string> names;
    Eigen::Matrix2Xd sources;
    std::vector<int> source_begin;  // per component, plus a final end marker

    static SourceLayout build(const Curve& outer, const std::vector<Curve>& holes, const MfsSettings& s);
    int components() const { return int(grids.size()); }
    int total_nodes() const;
};

// Layout plus the kernel matrices (nodes x sources) of every component at wavenumber k.
struct MfsSpace {
    double k = 0.0;
    SourceLayout layout;
    std::vector<Eigen::MatrixXd> value;
    std::vector<Eigen::MatrixXd> normal;

    MfsSpace(double k, SourceLayout layout);
};

struct Condition {
    CondType type;
    Eigen::VectorXd data;  // at the nodes of the component grid
};

struct BvpSpec {
    std::vector<Condition> conditions;  // one per component of the layout
    // Lower bound for the residual normalisation; data that is pure rounding noise
    // is judged against the size of the field it came from.
    double scale = 0.0;
};

// Superposition of fundamental solutions. Cheap to copy: the layout is shared.
class ForwardSolution {
public:
    ForwardSolution() = default;
    ForwardSolution(std::shared_ptr<const MfsSpace> space, Eigen::VectorXd coef);

    double value(const Vec2& p) const;
    Vec2 grad(const Vec2& p) const;
    ScalarField field() const;

    // u and du/dnu at the nodes of component c (nu = the grid normal).
    Eigen::VectorXd trace(int c) const;
    Eigen::VectorXd normal_derivative(int c) const;

    ForwardSolution operator+(const ForwardSolution& o) const;
    ForwardSolution operator-(const ForwardSolution& o) const;
    ForwardSolution operator*(double a) const;

    const Eigen::VectorXd& coefficients() const { return coef_; }
    const SourceLayout& layout() const { return space_->layout; }
    double k() const { return space_->k; }
    bool empty() const { return !space_; }

    std::vector<double> residuals;  // relative, per component
    double condition = 0.0;
    bool warning = false;

private:
    std::shared_ptr<const MfsSpace> space_;
    Eigen::VectorXd coef_;
};

// Truncated SVD of the collocation matrix for one condition-type pattern.
class MfsFactorization {
public:
    MfsFactorization(std::shared_ptr<const MfsSpace> space, std::vector<CondType> pattern, const MfsSettings& s);
    ForwardSolution solve(const BvpSpec& spec) const;
    const std::vector<CondType>& pattern() const { return pattern_; }
    double condition() const { return condition_; }
    double raw_condition() const { return raw_condition_; }

private:
    std::shared_ptr<const MfsSpace> space_;
    std::vector<CondType> pattern_;
    MfsSettings settings_;
    Eigen::MatrixXd A_;  // unscaled, for residuals
    Eigen::VectorXd row_scale_;
    Eigen::MatrixXd U_, V_;
    Eigen::VectorXd S_;
    double condition_ = 0, raw_condition_ = 0;
};

// Region plus wavenumber, caching one factorization per condition-type pattern.
class ForwardModel {
public:
    ForwardModel(const Curve& outer, const std::vector<Curve>& holes, double k, MfsSettings s = {});
    static std::shared_ptr<ForwardModel> for_scenario(const Scenario& sc, MfsSettings s = {});
    static std::shared_ptr<ForwardModel> obstacle_free(const Scenario& sc, MfsSettings s = {});

    ForwardSolution solve(const BvpSpec& spec) const;
    const MfsFactorization& factorization(const std::vector<CondType>& pattern) const;

    const SourceLayout& layout() const { return space_->layout; }
    std::shared_ptr<const MfsSpace> space() const { return space_; }
    double k() const { return k_; }
    const MfsSettings& settings() const { return settings_; }
    int factorizations_built() const;

    // Dirichlet or Neumann data of a field on component c.
    Eigen::VectorXd dirichlet_data(int c, const ScalarField& f) const;
    Eigen::VectorXd neumann_data(int c, const ScalarField& f) const;
    Eigen::VectorXd zero_data(int c) const;

private:
    double k_;
    MfsSettings settings_;
    std::shared_ptr<const MfsSpace> space_;
    mutable std::mutex mutex_;
    mutable std::map<std::vector<CondType>, std::shared_ptr<MfsFactorization>> cache_;
};

// Trigonometric trace basis {1, cos jt, sin jt}, j <= J, on the outer curve, with the
// surface-measure Gram matrix for projections.
class TraceSpace {
public:
    TraceSpace(const BoundaryGrid& grid, int J);
    int J() const { return J_; }
    int size() const { return 2 * J_ + 1; }
    const Eigen::MatrixXd& E() const { return E_; }  // nodes x size
    const BoundaryGrid& grid() const { return grid_; }
    // Coefficients of the L2(dS) projection of nodal values.
    Eigen::VectorXd coefficients(const Eigen::VectorXd& nodal) const;
    Eigen::VectorXd coefficients(const ScalarField& f) const;
    const Eigen::MatrixXd& gram() const { return gram_; }

private:
    BoundaryGrid grid_;
    int J_;
    Eigen::MatrixXd E_, gram_;
    Eigen::LLT<Eigen::MatrixXd> gram_llt_;
};

struct ResidualStats {
    double max = 0.0;
    double mean = 0.0;
};

struct DtNMatrix {
    double k = 0.0;
    int J = 0;
    std::string basis = "trig";
    Eigen::MatrixXd matrix;  // M(j, i) = <Lambda e_i, e_j>
    std::string scenario_fingerprint;
    ResidualStats residual_stats;

    // <Lambda f, g> for coefficient vectors.
    double pairing(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const { return g.dot(matrix * f); }
};

struct DtNPair {
    DtNMatrix lambda_D;
    DtNMatrix lambda_0;
};

DtNMatrix assemble_dn_single(const ForwardModel& model, const std::vector<CondType>& obstacle_types, int J,
                             const std::string& fingerprint);
DtNPair assemble_dn(const Scenario& sc, int J = 48, const MfsSettings& s = {});
DtNPair assemble_dn(const Scenario& sc, const ForwardModel& model, const ForwardModel& free_model, int J = 48);
std::vector<CondType> obstacle_condition_types(const Scenario& sc);

double dn_symmetry_residual(const Eigen::MatrixXd& M);

// Exact DN eigenvalue of the annulus rho < r < 1 on Fourier mode n (per unit of the mode).
double annulus_oracle(double rho, BC bc, double k, int n);
// Exact DN eigenvalue of the unit disk on mode n: n at k = 0, k J_n'(k) / J_n(k) otherwise.
double disk_oracle(double k, int n);

// Trace pairing <(Lambda_0 - Lambda_D) f, g> with f, g given as fields on the outer curve.
class DnPairing {
public:
    DnPairing(const DtNPair& dn, const BoundaryGrid& outer);
    const TraceSpace& space() const { return space_; }
    Eigen::VectorXd coefficients(const Eigen::VectorXd& nodal) const { return space_.coefficients(nodal); }
    double difference(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return b.dot(diff_ * a); }
    double lambda_D(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return b.dot(MD_ * a); }
    double lambda_0(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const { return b.dot(M0_ * a); }
    const Eigen::MatrixXd& difference_matrix() const { return diff_; }

private:
    TraceSpace space_;
    Eigen::MatrixXd MD_, M0_, diff_;
};

// Dirichlet Green function of the obstacle-free domain: G(|y - x|) + H(y, x).
struct SingularSolution {
    double k;
    Vec2 x;
    Family family;
    ForwardSolution H;  // empty for G0

    double value(const Vec2& y) const;
    Vec2 grad(const Vec2& y) const;
    ScalarField field() const;
};

SingularSolution singular_solution(const ForwardModel& free_model, const Vec2& x, Family family);
ScalarField greens_star(const ForwardModel& free_model, const Vec2& x);

}  // namespace ips
