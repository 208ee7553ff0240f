#pragma once

#include <memory>
#include <string>
#include <vector>

#include "ips/forward.hpp"
#include "ips/needles.hpp"

namespace ips {

// Everything a computation shares: the scenario, forward models and DN data. A blind
// context knows only the outer domain plus the two DN matrices.
struct Context {
    Scenario scenario;
    int J = 48;
    MfsSettings mfs;
    std::shared_ptr<ForwardModel> model;       // null when blind
    std::shared_ptr<ForwardModel> free_model;  // obstacle-free domain
    DtNPair dn;
    std::shared_ptr<DnPairing> pairing;

    bool blind() const { return !model; }
    const Curve& domain() const { return scenario.domain; }
    double k() const { return scenario.k; }

    // Validates the scenario, builds the models and assembles both DN matrices.
    static Context build(const Scenario& sc, int J = 48, const MfsSettings& s = {});
    // Ground-truth context that reuses DN matrices read from disk.
    static Context with_dn(const Scenario& sc, const DtNPair& dn, const MfsSettings& s = {});
    // Probe-only context: obstacles are dropped, only the DN matrices carry them.
    static Context blind_from(const Scenario& sc, const DtNPair& dn, const MfsSettings& s = {});
};

// Boundary energies. Orientation: the outer curve counts positively, obstacle boundaries
// negatively, with nu the outward normal of D on the obstacle grids.
double exterior_energy(const ForwardSolution& u);
// sum over obstacles with the given condition of the integral of f df/dnu over their boundary.
double obstacle_energy(const ForwardModel& model, const Scenario& sc, const ScalarField& f, BC which);
// Integral over the outer curve of f dg/dnu.
double outer_flux(const ForwardModel& model, const ScalarField& f, const ScalarField& g);
double outer_flux(const ForwardModel& model, const ScalarField& f, const ForwardSolution& g);

// The reflected solutions built from a source field f (G(., x) or a regular v):
//   W    : dW/dnu = -df/dnu on D_n, W = -f on D_d, W = f on the outer curve
//   w    : as W with zero outer data
//   w1   : homogeneous on D (Neumann on D_n, Dirichlet on D_d), f on the outer curve
//   eps_n: Dirichlet problem, 0 on D_n, f on D_d, 0 outside
//   eps_d: Neumann df/dnu on D_n, Neumann 0 on D_d, Dirichlet 0 outside
struct AuxiliarySolutions {
    ForwardSolution W, w, w1, eps_n, eps_d;
};

AuxiliarySolutions solve_auxiliary(const ForwardModel& model, const Scenario& sc, const ScalarField& f,
                                   bool with_W = true);

// The two energy expressions for W_x(x) (Neumann-focused and Dirichlet-focused forms).
struct IpsDecomposition {
    Vec2 x;
    Family family;
    double W = 0;        // direct value W_x(x)
    double neumann = 0;  // Neumann-focused expression
    double dirichlet = 0;
    double w = 0, w1 = 0;  // w_x(x), w_x^1(x)
};

struct DirectIndicator {
    Vec2 x;
    Family family;
    double value = 0;        // W_x(x) - <Lambda_D G, G> + int dG/dnu G
    double alternative = 0;  // w_x(x) - int dw_x/dnu G
    double W = 0, w = 0, w1 = 0;
    double lambda_D_GG = 0;  // by quadrature of dw1/dnu
};

// Minimum distance from x to the outer boundary and to the obstacles for direct evaluation.
inline constexpr double kProximityLimit = 0.02;

void check_probe_point(const Context& ctx, const Vec2& x, double limit = kProximityLimit);
DirectIndicator indicator_direct(const Context& ctx, const Vec2& x, Family family);
IpsDecomposition ips_decompositions(const Context& ctx, const Vec2& x, Family family);
// <Lambda_D G, G> from the DN matrix minus the boundary flux of G.
double i1(const Context& ctx, const Vec2& x, Family family);

// Trace coefficients of a field on the outer curve in the DN basis.
Eigen::VectorXd trace_coefficients(const Context& ctx, const ScalarField& f);
// <(Lambda_0 - Lambda_D) v, v>.
double indicator_term(const Context& ctx, const NeedleFunction& v);
double indicator_term(const DnPairing& pairing, const NeedleFunction& v);

struct ProbeOptions {
    NeedleParams needle = NeedleParams::probing();
    bool richardson = false;
    double tolerance = 1e-3;
};

struct IndicatorEstimate {
    double value = 0;
    std::vector<int> orders;
    std::vector<double> terms;
    bool converged = false;
    double relative_change = 0;
    Needle needle;
    Family family = Family::G0;
    std::vector<FitDiagnostics> fits;
};

// Richardson-type extrapolation of three terms at increasing orders assuming
// J_n = J + c n^-p; falls back to the last term when no exponent fits.
double extrapolate(const std::vector<int>& orders, const std::vector<double>& terms);

IndicatorEstimate probe(const Context& ctx, const Needle& needle, const ProbeOptions& opt);

struct LiftedEstimate {
    double value = 0;
    std::vector<double> terms;
    std::vector<int> orders;
};

// <(Lambda_0 - Lambda_D) v_n, v'_n> for needle sequences at x and at y.
LiftedEstimate lifted_indicator(const Context& ctx, const Needle& nx, const Needle& ny, const ProbeOptions& opt);
// Ground truth w_x(y) - int dw_x/dnu G(., y).
double lifted_direct(const Context& ctx, const Vec2& x, const Vec2& y, Family family);

// Combining W_x = w_x + w_x^1 with the symmetrised lifting gives
// w_x(y) - w_x^1(y) = w_y(x) - w_y^1(x) for G0 and Gstar.
struct TwistedSymmetry {
    double lhs = 0;  // w_x(y) - w_x^1(y)
    double rhs = 0;  // w_y(x) - w_y^1(x)
};
TwistedSymmetry twisted_symmetry(const Context& ctx, const Vec2& x, const Vec2& y, Family family);

struct SourcesEstimate {
    double pairing_route = 0;   // -<(L0 - LD) v, G - v>
    double identity_route = 0;  // (J[v] + J[G - v] - J[G]) / 2
    std::vector<double> pairing_terms, identity_terms;
    std::vector<int> orders;
    double J_G = 0;  // <(L0 - LD) G, G>
};

SourcesEstimate sources_indicator(const Context& ctx, const Needle& needle, const ProbeOptions& opt);
// w^0_x(x) and the combination (I^0 + I^* - <(L0 - LD) G, G>)/2 from direct indicators.
struct SourcesDirect {
    double w0 = 0;
    double combination = 0;
};
SourcesDirect sources_direct(const Context& ctx, const Vec2& x);

// Max absolute value of w_x^1 on all boundary nodes (zero for the Green-function family).
double w1_trace_norm(const Context& ctx, const Vec2& x, Family family);
// L2 norm of the trace of w_x over the obstacle boundaries.
double reflected_trace_norm(const Context& ctx, const Vec2& x, Family family);

// ---------------------------------------------------------------------------
// Grid classification

enum class Label { NeumannNear, DirichletNear, Background, Unresolved };
std::string to_string(Label l);

enum class NeedleStrategy { Radial, Fan };
std::string to_string(NeedleStrategy s);
NeedleStrategy needle_strategy_from_string(const std::string& s);

struct GridSpec {
    int nx = 40, ny = 40;
    double margin = 0.05;
};

struct ClassifyOptions {
    GridSpec grid;
    NeedleStrategy strategy = NeedleStrategy::Radial;
    ProbeOptions probe;
    int threads = 1;
    // Thresholds: fixed when positive, else factor times the median |value|.
    double T = -1, B = -1;
    double T_factor = 5.0, B_factor = 2.0;
};

struct FieldPoint {
    Vec2 x;
    double value = 0;
    bool converged = false;
    bool failed = false;
    Label label = Label::Unresolved;
    double entry_angle = 0;
    std::string error;
    std::vector<double> terms;
};

struct IndicatorField {
    std::vector<FieldPoint> points;
    double median_abs = 0;
    double T = 0, B = 0;
};

std::vector<Vec2> grid_points(const Curve& domain, const GridSpec& g);
IndicatorField classify_field(const Context& ctx, const ClassifyOptions& opt);
// Applies the threshold rules to already probed points.
void label_field(IndicatorField& field, const ClassifyOptions& opt);

struct LabelScore {
    int truth = 0;      // points whose ground truth is this label
    int predicted = 0;  // points given this label
    int correct = 0;
    double precision() const { return predicted ? double(correct) / predicted : 1.0; }
    double recall() const { return truth ? double(correct) / truth : 1.0; }
};

struct FieldScore {
    LabelScore neumann, dirichlet, background;
    int far_points = 0;             // outside D with distance >= far_distance
    int far_obstacle_labels = 0;    // of those, labelled obstacle-near
    int unresolved = 0;
    int total = 0;
    double near_distance = 0.05;
    double far_distance = 0.2;
};

// Ground truth: within near_distance of an obstacle boundary (on either side) is near
// that obstacle's type; outside D at distance >= far_distance is background.
FieldScore score_field(const IndicatorField& field, const Scenario& truth, double near_distance = 0.05,
                       double far_distance = 0.2);

}  // namespace ips
