#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "slef/geometry.hpp"
#include "slef/mesh.hpp"
#include "slef/slef_solver.hpp"
#include "slef/spectral.hpp"

namespace slef {

// ---------------------------------------------------------------- growth fits

enum class FitModel { pure, log_augmented };

struct GrowthFit {
    FitModel model = FitModel::pure;
    double alpha = 0.0;      // fitted, or the fixed phi
    double log_power = 0.0;  // p in (ln 2/t)^p; 0 for the pure model
    double log_c = 0.0;
    double t_min = 0.0, t_max = 0.0;
    double rms = 0.0;
    std::size_t samples = 0;
};

// t strictly decreasing and geometric, >= 12 samples, u > 0.
// pure: log u = log c + alpha log t.
// log_augmented with phi_fixed: log u - phi log t = log c + p log ln(2/t);
// without phi_fixed alpha and p are both fitted.
GrowthFit fit_growth(const std::vector<double>& t, const std::vector<double>& u, FitModel model,
                     std::optional<double> phi_fixed = std::nullopt);

// t_j = t_hi 2^(-j/per_octave) down to t_lo
std::vector<double> geometric_depths(double t_hi, double t_lo, int per_octave);

// values along the ray omega (polar mesh); throws if a depth is off the mesh or
// closer to the vertex than 5 local radial steps
std::vector<double> sample_ray(const Mesh& m, const Field& u, double omega, const std::vector<double>& t);

// ---------------------------------------------------------------- recursions

struct RecursionTrace {
    std::string kind;
    double gamma = 0.0, phi = 0.0, first = 0.0, Q = 0.0, q = 0.0;
    std::size_t k_max = 0;
    std::vector<std::size_t> k;   // decimated sample indices
    std::vector<double> value;    // A_k or sigma_k at those indices
    std::vector<double> scaled;   // A_k k^(-phi/2) or sigma_k k^q / Q
    double scaled_sup = 0.0;
    double scaled_final = 0.0;
    double predicted_limit = 0.0;
    bool increasing = true;
    bool tail_monotone = true;  // scaled tail monotone over the last half (in k)
    double closed_form_error = 0.0;  // geometric mode only
};

// A_{k+1} = A_k + A_k^-gamma + k^(-gamma phi/2), phi = 2/(1+gamma)
RecursionTrace ak_recursion(double gamma, double a1, std::size_t k_max);
// c phi/2 = c^-gamma + 1
double ak_limit(double gamma);

enum class SigmaMode { geometric, harmonic };
RecursionTrace sigma_recursion(double Q, double q, SigmaMode mode, std::size_t k_max);

// ---------------------------------------------------------------- interior improvement

struct ImprovementReport {
    double t = 0.0;
    double c_est = 0.0;   // min over |X| <= 1/2 of (1 - u)/t
    double center = 0.0;  // (1 - u(0))/t
};

// -Delta u = -t u in the disk mesh, u = 1 on the boundary
ImprovementReport interior_improvement(double t, const Mesh& disk);
// the same for the continuous disk: (1 - I0(sqrt(t) r)/I0(sqrt(t)))/t at r = 0 and 1/2
double interior_improvement_exact(double t, double r);

// ---------------------------------------------------------------- harmonic coefficients

struct CoefficientReport {
    std::vector<double> radii;
    std::vector<double> coeff;
    double limit = 0.0;           // Aitken extrapolation of the tail
    double cauchy = 0.0;          // |A_last - A_prev| / |A_last|
    bool converged = false;       // cauchy <= 1e-3
};

// h_k = harmonic replacement of u on (domain and |X - vertex| < r_k); A_k = <h_k, H>/<H, H>
// over r in [r_k/2, r_k). The cone is placed with its vertex at `vertex`, axis rotated by
// `rotation` (angle of the omega = 0 ray).
CoefficientReport harmonic_coefficient(const Field& u, const Mesh& m, const ConeSpec& cone,
                                       const std::vector<double>& radii, Point2 vertex = {}, double rotation = 0.0);

// ---------------------------------------------------------------- ratio probes

struct RatioProbe {
    std::vector<double> param;  // e.g. depth
    std::vector<double> u, v, ratio;
    double sup = 0.0, inf = 0.0;     // over the region nodes
    double u_norm = 0.0, v_norm = 0.0;
    double R = 0.0, beta = 0.0;
    double template_lower = 0.0;  // R^beta / |v|   (times 1/C)
    double template_upper = 0.0;  // |u| / R^beta   (times C)
    double c_empirical = 0.0;     // smallest C making both template bounds hold
    bool finite = true;
    // fitted slope of log|u/v - 1| against log depth (NaN if fewer than 3 usable points)
    double decay_rate = 0.0;
};

// region selects mesh points for sup/inf; norm_region for the L-infinity norms
RatioProbe ratio_probe(const Field& u, const Field& v, const Mesh& m, const std::function<bool(Point2)>& region,
                       const std::function<bool(Point2)>& norm_region, const std::vector<Point2>& path,
                       const std::vector<double>& path_param, double R, double gamma);

// sup/inf over the cylinder, norms over the grounded cylinder of radius 3r
RatioProbe ratio_probe(const Field& u, const Field& v, const Mesh& m, const GraphDomain& dom,
                       const CylinderSpec& region, const std::vector<Point2>& path,
                       const std::vector<double>& path_param, double gamma);

// ---------------------------------------------------------------- counterexample

struct CounterexampleParams {
    double R = 2.0;
    int i_max = 8;
    double gamma = 0.5;
    double k = 0.0;             // 0: 1.25 x the minimal annulus slope
    double h = 1.0 / 1024;
    double eps_min = 0.0;       // 0: 1e-2 h^(2/(1+gamma)) ... see counterexample.cpp
    double eps_factor = 0.1;
    int apex_index = 2;         // apex probed at x1 = 1/apex_index
    bool refine_check = true;   // also run at 2h with depths doubled
    std::vector<double> depths = {1.0 / 32, 1.0 / 64, 1.0 / 128, 1.0 / 256};
    LinearOptions linear{};
};

struct CounterexampleLevel {
    double h = 0.0;
    std::size_t unknowns = 0;
    std::vector<double> depths;
    std::vector<double> midline_u, midline_v, midline_ratio;
    std::vector<double> apex_u, apex_v, apex_ratio;
    double min_u_minus_phi_h = 0.0;   // discrete comparison, >= -1e-10
    double max_v_minus_psi_h = 0.0;   // discrete comparison, <= 1e-10
    double min_u_minus_phi = 0.0;     // against the continuous profile
    double max_v_minus_psi = 0.0;
    bool comparison_checked = false;
    double separation = 0.0;          // midline - apex ratio at the deepest depth
    SolveReport u_report, v_report;
    double seconds = 0.0;
};

struct CounterexampleReport {
    CounterexampleParams params;
    double k = 0.0, k_min = 0.0;
    double apex_x = 0.0, apex_y = 0.0;
    CounterexampleLevel fine;
    std::optional<CounterexampleLevel> coarse;  // at 2h, depths doubled
    bool comparison_ok = false;
    bool separation_grows = false;
};

CounterexampleReport counterexample_experiment(const CounterexampleParams& p);

// ---------------------------------------------------------------- critical source probe

struct SourceProbeReport {
    std::vector<double> caps, sup_w;
    double relative_change_last = 0.0;  // |sup_{last} - sup_{prev}| / sup_last
};

// -Delta w = min(H^-gamma, M) on the polar mesh (zero data), for each cap M
SourceProbeReport critical_source_probe(const Mesh& sector_mesh, const ConeSpec& cone, double gamma,
                                        const std::vector<double>& caps);

}  // namespace slef
