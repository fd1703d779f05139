#pragma once

#include <functional>
#include <string>
#include <vector>

#include "slef/mesh.hpp"
#include "slef/sparse.hpp"

namespace slef {

// f with declared bounds lambda <= f <= Lambda
struct SourceTerm {
    std::function<double(Point2)> f;
    double lambda = 1.0;
    double Lambda = 1.0;
    static SourceTerm constant(double c);
};

struct SleConfig {
    double gamma = 0.5;
    SourceTerm f = SourceTerm::constant(1.0);
    double newton_tol = 1e-10;
    double eps0 = 1.0;
    double eps_factor = 0.5;
    double eps_min = 0.0;  // 0: characteristic_spacing^(2/(1+gamma))
    int max_newton = 100;
    // Newton also waits until |delta|_inf <= step_tol * max(1, |u|_inf)
    double step_tol = 1e-11;
    LinearOptions linear{};
};

void validate(const SleConfig& cfg);
double default_eps_min(const Mesh& m, double gamma);
std::vector<double> eps_schedule(const Mesh& m, const SleConfig& cfg, std::vector<std::string>* warnings = nullptr);

struct SolveReport {
    std::vector<double> eps_schedule;
    std::vector<int> newton_iters;
    std::vector<double> residuals;  // final scaled residual per level
    double final_residual = 0.0;
    bool monotone_in_eps = true;
    double monotone_margin = 0.0;   // min over levels of u_j - u_{j+1}
    bool subsolution_ok = true;
    double sandwich_margin = 0.0;   // min of u - harmonic replacement
    std::vector<double> cauchy_gap;
    std::vector<std::string> warnings;
    std::string backend;
    std::size_t linear_iterations = 0;
};

struct RegularizedResult {
    Field u;  // boundary holds data + eps
    int iterations = 0;
    double residual = 0.0;
};

// Scratch kept across continuation levels (Jacobian copy, factorization).
class NewtonWorkspace {
public:
    NewtonWorkspace(const Mesh& m, const DiscreteLaplacian& lap, const SleConfig& cfg);
    ~NewtonWorkspace();
    const DiscreteLaplacian& laplacian() const { return lap_; }
    const std::vector<double>& weighted_source() const { return wf_; }
    SpdSystemSolver& solver() { return solver_; }
    CsrMatrix& jacobian() { return jac_; }
    const std::vector<std::int64_t>& diag_pos() const { return diag_pos_; }
    const std::vector<double>& stiff_diag() const { return sdiag_; }

private:
    const DiscreteLaplacian& lap_;
    std::vector<double> wf_;
    CsrMatrix jac_;
    std::vector<std::int64_t> diag_pos_;
    std::vector<double> sdiag_;
    SpdSystemSolver solver_;
};

RegularizedResult solve_regularized(const Mesh& m, const SleConfig& cfg, const Field& boundary, double eps,
                                    const Field& init);
RegularizedResult solve_regularized(const Mesh& m, const SleConfig& cfg, const Field& boundary, double eps,
                                    const Field& init, NewtonWorkspace& ws);

struct SingularResult {
    Field u;         // boundary = imposed data, unknowns = last continuation level
    Field harmonic;  // harmonic replacement of the data
    SolveReport report;
};

SingularResult solve_singular(const Mesh& m, const SleConfig& cfg, const Field& boundary);

bool verify_comparison(const Field& upper, const Field& lower, double tol = 1e-10);

struct NondegeneracyCheck {
    double value = 0.0;
    double threshold = 0.0;  // (2n/lambda)^(-1/gamma) r^(2/(1+gamma))
    bool ok = false;
};

// n = 2; passes at 95% of the threshold
NondegeneracyCheck verify_nondegeneracy(const Field& u, const Mesh& m, const SleConfig& cfg, Point2 center,
                                        double r);

struct RescaleReport {
    double min_difference = 0.0;  // min of 2^beta U(X/2) - U(X)
    double max_u = 0.0;
    std::size_t compared = 0;
};

RescaleReport rescale_compare(const Field& u, const Mesh& m, const SleConfig& cfg);

enum class ResidualMode { sub, super };

struct ResidualReport {
    std::size_t checked = 0;
    std::size_t guarded_out = 0;
    std::size_t violations = 0;
    double worst = 0.0;   // largest violation relative to its tolerance
    Point2 worst_at{};
    std::vector<Point2> violating;
};

// s = (-Delta_h c) - f c^-gamma at unknowns where guard(X) holds;
// tolerance C sqrt(h_loc) max(f c^-gamma, |Delta_h c|)
ResidualReport residual_check(const std::function<double(Point2)>& candidate, const Mesh& m, const SleConfig& cfg,
                              ResidualMode mode, const std::function<bool(Point2)>& guard,
                              double tol_constant = 1.0);

}  // namespace slef
