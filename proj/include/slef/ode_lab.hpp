#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace slef {

// Sampled one-dimensional profile.
struct OdeProfile {
    double gamma = 0.0;
    double param = 0.0;       // K, C, slope k or theta, depending on the family
    std::string family;       // "flat", "annulus", "angular"
    double beta = 0.0;        // 2/(1+gamma)
    std::vector<double> t, u;
    double t_lo = 0.0, t_hi = 0.0;  // validity interval
    double peak = 0.0;
    double peak_at = 0.0;
    bool exists = true;
    bool inconclusive = false;
    double shoot = 0.0;  // angular: converged shooting parameter
};

// u'' = -u^-gamma, u(0) = 0 on the half line. gamma < 1: u'(0) = K (param);
// gamma >= 1: first integral u'^2 = Phi(u) with constant C (param).
class FlatProfile {
public:
    FlatProfile(double gamma, double param);

    double gamma() const { return gamma_; }
    double param() const { return param_; }
    bool finite_life() const { return std::isfinite(u_max_); }
    double u_max() const { return u_max_; }
    // time of the peak; infinity when the profile grows forever
    double t_star() const { return t_star_; }
    double life() const { return 2.0 * t_star_; }
    double initial_slope() const;

    // u'(t)^2 as a function of the value s, on (0, u_max]
    double phi_of_u(double s) const;
    // elapsed time to reach the value s on the rising branch
    double time_to(double s) const;
    double operator()(double t) const;
    double derivative(double t) const;

private:
    double gamma_, param_;
    double u_max_ = std::numeric_limits<double>::infinity();
    double t_star_ = std::numeric_limits<double>::infinity();
    double rising_value(double t) const;
};

// n_samples on a geometric grid of (0, t_max] (t_max/1e6 upward), plus t = 0
OdeProfile flat_profile(double gamma, double param, double t_max, int n_samples);

// u'' + (n-1)/(r+t) u' = -u^-gamma, u(0) = 0, u'(0) = k; gamma in (0,1)
class AnnulusProfile {
public:
    // throws ProfileExistenceError when u returns to 0 before t_max
    AnnulusProfile(double gamma, double inner_radius, double slope_k, double t_max, int dimension = 2);
    double operator()(double t) const;
    double derivative(double t) const;
    double t_max() const { return t_max_; }

private:
    double gamma_, r_, k_, t_max_;
    int n_;
    double t0_;
    std::vector<double> ts_, us_, ds_;
    double series(double t) const;
    double series_derivative(double t) const;
};

OdeProfile annulus_profile(double gamma, double inner_radius, double slope_k, double t_max, int n_samples = 400,
                           int dimension = 2);
// smallest slope keeping the annulus profile positive on (0, t_max]
double annulus_minimal_slope(double gamma, double inner_radius, double t_max, double rel_tol = 1e-6,
                             int dimension = 2);
// first zero of the annulus profile for slope k, or infinity if none before t_max
double annulus_hitting_time(double gamma, double inner_radius, double slope_k, double t_max, int dimension = 2);

// w'' + beta^2 w = -w^-gamma on (0, theta), w = 0 at both ends.
OdeProfile angular_profile(double gamma, double theta, int n_shoot = 256);
// first omega with w' = 0 for the given shooting parameter (slope for gamma<1, C otherwise)
double angular_peak_angle(double gamma, double shoot);

struct LogProfileReport {
    std::vector<double> a_values;
    std::vector<int> verdict;  // +1 sub-solution, -1 super-solution, 0 neither on the sample set
    double a_sub_max = 0.0;    // largest A that is a sub-solution on (0, t_hi]
    double a_super_min = 0.0;  // smallest A that is a super-solution on (0, t_hi]
    double identity_residual = 0.0;  // closed form vs finite differences at t = 0.01
};

// A t sqrt(ln 1/t) against u'' = -1/u on (0, t_hi]
LogProfileReport critical_log_profile_check(const std::vector<double>& a_values, double t_hi = 0.1);

}  // namespace slef
