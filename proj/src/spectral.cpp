#include "slef/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include <boost/numeric/odeint.hpp>

#include "slef/errors.hpp"

namespace slef {

namespace odeint = boost::numeric::odeint;

ConeSpec sector_frequency(double theta, int samples) {
    if (!(theta > 0.0 && theta < 2.0 * M_PI)) throw InvalidArgument("sector angle must lie in (0, 2pi)");
    if (samples < 2) throw InvalidArgument("need at least two eigenfunction samples");
    ConeSpec c;
    c.dimension = 2;
    c.aperture = theta;
    c.phi = M_PI / theta;
    c.lambda = c.phi * c.phi;
    c.nodes.resize(samples);
    c.eigenfunction.resize(samples);
    for (int i = 0; i < samples; ++i) {
        const double w = theta * i / (samples - 1);
        c.nodes[i] = w;
        c.eigenfunction[i] = std::sin(c.phi * w);
    }
    c.eigenfunction.front() = 0.0;
    c.eigenfunction.back() = 0.0;
    return c;
}

namespace {

// number of eigenvalues of the symmetric tridiagonal (d, e) below x
int sturm_count(const std::vector<double>& d, const std::vector<double>& e, double x) {
    int count = 0;
    double q = 1.0;
    for (std::size_t i = 0; i < d.size(); ++i) {
        const double off = i == 0 ? 0.0 : e[i - 1] * e[i - 1];
        q = d[i] - x - (i == 0 ? 0.0 : off / q);
        if (q == 0.0) q = 1e-300;
        if (q < 0.0) ++count;
    }
    return count;
}

// (d - sigma) tridiagonal solve, Thomas algorithm
std::vector<double> tridiag_solve(const std::vector<double>& d, const std::vector<double>& e, double sigma,
                                  std::vector<double> b) {
    const std::size_t n = d.size();
    std::vector<double> c(n, 0.0), dd(n);
    dd[0] = d[0] - sigma;
    for (std::size_t i = 1; i < n; ++i) {
        const double m = e[i - 1] / dd[i - 1];
        dd[i] = d[i] - sigma - m * e[i - 1];
        b[i] -= m * b[i - 1];
    }
    b[n - 1] /= dd[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) b[i] = (b[i] - e[i] * b[i + 1]) / dd[i];
    return b;
}

using State2 = std::array<double, 2>;

// does the regular solution of the Legendre-type equation vanish in (0, alpha]?
bool cap_has_zero(double alpha, double lambda) {
    const double s0 = std::min(1e-5, 1e-3 * alpha);
    State2 x{1.0 - 0.25 * lambda * s0 * s0, -0.5 * lambda * s0};
    auto rhs = [lambda](const State2& y, State2& dy, double s) {
        dy[0] = y[1];
        dy[1] = -std::cos(s) / std::sin(s) * y[1] - lambda * y[0];
    };
    bool crossed = false;
    auto stepper = odeint::make_controlled(1e-13, 1e-13, odeint::runge_kutta_dopri5<State2>());
    auto obs = [&](const State2& y, double) {
        if (y[0] <= 0.0) crossed = true;
    };
    odeint::integrate_adaptive(stepper, rhs, x, s0, alpha, 1e-3 * alpha, obs);
    return crossed || x[0] <= 0.0;
}

}  // namespace

double cap_shooting_eigenvalue(double alpha, double tol) {
    if (!(alpha > 0.0 && alpha < M_PI)) throw InvalidArgument("cap angle must lie in (0, pi)");
    double lo = 0.0, hi = 1.0;
    int doublings = 0;
    while (!cap_has_zero(alpha, hi)) {
        lo = hi;
        hi *= 2.0;
        if (++doublings > 60) throw ConvergenceError("cap shooting: no bracket", hi, doublings);
    }
    while (hi - lo > tol * hi) {
        const double m = 0.5 * (lo + hi);
        (cap_has_zero(alpha, m) ? hi : lo) = m;
    }
    return 0.5 * (lo + hi);
}

ConeSpec cap_frequency(double alpha, int nodes) {
    if (!(alpha > 0.0 && alpha < M_PI)) throw InvalidArgument("cap angle must lie in (0, pi)");
    if (nodes < 64) throw InvalidArgument("cap eigen-solve needs at least 64 nodes");
    const int n = nodes;
    const double ds = alpha / n;
    // finite volumes on s_i = i ds, i = 0..n-1; E(alpha) = 0
    std::vector<double> mass(n), kf(n);  // kf[i]: flux coefficient between i and i+1
    mass[0] = 1.0 - std::cos(0.5 * ds);
    for (int i = 1; i < n; ++i) mass[i] = 2.0 * std::sin(i * ds) * std::sin(0.5 * ds);
    for (int i = 0; i < n; ++i) kf[i] = std::sin((i + 0.5) * ds) / ds;
    std::vector<double> d(n), e(n - 1);
    for (int i = 0; i < n; ++i) d[i] = (kf[i] + (i > 0 ? kf[i - 1] : 0.0)) / mass[i];
    for (int i = 0; i + 1 < n; ++i) e[i] = -kf[i] / std::sqrt(mass[i] * mass[i + 1]);

    // Gershgorin bound, then bisection for the smallest eigenvalue
    double lo = 0.0, hi = 0.0;
    for (int i = 0; i < n; ++i)
        hi = std::max(hi, d[i] + (i > 0 ? std::fabs(e[i - 1]) : 0.0) + (i + 1 < n ? std::fabs(e[i]) : 0.0));
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double m = 0.5 * (lo + hi);
        (sturm_count(d, e, m) >= 1 ? hi : lo) = m;
    }
    double lambda = 0.5 * (lo + hi);

    // inverse iteration with a slightly lowered shift
    std::vector<double> y(n, 1.0);
    const double sigma = lambda * (1.0 - 1e-9);
    for (int it = 0; it < 4; ++it) {
        y = tridiag_solve(d, e, sigma, y);
        double nrm = 0.0;
        for (double v : y) nrm = std::max(nrm, std::fabs(v));
        for (double& v : y) v /= nrm;
    }
    // Rayleigh quotient on the symmetric form
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        double by = d[i] * y[i];
        if (i > 0) by += e[i - 1] * y[i - 1];
        if (i + 1 < n) by += e[i] * y[i + 1];
        num += y[i] * by;
        den += y[i] * y[i];
    }
    lambda = num / den;

    ConeSpec c;
    c.dimension = 3;
    c.aperture = alpha;
    c.lambda = lambda;
    c.phi = 0.5 * (-1.0 + std::sqrt(1.0 + 4.0 * lambda));
    c.nodes.resize(n + 1);
    c.eigenfunction.resize(n + 1);
    double emax = 0.0;
    for (int i = 0; i < n; ++i) {
        c.nodes[i] = i * ds;
        c.eigenfunction[i] = std::fabs(y[i]) / std::sqrt(mass[i]);
        emax = std::max(emax, c.eigenfunction[i]);
    }
    c.nodes[n] = alpha;
    c.eigenfunction[n] = 0.0;
    for (double& v : c.eigenfunction) v /= emax;

    // residual of K E = lambda M E, relative
    double rmax = 0.0, kmax = 0.0;
    for (int i = 0; i < n; ++i) {
        const double ei = c.eigenfunction[i];
        double ke = (kf[i] + (i > 0 ? kf[i - 1] : 0.0)) * ei - kf[i] * c.eigenfunction[i + 1];
        if (i > 0) ke -= kf[i - 1] * c.eigenfunction[i - 1];
        rmax = std::max(rmax, std::fabs(ke - lambda * mass[i] * ei));
        kmax = std::max(kmax, std::fabs(ke));
    }
    c.residual = kmax > 0 ? rmax / kmax : rmax;
    if (!(c.residual < 1e-8)) throw ConvergenceError("cap eigen-solve did not converge", c.residual, 4);
    c.shooting_lambda = cap_shooting_eigenvalue(alpha);
    return c;
}

const char* criticality_name(Criticality c) {
    switch (c) {
        case Criticality::subcritical: return "subcritical";
        case Criticality::critical: return "critical";
        case Criticality::supercritical: return "supercritical";
    }
    return "?";
}

CriticalityClass classify_phi(double phi, double gamma, double tol) {
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    const double margin = 2.0 / (1.0 + gamma) - phi;
    if (margin < -tol) return {Criticality::subcritical, margin};
    if (margin > tol) return {Criticality::supercritical, margin};
    return {Criticality::critical, margin};
}

CriticalityClass classify(const ConeSpec& cone, double gamma, double tol) { return classify_phi(cone.phi, gamma, tol); }

double eigenfunction_at(const ConeSpec& cone, double a) {
    if (cone.dimension == 2) return std::sin(cone.phi * a);
    const auto& s = cone.nodes;
    if (a <= 0.0) return cone.eigenfunction.front();
    if (a >= cone.aperture) return 0.0;
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(a / (s[1] - s[0])), s.size() - 2);
    const double t = (a - s[k]) / (s[k + 1] - s[k]);
    return (1 - t) * cone.eigenfunction[k] + t * cone.eigenfunction[k + 1];
}

std::optional<double> h_sigma_eval(const ConeSpec& cone, Point2 x) {
    if (cone.dimension != 2) throw InvalidArgument("planar point for a 3D cone");
    const double r = std::hypot(x.x, x.y);
    if (r == 0.0) return std::nullopt;
    double w = std::atan2(x.y, x.x);
    if (w < 0.0) w += 2.0 * M_PI;
    if (w > cone.aperture) {
        // ray omega = 0 approached from below
        if (w > 2.0 * M_PI - 1e-12) return 0.0;
        if (w > cone.aperture + 1e-12) return std::nullopt;
        w = cone.aperture;
    }
    return std::pow(r, cone.phi) * std::max(0.0, std::sin(cone.phi * w));
}

std::optional<double> h_sigma_eval(const ConeSpec& cone, Point3 x) {
    if (cone.dimension != 3) throw InvalidArgument("spatial point for a planar cone");
    const double r = std::sqrt(x.x * x.x + x.y * x.y + x.z * x.z);
    if (r == 0.0) return std::nullopt;
    const double s = std::acos(std::clamp(x.z / r, -1.0, 1.0));
    if (s > cone.aperture + 1e-12) return std::nullopt;
    return std::pow(r, cone.phi) * eigenfunction_at(cone, s);
}

}  // namespace slef
