#include "slef/ode_lab.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <utility>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/numeric/odeint.hpp>

#include "slef/errors.hpp"

namespace slef {

namespace odeint = boost::numeric::odeint;
using State2 = std::array<double, 2>;

namespace {

constexpr double kQuadTol = 1e-14;

boost::math::quadrature::tanh_sinh<double>& quad() {
    static boost::math::quadrature::tanh_sinh<double> q(12);
    return q;
}

template <class F>
double integrate(F f, double a, double b) {
    if (!(b > a)) return 0.0;
    return quad().integrate(f, a, b, kQuadTol);
}

}  // namespace

// ---------------------------------------------------------------- flat profile

FlatProfile::FlatProfile(double gamma, double param) : gamma_(gamma), param_(param) {
    if (!(gamma > 0.0)) throw InvalidArgument("flat profile: gamma must be positive");
    if (!std::isfinite(param)) throw InvalidArgument("flat profile: parameter not finite");
    if (gamma < 1.0) {
        if (!(param > 0.0)) throw InvalidArgument("flat profile: K must be positive for gamma < 1");
        u_max_ = std::pow(0.5 * (1.0 - gamma) * param * param, 1.0 / (1.0 - gamma));
    } else if (gamma == 1.0) {
        u_max_ = std::exp(0.5 * param);
    } else if (param < 0.0) {
        // finite life: the first integral vanishes where 2 s^(1-g)/(g-1) = -C
        u_max_ = std::pow(-param * (gamma - 1.0) / 2.0, 1.0 / (1.0 - gamma));
    }
    if (finite_life()) t_star_ = time_to(u_max_);
}

double FlatProfile::initial_slope() const {
    return gamma_ < 1.0 ? param_ : std::numeric_limits<double>::infinity();
}

double FlatProfile::phi_of_u(double s) const {
    const double g = gamma_;
    if (finite_life()) {
        const double lr = std::log(s / u_max_);
        if (g < 1.0) return -param_ * param_ * std::expm1((1.0 - g) * lr);
        if (g == 1.0) return -2.0 * lr;
        return -param_ * std::expm1((1.0 - g) * lr);
    }
    return 2.0 * std::pow(s, 1.0 - g) / (g - 1.0) + param_;
}

namespace {

// u'^2 at s = u_max (1 - tau^2), without cancellation near the peak
double phi_near_peak(double gamma, double param, double tau) {
    const double lr = std::log1p(-tau * tau);
    if (gamma < 1.0) return -param * param * std::expm1((1.0 - gamma) * lr);
    if (gamma == 1.0) return -2.0 * lr;
    return -param * std::expm1((1.0 - gamma) * lr);
}

}  // namespace

double FlatProfile::time_to(double s) const {
    if (!(s > 0.0)) return 0.0;
    auto direct = [this](double x) { return 1.0 / std::sqrt(phi_of_u(x)); };
    if (!finite_life()) return integrate(direct, 0.0, s);
    if (s > u_max_) throw InvalidArgument("flat profile: value above the peak");
    const double split = 0.5 * u_max_;
    double t = integrate(direct, 0.0, std::min(s, split));
    if (s > split) {
        const double um = u_max_;
        auto near = [this, um](double tau) {
            if (tau < 1e-8) {
                // limit of 2 um tau / sqrt(c tau^2); O(tau^2) relative error
                const double c = gamma_ < 1.0 ? param_ * param_ * (1.0 - gamma_)
                                 : gamma_ == 1.0 ? 2.0
                                                 : -param_ * (gamma_ - 1.0);
                return 2.0 * um / std::sqrt(c);
            }
            return 2.0 * um * tau / std::sqrt(phi_near_peak(gamma_, param_, tau));
        };
        t += integrate(near, std::sqrt(std::max(0.0, 1.0 - s / um)), std::sqrt(0.5));
    }
    return t;
}

double FlatProfile::rising_value(double t) const {
    if (t <= 0.0) return 0.0;
    if (finite_life()) {
        const double split = 0.5 * u_max_;
        const double t_split = time_to(split);
        if (t >= t_split) {
            // peak side: solve in tau where the integrand is smooth
            const double um = u_max_;
            const double c = gamma_ < 1.0 ? param_ * param_ * (1.0 - gamma_)
                             : gamma_ == 1.0 ? 2.0
                                             : -param_ * (gamma_ - 1.0);
            auto g = [&](double tau) {
                if (tau < 1e-8) return 2.0 * um / std::sqrt(c);
                return 2.0 * um * tau / std::sqrt(phi_near_peak(gamma_, param_, tau));
            };
            auto f = [&](double tau) {
                const double rem = integrate(g, 0.0, tau);  // time from u(tau) to the peak
                return std::make_pair(t_star_ - rem - t, -g(tau));
            };
            const double tau = boost::math::tools::newton_raphson_iterate(f, std::sqrt(0.5) * (t_star_ - t) /
                                                                                    std::max(t_star_ - t_split, 1e-300),
                                                                          0.0, std::sqrt(0.5), 50);
            return um * (1.0 - tau * tau);
        }
        double lo = 0.0, hi = split;
        if (gamma_ < 1.0) {
            lo = std::min(split, t * std::sqrt(phi_of_u(split)));
            hi = std::min(split, t * param_);
        }
        auto f = [&](double s) { return time_to(s) - t; };
        std::uintmax_t it = 200;
        auto r = boost::math::tools::toms748_solve(f, lo, hi, boost::math::tools::eps_tolerance<double>(50), it);
        return 0.5 * (r.first + r.second);
    }
    // unbounded growth: expand the bracket
    double hi = std::max(1.0, t);
    while (time_to(hi) < t) hi *= 2.0;
    auto f = [&](double s) { return time_to(s) - t; };
    std::uintmax_t it = 200;
    auto r = boost::math::tools::toms748_solve(f, 0.0, hi, boost::math::tools::eps_tolerance<double>(50), it);
    return 0.5 * (r.first + r.second);
}

double FlatProfile::operator()(double t) const {
    if (t <= 0.0) return 0.0;
    if (!finite_life() || t <= t_star_) return rising_value(t);
    if (t > life() * (1.0 + 1e-14)) throw InvalidArgument("flat profile: t beyond 2T*");
    return rising_value(std::max(0.0, 2.0 * t_star_ - t));
}

double FlatProfile::derivative(double t) const {
    if (t <= 0.0) return initial_slope();
    const double u = (*this)(t);
    const double d = u > 0.0 ? std::sqrt(std::max(0.0, phi_of_u(u))) : initial_slope();
    return (finite_life() && t > t_star_) ? -d : d;
}

OdeProfile flat_profile(double gamma, double param, double t_max, int n_samples) {
    if (n_samples < 2) throw InvalidArgument("flat profile: need at least 2 samples");
    if (!(t_max > 0.0)) throw InvalidArgument("flat profile: t_max must be positive");
    FlatProfile fp(gamma, param);
    if (fp.finite_life() && t_max > fp.life() * (1.0 + 1e-14))
        throw InvalidArgument("flat profile: t_max beyond 2T*");
    OdeProfile p;
    p.gamma = gamma;
    p.param = param;
    p.family = "flat";
    p.beta = 2.0 / (1.0 + gamma);
    p.t_lo = 0.0;
    p.t_hi = fp.finite_life() ? fp.life() : std::numeric_limits<double>::infinity();
    p.peak = fp.u_max();
    p.peak_at = fp.t_star();
    p.t.push_back(0.0);
    p.u.push_back(0.0);
    const double t0 = 1e-6 * t_max;
    for (int i = 0; i < n_samples; ++i) {
        const double t = t0 * std::pow(t_max / t0, static_cast<double>(i) / (n_samples - 1));
        p.t.push_back(t);
        p.u.push_back(fp(t));
    }
    return p;
}

// ---------------------------------------------------------------- annulus

namespace {

struct AnnulusRhs {
    double gamma, r;
    int n;
    void operator()(const State2& y, State2& dy, double t) const {
        dy[0] = y[1];
        dy[1] = -std::pow(std::max(y[0], 1e-300), -gamma) - (n - 1) / (r + t) * y[1];
    }
};

struct AnnulusRun {
    std::vector<double> ts, us, ds;
    double hit = std::numeric_limits<double>::infinity();
};

double annulus_series(double g, double r, double k, int n, double t) {
    return k * t - std::pow(t, 2.0 - g) * std::pow(k, -g) / ((1.0 - g) * (2.0 - g)) - (n - 1) * k * t * t / (2.0 * r);
}

double annulus_series_d(double g, double r, double k, int n, double t) {
    return k - std::pow(t, 1.0 - g) * std::pow(k, -g) / (1.0 - g) - (n - 1) * k * t / r;
}

AnnulusRun run_annulus(double g, double r, double k, int n, double t0, double t_max, bool record) {
    AnnulusRun out;
    // output grid: geometric up to 1e-3 t_max, then uniform
    std::vector<double> grid;
    if (record) {
        const double tg = std::max(1e-3 * t_max, 10.0 * t0);
        for (int i = 0; i <= 120; ++i) grid.push_back(t0 * std::pow(tg / t0, i / 120.0));
        const int m = 4000;
        for (int i = 1; i <= m; ++i) {
            const double t = tg + (t_max - tg) * i / m;
            grid.push_back(t);
        }
    }
    State2 x{annulus_series(g, r, k, n, t0), annulus_series_d(g, r, k, n, t0)};
    AnnulusRhs rhs{g, r, n};
    auto st = odeint::make_dense_output(1e-12, 1e-12, odeint::runge_kutta_dopri5<State2>());
    st.initialize(x, t0, 1e-3 * t0);
    std::size_t gi = 0;
    State2 y;
    if (record) {
        out.ts.push_back(t0);
        out.us.push_back(x[0]);
        out.ds.push_back(x[1]);
        gi = 1;
    }
    while (st.current_time() < t_max) {
        const auto [a, b] = st.do_step(rhs);
        if (st.current_state()[0] <= 0.0 || !std::isfinite(st.current_state()[0])) {
            double lo = a, hi = b;
            for (int it = 0; it < 100; ++it) {
                const double m = 0.5 * (lo + hi);
                st.calc_state(m, y);
                (y[0] > 0.0 ? lo : hi) = m;
            }
            out.hit = hi;
            if (hi <= t_max) return out;
        }
        if (record) {
            while (gi < grid.size() && grid[gi] <= b) {
                st.calc_state(grid[gi], y);
                out.ts.push_back(grid[gi]);
                out.us.push_back(y[0]);
                out.ds.push_back(y[1]);
                ++gi;
            }
        }
        if (b >= t_max) break;
    }
    return out;
}

void check_annulus_args(double g, double r, double k, double t_max) {
    if (!(g > 0.0 && g < 1.0)) throw InvalidArgument("annulus profile needs gamma in (0,1): finite initial slope");
    if (!(r > 0.0)) throw InvalidArgument("annulus profile: inner radius must be positive");
    if (!(k > 0.0)) throw InvalidArgument("annulus profile: slope must be positive");
    if (!(t_max > 0.0)) throw InvalidArgument("annulus profile: t_max must be positive");
}

double annulus_t0(double t_max) { return std::min(1e-6, 1e-6 * t_max); }

}  // namespace

AnnulusProfile::AnnulusProfile(double gamma, double inner_radius, double slope_k, double t_max, int dimension)
    : gamma_(gamma), r_(inner_radius), k_(slope_k), t_max_(t_max), n_(dimension) {
    check_annulus_args(gamma, inner_radius, slope_k, t_max);
    t0_ = annulus_t0(t_max);
    auto run = run_annulus(gamma, r_, k_, n_, t0_, t_max, true);
    if (std::isfinite(run.hit) && run.hit <= t_max)
        throw ProfileExistenceError("annulus profile reaches zero before t_max", run.hit);
    ts_ = std::move(run.ts);
    us_ = std::move(run.us);
    ds_ = std::move(run.ds);
}

double AnnulusProfile::series(double t) const { return annulus_series(gamma_, r_, k_, n_, t); }
double AnnulusProfile::series_derivative(double t) const { return annulus_series_d(gamma_, r_, k_, n_, t); }

double AnnulusProfile::operator()(double t) const {
    if (t <= 0.0) return 0.0;
    if (t <= t0_) return series(t);
    if (t > t_max_ * (1 + 1e-12)) throw InvalidArgument("annulus profile evaluated beyond t_max");
    auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
    const std::size_t j = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - ts_.begin(), 1), ts_.size() - 1);
    // cubic Hermite between stored states
    const double a = ts_[j - 1], b = ts_[j], hh = b - a, s = (t - a) / hh;
    const double h00 = (1 + 2 * s) * (1 - s) * (1 - s), h10 = s * (1 - s) * (1 - s);
    const double h01 = s * s * (3 - 2 * s), h11 = s * s * (s - 1);
    return h00 * us_[j - 1] + h10 * hh * ds_[j - 1] + h01 * us_[j] + h11 * hh * ds_[j];
}

double AnnulusProfile::derivative(double t) const {
    if (t <= 0.0) return k_;
    if (t <= t0_) return series_derivative(t);
    auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
    const std::size_t j = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - ts_.begin(), 1), ts_.size() - 1);
    const double a = ts_[j - 1], b = ts_[j], hh = b - a, s = (t - a) / hh;
    const double d00 = 6 * s * s - 6 * s, d10 = 3 * s * s - 4 * s + 1, d01 = -6 * s * s + 6 * s, d11 = 3 * s * s - 2 * s;
    return (d00 * us_[j - 1] + d01 * us_[j]) / hh + d10 * ds_[j - 1] + d11 * ds_[j];
}

double annulus_hitting_time(double gamma, double inner_radius, double slope_k, double t_max, int dimension) {
    check_annulus_args(gamma, inner_radius, slope_k, t_max);
    auto run = run_annulus(gamma, inner_radius, slope_k, dimension, annulus_t0(t_max), t_max, false);
    return run.hit <= t_max ? run.hit : std::numeric_limits<double>::infinity();
}

OdeProfile annulus_profile(double gamma, double inner_radius, double slope_k, double t_max, int n_samples,
                           int dimension) {
    AnnulusProfile ap(gamma, inner_radius, slope_k, t_max, dimension);
    OdeProfile p;
    p.gamma = gamma;
    p.param = slope_k;
    p.family = "annulus";
    p.beta = 2.0 / (1.0 + gamma);
    p.t_lo = 0.0;
    p.t_hi = t_max;
    for (int i = 0; i <= n_samples; ++i) {
        const double t = t_max * i / n_samples;
        p.t.push_back(t);
        p.u.push_back(ap(t));
        if (p.u.back() > p.peak) {
            p.peak = p.u.back();
            p.peak_at = t;
        }
    }
    return p;
}

double annulus_minimal_slope(double gamma, double inner_radius, double t_max, double rel_tol, int dimension) {
    auto ok = [&](double k) { return !std::isfinite(annulus_hitting_time(gamma, inner_radius, k, t_max, dimension)); };
    double lo = 1.0, hi = 1.0;
    int n = 0;
    if (ok(hi)) {
        while (ok(lo)) {
            hi = lo;
            lo *= 0.5;
            if (++n > 60) return 0.0;
        }
    } else {
        while (!ok(hi)) {
            lo = hi;
            hi *= 2.0;
            if (++n > 60) throw ConvergenceError("annulus slope bracket not found", hi, n);
        }
    }
    while (hi - lo > rel_tol * hi) {
        const double m = 0.5 * (lo + hi);
        (ok(m) ? hi : lo) = m;
    }
    return hi;
}

// ---------------------------------------------------------------- angular profile

namespace {

struct AngularRhs {
    double gamma, beta2;
    void operator()(const State2& y, State2& dy, double) const {
        dy[0] = y[1];
        dy[1] = -beta2 * y[0] - std::pow(std::max(y[0], 1e-300), -gamma);
    }
};

State2 angular_start(double gamma, double shoot, double& w0) {
    if (gamma < 1.0) {
        w0 = 1e-7;
        const double a = shoot;
        return {a * w0 - std::pow(w0, 2.0 - gamma) * std::pow(a, -gamma) / ((1.0 - gamma) * (2.0 - gamma)),
                a - std::pow(w0, 1.0 - gamma) * std::pow(a, -gamma) / (1.0 - gamma)};
    }
    // near the wall the beta^2 w term is negligible: start on the flat profile with constant C
    FlatProfile fp(gamma, shoot);
    w0 = fp.finite_life() ? std::min(1e-7, 1e-4 * fp.t_star()) : 1e-7;
    return {fp(w0), fp.derivative(w0)};
}

// integrate to the first zero of w'; returns the angle and leaves the states on a grid if asked
double angular_shot(double gamma, double shoot, const std::vector<double>* grid, std::vector<double>* w_out) {
    const double beta = 2.0 / (1.0 + gamma);
    double w0 = 0.0;
    State2 x = angular_start(gamma, shoot, w0);
    AngularRhs rhs{gamma, beta * beta};
    auto st = odeint::make_dense_output(1e-13, 1e-13, odeint::runge_kutta_dopri5<State2>());
    st.initialize(x, w0, 1e-3 * w0);
    const double w_end = M_PI / beta + 1.0;
    std::size_t gi = 0;
    State2 y;
    if (grid && w_out) {
        while (gi < grid->size() && (*grid)[gi] <= w0) {
            const double om = (*grid)[gi];
            w_out->push_back(om <= 0.0 ? 0.0 : x[0] * om / w0);
            ++gi;
        }
    }
    while (st.current_time() < w_end) {
        const auto [a, b] = st.do_step(rhs);
        if (grid && w_out) {
            while (gi < grid->size() && (*grid)[gi] <= b) {
                st.calc_state((*grid)[gi], y);
                w_out->push_back(y[0]);
                ++gi;
            }
        }
        const auto& c = st.current_state();
        if (c[1] <= 0.0 || c[0] <= 0.0) {
            double lo = a, hi = b;
            for (int it = 0; it < 100; ++it) {
                const double m = 0.5 * (lo + hi);
                st.calc_state(m, y);
                (y[1] > 0.0 && y[0] > 0.0 ? lo : hi) = m;
            }
            if (grid && w_out) {
                for (; gi < grid->size() && (*grid)[gi] <= hi + 1e-9; ++gi) {
                    st.calc_state(std::min((*grid)[gi], 0.5 * (lo + hi)), y);
                    w_out->push_back(y[0]);
                }
            }
            return 0.5 * (lo + hi);
        }
    }
    return w_end;
}

}  // namespace

double angular_peak_angle(double gamma, double shoot) {
    if (!(gamma > 0.0)) throw InvalidArgument("angular profile: gamma must be positive");
    if (gamma < 1.0 && !(shoot > 0.0)) throw InvalidArgument("angular profile: slope must be positive");
    return angular_shot(gamma, shoot, nullptr, nullptr);
}

OdeProfile angular_profile(double gamma, double theta, int n_shoot) {
    if (!(theta > 0.0 && theta < 2.0 * M_PI)) throw InvalidArgument("angular profile: theta must lie in (0, 2pi)");
    if (!(gamma > 0.0)) throw InvalidArgument("angular profile: gamma must be positive");
    if (n_shoot < 8) throw InvalidArgument("angular profile: need at least 8 samples");
    OdeProfile p;
    p.gamma = gamma;
    p.param = theta;
    p.family = "angular";
    p.beta = 2.0 / (1.0 + gamma);
    p.t_lo = 0.0;
    p.t_hi = theta;
    const double target = 0.5 * theta;
    const bool slope_param = gamma < 1.0;
    // shooting parameter: slope a > 0 (gamma < 1) or first-integral constant C
    auto peak = [&](double s) { return angular_peak_angle(gamma, s); };

    double lo = slope_param ? 1.0 : -1.0, hi = 1.0;
    // lower end: peak must sit below theta/2
    int n = 0;
    while (peak(lo) >= target) {
        lo = slope_param ? 0.5 * lo : 2.0 * lo;
        if (++n > 60) {
            p.exists = false;
            p.inconclusive = true;
            return p;
        }
    }
    // upper end, with the exit behaviour recorded
    std::vector<double> peaks;
    n = 0;
    while (true) {
        const double ph = peak(hi);
        peaks.push_back(ph);
        if (ph > target) break;
        if (++n > 60) {
            // no shot reaches theta/2; certify only if the peak angles rose monotonically and levelled off
            bool monotone = true;
            for (std::size_t i = 1; i < peaks.size(); ++i) monotone = monotone && peaks[i] >= peaks[i - 1] - 1e-12;
            const std::size_t m = peaks.size();
            const bool levelled = std::fabs(peaks[m - 1] - peaks[m - 2]) <= std::fabs(peaks[m - 2] - peaks[m - 3]) + 1e-12;
            p.exists = false;
            p.inconclusive = !(monotone && levelled);
            p.peak_at = peaks.back();
            return p;
        }
        lo = std::max(lo, hi);
        hi *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::fabs(hi); ++it) {
        const double m = 0.5 * (lo + hi);
        (peak(m) > target ? hi : lo) = m;
    }
    p.shoot = 0.5 * (lo + hi);

    // samples on the left half, mirrored
    std::vector<double> grid;
    const int half = n_shoot / 2;
    for (int i = 0; i <= half; ++i) grid.push_back(theta * i / n_shoot);
    std::vector<double> w;
    angular_shot(gamma, p.shoot, &grid, &w);
    if (w.size() < grid.size()) {
        // the mid sample sits on the peak itself
        const double wp = w.empty() ? 0.0 : w.back();
        while (w.size() < grid.size()) w.push_back(wp);
    }
    p.t.resize(n_shoot + 1);
    p.u.resize(n_shoot + 1);
    for (int i = 0; i <= n_shoot; ++i) {
        p.t[i] = theta * i / n_shoot;
        const int j = std::min(i, n_shoot - i);
        p.u[i] = w[j];
    }
    p.u.front() = p.u.back() = 0.0;
    p.peak = *std::max_element(p.u.begin(), p.u.end());
    p.peak_at = target;
    return p;
}

// ---------------------------------------------------------------- critical log profile

LogProfileReport critical_log_profile_check(const std::vector<double>& a_values, double t_hi) {
    if (!(t_hi > 0.0 && t_hi < 1.0)) throw InvalidArgument("log profile check: t_hi must lie in (0,1)");
    LogProfileReport rep;
    rep.a_values = a_values;
    // (t L^{1/2})'' = -(1/2 + 1/(4L)) / (t L^{1/2}),  L = ln 1/t
    // A f is a sub-solution iff A^2 (1/2 + 1/(4L)) <= 1 at every sample, super iff >= 1
    std::vector<double> coef;
    for (int j = 0; j < 3000; ++j) {
        const double t = t_hi * std::pow(10.0, -j / 10.0);
        if (t < 1e-300) break;
        const double L = std::log(1.0 / t);
        coef.push_back(0.5 + 0.25 / L);
    }
    const double cmax = *std::max_element(coef.begin(), coef.end());
    const double cmin = *std::min_element(coef.begin(), coef.end());
    rep.a_sub_max = 1.0 / std::sqrt(cmax);
    rep.a_super_min = 1.0 / std::sqrt(cmin);
    for (double a : a_values) {
        bool sub = true, super = true;
        for (double c : coef) {
            sub = sub && a * a * c <= 1.0;
            super = super && a * a * c >= 1.0;
        }
        rep.verdict.push_back(sub ? 1 : super ? -1 : 0);
    }
    const double t = 0.01, hh = 1e-4 * t;
    auto f = [](double s) { return s * std::sqrt(std::log(1.0 / s)); };
    const double fd = (f(t + hh) - 2.0 * f(t) + f(t - hh)) / (hh * hh);
    const double L = std::log(1.0 / t);
    const double closed = -(0.5 + 0.25 / L) / f(t);
    rep.identity_residual = std::fabs(fd - closed) / std::fabs(closed);
    return rep;
}

}  // namespace slef
