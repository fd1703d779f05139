#include "slef/analysis.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <boost/math/special_functions/bessel.hpp>

#include "slef/errors.hpp"
#include "slef/ode_lab.hpp"

namespace slef {

// ---------------------------------------------------------------- growth fits

GrowthFit fit_growth(const std::vector<double>& t, const std::vector<double>& u, FitModel model,
                     std::optional<double> phi_fixed) {
    const std::size_t n = t.size();
    if (u.size() != n) throw InvalidArgument("fit_growth: t and u differ in length");
    if (n < 12) throw InvalidArgument("fit_growth: need at least 12 samples");
    for (std::size_t i = 0; i < n; ++i) {
        if (!(u[i] > 0.0)) throw InvalidArgument("fit_growth: nonpositive sample");
        if (!(t[i] > 0.0)) throw InvalidArgument("fit_growth: nonpositive depth");
    }
    const double q = t[1] / t[0];
    if (!(q < 1.0)) throw InvalidArgument("fit_growth: depths must decrease");
    for (std::size_t i = 1; i < n; ++i)
        if (std::fabs(t[i] / t[i - 1] - q) > 1e-9 * q) throw InvalidArgument("fit_growth: depths must be geometric");
    if (model == FitModel::log_augmented) {
        for (double ti : t)
            if (!(ti < 1.0)) throw InvalidArgument("fit_growth: log model needs t < 1");
    }

    const bool fixed = model == FitModel::log_augmented && phi_fixed.has_value();
    const int cols = model == FitModel::pure ? 2 : (fixed ? 2 : 3);
    Eigen::MatrixXd A(n, cols);
    Eigen::VectorXd y(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double lt = std::log(t[i]), ll = std::log(std::log(2.0 / t[i]));
        A(i, 0) = 1.0;
        if (model == FitModel::pure) {
            A(i, 1) = lt;
            y(i) = std::log(u[i]);
        } else if (fixed) {
            A(i, 1) = ll;
            y(i) = std::log(u[i]) - *phi_fixed * lt;
        } else {
            A(i, 1) = lt;
            A(i, 2) = ll;
            y(i) = std::log(u[i]);
        }
    }
    const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
    const Eigen::VectorXd r = A * c - y;
    GrowthFit f;
    f.model = model;
    f.log_c = c(0);
    if (model == FitModel::pure) {
        f.alpha = c(1);
    } else if (fixed) {
        f.alpha = *phi_fixed;
        f.log_power = c(1);
    } else {
        f.alpha = c(1);
        f.log_power = c(2);
    }
    f.rms = std::sqrt(r.squaredNorm() / static_cast<double>(n));
    f.t_max = t.front();
    f.t_min = t.back();
    f.samples = n;
    if (!std::isfinite(f.rms)) throw InvalidArgument("fit_growth: degenerate window");
    return f;
}

std::vector<double> geometric_depths(double t_hi, double t_lo, int per_octave) {
    if (!(t_hi > t_lo && t_lo > 0.0) || per_octave < 1) throw InvalidArgument("bad depth window");
    std::vector<double> t;
    for (int j = 0;; ++j) {
        const double v = t_hi * std::pow(2.0, -static_cast<double>(j) / per_octave);
        if (v < t_lo * (1 - 1e-12)) break;
        t.push_back(v);
    }
    return t;
}

std::vector<double> sample_ray(const Mesh& m, const Field& u, double omega, const std::vector<double>& t) {
    if (m.kind != MeshKind::polar) throw InvalidArgument("sample_ray needs a polar mesh");
    std::vector<double> out;
    for (double r : t) {
        auto it = std::upper_bound(m.radii.begin(), m.radii.end(), r);
        if (it == m.radii.begin() || it == m.radii.end()) throw InvalidArgument("ray depth off the mesh");
        const double step = *it - *(it - 1);
        if (r < 5.0 * step) throw InvalidArgument("ray depth below 5 local mesh steps");
        if (r > 0.25 * m.radii.back()) throw InvalidArgument("ray depth above a quarter of the radius");
        const auto v = interpolate_polar(m, u, r, omega);
        if (!v) throw InvalidArgument("ray sample not resolvable");
        out.push_back(*v);
    }
    return out;
}

// ---------------------------------------------------------------- recursions

double ak_limit(double gamma) {
    const double phi = 2.0 / (1.0 + gamma);
    // c phi/2 - c^-g - 1 is increasing in c
    double lo = 1e-6, hi = 1.0;
    while (hi * phi / 2 - std::pow(hi, -gamma) - 1 < 0) hi *= 2;
    for (int i = 0; i < 200; ++i) {
        const double m = 0.5 * (lo + hi);
        (m * phi / 2 - std::pow(m, -gamma) - 1 < 0 ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

namespace {

bool keep_sample(std::size_t k, std::size_t k_max) {
    // every index up to 100, then ~200 per decade, and the last
    if (k <= 100 || k == k_max) return true;
    const double d = std::pow(10.0, std::floor(std::log10(static_cast<double>(k))) - 2.0);
    return k % std::max<std::size_t>(1, static_cast<std::size_t>(d) / 2) == 0;
}

void finish_tail(RecursionTrace& tr) {
    tr.scaled_sup = *std::max_element(tr.scaled.begin(), tr.scaled.end());
    tr.scaled_final = tr.scaled.back();
    // monotone over the last half of the samples (in k)
    std::size_t start = 0;
    while (start < tr.k.size() && tr.k[start] < tr.k_max / 2) ++start;
    int dir = 0;
    for (std::size_t i = start + 1; i < tr.k.size(); ++i) {
        const double d = tr.scaled[i] - tr.scaled[i - 1];
        const int s = d > 0 ? 1 : d < 0 ? -1 : 0;
        if (s == 0) continue;
        if (dir == 0) dir = s;
        if (s != dir) tr.tail_monotone = false;
    }
}

}  // namespace

RecursionTrace ak_recursion(double gamma, double a1, std::size_t k_max) {
    if (!(gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    if (!(a1 > 0.0)) throw InvalidArgument("A_1 must be positive");
    if (k_max < 1 || k_max > 100000000) throw InvalidArgument("k_max must lie in [1, 1e8]");
    RecursionTrace tr;
    tr.kind = "ak";
    tr.gamma = gamma;
    tr.phi = 2.0 / (1.0 + gamma);
    tr.first = a1;
    tr.k_max = k_max;
    tr.predicted_limit = ak_limit(gamma);
    const double e = gamma * tr.phi / 2.0;
    double a = a1;
    for (std::size_t k = 1;; ++k) {
        if (keep_sample(k, k_max)) {
            tr.k.push_back(k);
            tr.value.push_back(a);
            tr.scaled.push_back(a * std::pow(static_cast<double>(k), -tr.phi / 2.0));
        }
        if (k == k_max) break;
        const double next = a + std::pow(a, -gamma) + std::pow(static_cast<double>(k), -e);
        if (!std::isfinite(next)) throw Error("A_k recursion overflow at k=" + std::to_string(k));
        if (!(next > a)) tr.increasing = false;
        a = next;
    }
    finish_tail(tr);
    return tr;
}

RecursionTrace sigma_recursion(double Q, double q, SigmaMode mode, std::size_t k_max) {
    if (!(Q > 0.0 && Q <= 1.0)) throw InvalidArgument("Q must lie in (0,1]");
    if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("q must lie in (0,1)");
    if (k_max < 1) throw InvalidArgument("k_max must be positive");
    RecursionTrace tr;
    tr.kind = mode == SigmaMode::geometric ? "sigma_geometric" : "sigma_harmonic";
    tr.Q = Q;
    tr.q = q;
    tr.k_max = k_max;
    tr.predicted_limit = mode == SigmaMode::harmonic ? 1.0 / std::tgamma(1.0 - q) : 0.0;
    double s = Q;
    for (std::size_t k = 0;; ++k) {
        if (k > 0 && keep_sample(k, k_max)) {
            tr.k.push_back(k);
            tr.value.push_back(s);
            if (mode == SigmaMode::geometric) {
                const double exact = Q * std::pow(1.0 - q, static_cast<double>(k));
                const double err = std::fabs(s - exact) / exact;
                tr.closed_form_error = std::max(tr.closed_form_error, err);
                tr.scaled.push_back(s / exact);
            } else {
                tr.scaled.push_back(s * std::pow(static_cast<double>(k), q) / Q);
            }
        }
        if (k == k_max) break;
        s *= mode == SigmaMode::geometric ? (1.0 - q) : (1.0 - q / static_cast<double>(k + 1));
        if (s == 0.0) break;
    }
    finish_tail(tr);
    return tr;
}

// ---------------------------------------------------------------- interior improvement

double interior_improvement_exact(double t, double r) {
    if (t == 0.0) return 0.25 * (1.0 - r * r);
    const double s = std::sqrt(t);
    return (1.0 - boost::math::cyl_bessel_i(0, s * r) / boost::math::cyl_bessel_i(0, s)) / t;
}

ImprovementReport interior_improvement(double t, const Mesh& disk) {
    if (!(t >= 0.0 && t < 0.5)) throw InvalidArgument("interior improvement needs t in [0, 1/2)");
    ImprovementReport rep;
    rep.t = t;
    if (t == 0.0) return rep;  // u = 1 exactly
    const auto lap = assemble_laplacian(disk);
    Field one = make_field(disk, 1.0);
    const auto b = lap.boundary_rhs(one);
    std::vector<double> shift(disk.unknowns);
    for (std::size_t i = 0; i < disk.unknowns; ++i) shift[i] = t * lap.weight[i];
    const auto A = lap.stiffness.with_diagonal_shift(shift);
    SpdSystemSolver s({}, disk.grid_coord);
    s.set_matrix(A);
    const auto x = s.solve(b);
    Field u = one;
    std::copy(x.begin(), x.end(), u.values.begin());
    rep.c_est = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < disk.unknowns; ++i)
        if (std::hypot(disk.points[i].x, disk.points[i].y) <= 0.5 + 1e-12) rep.c_est = std::min(rep.c_est, (1 - x[i]) / t);
    const auto c = interpolate(disk, u, {0.0, 0.0});
    if (!c) throw InvalidArgument("disk center not on the mesh");
    rep.center = (1.0 - *c) / t;
    return rep;
}

// ---------------------------------------------------------------- harmonic coefficients

CoefficientReport harmonic_coefficient(const Field& u, const Mesh& m, const ConeSpec& cone,
                                       const std::vector<double>& radii, Point2 vertex, double rotation) {
    require_same_mesh(m, u);
    if (radii.size() < 2) throw InvalidArgument("need at least two radii");
    const auto lap = assemble_laplacian(m);
    const double cr = std::cos(rotation), sr = std::sin(rotation);
    std::vector<double> dist(m.unknowns), H(m.unknowns);
    for (std::size_t i = 0; i < m.unknowns; ++i) {
        const double dx = m.points[i].x - vertex.x, dy = m.points[i].y - vertex.y;
        dist[i] = std::hypot(dx, dy);
        const Point2 local{cr * dx + sr * dy, -sr * dx + cr * dy};
        H[i] = h_sigma_eval(cone, local).value_or(0.0);
    }
    CoefficientReport rep;
    rep.radii = radii;
    std::vector<char> mask(m.unknowns);
    for (double rk : radii) {
        for (std::size_t i = 0; i < m.unknowns; ++i) mask[i] = dist[i] < rk;
        const Field hk = masked_harmonic_solve(m, lap, u, mask);
        double num = 0.0, den = 0.0;
        for (std::size_t i = 0; i < m.unknowns; ++i)
            if (dist[i] >= 0.5 * rk && dist[i] < rk) {
                num += hk[i] * H[i];
                den += H[i] * H[i];
            }
        double hmax = 0.0;
        for (std::size_t i = 0; i < m.unknowns; ++i)
            if (dist[i] < rk) hmax = std::max(hmax, H[i] * H[i]);
        if (!(den > 1e-20 * std::max(hmax, 1e-300)) || den == 0.0)
            throw InvalidArgument("harmonic_coefficient: H nearly zero on the sample annulus");
        rep.coeff.push_back(num / den);
    }
    const auto& a = rep.coeff;
    const std::size_t n = a.size();
    rep.cauchy = std::fabs(a[n - 1] - a[n - 2]) / std::max(std::fabs(a[n - 1]), 1e-300);
    rep.limit = a[n - 1];
    if (n >= 3) {
        const double d1 = a[n - 1] - a[n - 2], d0 = a[n - 2] - a[n - 3];
        const double dd = d1 - d0;
        if (std::fabs(dd) > 1e-14 * std::fabs(a[n - 1]) && std::fabs(d1) < std::fabs(d0)) rep.limit = a[n - 1] - d1 * d1 / dd;
    }
    rep.converged = rep.cauchy <= 1e-3;
    return rep;
}

// ---------------------------------------------------------------- ratio probes

RatioProbe ratio_probe(const Field& u, const Field& v, const Mesh& m, const std::function<bool(Point2)>& region,
                       const std::function<bool(Point2)>& norm_region, const std::vector<Point2>& path,
                       const std::vector<double>& path_param, double R, double gamma) {
    require_same_mesh(m, u);
    require_same_mesh(m, v);
    if (path.size() != path_param.size()) throw InvalidArgument("path and parameters differ in length");
    if (!(R > 0.0)) throw InvalidArgument("probe radius must be positive");
    RatioProbe p;
    p.R = R;
    p.beta = 2.0 / (1.0 + gamma);
    p.sup = -std::numeric_limits<double>::infinity();
    p.inf = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.unknowns; ++i) {
        const Point2 x = m.points[i];
        if (norm_region(x)) {
            p.u_norm = std::max(p.u_norm, std::fabs(u[i]));
            p.v_norm = std::max(p.v_norm, std::fabs(v[i]));
        }
        if (!region(x)) continue;
        if (!(v[i] > 0.0)) throw InvalidArgument("ratio_probe: v not positive at a region node");
        const double r = u[i] / v[i];
        p.sup = std::max(p.sup, r);
        p.inf = std::min(p.inf, r);
    }
    for (std::size_t s = 0; s < path.size(); ++s) {
        const auto a = interpolate(m, u, path[s]), b = interpolate(m, v, path[s]);
        if (!a || !b) throw InvalidArgument("ratio_probe: path point not resolvable");
        if (!(*b > 0.0)) throw InvalidArgument("ratio_probe: v not positive on the path");
        p.param.push_back(path_param[s]);
        p.u.push_back(*a);
        p.v.push_back(*b);
        p.ratio.push_back(*a / *b);
        p.sup = std::max(p.sup, p.ratio.back());
        p.inf = std::min(p.inf, p.ratio.back());
    }
    p.finite = std::isfinite(p.sup) && std::isfinite(p.inf);
    const double rb = std::pow(R, p.beta);
    p.template_lower = p.v_norm > 0 ? rb / p.v_norm : 0.0;
    p.template_upper = p.u_norm / rb;
    if (p.finite && p.u_norm > 0 && p.v_norm > 0)
        p.c_empirical = std::max(p.sup * rb / p.u_norm, rb / (p.v_norm * p.inf));
    // decay of |u/v - 1| against the path parameter
    std::vector<double> lx, ly;
    for (std::size_t s = 0; s < p.ratio.size(); ++s) {
        const double d = std::fabs(p.ratio[s] - 1.0);
        if (d > 1e-14 && p.param[s] > 0) {
            lx.push_back(std::log(p.param[s]));
            ly.push_back(std::log(d));
        }
    }
    if (lx.size() >= 3) {
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            mx += lx[i];
            my += ly[i];
        }
        mx /= lx.size();
        my /= ly.size();
        double sxy = 0, sxx = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxy += (lx[i] - mx) * (ly[i] - my);
            sxx += (lx[i] - mx) * (lx[i] - mx);
        }
        p.decay_rate = sxy / sxx;
    } else {
        p.decay_rate = std::numeric_limits<double>::quiet_NaN();
    }
    return p;
}

RatioProbe ratio_probe(const Field& u, const Field& v, const Mesh& m, const GraphDomain& dom,
                       const CylinderSpec& region, const std::vector<Point2>& path,
                       const std::vector<double>& path_param, double gamma) {
    validate(region);
    CylinderSpec big = region;
    big.r = 3.0 * region.r;
    big.kind = CylinderKind::grounded;
    auto in = [&](Point2 x) { return cylinder_contains(region, dom, x); };
    auto in3 = [&](Point2 x) { return cylinder_contains(big, dom, x); };
    return ratio_probe(u, v, m, in, in3, path, path_param, region.r, gamma);
}

// ---------------------------------------------------------------- counterexample

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

CounterexampleLevel counterexample_level(const CounterexampleParams& p, const BumpCurve& curve, double h,
                                         const std::vector<double>& depths, double k, Point2 apex,
                                         bool check_comparison) {
    const auto t0 = std::chrono::steady_clock::now();
    CounterexampleLevel lev;
    lev.h = h;
    lev.depths = depths;
    const GraphDomain dom = bumpy_domain(curve, 1.0);
    const auto mesh = build_cartesian_mesh(dom, h);
    const Mesh& m = *mesh;
    lev.unknowns = m.unknowns;

    const double g = p.gamma;
    const FlatProfile phi(g, 2.0 * k);
    const double dmax = std::hypot(1.0, 1.0 + p.R) - p.R;
    const AnnulusProfile psi(g, p.R, k, dmax * (1 + 1e-9));
    auto phi_at = [&](Point2 x) { return x.y <= 0.0 ? 0.0 : phi(x.y); };
    auto psi_at = [&](Point2 x) { return psi(std::max(0.0, circle_signed_distance(x, p.R))); };

    SleConfig cfg;
    cfg.gamma = g;
    cfg.eps_factor = p.eps_factor;
    cfg.eps_min = p.eps_min > 0 ? p.eps_min : 1e-2 * std::pow(h, 2.0 / (1.0 + g));
    cfg.linear = p.linear;

    const Field u_data = boundary_field(m, [&](Point2 x, int) { return phi_at(x); });
    const Field v_data = boundary_field(m, [&](Point2 x, int part) { return part == 0 ? 0.0 : psi_at(x); });
    auto u = solve_singular(m, cfg, u_data);
    auto v = solve_singular(m, cfg, v_data);
    lev.u_report = u.report;
    lev.v_report = v.report;

    for (double t : depths) {
        const auto mu = interpolate(m, u.u, {0.0, t}), mv = interpolate(m, v.u, {0.0, t});
        const auto au = interpolate(m, u.u, {apex.x, apex.y + t}), av = interpolate(m, v.u, {apex.x, apex.y + t});
        if (!mu || !mv || !au || !av) throw InvalidArgument("counterexample probe point off the mesh");
        lev.midline_u.push_back(*mu);
        lev.midline_v.push_back(*mv);
        lev.midline_ratio.push_back(*mu / *mv);
        lev.apex_u.push_back(*au);
        lev.apex_v.push_back(*av);
        lev.apex_ratio.push_back(*au / *av);
    }
    lev.separation = lev.midline_ratio.back() - lev.apex_ratio.back();

    lev.min_u_minus_phi = std::numeric_limits<double>::infinity();
    lev.max_v_minus_psi = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m.unknowns; ++i) {
        lev.min_u_minus_phi = std::min(lev.min_u_minus_phi, u.u[i] - phi_at(m.points[i]));
        lev.max_v_minus_psi = std::max(lev.max_v_minus_psi, v.u[i] - psi_at(m.points[i]));
    }

    if (check_comparison) {
        // phi_h: the 1D discrete flat solve on the vertical grid lines, constant in x;
        // a discrete subsolution for u at the same eps level
        const int ny = static_cast<int>(std::lround(1.0 / h));
        const auto line = build_interval_mesh(0.0, 1.0, ny);
        const Field line_data = boundary_field(*line, [&](Point2 x, int) { return phi_at({0.0, x.x}); });
        auto ph = solve_singular(*line, cfg, line_data);
        std::vector<double> phi_h(ny + 1);
        for (int j = 0; j <= ny; ++j) {
            const auto pj = line->lookup[j];
            phi_h[j] = line->is_unknown(pj) ? ph.u[pj] : ph.u[pj] + cfg.eps_min;
        }
        lev.min_u_minus_phi_h = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m.unknowns; ++i) {
            const double y = m.points[i].y;
            const double s = y <= 0.0 ? cfg.eps_min : phi_h[std::clamp<long>(std::lround(y / h), 0, ny)];
            lev.min_u_minus_phi_h = std::min(lev.min_u_minus_phi_h, u.u[i] - s);
        }
        // psi_h: the SLEF solve with psi data everywhere, a discrete supersolution for v
        const Field psi_data = boundary_field(m, [&](Point2 x, int) { return psi_at(x); });
        auto ps = solve_singular(m, cfg, psi_data);
        lev.max_v_minus_psi_h = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < m.unknowns; ++i)
            lev.max_v_minus_psi_h = std::max(lev.max_v_minus_psi_h, v.u[i] - ps.u[i]);
        lev.comparison_checked = true;
    }
    lev.seconds = seconds_since(t0);
    return lev;
}

}  // namespace

CounterexampleReport counterexample_experiment(const CounterexampleParams& p) {
    if (!(p.gamma > 0.0 && p.gamma < 1.0)) throw InvalidArgument("counterexample needs gamma in (0,1)");
    if (!bump_overlap_free(p.R, p.i_max)) throw InvalidArgument("bump intervals overlap");
    if (p.apex_index < 1 || p.apex_index > p.i_max) throw InvalidArgument("apex index out of range");
    if (p.depths.empty()) throw InvalidArgument("no probe depths");
    CounterexampleReport rep;
    rep.params = p;
    const BumpCurve curve{p.R, p.i_max};
    // psi must stay positive up to the farthest box point from the circle
    const double dmax = std::hypot(1.0, 1.0 + p.R) - p.R;
    rep.k_min = annulus_minimal_slope(p.gamma, p.R, dmax * (1 + 1e-9));
    rep.k = p.k > 0 ? p.k : 1.25 * rep.k_min;
    if (rep.k < rep.k_min) throw ProfileExistenceError("slope k below the minimal annulus slope", rep.k_min);
    const FlatProfile phi(p.gamma, 2.0 * rep.k);
    if (phi.t_star() < 1.0) throw ProfileExistenceError("flat profile peaks inside the box", phi.t_star());
    rep.apex_x = 1.0 / p.apex_index;
    rep.apex_y = bump_height(curve, rep.apex_x);

    rep.fine = counterexample_level(p, curve, p.h, p.depths, rep.k, {rep.apex_x, rep.apex_y}, true);
    rep.comparison_ok = rep.fine.min_u_minus_phi_h >= -1e-10 && rep.fine.max_v_minus_psi_h <= 1e-10;
    if (p.refine_check) {
        std::vector<double> d2;
        for (double d : p.depths) d2.push_back(2.0 * d);
        rep.coarse = counterexample_level(p, curve, 2.0 * p.h, d2, rep.k, {rep.apex_x, rep.apex_y}, false);
        rep.separation_grows = rep.fine.separation > rep.coarse->separation;
    }
    return rep;
}

// ---------------------------------------------------------------- critical source probe

SourceProbeReport critical_source_probe(const Mesh& m, const ConeSpec& cone, double gamma,
                                        const std::vector<double>& caps) {
    if (m.kind != MeshKind::polar) throw InvalidArgument("critical_source_probe needs a polar sector mesh");
    if (cone.dimension != 2) throw InvalidArgument("critical_source_probe: planar cones only");
    if (!(gamma >= 0.0)) throw InvalidArgument("gamma must be nonnegative");
    if (gamma > 0.0 && classify(cone, gamma).cls != Criticality::critical)
        throw InvalidArgument("critical_source_probe needs a critical pair");
    if (caps.empty()) throw InvalidArgument("no caps");
    for (std::size_t i = 1; i < caps.size(); ++i)
        if (!(caps[i] > caps[i - 1])) throw InvalidArgument("caps must increase");
    const auto lap = assemble_laplacian(m);
    SpdSystemSolver s({}, m.grid_coord);
    s.set_matrix(lap.stiffness);
    SourceProbeReport rep;
    rep.caps = caps;
    std::vector<double> rhs(m.unknowns);
    for (double M : caps) {
        for (std::size_t i = 0; i < m.unknowns; ++i) {
            const double H = h_sigma_eval(cone, m.points[i]).value_or(0.0);
            const double src = gamma == 0.0 ? 1.0 : (H > 0 ? std::min(std::pow(H, -gamma), M) : M);
            rhs[i] = lap.weight[i] * src;
        }
        const auto w = s.solve(rhs);
        rep.sup_w.push_back(*std::max_element(w.begin(), w.end()));
    }
    const std::size_t n = rep.sup_w.size();
    if (n >= 2) rep.relative_change_last = std::fabs(rep.sup_w[n - 1] - rep.sup_w[n - 2]) / rep.sup_w[n - 1];
    return rep;
}

}  // namespace slef
