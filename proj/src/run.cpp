#include "slef/run.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <future>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "slef/analysis.hpp"
#include "slef/geometry.hpp"
#include "slef/kernels.hpp"
#include "slef/mesh.hpp"
#include "slef/ode_lab.hpp"
#include "slef/slef_solver.hpp"
#include "slef/spectral.hpp"

namespace fs = std::filesystem;

namespace slef {

std::string sha256_hex(const std::string& bytes) {
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
    std::ostringstream os;
    for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << int(md[i]);
    return os.str();
}

namespace {

using Clock = std::chrono::steady_clock;

struct Context {
    fs::path dir;
    int precision = 17;
    RunManifest* man;

    std::string fmt(double v) const {
        std::ostringstream os;
        os << std::setprecision(precision) << v;
        return os.str();
    }
    void write(const std::string& name, const std::string& content) {
        std::ofstream f(dir / name, std::ios::binary);
        f << content;
        if (!f) throw Error("cannot write " + (dir / name).string());
        man->files.push_back({name, sha256_hex(content), content.size()});
    }
    void put(const std::string& k, const std::string& v) { man->summary.emplace_back(k, v); }
    void put(const std::string& k, double v) { put(k, fmt(v)); }
    void put_bool(const std::string& k, bool v) { put(k, std::string(v ? "true" : "false")); }
    template <class F>
    auto stage(const std::string& name, F f) {
        const auto t0 = Clock::now();
        if constexpr (std::is_void_v<decltype(f())>) {
            f();
            man->timings.emplace_back(name, std::chrono::duration<double>(Clock::now() - t0).count());
        } else {
            auto r = f();
            man->timings.emplace_back(name, std::chrono::duration<double>(Clock::now() - t0).count());
            return r;
        }
    }
};

SleConfig solver_config(const RunConfig& c) {
    SleConfig s;
    s.gamma = c.num("equation", "gamma");
    const double fv = c.num("equation", "f", 1.0);
    s.f = SourceTerm::constant(fv);
    s.f.lambda = c.num("equation", "lambda", fv);
    s.f.Lambda = c.num("equation", "Lambda", fv);
    if (!(fv >= s.f.lambda && fv <= s.f.Lambda)) throw ConfigError(ConfigErrorKind::range, "equation.f outside [lambda, Lambda]");
    s.newton_tol = c.num("solver", "newton_tol", s.newton_tol);
    s.eps0 = c.num("solver", "eps0", s.eps0);
    s.eps_factor = c.num("solver", "eps_factor", s.eps_factor);
    s.eps_min = c.num("solver", "eps_min", s.eps_min);
    s.max_newton = static_cast<int>(c.integer("solver", "max_newton", s.max_newton));
    const auto b = c.str("solver", "backend", "automatic");
    s.linear.backend = b == "direct"      ? LinearBackend::direct
                       : b == "multigrid" ? LinearBackend::multigrid
                       : b == "jacobi"    ? LinearBackend::jacobi
                                          : LinearBackend::automatic;
    s.linear.tol = c.num("solver", "linear_tol", s.linear.tol);
    return s;
}

struct Problem {
    MeshPtr mesh;
    Field data;
};

Problem build_problem(const RunConfig& c) {
    const std::string shape = c.str("domain", "shape", "sector");
    const double data = c.num("domain", "data", 0.0);
    const double outer = c.num("domain", "outer_data", data);
    Problem p;
    if (shape == "sector") {
        const SectorDomain sec = make_sector(c.num("domain", "theta"), c.num("domain", "radius", 1.0));
        p.mesh = build_polar_mesh(sec, static_cast<int>(c.integer("mesh", "n_r", 0)),
                                  static_cast<int>(c.integer("mesh", "n_omega", 0)), c.num("mesh", "grading", 1.0));
        p.data = boundary_field(*p.mesh, [&](Point2, int part) { return part == 3 ? outer : data; });
        return p;
    }
    if (shape == "interval") {
        p.mesh = build_interval_mesh(c.num("domain", "a", 0.0), c.num("domain", "b", 1.0),
                                     static_cast<int>(c.integer("mesh", "n", 0)), c.num("mesh", "grading_power", 1.0));
        p.data = boundary_field(*p.mesh, [&](Point2, int part) { return part == 1 ? outer : data; });
        return p;
    }
    const double h = c.num("mesh", "h");
    if (shape == "box") {
        BoxRegion box(c.num("domain", "x_min", 0.0), c.num("domain", "x_max", 1.0), 0.0, c.num("domain", "top", 1.0));
        p.mesh = build_cartesian_mesh(box, h);
    } else if (shape == "disk") {
        DiskRegion disk({0.0, 0.0}, c.num("domain", "radius", 1.0));
        p.mesh = build_cartesian_mesh(disk, h);
    } else if (shape == "flat") {
        p.mesh = build_cartesian_mesh(
            GraphDomain::flat(c.num("domain", "x_min", -1.0), c.num("domain", "x_max", 1.0), c.num("domain", "top", 1.0)), h);
    } else if (shape == "tilted") {
        p.mesh = build_cartesian_mesh(GraphDomain::tilted(c.num("domain", "slope", 0.5), c.num("domain", "x_min", -1.0),
                                                          c.num("domain", "x_max", 1.0), c.num("domain", "top", 1.0)),
                                      h);
    } else if (shape == "bumpy") {
        const BumpCurve curve{c.num("domain", "R", 2.0), static_cast<int>(c.integer("domain", "i_max", 8))};
        p.mesh = build_cartesian_mesh(bumpy_domain(curve, c.num("domain", "top", 1.0)), h);
    } else {
        throw ConfigError(ConfigErrorKind::range, "shape '" + shape + "' cannot be meshed here");
    }
    p.data = boundary_field(*p.mesh, [&](Point2, int) { return data; });
    return p;
}

std::string report_text(const SolveReport& r, const Context& cx) {
    std::ostringstream os;
    auto list = [&](const auto& v) {
        std::string s;
        for (const auto& x : v) s += (s.empty() ? "" : ",") + cx.fmt(static_cast<double>(x));
        return s;
    };
    os << "backend: " << r.backend << "\n";
    os << "eps_schedule: " << list(r.eps_schedule) << "\n";
    os << "newton_iters: " << list(r.newton_iters) << "\n";
    os << "level_residuals: " << list(r.residuals) << "\n";
    os << "final_residual: " << cx.fmt(r.final_residual) << "\n";
    os << "monotone_in_eps: " << (r.monotone_in_eps ? "true" : "false") << "\n";
    os << "monotone_margin: " << cx.fmt(r.monotone_margin) << "\n";
    os << "subsolution_ok: " << (r.subsolution_ok ? "true" : "false") << "\n";
    os << "sandwich_margin: " << cx.fmt(r.sandwich_margin) << "\n";
    os << "cauchy_gap: " << list(r.cauchy_gap) << "\n";
    for (const auto& w : r.warnings) os << "warning: " << w << "\n";
    return os.str();
}

// ---------------------------------------------------------------- experiments

void run_spectral(const RunConfig& c, Context& cx) {
    const std::string shape = c.str("domain", "shape", "");
    const double gamma = c.num("equation", "gamma");
    ConeSpec cone = cx.stage("eigen", [&] {
        return shape == "sector" ? sector_frequency(c.num("domain", "theta"))
                                 : cap_frequency(c.num("domain", "alpha"), static_cast<int>(c.integer("mesh", "cap_nodes", 1000)));
    });
    const auto cls = classify(cone, gamma);
    const double param = shape == "sector" ? c.num("domain", "theta") : c.num("domain", "alpha");
    std::string row = shape + "," + cx.fmt(param) + "," + cx.fmt(cone.lambda) + "," + cx.fmt(cone.phi) + "," +
                      cx.fmt(gamma) + "," + criticality_name(cls.cls) + "," + cx.fmt(cls.margin) + "\n";
    cx.write("spectral.csv", "shape,param,lambda,phi,gamma,class,margin\n" + row);
    std::ostringstream ef;
    ef << "angle,E\n" << std::setprecision(cx.precision);
    for (std::size_t i = 0; i < cone.nodes.size(); ++i) ef << cone.nodes[i] << ',' << cone.eigenfunction[i] << '\n';
    cx.write("eigenfunction.csv", ef.str());
    cx.put("lambda", cone.lambda);
    cx.put("phi", cone.phi);
    cx.put("class", std::string(criticality_name(cls.cls)));
    cx.put("margin", cls.margin);
    if (cone.shooting_lambda) {
        cx.put("shooting_lambda", *cone.shooting_lambda);
        cx.put("eigen_residual", cone.residual);
    }
}

void run_solve(const RunConfig& c, Context& cx) {
    const auto cfg = solver_config(c);
    const auto prob = cx.stage("mesh", [&] { return build_problem(c); });
    const auto res = cx.stage("solve", [&] { return solve_singular(*prob.mesh, cfg, prob.data); });
    std::ostringstream sol;
    write_field_csv(sol, *prob.mesh, res.u, cx.precision);
    cx.write("solution.csv", sol.str());
    cx.write("report.txt", report_text(res.report, cx));
    double umax = 0.0;
    for (double v : res.u.values) umax = std::max(umax, v);
    cx.put("unknowns", std::to_string(prob.mesh->unknowns));
    cx.put("levels", std::to_string(res.report.eps_schedule.size()));
    cx.put("eps_min", res.report.eps_schedule.back());
    cx.put("final_residual", res.report.final_residual);
    cx.put_bool("monotone_in_eps", res.report.monotone_in_eps);
    cx.put_bool("subsolution_ok", res.report.subsolution_ok);
    cx.put("max_u", umax);
    for (const auto& w : res.report.warnings) cx.man->warnings.push_back(w);
}

void run_ode(const RunConfig& c, Context& cx) {
    const std::string fam = c.str("ode", "family", "");
    std::ostringstream os;
    os << std::setprecision(cx.precision);
    if (fam == "log") {
        const auto a = c.list("ode", "a_values", {0.1, 1.0, 1.2815, 1.5, 10.0});
        const auto rep = critical_log_profile_check(a, c.num("ode", "t_hi", 0.1));
        os << "A,verdict\n";
        for (std::size_t i = 0; i < a.size(); ++i)
            os << a[i] << ',' << (rep.verdict[i] > 0 ? "sub" : rep.verdict[i] < 0 ? "super" : "neither") << '\n';
        cx.write("log_check.csv", os.str());
        cx.put("a_sub_max", rep.a_sub_max);
        cx.put("a_super_min", rep.a_super_min);
        cx.put("identity_residual", rep.identity_residual);
        return;
    }
    const double gamma = c.num("equation", "gamma");
    const int n = static_cast<int>(c.integer("ode", "samples", 200));
    OdeProfile p;
    if (fam == "flat") {
        const double param = c.num("ode", "param");
        FlatProfile fp(gamma, param);
        const double t_max = c.num("ode", "t_max", fp.finite_life() ? fp.life() : 1.0);
        p = flat_profile(gamma, param, t_max, n);
        cx.put("peak", fp.u_max());
        cx.put("t_star", fp.t_star());
        cx.put("life", fp.life());
    } else if (fam == "annulus") {
        const double r = c.num("ode", "inner_radius", 1.0), k = c.num("ode", "slope"), t_max = c.num("ode", "t_max", 1.5);
        cx.put("minimal_slope", annulus_minimal_slope(gamma, r, t_max));
        try {
            p = annulus_profile(gamma, r, k, t_max, n);
            cx.put_bool("exists", true);
        } catch (const ProfileExistenceError& e) {
            cx.put_bool("exists", false);
            cx.put("hitting_time", e.hitting_time);
        }
    } else {
        const double theta = c.has("domain", "theta") ? c.num("domain", "theta") : c.num("ode", "param");
        p = angular_profile(gamma, theta, static_cast<int>(c.integer("ode", "n_shoot", 256)));
        cx.put_bool("exists", p.exists);
        cx.put_bool("inconclusive", p.inconclusive);
        cx.put("threshold_theta", (1.0 + gamma) * M_PI / 2.0);
        if (p.exists) cx.put("shoot", p.shoot);
    }
    os << (fam == "angular" ? "omega,w\n" : "t,u\n");
    for (std::size_t i = 0; i < p.t.size(); ++i) os << p.t[i] << ',' << p.u[i] << '\n';
    cx.write("profile.csv", os.str());
    if (!p.t.empty()) {
        cx.put("peak_value", p.peak);
        cx.put("peak_at", p.peak_at);
    }
}

void run_fit(const RunConfig& c, Context& cx) {
    const auto cfg = solver_config(c);
    const auto prob = cx.stage("mesh", [&] { return build_problem(c); });
    const auto res = cx.stage("solve", [&] { return solve_singular(*prob.mesh, cfg, prob.data); });
    const double theta = c.num("domain", "theta");
    const auto t = geometric_depths(c.num("fit", "t_hi", 0.125), c.num("fit", "t_lo", 1.0 / 512),
                                    static_cast<int>(c.integer("fit", "per_octave", 4)));
    const auto u = sample_ray(*prob.mesh, res.u, c.num("fit", "omega", theta / 2), t);
    std::ostringstream os;
    os << "t,u\n" << std::setprecision(cx.precision);
    for (std::size_t i = 0; i < t.size(); ++i) os << t[i] << ',' << u[i] << '\n';
    cx.write("ray.csv", os.str());
    const auto pure = fit_growth(t, u, FitModel::pure);
    const double phi = c.num("fit", "phi_fixed", 2.0 / (1.0 + cfg.gamma));
    const auto logf = fit_growth(t, u, FitModel::log_augmented, phi);
    const auto free = fit_growth(t, u, FitModel::log_augmented);
    cx.put("alpha", pure.alpha);
    cx.put("rms_pure", pure.rms);
    cx.put("phi_fixed", phi);
    cx.put("log_power", logf.log_power);
    cx.put("rms_log", logf.rms);
    cx.put("rms_reduction", 1.0 - logf.rms / pure.rms);
    cx.put("free_alpha", free.alpha);
    cx.put("free_log_power", free.log_power);
    cx.put("class", std::string(criticality_name(classify(sector_frequency(theta), cfg.gamma).cls)));
}

void run_harnack(const RunConfig& c, Context& cx) {
    auto cfg = solver_config(c);
    const double theta = c.num("domain", "theta"), radius = c.num("domain", "radius", 1.0);
    const auto mesh = build_polar_mesh(make_sector(theta, radius), static_cast<int>(c.integer("mesh", "n_r", 0)),
                                       static_cast<int>(c.integer("mesh", "n_omega", 0)), c.num("mesh", "grading", 1.0));
    const double du = c.num("harnack", "data_u", 2.0), dv = c.num("harnack", "data_v", 1.0);
    const auto fu = boundary_field(*mesh, [&](Point2, int part) { return part == 3 ? du : 0.0; });
    const auto fv = boundary_field(*mesh, [&](Point2, int part) { return part == 3 ? dv : 0.0; });
    const auto u = cx.stage("solve_u", [&] { return solve_singular(*mesh, cfg, fu); });
    const auto v = cx.stage("solve_v", [&] { return solve_singular(*mesh, cfg, fv); });
    const auto depths = geometric_depths(c.num("harnack", "depth_hi", 0.125), c.num("harnack", "depth_lo", 1.0 / 256), 1);
    std::vector<Point2> path;
    for (double t : depths) path.push_back({t * std::cos(theta / 2), t * std::sin(theta / 2)});
    const double pr = c.num("harnack", "probe_radius", radius / 2);
    const auto rp = ratio_probe(
        u.u, v.u, *mesh, [&](Point2 x) { return std::hypot(x.x, x.y) <= pr; }, [](Point2) { return true; }, path, depths, pr,
        cfg.gamma);
    std::ostringstream os;
    os << "depth,u,v,ratio\n" << std::setprecision(cx.precision);
    for (std::size_t i = 0; i < depths.size(); ++i) os << depths[i] << ',' << rp.u[i] << ',' << rp.v[i] << ',' << rp.ratio[i] << '\n';
    cx.write("ratio.csv", os.str());
    cx.put("sup", rp.sup);
    cx.put("inf", rp.inf);
    cx.put("c_empirical", rp.c_empirical);
    cx.put("decay_rate", rp.decay_rate);
    cx.put("deviation_deepest", std::fabs(rp.ratio.back() - 1.0));
    cx.put_bool("finite", rp.finite);
}

void run_recursion(const RunConfig& c, Context& cx) {
    const std::string kind = c.str("recursion", "kind", "");
    const auto k_max = static_cast<std::size_t>(c.integer("recursion", "k_max", 1000000));
    RecursionTrace tr = cx.stage("iterate", [&] {
        if (kind == "ak") return ak_recursion(c.num("equation", "gamma", 1.0), c.num("recursion", "a1", 10.0), k_max);
        return sigma_recursion(c.num("recursion", "Q", 1.0), c.num("recursion", "q", 0.5),
                               kind == "sigma_geometric" ? SigmaMode::geometric : SigmaMode::harmonic, k_max);
    });
    std::ostringstream os;
    os << "k,value,scaled\n" << std::setprecision(cx.precision);
    for (std::size_t i = 0; i < tr.k.size(); ++i) os << tr.k[i] << ',' << tr.value[i] << ',' << tr.scaled[i] << '\n';
    cx.write("trace.csv", os.str());
    cx.put("scaled_final", tr.scaled_final);
    cx.put("scaled_sup", tr.scaled_sup);
    cx.put("predicted_limit", tr.predicted_limit);
    cx.put_bool("tail_monotone", tr.tail_monotone);
    if (kind == "ak") cx.put_bool("increasing", tr.increasing);
    if (kind == "sigma_geometric") cx.put("closed_form_error", tr.closed_form_error);
}

void run_counterexample(const RunConfig& c, Context& cx) {
    CounterexampleParams p;
    p.R = c.num("counterexample", "R", p.R);
    p.i_max = static_cast<int>(c.integer("counterexample", "i_max", p.i_max));
    p.gamma = c.num("counterexample", "gamma", p.gamma);
    p.k = c.num("counterexample", "k", 0.0);
    p.h = c.num("counterexample", "h", p.h);
    p.eps_min = c.num("counterexample", "eps_min", 0.0);
    p.eps_factor = c.num("counterexample", "eps_factor", p.eps_factor);
    p.apex_index = static_cast<int>(c.integer("counterexample", "apex_index", p.apex_index));
    p.refine_check = c.str("counterexample", "refine", "true") == "true";
    p.depths = c.list("counterexample", "depths", p.depths);
    const auto rep = cx.stage("experiment", [&] { return counterexample_experiment(p); });
    std::ostringstream mid, apex;
    mid << "level,h,depth,u,v,ratio\n" << std::setprecision(cx.precision);
    apex << "level,h,depth,u,v,ratio\n" << std::setprecision(cx.precision);
    auto dump = [&](const char* name, const CounterexampleLevel& l) {
        for (std::size_t i = 0; i < l.depths.size(); ++i) {
            mid << name << ',' << l.h << ',' << l.depths[i] << ',' << l.midline_u[i] << ',' << l.midline_v[i] << ','
                << l.midline_ratio[i] << '\n';
            apex << name << ',' << l.h << ',' << l.depths[i] << ',' << l.apex_u[i] << ',' << l.apex_v[i] << ','
                 << l.apex_ratio[i] << '\n';
        }
    };
    dump("fine", rep.fine);
    if (rep.coarse) dump("coarse", *rep.coarse);
    cx.write("midline.csv", mid.str());
    cx.write("apex.csv", apex.str());
    cx.put("k", rep.k);
    cx.put("k_min", rep.k_min);
    cx.put("apex_x", rep.apex_x);
    cx.put("apex_y", rep.apex_y);
    cx.put("min_u_minus_phi_h", rep.fine.min_u_minus_phi_h);
    cx.put("max_v_minus_psi_h", rep.fine.max_v_minus_psi_h);
    cx.put("min_u_minus_phi", rep.fine.min_u_minus_phi);
    cx.put("max_v_minus_psi", rep.fine.max_v_minus_psi);
    cx.put_bool("comparison_ok", rep.comparison_ok);
    cx.put("separation", rep.fine.separation);
    if (rep.coarse) {
        cx.put("separation_coarse", rep.coarse->separation);
        cx.put_bool("separation_grows", rep.separation_grows);
    }
}

void run_probe(const RunConfig& c, Context& cx) {
    const std::string kind = c.str("probe", "kind", "");
    std::ostringstream os;
    os << std::setprecision(cx.precision);
    if (kind == "interior_improvement") {
        DiskRegion disk({0.0, 0.0}, 1.0);
        const auto m = build_cartesian_mesh(disk, c.num("mesh", "h", 1.0 / 128));
        os << "t,c_est,center,exact_c,exact_center\n";
        for (double t : c.list("probe", "t", {1e-3, 0.1, 0.4})) {
            const auto r = interior_improvement(t, *m);
            os << t << ',' << r.c_est << ',' << r.center << ',' << interior_improvement_exact(t, 0.5) << ','
               << interior_improvement_exact(t, 0.0) << '\n';
            cx.put("center_t" + cx.fmt(t), r.center);
        }
        cx.write("improvement.csv", os.str());
    } else if (kind == "critical_source") {
        const double gamma = c.num("equation", "gamma", 1.0 / 3);
        const double theta = c.num("domain", "theta", (1.0 + gamma) * M_PI / 2);
        const auto m = build_polar_mesh(make_sector(theta, c.num("domain", "radius", 1.0)),
                                        static_cast<int>(c.integer("mesh", "n_r", 256)),
                                        static_cast<int>(c.integer("mesh", "n_omega", 128)), c.num("mesh", "grading", 1.03));
        const auto rep = critical_source_probe(*m, sector_frequency(theta), gamma, c.list("probe", "caps", {10, 100, 1000, 10000}));
        os << "cap,sup_w\n";
        for (std::size_t i = 0; i < rep.caps.size(); ++i) os << rep.caps[i] << ',' << rep.sup_w[i] << '\n';
        cx.write("source_probe.csv", os.str());
        cx.put("relative_change_last", rep.relative_change_last);
    } else if (kind == "harmonic_coefficient") {
        const auto cfg = solver_config(c);
        const auto m = build_cartesian_mesh(GraphDomain::flat(-1.0, 1.0, 1.0), c.num("mesh", "h", 1.0 / 128));
        const double data = c.num("domain", "data", 1.0);
        const auto bd = boundary_field(*m, [&](Point2, int part) { return part == 0 ? 0.0 : data; });
        const auto res = cx.stage("solve", [&] { return solve_singular(*m, cfg, bd); });
        const auto rep = harmonic_coefficient(res.u, *m, sector_frequency(M_PI), c.list("probe", "radii", {0.5, 0.25, 0.125, 0.0625}));
        os << "radius,coefficient\n";
        for (std::size_t i = 0; i < rep.radii.size(); ++i) os << rep.radii[i] << ',' << rep.coeff[i] << '\n';
        cx.write("coefficients.csv", os.str());
        cx.put("limit", rep.limit);
        cx.put("cauchy", rep.cauchy);
        cx.put_bool("converged", rep.converged);
    } else {
        const auto cfg = solver_config(c);
        const double radius = c.num("domain", "radius", 1.0);
        DiskRegion disk({0.0, 0.0}, radius);
        const auto m = build_cartesian_mesh(disk, c.num("mesh", "h", 1.0 / 128));
        const auto res = cx.stage("solve", [&] { return solve_singular(*m, cfg, make_field(*m)); });
        const auto chk = verify_nondegeneracy(res.u, *m, cfg, {c.num("probe", "center_x", 0.0), c.num("probe", "center_y", 0.0)},
                                              c.num("probe", "r", radius));
        os << "value,threshold,ok\n" << chk.value << ',' << chk.threshold << ',' << (chk.ok ? "true" : "false") << '\n';
        cx.write("nondegeneracy.csv", os.str());
        cx.put("value", chk.value);
        cx.put("threshold", chk.threshold);
        cx.put_bool("ok", chk.ok);
    }
}

std::string summary_text(const RunManifest& m) {
    std::ostringstream os;
    os << "experiment: " << m.experiment << "\n";
    for (const auto& [k, v] : m.summary) os << k << ": " << v << "\n";
    for (const auto& w : m.warnings) os << "warning: " << w << "\n";
    return os.str();
}

}  // namespace

std::string format_manifest(const RunManifest& m) {
    std::ostringstream os;
    os << "version: " << m.version << "\n";
    os << "experiment: " << m.experiment << "\n";
    os << "status: " << m.status << "\n";
    os << "exit_code: " << m.exit_code << "\n";
    os << "simd: " << kernels::isa_name(kernels::active_isa()) << "\n";
    if (!m.error.empty()) os << "error: " << m.error << "\n";
    for (const auto& w : m.warnings) os << "warning: " << w << "\n";
    for (const auto& [s, t] : m.timings) os << "timing." << s << ": " << std::setprecision(6) << t << "\n";
    for (const auto& f : m.files) os << "file: " << f.name << " " << f.bytes << " sha256:" << f.sha256 << "\n";
    os << "config:\n";
    std::istringstream in(m.config_echo);
    std::string line;
    while (std::getline(in, line)) os << "  " << line << "\n";
    return os.str();
}

RunManifest run(const RunConfig& cfg, const fs::path& out_dir) {
    RunManifest man;
    man.experiment = cfg.experiment;
    man.config_echo = cfg.canonical();
    Context cx{out_dir, static_cast<int>(cfg.integer("output", "precision", 17)), &man};
    const auto t0 = Clock::now();
    try {
        fs::create_directories(out_dir);
        const auto& e = cfg.experiment;
        if (e == "spectral") run_spectral(cfg, cx);
        else if (e == "solve") run_solve(cfg, cx);
        else if (e == "ode") run_ode(cfg, cx);
        else if (e == "fit") run_fit(cfg, cx);
        else if (e == "harnack") run_harnack(cfg, cx);
        else if (e == "recursion") run_recursion(cfg, cx);
        else if (e == "counterexample") run_counterexample(cfg, cx);
        else if (e == "probe") run_probe(cfg, cx);
        else throw ConfigError(ConfigErrorKind::range, "unknown experiment '" + e + "'");
        cx.write("summary.txt", summary_text(man));
    } catch (const ConfigError& ex) {
        man.status = "invalid_config";
        man.error = std::string(config_error_name(ex.kind)) + ": " + ex.what();
        man.exit_code = 3;
    } catch (const ConvergenceError& ex) {
        man.status = "convergence_failure";
        man.error = std::string(ex.what()) + " (residual " + cx.fmt(ex.residual) + ", iterations " +
                    std::to_string(ex.iterations) + ")";
        man.exit_code = 2;
    } catch (const std::exception& ex) {
        man.status = "error";
        man.error = ex.what();
        man.exit_code = 1;
    }
    man.timings.emplace_back("total", std::chrono::duration<double>(Clock::now() - t0).count());
    try {
        fs::create_directories(out_dir);
        std::ofstream(out_dir / "manifest.txt") << format_manifest(man);
    } catch (...) {
        // the caller still gets the manifest object
    }
    return man;
}

RunManifest sweep(const RunConfig& cfg, const fs::path& out_dir, int jobs) {
    RunManifest man;
    man.experiment = "sweep:" + cfg.experiment;
    man.config_echo = cfg.canonical();
    const auto t0 = Clock::now();
    try {
        const std::string key = cfg.str("sweep", "key", "");
        const std::string values = cfg.str("sweep", "values", "");
        if (key.empty()) throw ConfigError(ConfigErrorKind::missing, "sweep needs sweep.key");
        const auto dot = key.find('.');
        const std::string sec = dot == std::string::npos ? "" : key.substr(0, dot);
        const std::string k = dot == std::string::npos ? key : key.substr(dot + 1);
        std::vector<std::string> axis;
        {
            std::stringstream ss(values);
            std::string item;
            while (std::getline(ss, item, ',')) {
                const auto a = item.find_first_not_of(" \t"), b = item.find_last_not_of(" \t");
                if (a != std::string::npos) axis.push_back(item.substr(a, b - a + 1));
            }
        }
        if (axis.empty()) throw ConfigError(ConfigErrorKind::range, "sweep axis is empty");
        std::vector<RunConfig> subs;
        for (const auto& v : axis) {
            RunConfig sub = cfg;
            sub.entries.erase("sweep");
            sub.set(sec, k, v);
            validate_config(sub);
            subs.push_back(std::move(sub));
        }
        fs::create_directories(out_dir);
        std::vector<RunManifest> results(subs.size());
        const std::size_t width = static_cast<std::size_t>(std::max(1, jobs));
        for (std::size_t start = 0; start < subs.size(); start += width) {
            std::vector<std::future<RunManifest>> batch;
            for (std::size_t i = start; i < std::min(subs.size(), start + width); ++i)
                batch.push_back(std::async(jobs > 1 ? std::launch::async : std::launch::deferred,
                                           [&, i] { return run(subs[i], out_dir / ("run_" + std::to_string(i))); }));
            for (std::size_t i = 0; i < batch.size(); ++i) results[start + i] = batch[i].get();
        }
        // columns: union of summary keys in first-seen order
        std::vector<std::string> cols;
        for (const auto& r : results)
            for (const auto& [kk, vv] : r.summary)
                if (std::find(cols.begin(), cols.end(), kk) == cols.end()) cols.push_back(kk);
        std::ostringstream os;
        os << "index," << key << ",status";
        for (const auto& col : cols) os << ',' << col;
        os << '\n';
        for (std::size_t i = 0; i < results.size(); ++i) {
            const auto& r = results[i];
            std::string status = r.status;
            if (!r.error.empty()) {
                std::string e = r.error;
                std::replace(e.begin(), e.end(), ',', ';');
                std::replace(e.begin(), e.end(), '\n', ' ');
                status += ": " + e;
            }
            os << i << ',' << axis[i] << ',' << status;
            for (const auto& col : cols) {
                os << ',';
                for (const auto& [kk, vv] : r.summary)
                    if (kk == col) os << vv;
            }
            os << '\n';
            if (r.exit_code != 0) man.warnings.push_back("run_" + std::to_string(i) + " failed: " + r.error);
        }
        const std::string csv = os.str();
        std::ofstream(out_dir / "sweep.csv", std::ios::binary) << csv;
        man.files.push_back({"sweep.csv", sha256_hex(csv), csv.size()});
        man.summary.emplace_back("runs", std::to_string(results.size()));
    } catch (const ConfigError& ex) {
        man.status = "invalid_config";
        man.error = std::string(config_error_name(ex.kind)) + ": " + ex.what();
        man.exit_code = 3;
    } catch (const std::exception& ex) {
        man.status = "error";
        man.error = ex.what();
        man.exit_code = 1;
    }
    man.timings.emplace_back("total", std::chrono::duration<double>(Clock::now() - t0).count());
    try {
        fs::create_directories(out_dir);
        std::ofstream(out_dir / "manifest.txt") << format_manifest(man);
    } catch (...) {
    }
    return man;
}

}  // namespace slef
