#include "slef/slef_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "slef/errors.hpp"

namespace slef {

SourceTerm SourceTerm::constant(double c) {
    return {[c](Point2) { return c; }, c, c};
}

void validate(const SleConfig& cfg) {
    if (!(cfg.gamma > 0.0)) throw InvalidArgument("gamma must be positive");
    if (!cfg.f.f) throw InvalidArgument("source term has no evaluator");
    if (!(cfg.f.lambda > 0.0 && cfg.f.lambda <= cfg.f.Lambda)) throw InvalidArgument("need 0 < lambda <= Lambda");
    if (!(cfg.eps_factor > 0.0 && cfg.eps_factor < 1.0)) throw InvalidArgument("eps_factor must lie in (0,1)");
    if (!(cfg.eps0 > 0.0)) throw InvalidArgument("eps0 must be positive");
    if (cfg.eps_min < 0.0) throw InvalidArgument("eps_min must be nonnegative");
    if (!(cfg.newton_tol > 0.0)) throw InvalidArgument("newton_tol must be positive");
    if (cfg.max_newton < 1) throw InvalidArgument("max_newton must be at least 1");
}

double default_eps_min(const Mesh& m, double gamma) {
    return std::pow(m.characteristic_spacing(), 2.0 / (1.0 + gamma));
}

std::vector<double> eps_schedule(const Mesh& m, const SleConfig& cfg, std::vector<std::string>* warnings) {
    validate(cfg);
    const double dflt = default_eps_min(m, cfg.gamma);
    const double emin = cfg.eps_min > 0.0 ? cfg.eps_min : dflt;
    if (warnings) {
        if (emin > dflt * (1.0 + 1e-12))
            warnings->push_back("eps_min " + std::to_string(emin) + " above mesh resolution " + std::to_string(dflt) +
                                ": truncation error not resolved");
        if (emin >= cfg.eps0) warnings->push_back("eps_min >= eps0: single regularized level");
    }
    std::vector<double> s;
    if (emin >= cfg.eps0) return {cfg.eps0};
    for (double e = cfg.eps0; e > emin * (1.0 + 1e-12); e *= cfg.eps_factor) s.push_back(e);
    s.push_back(emin);
    return s;
}

// ---------------------------------------------------------------- Newton

NewtonWorkspace::NewtonWorkspace(const Mesh& m, const DiscreteLaplacian& lap, const SleConfig& cfg)
    : lap_(lap), jac_(lap.stiffness), solver_(cfg.linear, m.grid_coord) {
    const std::size_t n = m.unknowns;
    wf_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double fv = cfg.f.f(m.points[i]);
        if (!(fv >= cfg.f.lambda * (1 - 1e-12) && fv <= cfg.f.Lambda * (1 + 1e-12)))
            throw InvalidArgument("source term outside its declared bounds");
        wf_[i] = lap.weight[i] * fv;
    }
    diag_pos_.resize(n);
    sdiag_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        diag_pos_[i] = jac_.diagonal_position(i);
        if (diag_pos_[i] < 0) throw InvariantViolation("stiffness row without diagonal");
        sdiag_[i] = jac_.values()[diag_pos_[i]];
    }
}

NewtonWorkspace::~NewtonWorkspace() = default;

namespace {

struct ResidualEval {
    std::vector<double> r;
    double scaled = 0.0;  // componentwise backward error max |r_i| / (|S||u| + |b| + W f u^-g)_i
    double norm = 0.0;    // max over rows of (|r_i| - rounding level) / W_i
    bool sub = true;      // r <= 0 up to rounding: still a subsolution
};

// Graded meshes put huge couplings next to tiny cell weights, so the raw
// residual there is pure rounding; it is discounted row by row.
ResidualEval residual(const DiscreteLaplacian& lap, const std::vector<double>& wf, double gamma,
                      const std::vector<double>& x, const std::vector<double>& b) {
    const std::size_t n = x.size();
    const auto& S = lap.stiffness;
    const auto& rp = S.row_ptr();
    const auto& ci = S.col_index();
    const auto& sv = S.values();
    ResidualEval e;
    e.r.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double sx = 0.0, ax = 0.0;
        for (auto k = rp[i]; k < rp[i + 1]; ++k) {
            const double t = sv[k] * x[ci[k]];
            sx += t;
            ax += std::fabs(t);
        }
        const double src = wf[i] * std::pow(x[i], -gamma);
        const double ri = sx - b[i] - src;
        const double noise = 1e-14 * (ax + std::fabs(b[i]));
        e.r[i] = ri;
        e.scaled = std::max(e.scaled, std::fabs(ri) / (ax + std::fabs(b[i]) + src));
        e.norm = std::max(e.norm, std::max(0.0, std::fabs(ri) - noise) / lap.weight[i]);
        e.sub = e.sub && ri <= noise;
    }
    return e;
}

}  // namespace

RegularizedResult solve_regularized(const Mesh& m, const SleConfig& cfg, const Field& boundary, double eps,
                                    const Field& init) {
    validate(cfg);
    const auto lap = assemble_laplacian(m);
    NewtonWorkspace ws(m, lap, cfg);
    return solve_regularized(m, cfg, boundary, eps, init, ws);
}

RegularizedResult solve_regularized(const Mesh& m, const SleConfig& cfg, const Field& boundary, double eps,
                                    const Field& init, NewtonWorkspace& ws) {
    require_same_mesh(m, boundary);
    require_same_mesh(m, init);
    if (!(eps > 0.0)) throw InvalidArgument("eps must be positive");
    const std::size_t n = m.unknowns;
    const double g = cfg.gamma;
    const double floor = 0.5 * eps;

    Field data = boundary;
    for (std::size_t p = n; p < m.size(); ++p) {
        if (!(boundary[p] >= 0.0)) throw InvalidArgument("boundary data must be nonnegative");
        data[p] = boundary[p] + eps;
    }
    std::vector<double> x(init.values.begin(), init.values.begin() + n);
    for (double v : x)
        if (!(v > 0.0)) throw InvalidArgument("initial guess must be positive on unknowns");
    for (double& v : x) v = std::max(v, floor);

    const auto& lap = ws.laplacian();
    const auto& wf = ws.weighted_source();
    const auto b = lap.boundary_rhs(data);
    auto& J = ws.jacobian();
    auto& jv = J.values();

    RegularizedResult out;
    auto ev = residual(lap, wf, g, x, b);
    std::vector<double> history{ev.norm};
    std::vector<double> trial(n), delta;
    for (int it = 1;; ++it) {
        if (it > cfg.max_newton)
            throw ConvergenceError("Newton iteration cap reached at eps=" + std::to_string(eps), ev.scaled,
                                   static_cast<std::size_t>(it - 1));
        for (std::size_t i = 0; i < n; ++i)
            jv[ws.diag_pos()[i]] = ws.stiff_diag()[i] + g * wf[i] * std::pow(x[i], -g - 1.0);
        ws.solver().set_matrix(J);
        std::vector<double> rhs(n);
        for (std::size_t i = 0; i < n; ++i) rhs[i] = -ev.r[i];
        delta = ws.solver().solve(rhs);

        // damping: stay above the floor, then halve until the residual does not grow.
        // From a subsolution the full step stays one (concavity), and is kept.
        double step = 1.0;
        ResidualEval tr;
        int halvings = 0;
        for (;; ++halvings) {
            bool above = true;
            for (std::size_t i = 0; i < n; ++i) {
                trial[i] = x[i] + step * delta[i];
                above = above && trial[i] >= floor;
            }
            if (above) {
                tr = residual(lap, wf, g, trial, b);
                if (tr.norm <= ev.norm || tr.sub || halvings >= 20) break;
            } else if (halvings >= 20) {
                for (std::size_t i = 0; i < n; ++i) trial[i] = std::max(trial[i], floor);
                tr = residual(lap, wf, g, trial, b);
                break;
            }
            step *= 0.5;
        }
        double dmax = 0.0, xmax = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            dmax = std::max(dmax, std::fabs(trial[i] - x[i]));
            xmax = std::max(xmax, std::fabs(trial[i]));
        }
        x.swap(trial);
        ev = std::move(tr);
        history.push_back(ev.norm);
        out.iterations = it;
        // the step test gives one extra quadratic step; at rounding level it cannot shrink further
        if (ev.scaled <= cfg.newton_tol && (dmax <= cfg.step_tol * std::max(1.0, xmax) || ev.scaled <= 1e-14)) break;
        if (ev.scaled > cfg.newton_tol && history.size() > 5) {
            const double before = history[history.size() - 6];
            if (ev.norm > 0.99 * before)
                throw ConvergenceError("Newton stagnation at eps=" + std::to_string(eps), ev.scaled,
                                       static_cast<std::size_t>(it));
        }
    }
    out.residual = ev.scaled;
    out.u = data;
    std::copy(x.begin(), x.end(), out.u.values.begin());
    return out;
}

// ---------------------------------------------------------------- continuation

SingularResult solve_singular(const Mesh& m, const SleConfig& cfg, const Field& boundary) {
    require_same_mesh(m, boundary);
    validate(cfg);
    const std::size_t n = m.unknowns;
    for (std::size_t p = n; p < m.size(); ++p)
        if (!(boundary[p] >= 0.0)) throw InvalidArgument("boundary data must be nonnegative");

    SingularResult res;
    auto& rep = res.report;
    rep.eps_schedule = eps_schedule(m, cfg, &rep.warnings);

    const auto lap = assemble_laplacian(m);
    NewtonWorkspace ws(m, lap, cfg);
    rep.backend = backend_name(ws.solver().backend());

    // harmonic replacement: a subsolution, and the start of the first level
    {
        SpdSystemSolver hs(cfg.linear, m.grid_coord);
        hs.set_matrix(lap.stiffness);
        const auto x = hs.solve(lap.boundary_rhs(boundary));
        res.harmonic = boundary;
        std::copy(x.begin(), x.end(), res.harmonic.values.begin());
    }

    Field init = res.harmonic;
    for (std::size_t i = 0; i < n; ++i) init[i] = std::max(init[i], 0.0) + rep.eps_schedule[0];
    Field prev;
    rep.monotone_margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < rep.eps_schedule.size(); ++j) {
        const double eps = rep.eps_schedule[j];
        if (j > 0) {
            // u_prev - (eps_prev - eps) is an exact subsolution of the next level
            const double d = rep.eps_schedule[j - 1] - eps;
            init = prev;
            for (std::size_t i = 0; i < n; ++i) init[i] = std::max(prev[i] - d, 0.5 * eps);
        }
        auto r = solve_regularized(m, cfg, boundary, eps, init, ws);
        rep.newton_iters.push_back(r.iterations);
        rep.residuals.push_back(r.residual);
        rep.final_residual = r.residual;
        if (j > 0) {
            double gap = 0.0, margin = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < n; ++i) {
                gap = std::max(gap, std::fabs(prev[i] - r.u[i]));
                margin = std::min(margin, prev[i] - r.u[i]);
            }
            rep.cauchy_gap.push_back(gap);
            rep.monotone_margin = std::min(rep.monotone_margin, margin);
            if (margin < -1e-10) {
                rep.monotone_in_eps = false;
                throw InvariantViolation("eps-monotonicity violated by " + std::to_string(-margin) + " at eps=" +
                                         std::to_string(eps));
            }
        }
        prev = std::move(r.u);
    }
    if (!std::isfinite(rep.monotone_margin)) rep.monotone_margin = 0.0;

    res.u = boundary;
    std::copy(prev.values.begin(), prev.values.begin() + n, res.u.values.begin());
    rep.sandwich_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) rep.sandwich_margin = std::min(rep.sandwich_margin, res.u[i] - res.harmonic[i]);
    if (n == 0) rep.sandwich_margin = 0.0;
    rep.subsolution_ok = rep.sandwich_margin >= -1e-10;
    rep.linear_iterations = ws.solver().total_iterations();
    return res;
}

// ---------------------------------------------------------------- invariants

bool verify_comparison(const Field& upper, const Field& lower, double tol) {
    if (upper.mesh_id != lower.mesh_id || upper.size() != lower.size())
        throw InvalidArgument("fields live on different meshes");
    for (std::size_t i = 0; i < upper.size(); ++i)
        if (upper[i] < lower[i] - tol) return false;
    return true;
}

NondegeneracyCheck verify_nondegeneracy(const Field& u, const Mesh& m, const SleConfig& cfg, Point2 center,
                                        double r) {
    require_same_mesh(m, u);
    validate(cfg);
    if (!(r > 0.0)) throw InvalidArgument("radius must be positive");
    // folded grid nodes sit up to fold_fraction*h inside the true boundary
    const double slack = m.fold_fraction * m.characteristic_spacing() + 1e-12 * r;
    for (std::size_t p = m.unknowns; p < m.size(); ++p) {
        const double d = std::hypot(m.points[p].x - center.x, m.points[p].y - center.y);
        if (d < r - slack) throw InvalidArgument("ball is not contained in the domain");
    }
    const auto v = interpolate(m, u, center);
    if (!v) throw InvalidArgument("ball center not resolvable on the mesh");
    NondegeneracyCheck c;
    c.value = *v;
    c.threshold = std::pow(4.0 / cfg.f.lambda, -1.0 / cfg.gamma) * std::pow(r, 2.0 / (1.0 + cfg.gamma));
    c.ok = c.value >= 0.95 * c.threshold;
    return c;
}

RescaleReport rescale_compare(const Field& u, const Mesh& m, const SleConfig& cfg) {
    require_same_mesh(m, u);
    if (m.kind != MeshKind::polar) throw InvalidArgument("rescale_compare needs a polar mesh");
    const double beta = 2.0 / (1.0 + cfg.gamma);
    const double scale = std::pow(2.0, beta);
    RescaleReport rep;
    rep.min_difference = std::numeric_limits<double>::infinity();
    for (std::size_t p = 0; p < m.size(); ++p) rep.max_u = std::max(rep.max_u, std::fabs(u[p]));
    const double r_inner = m.radii[1];
    for (std::size_t i = 0; i < m.unknowns; ++i) {
        const double r = m.native[i].x, w = m.native[i].y;
        if (0.5 * r < r_inner) continue;
        const auto half = interpolate_polar(m, u, 0.5 * r, w);
        if (!half) continue;
        rep.min_difference = std::min(rep.min_difference, scale * *half - u[i]);
        ++rep.compared;
    }
    if (rep.compared == 0) throw InvalidArgument("no node has its half-radius image on the mesh");
    return rep;
}

ResidualReport residual_check(const std::function<double(Point2)>& candidate, const Mesh& m, const SleConfig& cfg,
                              ResidualMode mode, const std::function<bool(Point2)>& guard, double tol_constant) {
    validate(cfg);
    const auto lap = assemble_laplacian(m);
    Field c = make_field(m);
    for (std::size_t p = 0; p < m.size(); ++p) c[p] = candidate(m.points[p]);
    const auto lc = lap.apply(c);
    ResidualReport rep;
    for (std::size_t i = 0; i < m.unknowns; ++i) {
        const Point2 x = m.points[i];
        if (guard && !guard(x)) {
            ++rep.guarded_out;
            continue;
        }
        if (!(c[i] > 0.0)) throw InvalidArgument("candidate must be positive at tested nodes");
        double h_loc = 0.0;
        for (const auto& a : m.arms[i]) h_loc = std::max(h_loc, a.length);
        const double lap_c = lc[i] / lap.weight[i];
        const double src = cfg.f.f(x) * std::pow(c[i], -cfg.gamma);
        const double s = lap_c - src;
        const double tol = tol_constant * std::sqrt(h_loc) * std::max(src, std::fabs(lap_c));
        const double excess = mode == ResidualMode::sub ? s - tol : -s - tol;
        ++rep.checked;
        if (excess > 0.0) {
            ++rep.violations;
            rep.violating.push_back(x);
            const double rel = excess / std::max(tol, 1e-300);
            if (rel > rep.worst) {
                rep.worst = rel;
                rep.worst_at = x;
            }
        }
    }
    return rep;
}

}  // namespace slef
