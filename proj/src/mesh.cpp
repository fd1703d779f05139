#include "slef/mesh.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <string>

#include "slef/errors.hpp"

namespace slef {

namespace {

std::uint64_t next_mesh_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1);
}

}  // namespace

std::int32_t Mesh::at(std::int32_t i, std::int32_t j) const {
    if (i < 0 || j < 0 || i >= nx || j >= ny) return -1;
    return lookup[static_cast<std::size_t>(j) * nx + i];
}

double Mesh::characteristic_spacing() const {
    if (kind == MeshKind::cartesian) return h;
    double m = std::numeric_limits<double>::infinity();
    for (const auto& a : arms)
        for (const auto& arm : a)
            if (arm.target >= 0) m = std::min(m, arm.length);
    return m;
}

double Mesh::min_boundary_fraction() const {
    if (kind != MeshKind::cartesian) return 1.0;
    double m = 1.0;
    for (const auto& a : arms)
        for (const auto& arm : a) m = std::min(m, arm.length / h);
    return m;
}

Field make_field(const Mesh& m, double value) { return {m.id, std::vector<double>(m.size(), value)}; }

Field sample_field(const Mesh& m, const std::function<double(Point2, int)>& f) {
    Field out = make_field(m);
    for (std::size_t p = 0; p < m.size(); ++p) out[p] = f(m.points[p], m.part[p]);
    return out;
}

Field boundary_field(const Mesh& m, const std::function<double(Point2, int)>& f) {
    Field out = make_field(m);
    for (std::size_t p = m.unknowns; p < m.size(); ++p) out[p] = f(m.points[p], m.part[p]);
    return out;
}

void require_same_mesh(const Mesh& m, const Field& f) {
    if (f.mesh_id != m.id || f.size() != m.size()) throw InvalidArgument("field does not belong to this mesh");
}

// ---------------------------------------------------------------- builders

namespace {

struct CartesianBuilder {
    const PlanarRegion& region;
    double h;
    double fold;
    std::int32_t nx = 0, ny = 0;  // node counts per axis
    Point2 origin;

    Point2 node(std::int32_t i, std::int32_t j) const { return {origin.x + i * h, origin.y + j * h}; }

    MeshPtr build() {
        const auto bb = region.bounding_box();
        const double w = bb[1] - bb[0], ht = bb[3] - bb[2];
        if (!(h > 0.0)) throw InvalidArgument("mesh spacing must be positive");
        if (!(h <= ht / 2.0)) throw InvalidArgument("mesh spacing must be at most half the box height");
        const double cx = w / h;
        if (std::fabs(cx - std::round(cx)) > 1e-9 * cx) throw InvalidArgument("h does not divide the box width");
        const auto cells_x = static_cast<std::int32_t>(std::llround(cx));
        const auto cells_y = static_cast<std::int32_t>(std::ceil(ht / h - 1e-9));
        origin = {bb[0], bb[3] - cells_y * h};
        nx = cells_x + 1;
        ny = cells_y + 1;

        const std::size_t ng = static_cast<std::size_t>(nx) * ny;
        std::vector<char> inside(ng, 0);
        for (std::int32_t j = 0; j < ny; ++j)
            for (std::int32_t i = 0; i < nx; ++i) inside[static_cast<std::size_t>(j) * nx + i] = region.inside(node(i, j));
        auto in = [&](std::int32_t i, std::int32_t j) {
            return i >= 0 && j >= 0 && i < nx && j < ny && inside[static_cast<std::size_t>(j) * nx + i];
        };
        static constexpr std::int32_t di[4] = {1, -1, 0, 0};
        static constexpr std::int32_t dj[4] = {0, 0, 1, -1};

        // pass 1: fractions for every inside node, fold the near-boundary ones
        std::vector<std::array<double, 4>> frac(ng);
        std::vector<char> unknown(ng, 0);
        std::size_t n_unknown = 0;
        for (std::int32_t j = 0; j < ny; ++j)
            for (std::int32_t i = 0; i < nx; ++i) {
                const std::size_t g = static_cast<std::size_t>(j) * nx + i;
                if (!inside[g]) continue;
                double smin = 1.0;
                for (int a = 0; a < 4; ++a) {
                    double s = 1.0;
                    if (!in(i + di[a], j + dj[a])) {
                        s = region.crossing_fraction(node(i, j), node(i + di[a], j + dj[a]));
                        if (s > 1.0 - 1e-12) s = 1.0;
                        if (!(s > 0.0)) s = 0.0;
                    }
                    frac[g][a] = s;
                    smin = std::min(smin, s);
                }
                if (smin >= fold) {
                    unknown[g] = 1;
                    ++n_unknown;
                }
            }
        if (n_unknown == 0) throw InvalidArgument("degenerate domain: no interior nodes");

        auto mesh = std::make_shared<Mesh>();
        Mesh& m = *mesh;
        m.kind = MeshKind::cartesian;
        m.id = next_mesh_id();
        m.h = h;
        m.origin = origin;
        m.nx = nx;
        m.ny = ny;
        m.fold_fraction = fold;
        m.lookup.assign(ng, -1);
        m.unknowns = n_unknown;
        m.points.reserve(n_unknown + n_unknown / 8 + 16);
        m.grid_coord.reserve(n_unknown);
        for (std::int32_t j = 0; j < ny; ++j)
            for (std::int32_t i = 0; i < nx; ++i) {
                const std::size_t g = static_cast<std::size_t>(j) * nx + i;
                if (!unknown[g]) continue;
                m.lookup[g] = static_cast<std::int32_t>(m.points.size());
                m.points.push_back(node(i, j));
                m.grid_coord.push_back({i, j});
            }
        m.part.assign(n_unknown, -1);

        auto grid_boundary_point = [&](std::int32_t i, std::int32_t j) {
            const std::size_t g = static_cast<std::size_t>(j) * nx + i;
            if (m.lookup[g] < 0) {
                m.lookup[g] = static_cast<std::int32_t>(m.points.size());
                m.points.push_back(node(i, j));
                m.part.push_back(region.boundary_part(node(i, j)));
            }
            return m.lookup[g];
        };

        // pass 2: arms
        m.arms.resize(n_unknown);
        for (std::size_t u = 0; u < n_unknown; ++u) {
            const auto [i, j] = m.grid_coord[u];
            const std::size_t g = static_cast<std::size_t>(j) * nx + i;
            for (int a = 0; a < 4; ++a) {
                const std::int32_t i2 = i + di[a], j2 = j + dj[a];
                Arm arm;
                if (in(i2, j2)) {
                    // inside neighbor: an unknown, or a folded node acting as boundary
                    arm.length = h;
                    const std::size_t g2 = static_cast<std::size_t>(j2) * nx + i2;
                    arm.target = unknown[g2] ? m.lookup[g2] : grid_boundary_point(i2, j2);
                } else if (frac[g][a] == 1.0) {
                    arm.length = h;
                    arm.target = grid_boundary_point(i2, j2);
                } else {
                    const double s = frac[g][a];
                    arm.length = s * h;
                    const Point2 p = node(i, j);
                    const Point2 b{p.x + s * di[a] * h, p.y + s * dj[a] * h};
                    arm.target = static_cast<std::int32_t>(m.points.size());
                    m.points.push_back(b);
                    m.part.push_back(region.boundary_part(b));
                }
                m.arms[u][a] = arm;
            }
        }
        m.native = m.points;
        return mesh;
    }
};

}  // namespace

MeshPtr build_cartesian_mesh(const PlanarRegion& region, double h, double fold_fraction) {
    if (!(fold_fraction > 0.0 && fold_fraction < 0.5)) throw InvalidArgument("fold fraction must lie in (0, 0.5)");
    CartesianBuilder b{region, h, fold_fraction, 0, 0, {}};
    return b.build();
}

MeshPtr build_cartesian_mesh(const GraphDomain& dom, double h, double fold_fraction) {
    GraphRegion r(dom);
    return build_cartesian_mesh(r, h, fold_fraction);
}

MeshPtr build_polar_mesh(const SectorDomain& sec, int n_r, int n_omega, double grading) {
    make_sector(sec.theta, sec.radius);
    if (n_r < 8 || n_omega < 8) throw InvalidArgument("polar mesh needs Nr, Nomega >= 8");
    if (!(grading >= 1.0 && grading <= 1.2)) throw InvalidArgument("invalid grading: must lie in [1, 1.2]");
    auto mesh = std::make_shared<Mesh>();
    Mesh& m = *mesh;
    m.kind = MeshKind::polar;
    m.id = next_mesh_id();
    m.theta = sec.theta;
    m.dtheta = sec.theta / n_omega;
    m.radii.resize(n_r + 1);
    for (int k = 0; k <= n_r; ++k)
        m.radii[k] = grading == 1.0 ? sec.radius * k / n_r
                                    : sec.radius * (std::pow(grading, k) - 1.0) / (std::pow(grading, n_r) - 1.0);
    m.radii[n_r] = sec.radius;
    m.nx = n_r + 1;
    m.ny = n_omega + 1;
    m.lookup.assign(static_cast<std::size_t>(m.nx) * m.ny, -1);
    auto add = [&](int k, int j, int part) {
        const double r = m.radii[k], w = j * m.dtheta;
        m.lookup[static_cast<std::size_t>(j) * m.nx + k] = static_cast<std::int32_t>(m.points.size());
        m.points.push_back({r * std::cos(w), r * std::sin(w)});
        m.native.push_back({r, w});
        m.part.push_back(part);
    };
    for (int j = 1; j < n_omega; ++j)
        for (int k = 2; k < n_r; ++k) {
            add(k, j, -1);
            m.grid_coord.push_back({k, j});
        }
    m.unknowns = m.points.size();
    for (int j = 1; j < n_omega; ++j) add(1, j, 0);
    for (int k = 2; k < n_r; ++k) add(k, 0, 1);
    for (int k = 2; k < n_r; ++k) add(k, n_omega, 2);
    for (int j = 1; j < n_omega; ++j) add(n_r, j, 3);
    m.arms.resize(m.unknowns);
    for (std::size_t u = 0; u < m.unknowns; ++u) {
        const auto [k, j] = m.grid_coord[u];
        const double r = m.radii[k];
        m.arms[u][0] = {m.at(k + 1, j), m.radii[k + 1] - r};
        m.arms[u][1] = {m.at(k - 1, j), r - m.radii[k - 1]};
        m.arms[u][2] = {m.at(k, j + 1), r * m.dtheta};
        m.arms[u][3] = {m.at(k, j - 1), r * m.dtheta};
    }
    m.h = 0.0;
    for (int k = 1; k <= n_r; ++k) m.h = std::max(m.h, m.radii[k] - m.radii[k - 1]);
    return mesh;
}

MeshPtr build_interval_mesh(double a, double b, int n, double grading_power) {
    if (!(b > a) || n < 2) throw InvalidArgument("interval mesh needs b > a and n >= 2");
    if (!(grading_power >= 1.0)) throw InvalidArgument("interval grading power must be >= 1");
    auto mesh = std::make_shared<Mesh>();
    Mesh& m = *mesh;
    m.kind = MeshKind::interval;
    m.id = next_mesh_id();
    std::vector<double> t(n + 1);
    for (int i = 0; i <= n; ++i) t[i] = a + (b - a) * std::pow(static_cast<double>(i) / n, grading_power);
    t[n] = b;
    m.nx = n + 1;
    m.ny = 1;
    m.lookup.assign(n + 1, -1);
    for (int i = 1; i < n; ++i) {
        m.lookup[i] = static_cast<std::int32_t>(m.points.size());
        m.points.push_back({t[i], 0.0});
        m.part.push_back(-1);
        m.grid_coord.push_back({i, 0});
    }
    m.unknowns = m.points.size();
    m.lookup[0] = static_cast<std::int32_t>(m.points.size());
    m.points.push_back({t[0], 0.0});
    m.part.push_back(0);
    m.lookup[n] = static_cast<std::int32_t>(m.points.size());
    m.points.push_back({t[n], 0.0});
    m.part.push_back(1);
    m.native = m.points;
    m.arms.resize(m.unknowns);
    for (std::size_t u = 0; u < m.unknowns; ++u) {
        const int i = m.grid_coord[u][0];
        m.arms[u][0] = {m.lookup[i + 1], t[i + 1] - t[i]};
        m.arms[u][1] = {m.lookup[i - 1], t[i] - t[i - 1]};
    }
    for (int i = 1; i <= n; ++i) m.h = std::max(m.h, t[i] - t[i - 1]);
    return mesh;
}

// ---------------------------------------------------------------- Laplacian

DiscreteLaplacian assemble_laplacian(const Mesh& m) {
    const std::size_t n = m.unknowns;
    DiscreteLaplacian lap;
    lap.weight.assign(n, 1.0);
    std::vector<std::int64_t> rp(n + 1, 0);
    std::vector<std::int32_t> ci;
    std::vector<double> cv;
    ci.reserve(5 * n);
    cv.reserve(5 * n);
    lap.bnd_ptr.assign(n + 1, 0);

    struct Entry {
        std::int32_t col;
        double v;
    };
    for (std::size_t u = 0; u < n; ++u) {
        const auto& arms = m.arms[u];
        double c[4] = {0, 0, 0, 0};
        switch (m.kind) {
            case MeshKind::cartesian:
                // symmetric Shortley-Weller: flux over the arm length, scaled by the nominal h
                for (int a = 0; a < 4; ++a) c[a] = 1.0 / (m.h * arms[a].length);
                break;
            case MeshKind::interval:
                c[0] = 1.0 / arms[0].length;
                c[1] = 1.0 / arms[1].length;
                lap.weight[u] = 0.5 * (arms[0].length + arms[1].length);
                break;
            case MeshKind::polar: {
                const double r = m.native[u].x;
                const double rp_ = m.native[arms[0].target].x, rm = m.native[arms[1].target].x;
                const double dp = arms[0].length, dm = arms[1].length, dw = m.dtheta;
                c[0] = 0.5 * (r + rp_) * dw / dp;
                c[1] = 0.5 * (r + rm) * dw / dm;
                c[2] = c[3] = 0.5 * (dp + dm) / (r * dw);
                lap.weight[u] = r * 0.5 * (dp + dm) * dw;
                break;
            }
        }
        Entry row[5];
        int cnt = 0;
        double diag = 0.0;
        for (int a = 0; a < 4; ++a) {
            const auto t = arms[a].target;
            if (t < 0) continue;
            diag += c[a];
            if (static_cast<std::size_t>(t) < n) {
                row[cnt++] = {t, -c[a]};
            } else {
                lap.bnd_point.push_back(t);
                lap.bnd_coeff.push_back(c[a]);
            }
        }
        row[cnt++] = {static_cast<std::int32_t>(u), diag};
        std::sort(row, row + cnt, [](const Entry& x, const Entry& y) { return x.col < y.col; });
        for (int k = 0; k < cnt; ++k) {
            if (k > 0 && row[k].col == row[k - 1].col) {
                cv.back() += row[k].v;
                continue;
            }
            ci.push_back(row[k].col);
            cv.push_back(row[k].v);
        }
        rp[u + 1] = static_cast<std::int64_t>(ci.size());
        lap.bnd_ptr[u + 1] = static_cast<std::int64_t>(lap.bnd_point.size());
    }
    lap.stiffness = CsrMatrix(n, std::move(rp), std::move(ci), std::move(cv));

    // M-matrix structure and symmetry are what the comparison arguments rest on
    const auto& S = lap.stiffness;
    for (std::size_t i = 0; i < n; ++i)
        for (auto k = S.row_ptr()[i]; k < S.row_ptr()[i + 1]; ++k) {
            const bool d = static_cast<std::size_t>(S.col_index()[k]) == i;
            if (d ? !(S.values()[k] > 0.0) : S.values()[k] > 0.0)
                throw InvariantViolation("assembled Laplacian is not an M-matrix at row " + std::to_string(i));
        }
    if (!S.is_symmetric(1e-12)) throw InvariantViolation("assembled Laplacian is not symmetric");
    return lap;
}

std::vector<double> DiscreteLaplacian::boundary_rhs(const Field& u) const {
    const std::size_t n = weight.size();
    std::vector<double> b(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (auto k = bnd_ptr[i]; k < bnd_ptr[i + 1]; ++k) b[i] += bnd_coeff[k] * u[bnd_point[k]];
    return b;
}

std::vector<double> DiscreteLaplacian::apply(const Field& u) const {
    const std::size_t n = weight.size();
    std::vector<double> y(n);
    stiffness.multiply(std::span<const double>(u.values.data(), n), y);
    auto b = boundary_rhs(u);
    for (std::size_t i = 0; i < n; ++i) y[i] -= b[i];
    return y;
}

Field harmonic_solve(const Mesh& m, const Field& data, LinearOptions opts) {
    require_same_mesh(m, data);
    const auto lap = assemble_laplacian(m);
    const auto b = lap.boundary_rhs(data);
    SpdSystemSolver solver(opts, m.grid_coord);
    solver.set_matrix(lap.stiffness);
    const auto x = solver.solve(b);
    Field out = data;
    std::copy(x.begin(), x.end(), out.values.begin());

    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t p = m.unknowns; p < m.size(); ++p) {
        lo = std::min(lo, data[p]);
        hi = std::max(hi, data[p]);
    }
    const double tol = 1e-10 * std::max(1.0, std::max(std::fabs(lo), std::fabs(hi)));
    for (std::size_t i = 0; i < m.unknowns; ++i)
        if (out[i] < lo - tol || out[i] > hi + tol)
            throw InvariantViolation("discrete maximum principle violated by harmonic_solve");
    return out;
}

Field masked_harmonic_solve(const Mesh& m, const DiscreteLaplacian& lap, const Field& f,
                            const std::vector<char>& mask) {
    require_same_mesh(m, f);
    const std::size_t n = m.unknowns;
    std::vector<std::int32_t> sub(n, -1);
    std::vector<std::array<std::int32_t, 2>> coords;
    std::size_t ns = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (mask[i]) {
            sub[i] = static_cast<std::int32_t>(ns++);
            coords.push_back(m.grid_coord[i]);
        }
    Field out = f;
    if (ns == 0) return out;
    const auto& S = lap.stiffness;
    std::vector<std::int64_t> rp(ns + 1, 0);
    std::vector<std::int32_t> ci;
    std::vector<double> cv;
    std::vector<double> rhs(ns, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (sub[i] < 0) continue;
        const auto r = sub[i];
        for (auto k = S.row_ptr()[i]; k < S.row_ptr()[i + 1]; ++k) {
            const auto c = S.col_index()[k];
            if (sub[c] >= 0) {
                ci.push_back(sub[c]);
                cv.push_back(S.values()[k]);
            } else {
                rhs[r] -= S.values()[k] * f[c];
            }
        }
        for (auto k = lap.bnd_ptr[i]; k < lap.bnd_ptr[i + 1]; ++k) rhs[r] += lap.bnd_coeff[k] * f[lap.bnd_point[k]];
        rp[r + 1] = static_cast<std::int64_t>(ci.size());
    }
    CsrMatrix A(ns, std::move(rp), std::move(ci), std::move(cv));
    SpdSystemSolver solver({}, std::move(coords));
    solver.set_matrix(A);
    const auto x = solver.solve(rhs);
    for (std::size_t i = 0; i < n; ++i)
        if (sub[i] >= 0) out[i] = x[sub[i]];
    return out;
}

// ---------------------------------------------------------------- interpolation

namespace {

// along grid column i (Cartesian): linear between the nodes / cut points bracketing y
std::optional<double> column_interp(const Mesh& m, const Field& f, std::int32_t i, double y) {
    const double fj = (y - m.origin.y) / m.h;
    auto j0 = static_cast<std::int32_t>(std::floor(fj));
    const double ty = fj - j0;
    if (ty < 1e-12) {
        if (auto p = m.at(i, j0); p >= 0) return f[p];
    }
    const auto p0 = m.at(i, j0), p1 = m.at(i, j0 + 1);
    if (p0 >= 0 && p1 >= 0) return (1 - ty) * f[p0] + ty * f[p1];
    // one end is a cut point reached through a vertical arm of the other
    auto try_arm = [&](std::int32_t p, int arm) -> std::optional<double> {
        if (p < 0 || !m.is_unknown(p)) return std::nullopt;
        const Arm& a = m.arms[p][arm];
        const double y0 = m.points[p].y, y1 = m.points[a.target].y;
        const double lo = std::min(y0, y1), hi = std::max(y0, y1);
        if (y < lo - 1e-14 || y > hi + 1e-14) return std::nullopt;
        const double t = (y - y0) / (y1 - y0);
        return (1 - t) * f[p] + t * f[a.target];
    };
    if (p0 >= 0) return try_arm(p0, 2);
    if (p1 >= 0) return try_arm(p1, 3);
    return std::nullopt;
}

}  // namespace

std::optional<double> interpolate_polar(const Mesh& m, const Field& f, double r, double w) {
    if (m.kind != MeshKind::polar) throw InvalidArgument("interpolate_polar on a non-polar mesh");
    const auto& R = m.radii;
    if (r < R[1] || r > R.back() || w < -1e-14 || w > m.theta + 1e-14) return std::nullopt;
    auto k = static_cast<std::int32_t>(std::upper_bound(R.begin(), R.end(), r) - R.begin()) - 1;
    k = std::clamp<std::int32_t>(k, 1, static_cast<std::int32_t>(R.size()) - 2);
    const double tr = (r - R[k]) / (R[k + 1] - R[k]);
    const double fw = w / m.dtheta;
    auto j = std::clamp<std::int32_t>(static_cast<std::int32_t>(std::floor(fw)), 0, m.ny - 2);
    const double tw = fw - j;
    auto val = [&](std::int32_t kk, std::int32_t jj) -> std::optional<double> {
        const auto p = m.at(kk, jj);
        if (p < 0) return std::nullopt;
        return f[p];
    };
    auto ray = [&](std::int32_t jj) -> std::optional<double> {
        auto a = val(k, jj), b = val(k + 1, jj);
        if (tr < 1e-14 && a) return a;
        if (tr > 1 - 1e-14 && b) return b;
        if (!a || !b) return std::nullopt;
        return (1 - tr) * *a + tr * *b;
    };
    if (tw < 1e-12) return ray(j);
    if (tw > 1 - 1e-12) return ray(j + 1);
    auto a = ray(j), b = ray(j + 1);
    if (!a || !b) return std::nullopt;
    return (1 - tw) * *a + tw * *b;
}

std::optional<double> interpolate(const Mesh& m, const Field& f, Point2 x) {
    require_same_mesh(m, f);
    switch (m.kind) {
        case MeshKind::interval: {
            const double t = x.x;
            const auto i1 = m.nx - 1;
            const double a = m.points[m.lookup[0]].x, b = m.points[m.lookup[i1]].x;
            if (t < a || t > b) return std::nullopt;
            // nodes are monotone in the grid index: bisect on it
            std::int32_t lo = 0, hi = i1;
            while (hi - lo > 1) {
                const auto mid = (lo + hi) / 2;
                if (m.points[m.lookup[mid]].x <= t)
                    lo = mid;
                else
                    hi = mid;
            }
            const auto p0 = m.lookup[lo], p1 = m.lookup[hi];
            const double t0 = m.points[p0].x, t1 = m.points[p1].x;
            const double s = (t - t0) / (t1 - t0);
            return (1 - s) * f[p0] + s * f[p1];
        }
        case MeshKind::polar: {
            double w = std::atan2(x.y, x.x);
            if (w < 0) w += 2.0 * M_PI;
            if (w > m.theta + 1e-12 && w > 2.0 * M_PI - 1e-12) w -= 2.0 * M_PI;
            return interpolate_polar(m, f, std::hypot(x.x, x.y), w);
        }
        case MeshKind::cartesian: {
            const double fi = (x.x - m.origin.x) / m.h, fj = (x.y - m.origin.y) / m.h;
            const auto i0 = static_cast<std::int32_t>(std::floor(fi));
            const auto j0 = static_cast<std::int32_t>(std::floor(fj));
            const double tx = fi - i0, ty = fj - j0;
            if (tx < 1e-9) return column_interp(m, f, i0, x.y);
            if (tx > 1 - 1e-9) return column_interp(m, f, i0 + 1, x.y);
            const std::int32_t p[4] = {m.at(i0, j0), m.at(i0 + 1, j0), m.at(i0, j0 + 1), m.at(i0 + 1, j0 + 1)};
            if (p[0] < 0 || p[1] < 0 || p[2] < 0 || p[3] < 0) return std::nullopt;
            return (1 - tx) * (1 - ty) * f[p[0]] + tx * (1 - ty) * f[p[1]] + (1 - tx) * ty * f[p[2]] +
                   tx * ty * f[p[3]];
        }
    }
    return std::nullopt;
}

void write_field_csv(std::ostream& os, const Mesh& m, const Field& f, int precision) {
    require_same_mesh(m, f);
    switch (m.kind) {
        case MeshKind::cartesian: os << "x,y,value\n"; break;
        case MeshKind::polar: os << "r,omega,value\n"; break;
        case MeshKind::interval: os << "t,value\n"; break;
    }
    os << std::setprecision(precision);
    for (std::size_t p = 0; p < m.size(); ++p) {
        if (m.kind == MeshKind::interval)
            os << m.native[p].x << ',' << f[p] << '\n';
        else
            os << m.native[p].x << ',' << m.native[p].y << ',' << f[p] << '\n';
    }
}

}  // namespace slef
