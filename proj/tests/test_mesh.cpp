#include <doctest.h>

#include <cmath>
#include <sstream>

#include "slef/errors.hpp"
#include "slef/mesh.hpp"
#include "slef/spectral.hpp"

using namespace slef;

namespace {

// max over unknowns of |(L u)_i / W_i - target(X_i)|
double stencil_residual(const Mesh& m, const std::function<double(Point2)>& u, const std::function<double(Point2)>& target,
                        const std::function<bool(std::size_t)>& use = nullptr) {
    const auto lap = assemble_laplacian(m);
    const auto f = sample_field(m, [&](Point2 p, int) { return u(p); });
    const auto y = lap.apply(f);
    double r = 0.0;
    for (std::size_t i = 0; i < m.unknowns; ++i)
        if (!use || use(i)) r = std::max(r, std::fabs(y[i] / lap.weight[i] - target(m.points[i])));
    return r;
}

bool regular(const Mesh& m, std::size_t i) {
    for (const auto& a : m.arms[i])
        if (std::fabs(a.length - m.h) > 1e-12 * m.h) return false;
    return true;
}

}  // namespace

TEST_SUITE("mesh") {
    TEST_CASE("flat box counts") {
        auto m = build_cartesian_mesh(GraphDomain::flat(-1.0, 1.0, 1.0), 0.5);
        REQUIRE(m->unknowns == 3);
        for (std::size_t i = 0; i < 3; ++i) CHECK(m->points[i].y == 0.5);
        CHECK(m->points[0].x + m->points[1].x + m->points[2].x == doctest::Approx(0.0));
    }

    TEST_CASE("bumpy boundary fractions stay in (0,1]") {
        auto m = build_cartesian_mesh(bumpy_domain({2.0, 1}), 1.0 / 64);
        for (const auto& arms : m->arms)
            for (const auto& a : arms) {
                CHECK(a.length > 0.0);
                CHECK(a.length <= m->h * (1 + 1e-12));
            }
        CHECK(m->min_boundary_fraction() > 0.0);
    }

    TEST_CASE("tilted line cut lengths") {
        const double h = 1.0 / 32;
        auto m = build_cartesian_mesh(GraphDomain::tilted(0.5, -1.0, 1.0, 1.0), h);
        int cut = 0;
        for (std::size_t i = 0; i < m->unknowns; ++i) {
            const auto& down = m->arms[i][3];
            if (m->part[down.target] != 0) continue;
            const Point2 p = m->points[i];
            CHECK(down.length == doctest::Approx(p.y - 0.5 * p.x).epsilon(1e-10));
            ++cut;
        }
        CHECK(cut > 20);
    }

    TEST_CASE("polar mesh layout") {
        auto m = build_polar_mesh(make_sector(M_PI / 2, 1.0), 8, 8, 1.0);
        CHECK(m->dtheta == doctest::Approx(M_PI / 16));
        for (int k = 0; k <= 8; ++k) CHECK(m->radii[k] == doctest::Approx(k / 8.0));
        CHECK(m->unknowns == 6 * 7);

        auto g = build_polar_mesh(make_sector(M_PI / 2, 2.0), 64, 16, 1.1);
        const double first = 2.0 * 0.1 / (std::pow(1.1, 64) - 1.0);
        CHECK(g->radii[1] == doctest::Approx(first).epsilon(1e-12));
        double sum = 0.0;
        for (int k = 0; k < 64; ++k) sum += first * std::pow(1.1, k);
        CHECK(sum == doctest::Approx(2.0).epsilon(1e-12));
        CHECK(g->radii[64] == 2.0);
        CHECK_THROWS_AS(build_polar_mesh(make_sector(1.0, 1.0), 8, 8, 1.5), InvalidArgument);
    }

    TEST_CASE("regular Cartesian stencil") {
        DiskRegion disk({0.0, 0.0}, 1.0);
        const double h = 1.0 / 16;
        auto m = build_cartesian_mesh(disk, h);
        const auto lap = assemble_laplacian(*m);
        std::size_t checked = 0;
        for (std::size_t i = 0; i < m->unknowns; ++i) {
            if (!regular(*m, i)) continue;
            CHECK(lap.stiffness.entry(i, i) / lap.weight[i] == doctest::Approx(4.0 / (h * h)));
            for (const auto& a : m->arms[i])
                if (m->is_unknown(a.target))
                    CHECK(lap.stiffness.entry(i, a.target) / lap.weight[i] == doctest::Approx(-1.0 / (h * h)));
            ++checked;
        }
        CHECK(checked > 100);
    }

    TEST_CASE("second-degree exactness at regular nodes") {
        DiskRegion disk({0.1, -0.2}, 1.0);
        auto m = build_cartesian_mesh(disk, 1.0 / 32);
        auto reg = [&](std::size_t i) { return regular(*m, i); };
        CHECK(stencil_residual(*m, [](Point2 p) { return p.x * p.x + p.y * p.y; }, [](Point2) { return -4.0; }, reg) <= 1e-9);
        CHECK(stencil_residual(*m, [](Point2 p) { return p.x * p.x - p.y * p.y; }, [](Point2) { return 0.0; }, reg) <= 1e-9);
    }

    TEST_CASE("stiffness is symmetric on cut-cell meshes") {
        auto m = build_cartesian_mesh(bumpy_domain({2.0, 8}), 1.0 / 64);
        CHECK(assemble_laplacian(*m).stiffness.is_symmetric(1e-12));
    }

    TEST_CASE("polar stencil converges at second order") {
        // Im z^3 is harmonic; theta = pi/3 makes it the sector's first harmonic.
        // The radial flux error carries a 1/r factor, so the max is taken on r >= 1/4.
        auto u = [](Point2 p) { return 3 * p.x * p.x * p.y - p.y * p.y * p.y; };
        auto zero = [](Point2) { return 0.0; };
        std::vector<double> res;
        for (int n : {32, 64, 128}) {
            auto m = build_polar_mesh(make_sector(M_PI / 3, 1.0), n, n, 1.0);
            res.push_back(stencil_residual(*m, u, zero, [&](std::size_t i) { return m->native[i].x >= 0.25; }));
        }
        CHECK(std::log2(res[0] / res[1]) > 1.8);
        CHECK(std::log2(res[1] / res[2]) > 1.8);
    }

    TEST_CASE("1D Poisson error is second order") {
        std::vector<double> err;
        for (int n : {50, 100, 200}) {
            auto m = build_interval_mesh(0.0, 1.0, n, 1.0);
            const auto lap = assemble_laplacian(*m);
            std::vector<double> rhs(lap.weight);  // f = 1, zero data
            const auto x = solve_linear(lap.stiffness, rhs, 1e-14);
            double e = 0.0;
            for (std::size_t i = 0; i < m->unknowns; ++i) {
                const double t = m->points[i].x;
                e = std::max(e, std::fabs(x[i] - t * (1 - t) / 2));
            }
            err.push_back(e);
        }
        // the 3-point stencil is exact on quadratics
        CHECK(err.back() <= 1e-10);

        std::vector<double> err2;
        for (int n : {50, 100, 200}) {
            auto m = build_interval_mesh(0.0, 1.0, n, 2.0);
            const auto lap = assemble_laplacian(*m);
            std::vector<double> rhs(m->unknowns);
            for (std::size_t i = 0; i < m->unknowns; ++i) rhs[i] = lap.weight[i] * std::sin(M_PI * m->points[i].x) * M_PI * M_PI;
            const auto x = solve_linear(lap.stiffness, rhs, 1e-14);
            double e = 0.0;
            for (std::size_t i = 0; i < m->unknowns; ++i) e = std::max(e, std::fabs(x[i] - std::sin(M_PI * m->points[i].x)));
            err2.push_back(e);
        }
        CHECK(std::log2(err2[0] / err2[1]) > 1.8);
        CHECK(std::log2(err2[1] / err2[2]) > 1.8);
    }

    TEST_CASE("harmonic solves reproduce harmonic data") {
        BoxRegion sq(0.0, 1.0, 0.0, 1.0);
        auto m = build_cartesian_mesh(sq, 1.0 / 20);
        const auto c = harmonic_solve(*m, boundary_field(*m, [](Point2, int) { return 3.5; }));
        for (std::size_t i = 0; i < m->unknowns; ++i) CHECK(c[i] == doctest::Approx(3.5).epsilon(1e-10));
        const auto lin = harmonic_solve(*m, boundary_field(*m, [](Point2 p, int) { return p.x; }));
        double e = 0.0;
        for (std::size_t i = 0; i < m->unknowns; ++i) e = std::max(e, std::fabs(lin[i] - m->points[i].x));
        CHECK(e <= 1e-9);
    }

    TEST_CASE("sector harmonic replacement converges to H") {
        const auto cone = sector_frequency(2 * M_PI / 3);
        auto H = [&](Point2 p) { return h_sigma_eval(cone, p).value_or(0.0); };
        std::vector<double> err;
        for (int n : {32, 64, 128}) {
            auto m = build_polar_mesh(make_sector(2 * M_PI / 3, 1.0), n, n, 1.0);
            const auto u = harmonic_solve(*m, boundary_field(*m, [&](Point2 p, int) { return H(p); }));
            double e = 0.0;
            for (std::size_t i = 0; i < m->unknowns; ++i) e = std::max(e, std::fabs(u[i] - H(m->points[i])));
            err.push_back(e);
        }
        MESSAGE("sector H errors " << err[0] << " " << err[1] << " " << err[2]);
        CHECK(std::log2(err[0] / err[1]) > 1.5);
        CHECK(std::log2(err[1] / err[2]) > 1.5);
    }

    TEST_CASE("interpolation and fields") {
        DiskRegion disk({0.0, 0.0}, 1.0);
        auto m = build_cartesian_mesh(disk, 1.0 / 16);
        const auto f = sample_field(*m, [](Point2 p, int) { return 2 * p.x - p.y + 1; });
        CHECK(interpolate(*m, f, {0.13, -0.27}).value() == doctest::Approx(2 * 0.13 + 0.27 + 1));
        CHECK_FALSE(interpolate(*m, f, {2.0, 0.0}).has_value());

        auto other = build_cartesian_mesh(disk, 1.0 / 8);
        CHECK_THROWS(require_same_mesh(*other, f));

        std::ostringstream os;
        write_field_csv(os, *m, f);
        CHECK(os.str().rfind("x,y,value\n", 0) == 0);

        auto pm = build_polar_mesh(make_sector(M_PI / 2, 1.0), 16, 16, 1.0);
        const auto g = sample_field(*pm, [](Point2 p, int) { return std::hypot(p.x, p.y); });
        CHECK(interpolate_polar(*pm, g, 0.33, 0.4).value() == doctest::Approx(0.33));
    }
}
