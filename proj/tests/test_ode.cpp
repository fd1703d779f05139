#include <doctest.h>

#include <boost/math/special_functions/beta.hpp>
#include <cmath>

#include "slef/errors.hpp"
#include "slef/ode_lab.hpp"

using namespace slef;

TEST_SUITE("ode") {
    TEST_CASE("flat profile, gamma < 1: peak and energy") {
        FlatProfile f(0.5, 1.0);
        CHECK(f.u_max() == doctest::Approx(1.0 / 16));
        CHECK(f.t_star() == doctest::Approx(1.0 / 6).epsilon(1e-10));
        FlatProfile g(0.5, 1.6);
        for (double t : {0.01, 0.3, 0.6, 0.7, 1.0}) {
            const double u = g(t), d = g.derivative(t);
            CHECK(d * d + 4 * std::sqrt(u) == doctest::Approx(1.6 * 1.6).epsilon(1e-9));
        }
        CHECK(g(g.life()) == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(g(0.0) == 0.0);
        CHECK(g.initial_slope() == doctest::Approx(1.6));
    }

    TEST_CASE("flat profile time from the incomplete beta function") {
        // t(u) = u_max/(K(1-gamma)) B_sigma(2, 1/2), sigma = sqrt(u/u_max), for gamma = 1/2
        FlatProfile g(0.5, 1.6);
        for (double t : {0.05, 0.3, 0.6}) {
            const double u = g(t);
            const double sig = std::sqrt(u / g.u_max());
            const double tb = g.u_max() / (0.5 * 1.6) * boost::math::beta(2.0, 0.5, sig);
            CHECK(tb == doctest::Approx(t).epsilon(1e-8));
        }
        CHECK(g.t_star() == doctest::Approx(g.u_max() / 0.8 * boost::math::beta(2.0, 0.5)).epsilon(1e-10));
    }

    TEST_CASE("flat profile, gamma > 1") {
        // C = 0 power solution: A^(1+gamma) = (1+gamma)^2 / (2(gamma-1))
        FlatProfile h(3.0, 0.0);
        for (double t : {0.1, 1.0, 4.0}) CHECK(h(t) == doctest::Approx(std::sqrt(2.0 * t)).epsilon(1e-8));
        CHECK_FALSE(h.finite_life());
        // C < 0: u'^2 = C + 2/u vanishes at u = 2/|C|
        FlatProfile n(2.0, -1.0);
        CHECK(n.finite_life());
        CHECK(n.u_max() == doctest::Approx(2.0));
        CHECK(n(n.t_star()) == doctest::Approx(2.0).epsilon(1e-8));
        FlatProfile p(2.0, 1.0);
        const double u = p(1.0), d = p.derivative(1.0);
        CHECK(d * d == doctest::Approx(1.0 + 2.0 / u).epsilon(1e-8));
    }

    TEST_CASE("sampled flat profile") {
        const auto p = flat_profile(0.5, 1.0, 1.0 / 3, 100);
        CHECK(p.t.front() == 0.0);
        CHECK(p.u.front() == 0.0);
        CHECK(p.peak == doctest::Approx(1.0 / 16).epsilon(1e-6));
        CHECK(p.family == "flat");
    }

    TEST_CASE("annulus profile") {
        const double kmin = annulus_minimal_slope(0.5, 2.0, 1.5);
        CHECK(kmin > 0.0);
        AnnulusProfile a(0.5, 2.0, 1.25 * kmin, 1.5);
        CHECK(a(0.0) == 0.0);
        CHECK(a(1e-7) / 1e-7 == doctest::Approx(1.25 * kmin).epsilon(1e-3));
        CHECK(a(1.5) > 0.0);
        CHECK_THROWS_AS(AnnulusProfile(0.5, 2.0, 0.9 * kmin, 1.5), ProfileExistenceError);
        CHECK(std::isfinite(annulus_hitting_time(0.5, 2.0, 0.9 * kmin, 1.5)));
        // larger slope keeps the profile alive longer
        CHECK(annulus_minimal_slope(0.5, 2.0, 2.0) > kmin);
    }

    TEST_CASE("angular profile existence") {
        const auto a = angular_profile(1.0 / 3, M_PI / 2);
        CHECK(a.exists);
        CHECK(a.peak_at == doctest::Approx(M_PI / 4).epsilon(1e-6));
        CHECK_FALSE(angular_profile(1.0 / 3, 3 * M_PI / 4).exists);
        CHECK(angular_profile(2.0, M_PI / 2).exists);
    }

    TEST_CASE("critical log profile") {
        const auto r = critical_log_profile_check({0.1, 10.0}, 0.1);
        CHECK(r.verdict[0] == 1);
        CHECK(r.verdict[1] == -1);
        CHECK(r.identity_residual <= 1e-6);
        CHECK(r.a_sub_max < r.a_super_min);
    }
}
