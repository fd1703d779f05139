#include <doctest.h>

#include <boost/math/special_functions/bessel.hpp>
#include <cmath>

#include "slef/errors.hpp"
#include "slef/spectral.hpp"

using namespace slef;

TEST_SUITE("spectral") {
    TEST_CASE("sector frequencies") {
        CHECK(sector_frequency(M_PI).phi == doctest::Approx(1.0));
        CHECK(sector_frequency(M_PI / 2).phi == doctest::Approx(2.0));
        CHECK(sector_frequency(M_PI / 2).lambda == doctest::Approx(4.0));
        CHECK(sector_frequency(3 * M_PI / 2).phi == doctest::Approx(2.0 / 3));
        const auto c = sector_frequency(1.0);
        double mx = 0.0;
        for (double e : c.eigenfunction) mx = std::max(mx, e);
        CHECK(mx == doctest::Approx(1.0));
    }

    TEST_CASE("hemisphere") {
        const auto c = cap_frequency(M_PI / 2, 1000);
        CHECK(c.lambda == doctest::Approx(2.0).epsilon(1e-3));
        CHECK(c.phi == doctest::Approx(1.0).epsilon(1e-3));
        REQUIRE(c.shooting_lambda);
        CHECK(std::fabs(*c.shooting_lambda - c.lambda) <= 1e-4);
        // E = cos s
        CHECK(eigenfunction_at(c, 1.0) == doctest::Approx(std::cos(1.0)).epsilon(1e-4));
    }

    TEST_CASE("small caps approach the planar disk") {
        // first zero of J0 from an independent source
        const double j0 = boost::math::cyl_bessel_j_zero(0.0, 1);
        const auto c = cap_frequency(0.05, 1000);
        CHECK(c.lambda * 0.05 * 0.05 == doctest::Approx(j0 * j0).epsilon(0.02));
    }

    TEST_CASE("cap eigenvalue against shooting") {
        const auto c = cap_frequency(2 * M_PI / 3, 1000);
        CHECK(c.lambda == doctest::Approx(cap_shooting_eigenvalue(2 * M_PI / 3)).epsilon(1e-4));
    }

    TEST_CASE("cap eigenvalue decreases with the aperture") {
        double prev = INFINITY;
        for (double a : {0.3, 0.7, 1.2, 1.6, 2.2, 2.8}) {
            const double l = cap_frequency(a, 400).lambda;
            CHECK(l < prev);
            prev = l;
        }
    }

    TEST_CASE("criticality classes") {
        const double g = 1.0 / 3;
        CHECK(classify(sector_frequency(M_PI / 2), g).cls == Criticality::subcritical);
        CHECK(classify(sector_frequency(2 * M_PI / 3), g).cls == Criticality::critical);
        CHECK(classify(sector_frequency(3 * M_PI / 2), g).cls == Criticality::supercritical);
        CHECK(classify_phi(1.5, g).margin == doctest::Approx(0.0));
        CHECK(std::string(criticality_name(Criticality::critical)) == "critical");
    }

    TEST_CASE("homogeneous harmonics") {
        const auto half = sector_frequency(M_PI);
        CHECK(h_sigma_eval(half, Point2{0.0, 0.3}).value() == doctest::Approx(0.3));
        CHECK_FALSE(h_sigma_eval(half, Point2{0.0, -0.3}).has_value());
        const auto q = sector_frequency(M_PI / 2);
        CHECK(h_sigma_eval(q, Point2{std::cos(M_PI / 4), std::sin(M_PI / 4)}).value() == doctest::Approx(1.0));
        const auto hemi = cap_frequency(M_PI / 2, 1000);
        CHECK(h_sigma_eval(hemi, Point3{0.0, 0.0, 0.4}).value() == doctest::Approx(0.4).epsilon(1e-3));
    }

    TEST_CASE("bad apertures") {
        CHECK_THROWS_AS(sector_frequency(0.0), InvalidArgument);
        CHECK_THROWS_AS(cap_frequency(4.0, 100), InvalidArgument);
    }
}
