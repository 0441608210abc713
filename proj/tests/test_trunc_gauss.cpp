#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "gpcrbo/rng.hpp"
#include "gpcrbo/trunc_gauss.hpp"
#include "support/oracles.hpp"

using namespace gpcrbo;

TEST_CASE("norm_log_cdf reference values") {
    // z = 0: symmetry.
    CHECK(norm_log_cdf(0.0) == doctest::Approx(std::log(0.5)).epsilon(1e-14));
    // z = -8: deep tail; reference from the erfc route, which is still exact
    // there, and cross-checked against quadrature below.
    CHECK(norm_log_cdf(-8.0) == doctest::Approx(-35.013437159914545).epsilon(1e-12));
    // z = 5: complementary error function route.
    CHECK(norm_log_cdf(5.0) == doctest::Approx(-2.8665161296376427e-7).epsilon(1e-10));
}

TEST_CASE("norm_log_cdf agrees with quadrature on [-10, 10]") {
    for (double z = -10.0; z <= 10.01; z += 0.25) {
        double expected;
        if (z < -1.0) {
            // Factor out phi(z) so the integrand is O(1): with u = z - t,
            // Phi(z) = phi(z) * int_0^inf exp(-u^2/2 + z u) du.
            const double tail = oracles::integrate(
                [z](double u) { return std::exp(-0.5 * u * u + z * u); }, 0.0, 60.0, 1e-15);
            expected = -0.5 * z * z - 0.5 * std::log(2.0 * M_PI) + std::log(tail);
        } else {
            expected = std::log(
                oracles::integrate([](double t) { return norm_pdf(t); }, -45.0, z, 1e-15));
        }
        CHECK(norm_log_cdf(z) == doctest::Approx(expected).epsilon(1e-10));
    }
}

TEST_CASE("norm_log_cdf branch seam is continuous") {
    // The erfc and continued-fraction branches must agree around z = -6.
    for (double z = -7.0; z <= -5.0; z += 0.01) {
        const double via_erfc = std::log(0.5 * std::erfc(-z / std::sqrt(2.0)));
        CHECK(norm_log_cdf(z) == doctest::Approx(via_erfc).epsilon(1e-12));
    }
}

TEST_CASE("norm_log_cdf stays finite far into the tail") {
    for (double z : {-12.0, -20.0, -30.0, -38.0}) {
        const double v = norm_log_cdf(z);
        CHECK(std::isfinite(v));
        CHECK(v < -60.0);
    }
    CHECK(std::isfinite(norm_log_cdf(-100.0)));
    CHECK(norm_log_cdf(38.0) == doctest::Approx(0.0));
}

TEST_CASE("truncated_moments closed forms") {
    SUBCASE("standard normal clipped above zero") {
        const TruncatedMoments tm = truncated_moments(0.0, 1.0, 0.0, TruncSide::Upper);
        CHECK(tm.log_mass == doctest::Approx(std::log(0.5)).epsilon(1e-13));
        CHECK(tm.mean == doctest::Approx(-0.7978845608028654).epsilon(1e-12));
        CHECK(tm.variance == doctest::Approx(0.3633802276324187).epsilon(1e-12));
    }
    SUBCASE("mirror case") {
        const TruncatedMoments tm = truncated_moments(0.0, 1.0, 0.0, TruncSide::Lower);
        CHECK(tm.mean == doctest::Approx(0.7978845608028654).epsilon(1e-12));
        CHECK(tm.variance == doctest::Approx(0.3633802276324187).epsilon(1e-12));
    }
    SUBCASE("no truncation in the limit") {
        const double inf = std::numeric_limits<double>::infinity();
        const TruncatedMoments tm = truncated_moments(1.5, 2.0, inf, TruncSide::Upper);
        CHECK(tm.log_mass == doctest::Approx(0.0));
        CHECK(tm.mean == doctest::Approx(1.5));
        CHECK(tm.variance == doctest::Approx(2.0));
    }
    SUBCASE("rejects non-positive variance") {
        CHECK_THROWS_AS(truncated_moments(0.0, 0.0, 1.0, TruncSide::Upper),
                        InvalidArgumentError);
    }
    SUBCASE("deep tail returns the deterministic limit") {
        const TruncatedMoments tm = truncated_moments(0.0, 1.0, -30.0, TruncSide::Upper);
        CHECK(tm.log_mass < -300.0);
        CHECK(tm.mean == doctest::Approx(-30.0));
        CHECK(tm.variance == doctest::Approx(0.0));
    }
}

TEST_CASE("truncated_moments matches adaptive quadrature on random cases") {
    Rng rng(31);
    int checked = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const double mu = rng.uniform(-3.0, 3.0);
        const double var = 0.05 + 3.0 * rng.uniform();
        const double bound = rng.uniform(-6.0, 6.0);
        const bool upper = rng.uniform() < 0.5;
        const TruncatedMoments tm =
            truncated_moments(mu, var, bound, upper ? TruncSide::Upper : TruncSide::Lower);
        if (tm.log_mass < -30.0) continue;  // quadrature oracle unreliable there
        ++checked;
        const oracles::ScalarMoments om =
            oracles::truncated_moments_quadrature(mu, var, bound, upper);
        CHECK(std::abs(tm.mean - om.mean) < 1e-6);
        CHECK(tm.variance == doctest::Approx(om.variance).epsilon(1e-6));
        CHECK(std::exp(tm.log_mass) == doctest::Approx(om.mass).epsilon(1e-8));
    }
    CHECK(checked > 700);
}

TEST_CASE("upper and lower masses add to one") {
    Rng rng(77);
    for (int trial = 0; trial < 200; ++trial) {
        const double mu = rng.uniform(-2.0, 2.0);
        const double var = 0.1 + rng.uniform();
        const double bound = mu + std::sqrt(var) * rng.uniform(-6.0, 6.0);
        const double upper = std::exp(truncated_moments(mu, var, bound, TruncSide::Upper).log_mass);
        const double lower = std::exp(truncated_moments(mu, var, bound, TruncSide::Lower).log_mass);
        CHECK(upper + lower == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("truncation strictly shrinks the variance away from the deep tail") {
    Rng rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        const double mu = rng.uniform(-2.0, 2.0);
        const double var = 0.1 + rng.uniform();
        const double beta = rng.uniform(-7.9, 7.9);
        const double bound = mu + std::sqrt(var) * beta;
        const TruncatedMoments tm = truncated_moments(mu, var, bound, TruncSide::Upper);
        CHECK(tm.variance < var);
        CHECK(tm.mean <= mu);
    }
}
