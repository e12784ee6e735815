#include <doctest.h>

#include <cmath>

#include "gsub/error.hpp"
#include "gsub/hermite.hpp"
#include "gsub/marginals.hpp"
#include "gsub/oracles.hpp"

using namespace gsub;
using namespace gsub::oracles;

TEST_CASE("gauss_expect moments") {
    const auto rule = newton_hermite_rule(200);
    double sum = 0.0;
    for (double w : rule.weights) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(gauss_expect([](double x) { return x * x; }, rule) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(gauss_expect([](double x) { return std::pow(x, 4); }, rule) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(gauss_expect([](double x) { return std::pow(x, 6); }, rule) == doctest::Approx(15.0).epsilon(1e-12));
    // odd moments cancel in pairs; rounding is relative to E|X|^m, not to zero
    for (std::size_t m = 0; m <= 20; ++m) {
        const double scale = gaussian_moment(m + m % 2);
        INFO("m = " << m);
        CHECK(std::fabs(gauss_expect([m](double x) { return std::pow(x, static_cast<double>(m)); }, rule) -
                        gaussian_moment(m)) < 1e-12 * scale);
    }
    CHECK_THROWS((void)gauss_expect([](double x) { return 1.0 / (x - x); }, rule));
}

TEST_CASE("bivariate oracle") {
    const auto rule = newton_hermite_rule(200);
    auto id = [](double x) { return x; };
    auto h2 = [](double x) { return x * x - 1.0; };
    CHECK(bivariate_gauss_expect(id, id, 0.37, rule) == doctest::Approx(0.37).epsilon(1e-12));
    auto f = [](double x) { return std::exp(0.3 * x) + x * x; };
    auto g = [](double x) { return std::sin(x) + 2.0; };
    CHECK(bivariate_gauss_expect(f, g, 0.0, rule) ==
          doctest::Approx(gauss_expect(f, rule) * gauss_expect(g, rule)).epsilon(1e-12));
    CHECK(bivariate_gauss_expect(h2, h2, 0.5, rule) == doctest::Approx(2.0 * 0.25).epsilon(1e-12));
    CHECK_THROWS_AS((void)bivariate_gauss_expect(id, id, 1.01, rule), DomainError);
}

TEST_CASE("polynomial Hermite coefficients") {
    const auto sq = poly_hermite_coeffs({0, 0, 1});
    CHECK(sq.coefficients[0] == doctest::Approx(1.0));
    CHECK(sq.coefficients[1] == doctest::Approx(0.0));
    CHECK(sq.coefficients[2] == doctest::Approx(1.0));
    const auto sextic = poly_hermite_coeffs({1, 6, 7, -8, -5, 2, 1});
    CHECK(sextic.coefficients[1] == doctest::Approx(12.0).epsilon(1e-14));
    CHECK(hermite_rank(sextic) == 1);
    const auto h32 = poly_hermite_coeffs({-1, -3, 1, 1});
    CHECK(h32.coefficients[2] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(h32.coefficients[3] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::fabs(h32.coefficients[0]) < 1e-14);
    CHECK(std::fabs(h32.coefficients[1]) < 1e-14);
    CHECK(hermite_rank(h32) == 2);
}

TEST_CASE("quadrature order sweep plateaus for shipped transports") {
    for (const auto& m : {MarginalDistribution::exponential(), MarginalDistribution::uniform(),
                          MarginalDistribution::chisq1(), MarginalDistribution::student_t(5.0)}) {
        const auto t = build_transport(m, true);
        auto sq = [&](double x) { return t(x) * t(x); };
        const double a = gauss_expect(sq, newton_hermite_rule(200));
        const double b = gauss_expect(sq, newton_hermite_rule(400));
        INFO(m.name());
        CHECK(std::fabs(a - b) < 1e-8);
    }
}
