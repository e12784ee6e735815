#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <sstream>

#include "gsub/covlink.hpp"
#include "gsub/error.hpp"
#include "gsub/hermite.hpp"
#include "gsub/oracles.hpp"

using namespace gsub;

namespace {

CovarianceLink identity_link() { return CovarianceLink(expansion_from_coefficients({0.0, 1.0})); }
CovarianceLink h2_link() { return CovarianceLink(expansion_from_coefficients({0.0, 0.0, 1.0})); }
CovarianceLink exp_link() {
    return CovarianceLink(expand_transport(build_transport(MarginalDistribution::exponential(), true)));
}

std::vector<double> geometric(double rho, std::size_t L, double scale = 1.0) {
    std::vector<double> r(L + 1);
    for (std::size_t t = 0; t <= L; ++t) r[t] = scale * std::pow(rho, static_cast<double>(t));
    return r;
}

}  // namespace

TEST_CASE("link_value examples") {
    CHECK(link_value(identity_link(), 0.3) == doctest::Approx(0.3).epsilon(1e-15));
    const auto rule = oracles::newton_hermite_rule(200);
    auto h2 = [](double x) { return x * x - 1.0; };
    CHECK(link_value(h2_link(), 0.5) == doctest::Approx(oracles::bivariate_gauss_expect(h2, h2, 0.5, rule)).epsilon(1e-12));
    CHECK(link_value(h2_link(), 0.5) == doctest::Approx(0.5));
    for (const auto& m : {MarginalDistribution::exponential(), MarginalDistribution::uniform(0.0, std::sqrt(12.0)),
                          MarginalDistribution::chisq1()}) {
        const CovarianceLink g(expand_transport(build_transport(m, true)));
        CHECK(link_value(g, 1.0) == doctest::Approx(m.variance()).epsilon(1e-8));
        CHECK(link_value(g, 0.0) == 0.0);
    }
    CHECK_THROWS_AS((void)link_value(identity_link(), 1.0001), DomainError);
}

TEST_CASE("gamma") {
    CHECK(identity_link().gamma() == doctest::Approx(-1.0));
    CHECK(h2_link().gamma() == doctest::Approx(0.0));
    // minimal correlation of two Exp(1) variables is 1 - pi^2/6 (countermonotone pair)
    CHECK(exp_link().gamma() == doctest::Approx(1.0 - std::numbers::pi * std::numbers::pi / 6.0).epsilon(1e-6));
    const auto g = exp_link();
    CHECK(g.gamma() <= 0.0);
    CHECK(g.gamma() >= -g.variance());
}

TEST_CASE("invert examples") {
    CHECK(invert(identity_link(), 0.3) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(invert(h2_link(), 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    try {
        (void)invert(h2_link(), -0.1);
        FAIL("expected AttainabilityError");
    } catch (const AttainabilityError& e) {
        CHECK(e.gamma() == doctest::Approx(0.0));
    }
    CHECK_THROWS_AS((void)invert(identity_link(), 1.5), DomainError);
}

TEST_CASE("round trip over [gamma, g(1)]") {
    for (const auto& g : {identity_link(), exp_link(),
                          CovarianceLink(expand_transport(build_transport(MarginalDistribution::chisq1(), true))),
                          CovarianceLink(expand_transport(build_transport(MarginalDistribution::uniform(), true)))}) {
        const double lo = g.gamma(), hi = g.variance();
        for (int i = 1; i < 200; ++i) {
            const double target = lo + (hi - lo) * i / 200.0;
            const double beta = invert(g, target);
            CHECK(std::fabs(link_value(g, beta) - target) <= 1e-10 * hi);
        }
    }
}

TEST_CASE("negative targets use the root nearest zero") {
    // g(b) = b + 2 b^2 has roots of g = -0.1 at about -0.138 and -0.362
    const auto g = CovarianceLink::from_weights({1.0, 2.0});
    const double b = invert(g, -0.1);
    CHECK(b == doctest::Approx((-1.0 + std::sqrt(1.0 - 0.8)) / 4.0).epsilon(1e-10));
}

TEST_CASE("g is increasing on [0,1]") {
    const auto g = exp_link();
    double prev = -1.0;
    for (int i = 0; i <= 1000; ++i) {
        const double v = link_value(g, i / 1000.0);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("psd_check examples") {
    CHECK(psd_check(CovarianceSequence({1.0, 0.5, 0.25})).psd_status() == PsdStatus::verified);
    CHECK(psd_check(CovarianceSequence({1.0, 0.0, 0.0, 0.0})).psd_status() == PsdStatus::verified);
    const auto bad = psd_check(CovarianceSequence({1.0, 0.9, 0.2}));
    CHECK(bad.psd_status() == PsdStatus::failed);
    Eigen::Matrix3d m;
    m << 1.0, 0.9, 0.2, 0.9, 1.0, 0.9, 0.2, 0.9, 1.0;
    CHECK(m.determinant() == doctest::Approx(-0.336));
    CHECK(bad.min_eigenvalue() < 0.0);
    CHECK(bad.min_eigenvalue() == doctest::Approx(Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(m).eigenvalues()[0]));
    const auto fixed = repair_psd(bad);
    CHECK(fixed.psd_status() == PsdStatus::verified);
    CHECK(fixed.repaired());
    CHECK(fixed[0] == doctest::Approx(1.0));
}

TEST_CASE("sequence invariants") {
    CHECK_THROWS_AS(CovarianceSequence({0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(CovarianceSequence({1.0, 1.5}), DomainError);
    CHECK_THROWS_AS(CovarianceSequence({}), DomainError);
}

TEST_CASE("calibrate examples") {
    const auto id = calibrate(identity_link(), CovarianceSequence(geometric(0.5, 10)));
    CHECK(id.r_x.psd_status() == PsdStatus::verified);
    for (std::size_t t = 0; t <= 10; ++t) CHECK(id.r_x[t] == doctest::Approx(std::pow(0.5, t)).epsilon(1e-12));
    CHECK(id.sandwich.upper_constant == doctest::Approx(1.0));
    CHECK(id.sandwich.lower_constant == doctest::Approx(1.0));
    CHECK(id.sandwich.rank == 1);

    const auto g = exp_link();
    const auto rz = CovarianceSequence(geometric(0.5, 20, g.variance()));
    const auto ex = calibrate(g, rz);
    CHECK(ex.r_x.psd_status() == PsdStatus::verified);
    CHECK(ex.max_residual < 1e-9);
    CHECK(ex.sandwich.pass);
    CHECK(ex.sandwich.upper_holds);
    CHECK(ex.sandwich.upper_constant == doctest::Approx(1.0).epsilon(1e-8));
    for (std::size_t t = 0; t <= 20; ++t) {
        CHECK(ex.r_x[t] >= rz[t]);
        CHECK(rz[t] >= 0.0);
    }

    try {
        (void)calibrate(h2_link(), CovarianceSequence({2.0, 1.0, -0.2, 0.1, -0.3}));
        FAIL("expected AttainabilityError");
    } catch (const AttainabilityError& e) {
        CHECK(e.lags() == std::vector<std::size_t>{2, 4});
    }
    CHECK_THROWS_AS((void)calibrate(identity_link(), CovarianceSequence({2.0, 0.5})), DomainError);
}

TEST_CASE("calibration keeps a failed PSD verdict and offers a repair") {
    const auto res = calibrate(identity_link(), CovarianceSequence({1.0, 0.9, 0.2}));
    CHECK(res.r_x.psd_status() == PsdStatus::failed);
    CHECK(res.usable() == nullptr);
    REQUIRE(res.repaired.has_value());
    CHECK(res.repaired->psd_status() == PsdStatus::verified);
    const auto allowed = calibrate(identity_link(), CovarianceSequence({1.0, 0.9, 0.2}), {true});
    REQUIRE(allowed.usable() != nullptr);
    CHECK(allowed.usable()->repaired());
}

TEST_CASE("sandwich skips zero lags") {
    const auto g = identity_link();
    const auto r = psd_check(CovarianceSequence({1.0, 0.0, 0.3}));
    const auto s = sandwich_check(g, r, r, 1);
    CHECK(s.skipped_lags == std::vector<std::size_t>{1});
    CHECK(s.pass);
}

TEST_CASE("calibration CSV") {
    const auto g = exp_link();
    const auto rz = CovarianceSequence(geometric(0.5, 3, g.variance()));
    std::ostringstream os;
    write_calibration_csv(os, rz, calibrate(g, rz));
    const std::string s = os.str();
    CHECK(s.rfind("tau,r_z,r_x,g_r_x,abs_error\n", 0) == 0);
    CHECK(s.find("# gamma=") != std::string::npos);
    CHECK(s.find("# psd_status=verified") != std::string::npos);
}

TEST_CASE("link equals the bivariate oracle for shipped transports") {
    const auto rule = oracles::newton_hermite_rule(200);
    for (const auto& m : {MarginalDistribution::normal(), MarginalDistribution::exponential(),
                          MarginalDistribution::uniform(), MarginalDistribution::chisq1(),
                          MarginalDistribution::student_t(5.0)}) {
        const auto t = build_transport(m, true);
        const CovarianceLink g(expand_transport(t));
        for (double rho : {-0.9, -0.5, 0.0, 0.3, 0.7, 0.99}) {
            const double oracle = oracles::bivariate_gauss_expect(t, t, rho, rule);
            INFO(m.name() << " rho=" << rho << " link=" << link_value(g, rho) << " oracle=" << oracle);
            CHECK(std::fabs(link_value(g, rho) - oracle) < 1e-6);
        }
    }
}

TEST_CASE("psd_check on long sequences") {
    std::vector<double> fgn(2001);
    fgn[0] = 1.0;
    for (std::size_t k = 1; k < fgn.size(); ++k) {
        const double t = static_cast<double>(k);
        fgn[k] = 0.5 * (std::pow(t + 1.0, 1.4) - 2.0 * std::pow(t, 1.4) + std::pow(t - 1.0, 1.4));
    }
    CHECK(psd_check(CovarianceSequence(fgn)).psd_status() == PsdStatus::verified);
    std::vector<double> bad(2001, 0.0);
    bad[0] = 1.0;
    bad[1] = 0.9;
    bad[2] = 0.2;
    const auto b = psd_check(CovarianceSequence(bad));
    CHECK(b.psd_status() == PsdStatus::failed);
    CHECK(b.min_eigenvalue() < 0.0);
    // singular but PSD: cosine covariance has rank 2
    std::vector<double> c(2001);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] = std::cos(0.3 * static_cast<double>(k));
    CHECK(psd_check(CovarianceSequence(c)).psd_status() == PsdStatus::verified);
}
