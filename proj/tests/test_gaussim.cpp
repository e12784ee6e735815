#include <doctest.h>

#include <cmath>

#include "gsub/error.hpp"
#include "gsub/estimators.hpp"
#include "gsub/gaussim.hpp"

using namespace gsub;

namespace {

CovarianceSequence verified(std::vector<double> r) { return psd_check(CovarianceSequence(std::move(r))); }

std::vector<double> geometric_acf(double rho, std::size_t L) {
    std::vector<double> r(L + 1);
    for (std::size_t t = 0; t <= L; ++t) r[t] = std::pow(rho, static_cast<double>(t));
    return r;
}

}  // namespace

TEST_CASE("fgn_cov") {
    const auto half = fgn_cov(0.5, 20);
    for (std::size_t t = 1; t <= 20; ++t) CHECK(std::fabs(half[t]) < 1e-15);
    const auto r = fgn_cov(0.7, 1000);
    CHECK(r[0] == 1.0);
    CHECK(r[1] == doctest::Approx(0.5 * (std::pow(2.0, 1.4) - 2.0)).epsilon(1e-14));
    CHECK(r[1] == doctest::Approx(0.31951).epsilon(1e-4));
    CHECK(r[1000] / std::pow(1000.0, -0.6) == doctest::Approx(0.28).epsilon(0.05));
    // the tail continues by the same formula
    CHECK(r.extended(5000) / std::pow(5000.0, -0.6) == doctest::Approx(0.28).epsilon(0.01));
    CHECK_THROWS_AS((void)fgn_cov(1.0, 5), DomainError);
    CHECK_THROWS_AS((void)fgn_cov(0.0, 5), DomainError);
}

TEST_CASE("fGn partial sums grow like L^{2H-1}") {
    for (double h : {0.6, 0.7}) {
        const auto r = fgn_cov(h, 1 << 14);
        std::vector<double> x, y;
        double s = 0.0;
        std::size_t next = 1 << 8;
        for (std::size_t t = 1; t <= (1u << 14); ++t) {
            s += std::fabs(r[t]);
            if (t == next) {
                x.push_back(std::log(static_cast<double>(t)));
                y.push_back(std::log(s));
                next <<= 1;
            }
        }
        double mx = 0, my = 0;
        for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
        mx /= x.size();
        my /= y.size();
        double sxx = 0, sxy = 0;
        for (std::size_t i = 0; i < x.size(); ++i) sxx += (x[i] - mx) * (x[i] - mx), sxy += (x[i] - mx) * (y[i] - my);
        CHECK(sxy / sxx == doctest::Approx(2.0 * h - 1.0).epsilon(0.05 / (2.0 * h - 1.0)));
    }
}

TEST_CASE("Gaussian simulation: white noise and AR(1)-type") {
    const auto white = simulate_gaussian(verified({1.0, 0.0, 0.0}), 100000, 42);
    CHECK(white.values.size() == 100000);
    CHECK(std::fabs(acov_hat(white.values, 1)) < 0.01);
    CHECK(acov_hat(white.values, 0) == doctest::Approx(1.0).epsilon(0.02));

    const auto ar = simulate_gaussian(verified(geometric_acf(0.5, 30)), 100000, 42);
    CHECK(std::fabs(acov_hat(ar.values, 1) - 0.5) < 0.02);
    CHECK(ar.generator_id.rfind("circulant(", 0) == 0);

    const auto h = simulate_gaussian(fgn_cov(0.5, 10), 100000, 42);
    CHECK(std::fabs(acov_hat(h.values, 1)) < 0.01);
}

TEST_CASE("simulation is reproducible") {
    const auto r = verified(geometric_acf(0.5, 10));
    const auto a = simulate_gaussian(r, 5000, 7);
    const auto b = simulate_gaussian(r, 5000, 7);
    const auto c = simulate_gaussian(r, 5000, 8);
    CHECK(a.values == b.values);
    CHECK(a.fingerprint == b.fingerprint);
    CHECK(a.values != c.values);
    const GaussianSimulator sim(r, 100);
    CHECK(sim.sample(1, 0) == sim.sample(1, 0));
    CHECK(sim.sample(1, 0) != sim.sample(1, 1));
}

TEST_CASE("non-PSD input is refused") {
    CHECK_THROWS_AS(GaussianSimulator(CovarianceSequence({1.0, 0.5}), 10), PsdError);
    CHECK_THROWS_AS(GaussianSimulator(psd_check(CovarianceSequence({1.0, 0.9, 0.2})), 10), PsdError);
}

TEST_CASE("conditional sampling fallback") {
    // Toeplitz-PSD, but the zero-padded spectrum 1 + 1.8 cos(w) is negative near pi
    const auto r = verified({1.0, 0.9});
    const auto p = simulate_gaussian(r, 100000, 3);
    CHECK(p.generator_id == "levinson(L=1)");
    CHECK(acov_hat(p.values, 0) == doctest::Approx(1.0).epsilon(0.03));
    CHECK(acov_hat(p.values, 1) == doctest::Approx(0.9).epsilon(0.03));

    // spectrum 0.2 + 1.6c + 1.6c^2 (c = cos w) dips below zero at c = -1/2
    const auto r3 = verified({1.0, 0.8, 0.4});
    const GaussianSimulator sim(r3, 200000);
    INFO(sim.generator_id());
    const auto z = sim.sample(11, 0);
    CHECK(sim.generator_id() == "levinson(L=2)");
    for (std::size_t t = 0; t <= 2; ++t) CHECK(std::fabs(acov_hat(z, t) - r3[t]) < 0.02);
}

TEST_CASE("subordinated simulation") {
    const auto id = SubordinatedModel::calibrated(MarginalDistribution::normal(), geometric_acf(0.5, 30));
    CHECK(id.rank() == 1);
    const auto p = simulate_subordinated(id, 100000, 42);
    CHECK(std::fabs(mean_est(p.values)) < 0.02);

    const auto ex = SubordinatedModel::calibrated(MarginalDistribution::exponential(), geometric_acf(0.5, 20));
    CHECK(ex.rank() == 1);
    const auto z = simulate_subordinated(ex, 100000, 42);
    CHECK(ks_distance(z.values, MarginalDistribution::exponential()) < 0.01);
    const auto sigma = sigma_matrix_oracle(ex, 5);
    for (std::size_t t = 1; t <= 5; ++t) {
        const double se = std::sqrt(sigma.matrix(t, t) / 100000.0);
        INFO("lag " << t);
        CHECK(std::fabs(acov_hat(z.values, t) - std::pow(0.5, t)) < 3.0 * se);
    }
    CHECK(z.fingerprint == ex.fingerprint());
    CHECK(simulate_subordinated(ex, 100000, 42).values == z.values);
}

TEST_CASE("every shipped transport produces the right marginal") {
    for (const auto& m : {MarginalDistribution::normal(), MarginalDistribution::exponential(),
                          MarginalDistribution::uniform(), MarginalDistribution::chisq1(),
                          MarginalDistribution::student_t(5.0)}) {
        const auto model = SubordinatedModel::calibrated(m, geometric_acf(0.3, 5));
        const auto z = simulate_subordinated(model, 100000, 5);
        INFO(m.name());
        CHECK(ks_distance(z.values, m) < 0.01);
    }
}

TEST_CASE("calibrated model PSD handling") {
    CHECK_THROWS_AS((void)SubordinatedModel::calibrated(MarginalDistribution::normal(), {1.0, 0.9, 0.2}), PsdError);
    ModelOptions o;
    o.repair_psd = true;
    const auto m = SubordinatedModel::calibrated(MarginalDistribution::normal(), {1.0, 0.9, 0.2}, o);
    CHECK(m.r_x().repaired());
    CHECK_THROWS_AS((void)SubordinatedModel::calibrated(MarginalDistribution::normal(), {0.5, 0.2}), DomainError);
}

TEST_CASE("degenerate empirical marginal fails on model construction") {
    std::vector<double> c(50, 2.0);
    CHECK_THROWS_AS((void)SubordinatedModel::calibrated(MarginalDistribution::empirical(c), {1.0, 0.5}), DegenerateError);
}

TEST_CASE("model fingerprints") {
    const auto a = SubordinatedModel::calibrated(MarginalDistribution::exponential(), geometric_acf(0.5, 5));
    const auto b = SubordinatedModel::calibrated(MarginalDistribution::exponential(), geometric_acf(0.5, 5));
    const auto c = SubordinatedModel::calibrated(MarginalDistribution::exponential(), geometric_acf(0.4, 5));
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(a.fingerprint() != c.fingerprint());
    CHECK(a.acov(3) == doctest::Approx(0.125).epsilon(1e-9));
    CHECK(a.acov(6) == 0.0);
    CHECK(a.mean() == doctest::Approx(1.0));
}

TEST_CASE("linear process") {
    const auto w = linear_process({1.0}, MarginalDistribution::normal(), false, 100000, 1);
    CHECK(std::fabs(acov_hat(w.values, 1)) < 0.01);

    const LinearProcess ma({1.0, 0.5}, MarginalDistribution::normal(), false);
    CHECK(ma.acov(0) == doctest::Approx(1.25));
    CHECK(ma.acov(1) == doctest::Approx(0.5));
    CHECK(ma.acov(2) == 0.0);

    const LinearProcess mx({1.0, 0.5}, MarginalDistribution::exponential(), true);
    CHECK(mx.acov(0) == doctest::Approx(1.25));
    CHECK(mx.acov(1) == doctest::Approx(0.5));
    CHECK(mx.mean() == 0.0);
    const auto p = linear_process({1.0, 0.5}, MarginalDistribution::exponential(), true, 200000, 2);
    const double m = mean_est(p.values);
    double m3 = 0.0;
    for (double v : p.values) m3 += std::pow(v - m, 3);
    m3 /= static_cast<double>(p.values.size());
    CHECK(std::fabs(m) < 0.02);
    CHECK(acov_hat(p.values, 0) == doctest::Approx(1.25).epsilon(0.03));
    CHECK(acov_hat(p.values, 1) == doctest::Approx(0.5).epsilon(0.05));
    // third cumulant of the MA: 2 (1 + 0.125) for centered Exp(1) innovations
    CHECK(m3 == doctest::Approx(2.25).epsilon(0.1));
    // fourth central moment: sum phi^4 (9 - 3) + 3 (1.25)^2
    CHECK(*mx.fourth_moment() == doctest::Approx(6.0 * (1.0 + 0.0625) + 3.0 * 1.5625));
    CHECK_THROWS_AS(LinearProcess({}, MarginalDistribution::normal(), false), DomainError);
}
