#include <doctest.h>

#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "uowc/oracle.hpp"

using namespace uowc;

TEST_CASE("BER of a constant cdf is one half")
{
    for (modulation_params m : {modulation_params{1, 1}, modulation_params{0.5, 1}, modulation_params{2, 3}})
        CHECK(ber_from_cdf([](double) { return 1.0; }, m, 1.0, 1e-8) == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("capacity of a point mass")
{
    // narrow lognormal around g0
    for (double g0 : {1.0, 3.0}) {
        double s = 1e-4;
        auto pdf = [&](double g) {
            double z = std::log(g / g0) / s;
            return std::exp(-0.5 * z * z) / (g * s * std::sqrt(2 * M_PI));
        };
        auto cdf = [&](double g) { return 0.5 * std::erfc(-std::log(g / g0) / (s * std::sqrt(2.0))); };
        CHECK(capacity_from_pdf(pdf, cdf, g0, 1e-8) == doctest::Approx(std::log2(1 + g0)).epsilon(1e-6));
    }
}

TEST_CASE("conditional BER kernel")
{
    CHECK(conditional_ber(0.0, {1, 1}) == 0.5);
    CHECK(conditional_ber(0.0, {0.5, 1}) == 0.5);
    CHECK(conditional_ber(1e6, {0.5, 1}) == 0.0);
    // mpmath regularized upper incomplete gamma
    CHECK(2 * conditional_ber(0.3, {1, 1}) == doctest::Approx(0.7408182206817178742916082).epsilon(1e-14));
    CHECK(2 * conditional_ber(2.0, {0.5, 1}) == doctest::Approx(0.04550026389635841440056527).epsilon(1e-13));
    CHECK(2 * conditional_ber(1e-4, {0.5, 1}) == doctest::Approx(0.9887165844441503828137481).epsilon(1e-14));
    CHECK(2 * conditional_ber(40.0, {1, 1}) == doctest::Approx(4.248354255291588995329235e-18).epsilon(1e-12));
    for (double p : {0.5, 1.0, 2.5})
        for (double x : {1e-6, 0.01, 0.7, 3.0, 12.0, 60.0}) {
            CAPTURE(p);
            CAPTURE(x);
            double ref = boost::math::gamma_q(p, x);
            CHECK(std::abs(2 * conditional_ber(x, {p, 1}) - ref) <= 1e-13 * std::max(ref, 1e-300) + 1e-300);
            CHECK(gamma_p(p, x) == doctest::Approx(boost::math::gamma_p(p, x)).epsilon(1e-13));
        }
}

TEST_CASE("quadrature and Monte Carlo agree")
{
    mc_config mc;
    mc.samples = 2'000'000;
    mc.master_seed = 41;
    auto arr = make_iid(channel_preset("strong", 40.0), 2);
    auto ci = ber_monte_carlo(arr, {1, 1}, mc);
    CHECK(std::abs(ci.estimate - ber_quadrature(arr, {1, 1})) < 3 * ci.std_error);
    CHECK(ci.samples_used == mc.samples);

    auto weak = make_iid(channel_preset("weak", 30.0), 1);
    auto cc = capacity_monte_carlo(weak, mc);
    CHECK(std::abs(cc.estimate - capacity_quadrature(weak)) < 3 * cc.std_error);
}

TEST_CASE("Monte Carlo is identical for any worker count")
{
    auto arr = make_iid(channel_preset("strong", 30.0), 2);
    mc_config mc;
    mc.samples = 300'000;
    mc.master_seed = 5;
    ci_result ref = ber_monte_carlo(arr, {1, 1}, mc);
    ci_result cref = capacity_monte_carlo(arr, mc);
    for (int w : {1, 4, 16}) {
        mc.workers = w;
        CHECK(ber_monte_carlo(arr, {1, 1}, mc) == ref);
        CHECK(capacity_monte_carlo(arr, mc) == cref);
    }
    mc.master_seed = 6;
    CHECK_FALSE(ber_monte_carlo(arr, {1, 1}, mc) == ref);
}

TEST_CASE("capacity grows with apertures at a fixed seed")
{
    mc_config mc;
    mc.samples = 200'000;
    double prev = 0;
    for (int n : {1, 2, 3, 5}) {
        double v = capacity_monte_carlo(make_iid(channel_preset("strong", 30.0), n), mc).estimate;
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("sampler check reports")
{
    mc_config mc;
    mc.samples = 1'000'000;
    mc.master_seed = 13;
    for (int n : {1, 2}) {
        auto rep = empirical_cdf_check(make_iid(channel_preset("strong", 30.0), n), mc);
        CHECK(rep.grid.size() == 50);
        CHECK(rep.passed);
    }
}
