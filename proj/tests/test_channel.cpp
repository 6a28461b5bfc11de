#include <doctest.h>

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/gamma.hpp>

#include "uowc/errors.hpp"
#include "uowc/oracle.hpp"

using namespace uowc;

namespace {

double mass(const aperture_channel& ch)
{
    double split = avg_snr_linear(ch) * std::pow(effective_a0(ch), 2);
    return density_mass([&](double g) { return snr_pdf(ch, g); }, split, 1e-8);
}

struct moments {
    double mean = 0, se = 0;
};

template <class F>
moments sample_mean(F draw, long n)
{
    double s = 0, s2 = 0;
    for (long i = 0; i < n; ++i) {
        double x = draw();
        s += x;
        s2 += x * x;
    }
    double m = s / n;
    return {m, std::sqrt(std::max(s2 / n - m * m, 0.0) / n)};
}

}  // namespace

TEST_CASE("pdf normalization")
{
    aperture_channel ch = channel_preset("strong", 30.0);
    ch.egg = {1.0, 1.0, 1.0, 1.0, 1.0};
    ch.pointing = {1.0, 100.0, 0.0};
    CHECK(std::abs(mass(ch) - 1) < 1e-4);
    for (const auto& name : egg_preset_names()) {
        CAPTURE(name);
        CHECK(std::abs(mass(channel_preset(name, 30.0)) - 1) < 1e-4);
    }
}

TEST_CASE("cdf limits")
{
    aperture_channel ch = channel_preset("weak", 30.0);
    ch.pointing = {1.0, 100.0, 0.0};
    double gbar = avg_snr_linear(ch);
    CHECK(snr_cdf(ch, gbar * 1e-12) < 1e-6);
    CHECK(snr_cdf(ch, gbar * 1e6) == doctest::Approx(1.0).epsilon(1e-6));
    // with pointing error the lower tail is a power law of order rho^2 / 2
    aperture_channel st = channel_preset("strong", 30.0);
    double g1 = snr_cdf(st, gbar * 1e-20), g2 = snr_cdf(st, gbar * 1e-30);
    double expo = std::log10(g1 / g2) / 10.0;
    CHECK(expo == doctest::Approx(0.9875 * 0.9875 / 2).epsilon(0.03));
}

TEST_CASE("cdf is non-decreasing and matches the derivative of the pdf")
{
    for (const auto& name : {"strong", "moderate-b"}) {
        aperture_channel ch = channel_preset(name, 30.0);
        double gbar = avg_snr_linear(ch);
        double prev = -1;
        for (int i = 0; i < 100; ++i) {
            double g = gbar * std::pow(10.0, -6 + 12.0 * i / 99);
            double F = snr_cdf(ch, g);
            CHECK(F >= prev - 1e-12);
            prev = F;
        }
        // interior points: between the 1% and 99% quantiles
        auto quantile = [&](double p) {
            double lo = std::log(gbar) - 80, hi = std::log(gbar) + 10;
            for (int k = 0; k < 80; ++k) {
                double m = 0.5 * (lo + hi);
                (snr_cdf(ch, std::exp(m)) < p ? lo : hi) = m;
            }
            return 0.5 * (lo + hi);
        };
        double u0 = quantile(0.01), u1 = quantile(0.99);
        for (int i = 0; i < 10; ++i) {
            double g = std::exp(u0 + (u1 - u0) * i / 9);
            double h = g * 1e-5;
            double fd = (snr_cdf(ch, g + h) - snr_cdf(ch, g - h)) / (2 * h);
            CAPTURE(name);
            CAPTURE(g);
            CHECK(std::abs(fd / snr_pdf(ch, g) - 1) < 1e-3);
        }
    }
}

TEST_CASE("cdf rejects invalid parameters")
{
    aperture_channel ch = channel_preset("strong", 30.0);
    ch.egg.lambda = -1;
    CHECK_THROWS(snr_cdf(ch, 1.0));
    CHECK_THROWS(snr_pdf(channel_preset("strong", 30.0), -1.0));
}

TEST_CASE("turbulence sampler moments")
{
    rng_t rng(1);
    egg_params e{1.0, 2.0, 1.0, 1.0, 1.0};
    auto m = sample_mean([&] { return sample_turbulence(e, rng); }, 1'000'000);
    CHECK(std::abs(m.mean - 2.0) < 3 * 2.0 / 1000);
    egg_params g{0.0, 1.0, 1.0, 3.0, 1.0};
    m = sample_mean([&] { return sample_turbulence(g, rng); }, 1'000'000);
    CHECK(std::abs(m.mean - 3.0) < 3 * m.se);
}

TEST_CASE("turbulence sampler against the mixture cdf")
{
    egg_params e = egg_preset("strong");
    rng_t rng(5);
    std::vector<double> s(1'000'000);
    for (auto& x : s) x = sample_turbulence(e, rng);
    std::sort(s.begin(), s.end());
    auto cdf = [&](double h) {
        double gg = boost::math::gamma_p(e.a, std::pow(h / e.b, e.c));
        return e.omega * (1 - std::exp(-h / e.lambda)) + (1 - e.omega) * gg;
    };
    double ks = 0, n = double(s.size());
    for (size_t i = 0; i < s.size(); i += 97) {
        double F = cdf(s[i]);
        ks = std::max({ks, std::abs(F - i / n), std::abs(F - (i + 1) / n)});
    }
    CHECK(ks < 0.002);
}

TEST_CASE("pointing sampler")
{
    rng_t rng(2);
    pointing_params sharp{0.8, 100.0, 0.0};
    auto m = sample_mean([&] { return sample_pointing(sharp, rng); }, 1'000'000);
    CHECK(std::abs(m.mean - 0.8) < 1e-3);
    pointing_params flat{1.0, 1.0, 0.0};
    m = sample_mean([&] { return sample_pointing(flat, rng); }, 1'000'000);
    CHECK(std::abs(m.mean - 0.5) < 3 * m.se);
    pointing_params pe{0.1639, 0.9875, 0.0};
    m = sample_mean([&] { return sample_pointing(pe, rng); }, 1'000'000);
    double r2 = 0.9875 * 0.9875;
    CHECK(std::abs(m.mean - 0.1639 * r2 / (r2 + 1)) < 3 * m.se);
    for (int i = 0; i < 1000; ++i) {
        double h = sample_pointing(pe, rng);
        CHECK((h > 0 && h <= 0.1639));
    }
}

TEST_CASE("snr sample composes the channel factors")
{
    for (auto fold : {path_loss_fold::amplitude, path_loss_fold::snr, path_loss_fold::off}) {
        aperture_channel ch = channel_preset("strong", 25.0);
        ch.fold = fold;
        rng_t a(9), b(9);
        for (int i = 0; i < 100; ++i) {
            double g = sample_snr(ch, a);
            double h = sample_turbulence(ch.egg, b) * sample_pointing(ch.pointing, b);
            CHECK(g == doctest::Approx(avg_snr_linear(ch) * path_loss_power_gain(ch) * h * h).epsilon(1e-12));
        }
    }
}

TEST_CASE("snr sampler second moment")
{
    aperture_channel ch = channel_preset("weak", 20.0);
    ch.egg.omega = 0;
    ch.pointing = {1.0, 100.0, 0.0};
    rng_t rng(4);
    auto m = sample_mean([&] { return sample_snr(ch, rng); }, 1'000'000);
    const auto& e = ch.egg;
    double h2 = e.b * e.b * std::exp(std::lgamma(e.a + 2 / e.c) - std::lgamma(e.a));
    double pe2 = 1e4 / (1e4 + 2);  // E[h_pe^2] = rho^2 / (rho^2 + 2)
    CHECK(std::abs(m.mean - avg_snr_linear(ch) * h2 * pe2) < 3 * m.se);
}

TEST_CASE("snr samples against the analytic cdf")
{
    mc_config mc;
    mc.samples = 1'000'000;
    mc.master_seed = 17;
    auto rep = empirical_cdf_check(make_iid(channel_preset("strong", 30.0), 1), mc, 20);
    CHECK(rep.passed);
    CHECK(rep.max_deviation_se < 3.0);
}

TEST_CASE("empirical cdf at the average snr, 1e7 samples")
{
    aperture_channel ch = channel_preset("strong", 30.0);
    double gbar = avg_snr_linear(ch) * std::pow(effective_a0(ch), 2);
    mc_config mc;
    mc.samples = 10'000'000;
    mc.master_seed = 23;
    auto ci = monte_carlo_mean(make_iid(ch, 1), mc, [&](double g) { return g <= gbar ? 1.0 : 0.0; });
    CHECK(std::abs(ci.estimate - snr_cdf(ch, gbar)) < 3 * ci.std_error);
}
