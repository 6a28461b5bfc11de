#include <doctest.h>

#include <cmath>
#include <random>

#include "uowc/errors.hpp"
#include "uowc/oracle.hpp"

using namespace uowc;

namespace {

aperture_array lambda_inid(int n, double db) { return make_inid(inid_varied(varied_param::lambda, n, db)); }

}  // namespace

TEST_CASE("single aperture combiner")
{
    aperture_channel ch = channel_preset("strong", 30.0);
    auto arr = make_iid(ch, 1);
    for (double g : {1e-3, 0.1, 3.0}) {
        CHECK(sc_cdf(arr, g) == snr_cdf(ch, g));
        CHECK(sc_pdf(arr, g) == snr_pdf(ch, g));
    }
}

TEST_CASE("i.i.d. power law and consistency with the i.ni.d. path")
{
    aperture_channel ch = channel_preset("moderate-a", 30.0);
    double g = 0.05;
    double F = snr_cdf(ch, g);
    auto iid = make_iid(ch, 3);
    CHECK(sc_cdf(iid, g) == doctest::Approx(F * F * F).epsilon(1e-14));
    auto inid = make_inid({ch, ch, ch});
    CHECK(std::abs(sc_cdf(inid, g) - sc_cdf(iid, g)) < 1e-12);
    CHECK(std::abs(sc_pdf(inid, g) - sc_pdf(iid, g)) < 1e-12 * std::max(1.0, sc_pdf(iid, g)));
}

TEST_CASE("sc pdf is the derivative of sc cdf")
{
    auto arr = lambda_inid(3, 30.0);
    const auto& ch = arr.channels[0];
    double scale = avg_snr_linear(ch) * std::pow(effective_a0(ch), 2);
    for (int i = 0; i < 10; ++i) {
        double g = scale * std::pow(10.0, -1.5 + 0.35 * i);
        double h = g * 1e-5;
        double fd = (sc_cdf(arr, g + h) - sc_cdf(arr, g - h)) / (2 * h);
        CAPTURE(g);
        CHECK(std::abs(fd / sc_pdf(arr, g) - 1) < 1e-3);
    }
}

TEST_CASE("sc pdf integrates to one, N = 5")
{
    auto arr = make_iid(channel_preset("strong", 30.0), 5);
    const auto& ch = arr.channels[0];
    double split = avg_snr_linear(ch) * std::pow(effective_a0(ch), 2);
    CHECK(std::abs(density_mass([&](double g) { return sc_pdf(arr, g); }, split, 1e-8) - 1) < 1e-4);
}

TEST_CASE("subset expansion")
{
    auto one = expand_product_of_sums(make_iid(channel_preset("strong", 0.0), 1));
    REQUIRE(one.size() == 2);
    CHECK(one[0].subset.empty());
    CHECK(one[1].subset == std::vector<int>{0});

    auto two = expand_product_of_sums(lambda_inid(2, 10.0));
    REQUIRE(two.size() == 4);
    // lexicographic by bitmask: g1'g2', g1 g2', g1' g2, g1 g2
    for (std::uint32_t m = 0; m < 4; ++m) {
        CHECK(two[m].mask == m);
        CHECK(two[m].tags[0] == ((m & 1) ? branch::exponential : branch::generalized_gamma));
        CHECK(two[m].tags[1] == ((m & 2) ? branch::exponential : branch::generalized_gamma));
        CHECK(two[m].subset.size() + two[m].complement.size() == 2);
    }

    auto arr = lambda_inid(3, 20.0);
    auto three = expand_product_of_sums(arr);
    CHECK(three.size() == 8);
    for (double g : {0.01, 0.3, 2.0}) {
        double s = 0;
        for (auto& t : three) s += subset_term_value(arr, t, g);
        CHECK(std::abs(s - sc_cdf(arr, g)) < 1e-10);
    }
    CHECK_THROWS_AS(expand_product_of_sums(make_iid(channel_preset("strong", 0.0), 11)), size_limit);
}

TEST_CASE("subset expansion equals the direct product on random draws")
{
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        int n = 1 + trial % 4;
        std::vector<aperture_channel> chs;
        for (int i = 0; i < n; ++i) {
            aperture_channel ch = channel_preset("strong", 10 + 30 * u(rng));
            ch.egg = {u(rng), 0.1 + u(rng), 0.05 + 3 * u(rng), 0.5 + 2 * u(rng), 1 + 40 * u(rng)};
            ch.pointing.rho = 0.5 + 3 * u(rng);
            chs.push_back(ch);
        }
        auto arr = make_inid(chs);
        double g = std::pow(10.0, -3 + 3 * u(rng));
        double s = 0;
        for (auto& t : expand_product_of_sums(arr)) s += subset_term_value(arr, t, g);
        CAPTURE(trial);
        CHECK(std::abs(s - sc_cdf(arr, g)) < 1e-10);
    }
}

TEST_CASE("more apertures shift the sc cdf to the right")
{
    aperture_channel ch = channel_preset("strong", 30.0);
    for (int i = 0; i < 20; ++i) {
        double g = std::pow(10.0, -6 + 0.4 * i);
        double prev = 2;
        for (int n = 1; n <= 5; ++n) {
            double F = sc_cdf(make_iid(ch, n), g);
            CHECK(F <= prev);
            prev = F;
        }
    }
}

TEST_CASE("sc sampler")
{
    aperture_channel ch = channel_preset("strong", 30.0);
    rng_t a(3), b(3);
    auto one = make_iid(ch, 1);
    for (int i = 0; i < 100; ++i) CHECK(sample_sc_snr(one, a) == sample_snr(ch, b));

    mc_config mc;
    mc.samples = 1'000'000;
    mc.master_seed = 29;
    auto rep = empirical_cdf_check(lambda_inid(2, 30.0), mc, 20);
    CHECK(rep.passed);

    mc.samples = 200'000;
    double prev = 0;
    for (int n : {1, 2, 3, 5}) {
        auto ci = monte_carlo_mean(make_iid(ch, n), mc, [](double g) { return g; });
        CHECK(ci.estimate >= prev);
        prev = ci.estimate;
    }
}
