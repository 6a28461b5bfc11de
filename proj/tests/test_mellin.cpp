#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "uowc/channel.hpp"
#include "uowc/errors.hpp"
#include "uowc/metrics.hpp"

using namespace uowc;

namespace {

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// imaginary parts may differ by whole turns
double imag_gap(cplx a, cplx b)
{
    double d = std::remainder(a.imag() - b.imag(), 2 * std::numbers::pi);
    return std::abs(d);
}

const meijer_g_spec exp_spec{1, 0, 0, 1, {}, {0.0}, 1.0};
const meijer_g_spec ratio_spec{1, 1, 1, 1, {1.0}, {1.0}, 1.0};

}  // namespace

TEST_CASE("log gamma at simple points")
{
    CHECK(std::abs(log_gamma_complex({1.0, 0.0})) < 1e-15);
    CHECK(log_gamma_complex({0.5, 0.0}).real() == doctest::Approx(0.5 * std::log(std::numbers::pi)).epsilon(1e-14));
    CHECK(std::abs(log_gamma_complex({0.5, 0.0}).imag()) < 1e-15);
}

TEST_CASE("log gamma against reference values")
{
    struct ref {
        cplx z;
        double re, im;
    };
    // mpmath loggamma, 40 digits
    const ref refs[] = {
        {{1.0, 1.0}, -0.6509231993018563388852, -0.3016403204675331978875},
        {{0.5, 10.0}, -14.78902473474429345053, 13.03002003491108985081},
        {{-20.5, 3.0}, -51.22530367660339731947, -56.8294585318015808895},
        {{150.0, 200.0}, 490.9185021534544679608, 1042.922551997086227313},
        {{-49.5, 0.5}, -146.2919811300797218555, -155.1236045117751763842},
        {{3.7, -120.0}, -172.2562771796942094694, -459.4832427451595289609},
    };
    for (auto& r : refs) {
        cplx v = log_gamma_complex(r.z);
        CAPTURE(r.z);
        CHECK(std::abs(v.real() - r.re) <= 1e-12 * std::max(1.0, std::abs(r.re)));
        CHECK(imag_gap(v, {r.re, r.im}) <= 1e-12 * std::max(1.0, std::abs(r.im)));
    }
}

TEST_CASE("log gamma recurrence and reflection on the test strip")
{
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> re(-50.0, 200.0), im(-200.0, 200.0);
    for (int i = 0; i < 200; ++i) {
        cplx z{re(rng), im(rng)};
        if (std::abs(z.imag()) < 0.5) continue;
        cplx lhs = log_gamma_complex(z + 1.0);
        cplx rhs = log_gamma_complex(z) + std::log(z);
        CAPTURE(z);
        CHECK(std::abs(lhs.real() - rhs.real()) <= 1e-12 * std::max(1.0, std::abs(lhs.real())));
        CHECK(imag_gap(lhs, rhs) <= 1e-12 * std::max(1.0, std::abs(lhs.imag())));
    }
}

TEST_CASE("log gamma rejects poles")
{
    CHECK_THROWS_AS(log_gamma_complex({0.0, 0.0}), pole_error);
    CHECK_THROWS_AS(log_gamma_complex({-3.0, 1e-14}), pole_error);
}

TEST_CASE("contour for a single pole family")
{
    contour_spec c = choose_contour(exp_spec);
    CHECK(c.c > 0.0);
    CHECK(c.half_height > 0.0);
    CHECK(c.nodes >= 16);
}

TEST_CASE("contour of the strong-turbulence CDF term lies between the pole families")
{
    aperture_channel ch = channel_preset("strong", 30.0);
    fox_h_spec h = branch_of(ch, branch::generalized_gamma).cdf;
    // poles of Gamma(b_j + B_j s), j < m, and of Gamma(1 - a_j - A_j s), j < n
    double left = -INFINITY, right = INFINITY;
    for (int j = 0; j < h.m; ++j)
        for (int k = 0; k < 5; ++k)
            left = std::max(left, -(h.lower_params[j].first + k) / h.lower_params[j].second);
    for (int j = 0; j < h.n; ++j)
        for (int k = 0; k < 5; ++k)
            right = std::min(right, (1.0 - h.upper_params[j].first + k) / h.upper_params[j].second);
    CHECK(left == doctest::Approx(-std::min(ch.egg.a, std::pow(ch.pointing.rho, 2) / ch.egg.c)));
    contour_spec c = choose_contour(h);
    CHECK(c.c > left);
    CHECK(c.c < right);
}

TEST_CASE("overlapping pole families are infeasible")
{
    fox_h_spec h{1, 1, 1, 1, {{0.5, 1.0}}, {{-0.5, 1.0}}, 1.0};
    CHECK_THROWS_AS(choose_contour(h), contour_infeasible);
    CHECK_THROWS_AS(fox_h(h, 1.0), contour_infeasible);
}

TEST_CASE("identity suite")
{
    for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
        CAPTURE(x);
        CHECK(rel(meijer_g(exp_spec, x), std::exp(-x)) < 1e-8);
        CHECK(rel(meijer_g(ratio_spec, x), x / (1 + x)) < 1e-8);
    }
    CHECK(meijer_g(exp_spec, 1.0) == doctest::Approx(0.36787944).epsilon(1e-8));
    CHECK(meijer_g(ratio_spec, 1.0) == doctest::Approx(0.5).epsilon(1e-12));
    fox_h_spec h{1, 0, 0, 1, {}, {{0.0, 1.0}}, 1.0};
    CHECK(fox_h(h, 2.0) == doctest::Approx(0.13533528).epsilon(1e-8));
}

TEST_CASE("Meijer-G against reference values")
{
    double rho2 = 0.9875 * 0.9875;
    meijer_g_spec g{2, 1, 2, 3, {1.0, rho2 + 1}, {1.0, rho2, 0.0}, 1.0};
    // mpmath meijerg
    CHECK(rel(meijer_g(g, 0.5), 0.6951324261944209446559723) < 1e-10);
    CHECK(rel(meijer_g(g, 3.0), 1.014784733012325906808508) < 1e-10);
    double a = 0.7291, c = 30.3214, rc = rho2 / c;
    meijer_g_spec gg{2, 1, 2, 3, {1.0, rc + 1}, {a, rc, 0.0}, 1.0};
    CHECK(rel(meijer_g(gg, 0.7), 38.69488352235143509402205) < 1e-10);
    meijer_g_spec pdf{2, 0, 1, 2, {rc + 1}, {a, rc}, 1.0};
    CHECK(rel(meijer_g(pdf, 0.7), 0.4402448468675504735921696) < 1e-10);
}

TEST_CASE("Fox-H against direct quadrature of the contour")
{
    fox_h_spec h{2, 2, 3, 3, {{1.0, 1.0}, {0.0, 1.5}, {1.3, 1.0}}, {{0.7, 1.0}, {0.3, 1.0}, {0.0, 1.0}}, 1.0};
    // mpmath quadrature on Re s = -0.15
    CHECK(rel(fox_h(h, 0.8), 3.554068655216388421390975) < 1e-9);
    CHECK(rel(fox_h(h, 5.0), 4.044464427281053330603145) < 1e-9);
}

TEST_CASE("reduction chain on a random grid")
{
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (int i = 0; i < 20; ++i) {
        double b1 = u(rng), b2 = u(rng), x = u(rng);
        meijer_g_spec g{2, 1, 2, 3, {1.0, b2 + 1}, {b1, b2, 0.0}, u(rng)};
        double vg = meijer_g(g, x);
        fox_h_spec h = to_fox_h(g);
        double vh = fox_h(h, x);
        multi_fox_h_spec m;
        m.dim = 1;
        m.per_dim = {h};
        m.args = {x};
        double vm = multivariate_fox_h(m);
        CAPTURE(i);
        CHECK(rel(vh, vg) < 1e-10);
        CHECK(rel(vm, vh) < 1e-10);
    }
}

TEST_CASE("multivariate wrapper of the exponential")
{
    multi_fox_h_spec m;
    m.dim = 1;
    m.per_dim = {to_fox_h(exp_spec)};
    for (double x : {0.3, 1.0, 4.0}) {
        m.args = {x};
        CHECK(rel(multivariate_fox_h(m), std::exp(-x)) < 1e-10);
    }
}

TEST_CASE("dimension cap")
{
    multi_fox_h_spec m;
    m.dim = 4;
    m.per_dim.assign(4, to_fox_h(exp_spec));
    m.args.assign(4, 1.0);
    quadrature_config cfg;
    cfg.max_dim_exact = 3;
    CHECK_THROWS_AS(multivariate_fox_h(m, cfg), dimension_too_high);
}

TEST_CASE("separable product without mixing factors")
{
    multi_fox_h_spec m;
    m.dim = 2;
    m.per_dim = {to_fox_h(exp_spec), to_fox_h(ratio_spec)};
    m.args = {0.7, 2.0};
    CHECK(rel(multivariate_fox_h(m), std::exp(-0.7) * 2.0 / 3.0) < 1e-9);
}

TEST_CASE("conjugate symmetry of the integrand and vanishing imaginary part")
{
    fox_h_spec h{2, 2, 3, 3, {{1.0, 1.0}, {0.0, 1.5}, {1.3, 1.0}}, {{0.7, 1.0}, {0.3, 1.0}, {0.0, 1.0}}, 1.0};
    for (double t : {0.5, 3.0, 17.0}) {
        cplx s{-0.15, t};
        cplx a = fox_h_log_ratio(h, s), b = fox_h_log_ratio(h, std::conj(s));
        CHECK(std::abs(a.real() - b.real()) < 1e-12);
        CHECK(imag_gap(a, std::conj(b)) < 1e-12);
    }
    eval_report r = fox_h_report(h, 0.8);
    CHECK(r.imag_residual < 1e-10 * std::abs(r.value));
}

TEST_CASE("refinement does not increase the error estimate")
{
    fox_h_spec h = to_fox_h(exp_spec);
    for (double x : {0.1, 1.0, 10.0}) {
        double prev = INFINITY;
        for (int level = 0; level < 4; ++level) {
            eval_report r = fox_h_line(h, x, 0.5, level);
            CAPTURE(x);
            CAPTURE(level);
            CHECK(r.error_estimate <= std::max(prev, 1e-14));
            prev = r.error_estimate;
        }
    }
}

TEST_CASE("tensor and convolution routes agree")
{
    aperture_array arr = make_iid(channel_preset("moderate-a", 20.0), 2);
    auto terms = ber_iid_terms(arr, {1.0, 1.0});
    REQUIRE(!terms.empty());
    quadrature_config tensor, conv;
    tensor.route = multi_route::tensor;
    conv.route = multi_route::convolution;
    for (auto& t : terms) {
        double a = multivariate_fox_h(t.spec, tensor), b = multivariate_fox_h(t.spec, conv);
        CHECK(rel(a, b) < 1e-7);
    }
}

TEST_CASE("thread count does not change the result")
{
    aperture_array arr = make_iid(channel_preset("moderate-a", 20.0), 2);
    auto terms = ber_iid_terms(arr, {1.0, 1.0});
    quadrature_config one, many;
    one.route = many.route = multi_route::tensor;
    one.threads = 1;
    many.threads = 5;
    for (auto& t : terms) CHECK(multivariate_fox_h(t.spec, one) == multivariate_fox_h(t.spec, many));
}
