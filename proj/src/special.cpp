#include "uowc/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "uowc/errors.hpp"

namespace uowc {

namespace {

constexpr double half_log_2pi = 0.91893853320467274178;

// B_{2k} / (2k (2k-1))
constexpr double stirling_coef[] = {
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360360.0,
    1.0 / 156.0,
    -3617.0 / 122400.0,
    43867.0 / 244188.0,
    -174611.0 / 125400.0,
};

// B_{2k} / (2k)
constexpr double digamma_coef[] = {
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
    -3617.0 / 8160.0,
};

void check_pole(cplx z)
{
    if (z.real() <= 0.5 && std::abs(z.imag()) < 1e-12) {
        double k = std::round(z.real());
        if (k <= 0 && std::abs(z.real() - k) < 1e-12)
            throw pole_error("log_gamma: argument at a pole of Gamma");
    }
}

bool stirling_ok(cplx z)
{
    return z.real() >= 0.0 && std::norm(z) >= 100.0;
}

int shift_count(cplx z)
{
    double x = z.real(), y2 = z.imag() * z.imag();
    int n = x < 0.0 ? static_cast<int>(std::ceil(-x)) : 0;
    if (y2 < 100.0) {
        double need = std::sqrt(100.0 - y2) - x;
        n = std::max(n, static_cast<int>(std::ceil(need)));
    }
    return n;
}

cplx fast_log(cplx z)
{
    return {0.5 * std::log(std::norm(z)), std::atan2(z.imag(), z.real())};
}

}  // namespace

cplx log_gamma_complex(cplx z)
{
    check_pole(z);
    int n = stirling_ok(z) ? 0 : shift_count(z);
    cplx shift_sum = 0.0;
    for (int k = 0; k < n; ++k)
        shift_sum += std::log(z + double(k));
    cplx w = z + double(n);
    cplx iw = 1.0 / w;
    cplx iw2 = iw * iw;
    cplx series = 0.0;
    cplx p = iw;
    for (double c : stirling_coef) {
        series += c * p;
        p *= iw2;
    }
    cplx r = (w - 0.5) * std::log(w) - w + half_log_2pi + series;
    return r - shift_sum;
}

cplx log_gamma_fast(cplx z)
{
    check_pole(z);
    int n = stirling_ok(z) ? 0 : shift_count(z);
    cplx prod = 1.0;
    for (int k = 0; k < n; ++k)
        prod *= z + double(k);
    cplx w = z + double(n);
    cplx iw = 1.0 / w;
    cplx iw2 = iw * iw;
    cplx series = 0.0;
    cplx p = iw;
    for (double c : stirling_coef) {
        series += c * p;
        p *= iw2;
    }
    cplx r = (w - 0.5) * fast_log(w) - w + half_log_2pi + series;
    return n ? r - fast_log(prod) : r;
}

cplx digamma_complex(cplx z)
{
    check_pole(z);
    int n = stirling_ok(z) ? 0 : shift_count(z);
    cplx acc = 0.0;
    for (int k = 0; k < n; ++k)
        acc += 1.0 / (z + double(k));
    cplx w = z + double(n);
    cplx iw2 = 1.0 / (w * w);
    cplx series = 0.0;
    cplx p = iw2;
    for (double c : digamma_coef) {
        series += c * p;
        p *= iw2;
    }
    return std::log(w) - 0.5 / w - series - acc;
}

namespace {

// log of x^a e^{-x} / Gamma(a)
double log_prefix(double a, double x)
{
    return a * std::log(x) - x - std::lgamma(a);
}

double p_series(double a, double x)
{
    double sum = 1.0 / a;
    double term = sum;
    for (int n = 1; n < 100000; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-17)
            break;
    }
    return std::exp(log_prefix(a, x)) * sum;
}

// modified Lentz on the Legendre continued fraction
double q_fraction(double a, double x)
{
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 100000; ++i) {
        double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-16)
            break;
    }
    return std::exp(log_prefix(a, x)) * h;
}

}  // namespace

double gamma_p(double a, double x)
{
    if (!(a > 0.0) || x < 0.0)
        throw precondition_violation("gamma_p: need a > 0, x >= 0");
    if (x == 0.0) return 0.0;
    if (std::isinf(x)) return 1.0;
    if (x < a + 1.0) return p_series(a, x);
    return 1.0 - q_fraction(a, x);
}

double gamma_q(double a, double x)
{
    if (!(a > 0.0) || x < 0.0)
        throw precondition_violation("gamma_q: need a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    if (x < a + 1.0) return 1.0 - p_series(a, x);
    return q_fraction(a, x);
}

}  // namespace uowc
