#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

namespace uowc {

struct gl_rule {
    std::array<double, 16> x, w;
};

// 16-point Gauss-Legendre on [-1, 1], Newton on P_16
inline const gl_rule& gauss_legendre16()
{
    static const gl_rule rule = [] {
        gl_rule r;
        const int n = 16;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-16) break;
            }
            r.x[i] = x;
            r.w[i] = 2.0 / ((1.0 - x * x) * dp * dp);
        }
        return r;
    }();
    return rule;
}

template <class T>
T pairwise_sum(const T* v, size_t n)
{
    if (n == 0) return T(0);
    if (n <= 8) {
        T s = v[0];
        for (size_t i = 1; i < n; ++i) s += v[i];
        return s;
    }
    size_t h = n / 2;
    return pairwise_sum(v, h) + pairwise_sum(v + h, n - h);
}

template <class T>
T pairwise_sum(const std::vector<T>& v)
{
    return pairwise_sum(v.data(), v.size());
}

}  // namespace uowc
