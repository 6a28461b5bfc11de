#pragma once

#include <functional>

namespace uowc {

struct quad_result {
    double value = 0.0;
    double error = 0.0;
    int intervals = 0;
};

// adaptive Gauss-Kronrod (7/15) on [a, b]
quad_result integrate_gk(const std::function<double(double)>& f, double a, double b,
                         double rel_tol, double abs_tol = 0.0, int max_intervals = 4000);

}  // namespace uowc
