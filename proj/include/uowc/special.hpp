#pragma once

#include <complex>

namespace uowc {

using cplx = std::complex<double>;

// principal branch, continuous along vertical lines
cplx log_gamma_complex(cplx z);
// same value modulo 2 pi i, cheaper; for use under exp()
cplx log_gamma_fast(cplx z);
cplx digamma_complex(cplx z);

// regularized incomplete gamma P(a,x), Q(a,x)
double gamma_p(double a, double x);
double gamma_q(double a, double x);

}  // namespace uowc
