#pragma once

#include <utility>
#include <vector>

#include "uowc/special.hpp"

namespace uowc {

// Integrands use the kernel (psi x)^{-s}:
//   (1/2 pi i) Int prod_{j<=m} G(b_j + B_j s) prod_{j<=n} G(1 - a_j - A_j s)
//     / (prod_{j>m} G(1 - b_j - B_j s) prod_{j>n} G(a_j + A_j s)) (psi x)^{-s} ds

struct meijer_g_spec {
    int m = 0, n = 0, p = 0, q = 0;
    std::vector<double> a_coeffs;
    std::vector<double> b_coeffs;
    double arg_scale = 1.0;
};

struct fox_h_spec {
    int m = 0, n = 0, p = 0, q = 0;
    std::vector<std::pair<double, double>> upper_params;  // (a_w, A_w)
    std::vector<std::pair<double, double>> lower_params;  // (b_w, B_w)
    double arg_scale = 1.0;
};

// Gamma(coeff + sum_l weights[l] s_l)
struct outer_gamma {
    double coeff = 0.0;
    std::vector<double> weights;
};

struct multi_fox_h_spec {
    int dim = 1;
    std::vector<outer_gamma> outer_upper;  // numerator
    std::vector<outer_gamma> outer_lower;  // denominator
    std::vector<fox_h_spec> per_dim;       // argument of dim l is per_dim[l].arg_scale * args[l]
    std::vector<double> args;
    // when non-empty, ln of the full dimension arguments; used instead of args
    // (strong-turbulence arguments leave the double range)
    std::vector<double> log_args;
};

struct contour_spec {
    double c = 0.0;
    double half_height = 1.0;
    int nodes = 16;
};

// tensor: product Gauss rule on the vertical lines.
// convolution: mixed Gamma factors sharing one linear form are written as the Mellin
// transform of a one-variable kernel K, leaving int K(t) prod_l H_l(z_l t^-beta_l) dt/t.
enum class multi_route { automatic, tensor, convolution };

struct quadrature_config {
    double rel_tol = 1e-10;
    int max_refinements = 8;
    int max_dim_exact = 3;
    // 1-D evaluators move the line across poles (adding residues) once |ln(psi x)| exceeds this
    double residue_shift_threshold = 20.0;
    // 0 means hardware concurrency
    int threads = 0;
    multi_route route = multi_route::automatic;
};

struct eval_report {
    double value = 0.0;
    double error_estimate = 0.0;
    double imag_residual = 0.0;
    double residue_part = 0.0;
    long nodes = 0;
    int refinements = 0;
    contour_spec contour;
};

fox_h_spec to_fox_h(const meijer_g_spec& g);
void validate(const meijer_g_spec& g);
void validate(const fox_h_spec& h);
void validate(const multi_fox_h_spec& h);

// open admissible strip of the vertical line (edges may be +-inf)
std::pair<double, double> admissible_strip(const fox_h_spec& h);

contour_spec choose_contour(const fox_h_spec& h, double x = 1.0,
                            const quadrature_config& cfg = {});
contour_spec choose_contour(const meijer_g_spec& g, double x = 1.0,
                            const quadrature_config& cfg = {});

double meijer_g(const meijer_g_spec& g, double x, const quadrature_config& cfg = {});
double fox_h(const fox_h_spec& h, double x, const quadrature_config& cfg = {});
double multivariate_fox_h(const multi_fox_h_spec& h, const quadrature_config& cfg = {});

// evaluation at z = exp(log_z); arg_scale is ignored
eval_report fox_h_at_log(const fox_h_spec& h, double log_z, const quadrature_config& cfg = {});
eval_report fox_h_report(const fox_h_spec& h, double x, const quadrature_config& cfg = {});
// quadrature on the fixed line c with no pole shifting, panel refinement level fixed
eval_report fox_h_line(const fox_h_spec& h, double x, double c, int level,
                       const quadrature_config& cfg = {});
eval_report multivariate_fox_h_report(const multi_fox_h_spec& h,
                                      const quadrature_config& cfg = {});

// log of the integrand ratio (without kernel) at s
cplx fox_h_log_ratio(const fox_h_spec& h, cplx s);

struct pole_term {
    double exponent = 0.0;     // H(z) ~ coeff * z^exponent as z -> 0
    double coeff = 0.0;
    bool tie = false;          // next pole closer than 1e-9: expansion degenerates
    double next_exponent = 0.0;
};

// leading term of the left-pole residue expansion, simple pole assumed
pole_term leading_left_residue(const fox_h_spec& h);

}  // namespace uowc
