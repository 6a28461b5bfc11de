#pragma once

#include <functional>
#include <vector>

#include "uowc/diversity.hpp"
#include "uowc/oracle.hpp"

namespace uowc {

// weight * H(spec); the metric is the sum of its terms
struct weighted_term {
    double weight = 0.0;
    multi_fox_h_spec spec;
};

// Branch terms carrying less probability mass than this are dropped.
inline constexpr double negligible_mass = 1e-15;

std::vector<weighted_term> ber_inid_terms(const aperture_array& arr, const modulation_params& mod);
std::vector<weighted_term> ber_iid_terms(const aperture_array& arr, const modulation_params& mod);
std::vector<weighted_term> ber_iid_approx_terms(const aperture_array& arr,
                                                const modulation_params& mod,
                                                const quadrature_config& cfg = {});
std::vector<weighted_term> capacity_inid_terms(const aperture_array& arr);
std::vector<weighted_term> capacity_iid_omega0_terms(const aperture_array& arr);
std::vector<weighted_term> capacity_iid_approx_omega0_terms(const aperture_array& arr,
                                                            const quadrature_config& cfg = {});

double sum_terms(const std::vector<weighted_term>& terms, const quadrature_config& cfg = {});

double ber_inid_exact(const aperture_array& arr, const modulation_params& mod,
                      const quadrature_config& cfg = {});
double ber_iid_exact(const aperture_array& arr, const modulation_params& mod,
                     const quadrature_config& cfg = {});
double ber_iid_approx(const aperture_array& arr, const modulation_params& mod,
                      const quadrature_config& cfg = {});

// single Fox-H form for omega = 0 and its high-SNR asymptote
fox_h_spec ber_omega0_kernel(const aperture_channel& ch, int n, const modulation_params& mod);
double ber_omega0(const aperture_array& arr, const modulation_params& mod,
                  const quadrature_config& cfg = {});
double ber_omega0_asymptotic(const aperture_array& arr, const modulation_params& mod);

struct asymptotic_result {
    double coding_gain = 0.0;      // BER ~ coding_gain * gbar^-diversity_order
    double diversity_order = 0.0;
    bool tie_warning = false;      // coincident leading poles: curve is a slope fit instead
    // high-SNR BER at the given average SNR (dB), all apertures
    std::function<double(double)> curve;
};

// sum_i min{1/2, a_i c_i / 2, rho_i^2 / 2}, the 1/2 only where an exponential branch exists
double diversity_order(const aperture_array& arr, bool* tie = nullptr);
asymptotic_result ber_asymptotic(const aperture_array& arr, const modulation_params& mod,
                                 const quadrature_config& cfg = {});

double capacity_inid_exact(const aperture_array& arr, const quadrature_config& cfg = {});
double capacity_iid_exact_omega0(const aperture_array& arr, const quadrature_config& cfg = {});
double capacity_iid_approx_omega0(const aperture_array& arr, const quadrature_config& cfg = {});

}  // namespace uowc
