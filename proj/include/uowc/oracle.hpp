#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "uowc/diversity.hpp"
#include "uowc/quadrature.hpp"

namespace uowc {

struct modulation_params {
    double p = 1.0;
    double q = 1.0;
};

void validate(const modulation_params& m);
modulation_params modulation_preset(const std::string& name);

struct mc_config {
    long samples = 10'000'000;
    std::uint64_t master_seed = 20240601;
    int workers = 1;
};

struct ci_result {
    double estimate = 0.0;
    double std_error = 0.0;
    long samples_used = 0;
    bool operator==(const ci_result&) const = default;
};


struct oracle_options {
    double rel_tol = 1e-6;
    quadrature_config special;  // used for the Meijer-G calls
};

// (q^p / 2 Gamma(p)) int e^{-q g} g^{p-1} F(g) dg for any CDF F
double ber_from_cdf(const std::function<double(double)>& cdf, const modulation_params& mod,
                    double split, double rel_tol);
// int log2(1+g) f(g) dg for any density f
double capacity_from_pdf(const std::function<double(double)>& pdf,
                         const std::function<double(double)>& cdf, double split, double rel_tol);

// int f(g) dg over (0, inf), in ln g, extended from split until two chunks add nothing
double density_mass(const std::function<double(double)>& pdf, double split, double rel_tol);

double ber_quadrature(const aperture_array& arr, const modulation_params& mod,
                      const oracle_options& opt = {});
double capacity_quadrature(const aperture_array& arr, const oracle_options& opt = {});

// Gamma(p, q g) / (2 Gamma(p))
double conditional_ber(double gamma, const modulation_params& mod);

// splitmix64 of (seed, stream); seeds the generator of Monte Carlo chunk `stream`
std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream);

// mean of kernel(sample_sc_snr) with standard error; bit-identical for any worker count
ci_result monte_carlo_mean(const aperture_array& arr, const mc_config& cfg,
                           const std::function<double(double)>& kernel);

ci_result ber_monte_carlo(const aperture_array& arr, const modulation_params& mod,
                          const mc_config& cfg);
ci_result capacity_monte_carlo(const aperture_array& arr, const mc_config& cfg);

// all SC samples in chunk order
std::vector<double> sample_sc_many(const aperture_array& arr, const mc_config& cfg);

struct cdf_check_report {
    std::vector<double> grid;
    std::vector<double> empirical;
    std::vector<double> analytic;
    std::vector<double> deviation_se;  // |emp - analytic| / standard error
    double max_deviation_se = 0.0;
    double max_abs_deviation = 0.0;
    bool passed = false;
};

// 50-point grid at empirical quantiles; passes when every point is within 3 standard errors
cdf_check_report empirical_cdf_check(const aperture_array& arr, const mc_config& cfg,
                                     int points = 50);

}  // namespace uowc
