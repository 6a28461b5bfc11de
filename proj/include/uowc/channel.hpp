#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "uowc/mellin.hpp"

namespace uowc {

struct egg_params {
    double omega = 0.0;
    double lambda = 1.0;
    double a = 1.0;
    double b = 1.0;
    double c = 1.0;
    bool operator==(const egg_params&) const = default;
};

// 20 log10(e) * eta * d with eta = 0.056 /m, d = 50 m
inline constexpr double default_path_loss_db = 24.320240029286146;

struct pointing_params {
    double a0 = 0.1639;
    double rho = 0.9875;
    double path_loss_db = default_path_loss_db;
    bool operator==(const pointing_params&) const = default;
};

enum class path_loss_fold { amplitude, snr, off };

struct aperture_channel {
    egg_params egg;
    pointing_params pointing;
    double avg_snr_db = 0.0;
    path_loss_fold fold = path_loss_fold::amplitude;
    bool operator==(const aperture_channel&) const = default;
};

void validate(const egg_params& e);
void validate(const pointing_params& p);
void validate(const aperture_channel& ch);

std::string to_string(path_loss_fold f);
path_loss_fold fold_from_string(const std::string& s);

// gain applied to the average SNR by the path loss
double path_loss_power_gain(const aperture_channel& ch);
double avg_snr_linear(const aperture_channel& ch);
// A scaled by the path loss, as it enters the pdf/cdf arguments
double effective_a0(const aperture_channel& ch);

enum class branch { exponential, generalized_gamma };

// One branch of the CDF: weight * H(exp(log_psi) * gamma^alpha)
struct branch_form {
    double weight;      // omega rho^2  or  (1-omega) rho^2 / (c Gamma(a))
    double pdf_weight;  // omega rho^2 / 2  or  (1-omega) rho^2 / (2 Gamma(a))
    double alpha;       // 1/2 or c/2
    double log_psi;     // -ln(lambda A sqrt(gbar))  or  -c ln(b A sqrt(gbar))
    fox_h_spec cdf;     // G^{2,1}_{2,3}
    fox_h_spec pdf;     // G^{2,0}_{1,2}
};

branch_form branch_of(const aperture_channel& ch, branch b);

// weight * H_cdf at gamma (no clamping)
double branch_cdf(const aperture_channel& ch, branch b, double gamma,
                  const quadrature_config& cfg = {});

double snr_pdf(const aperture_channel& ch, double gamma, const quadrature_config& cfg = {});
double snr_cdf(const aperture_channel& ch, double gamma, const quadrature_config& cfg = {});

using rng_t = std::mt19937_64;

double uniform_open(rng_t& rng);
double sample_turbulence(const egg_params& e, rng_t& rng);
double sample_pointing(const pointing_params& p, rng_t& rng);
double sample_snr(const aperture_channel& ch, rng_t& rng);

egg_params egg_preset(const std::string& name);
std::vector<std::string> egg_preset_names();
aperture_channel channel_preset(const std::string& name, double avg_snr_db);

// Sec. V i.ni.d. lists; link 0 stays strong, link i takes entry i of the varied list
enum class varied_param { omega, lambda, a, b, c };
std::vector<aperture_channel> inid_varied(varied_param which, int n, double avg_snr_db);

}  // namespace uowc
