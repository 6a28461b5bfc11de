#include "uowc/channel.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "uowc/errors.hpp"

namespace uowc {

void validate(const egg_params& e)
{
    if (!(e.omega >= 0.0 && e.omega <= 1.0)) throw precondition_violation("omega must lie in [0,1]");
    if (!(e.lambda > 0) || !(e.a > 0) || !(e.b > 0) || !(e.c > 0))
        throw precondition_violation("lambda, a, b, c must be positive");
}

void validate(const pointing_params& p)
{
    if (!(p.a0 > 0.0 && p.a0 <= 1.0)) throw precondition_violation("A0 must lie in (0,1]");
    if (!(p.rho > 0)) throw precondition_violation("rho must be positive");
    if (!(p.path_loss_db >= 0)) throw precondition_violation("path loss must be non-negative");
}

void validate(const aperture_channel& ch)
{
    validate(ch.egg);
    validate(ch.pointing);
    if (!std::isfinite(ch.avg_snr_db)) throw precondition_violation("average SNR must be finite");
}

std::string to_string(path_loss_fold f)
{
    switch (f) {
    case path_loss_fold::amplitude: return "amplitude";
    case path_loss_fold::snr: return "snr";
    case path_loss_fold::off: return "off";
    }
    return "?";
}

path_loss_fold fold_from_string(const std::string& s)
{
    if (s == "amplitude") return path_loss_fold::amplitude;
    if (s == "snr") return path_loss_fold::snr;
    if (s == "off") return path_loss_fold::off;
    throw config_error("unknown fold_path_loss value: " + s);
}

double path_loss_power_gain(const aperture_channel& ch)
{
    double amp = std::pow(10.0, -ch.pointing.path_loss_db / 20.0);
    switch (ch.fold) {
    case path_loss_fold::amplitude: return amp * amp;
    case path_loss_fold::snr: return amp;
    case path_loss_fold::off: return 1.0;
    }
    return 1.0;
}

double avg_snr_linear(const aperture_channel& ch) { return std::pow(10.0, ch.avg_snr_db / 10.0); }

double effective_a0(const aperture_channel& ch)
{
    return ch.pointing.a0 * std::sqrt(path_loss_power_gain(ch));
}

branch_form branch_of(const aperture_channel& ch, branch b)
{
    const auto& e = ch.egg;
    double r2 = ch.pointing.rho * ch.pointing.rho;
    double log_amp = std::log(effective_a0(ch)) + 0.5 * std::log(avg_snr_linear(ch));
    branch_form f;
    if (b == branch::exponential) {
        f.weight = e.omega * r2;
        f.pdf_weight = 0.5 * e.omega * r2;
        f.alpha = 0.5;
        f.log_psi = -(std::log(e.lambda) + log_amp);
        f.cdf = {2, 1, 2, 3, {{1.0, 1.0}, {r2 + 1.0, 1.0}}, {{1.0, 1.0}, {r2, 1.0}, {0.0, 1.0}}, 1.0};
        f.pdf = {2, 0, 1, 2, {{r2 + 1.0, 1.0}}, {{1.0, 1.0}, {r2, 1.0}}, 1.0};
    } else {
        double rc = r2 / e.c;
        double lg = std::lgamma(e.a);
        f.weight = (1.0 - e.omega) * r2 / e.c * std::exp(-lg);
        f.pdf_weight = 0.5 * (1.0 - e.omega) * r2 * std::exp(-lg);
        f.alpha = 0.5 * e.c;
        f.log_psi = -e.c * (std::log(e.b) + log_amp);
        f.cdf = {2, 1, 2, 3, {{1.0, 1.0}, {rc + 1.0, 1.0}}, {{e.a, 1.0}, {rc, 1.0}, {0.0, 1.0}}, 1.0};
        f.pdf = {2, 0, 1, 2, {{rc + 1.0, 1.0}}, {{e.a, 1.0}, {rc, 1.0}}, 1.0};
    }
    return f;
}

double branch_cdf(const aperture_channel& ch, branch b, double gamma, const quadrature_config& cfg)
{
    branch_form f = branch_of(ch, b);
    if (f.weight == 0.0) return 0.0;
    return f.weight * fox_h_at_log(f.cdf, f.log_psi + f.alpha * std::log(gamma), cfg).value;
}

double snr_cdf(const aperture_channel& ch, double gamma, const quadrature_config& cfg)
{
    validate(ch);
    if (!(gamma > 0)) throw precondition_violation("gamma must be positive");
    double v = branch_cdf(ch, branch::exponential, gamma, cfg) +
               branch_cdf(ch, branch::generalized_gamma, gamma, cfg);
    if (v < -1e-9 || v > 1.0 + 1e-9) throw out_of_range("CDF value outside [0,1]");
    return std::clamp(v, 0.0, 1.0);
}

double snr_pdf(const aperture_channel& ch, double gamma, const quadrature_config& cfg)
{
    validate(ch);
    if (!(gamma > 0)) throw precondition_violation("gamma must be positive");
    double lg = std::log(gamma);
    double v = 0.0;
    for (branch b : {branch::exponential, branch::generalized_gamma}) {
        branch_form f = branch_of(ch, b);
        if (f.pdf_weight == 0.0) continue;
        v += f.pdf_weight * fox_h_at_log(f.pdf, f.log_psi + f.alpha * lg, cfg).value;
    }
    return std::max(v, 0.0) / gamma;
}

double uniform_open(rng_t& rng) { return (double(rng() >> 11) + 0.5) * 0x1.0p-53; }

namespace {

// ln of a unit-scale Gamma(a) draw; the a < 1 boost keeps tiny shapes from underflowing
double log_gamma_draw(double a, rng_t& rng)
{
    if (a >= 1.0) {
        std::gamma_distribution<double> g(a, 1.0);
        return std::log(g(rng));
    }
    std::gamma_distribution<double> g(a + 1.0, 1.0);
    return std::log(g(rng)) + std::log(uniform_open(rng)) / a;
}

}  // namespace

double sample_turbulence(const egg_params& e, rng_t& rng)
{
    double u = uniform_open(rng);
    if (u < e.omega) return -e.lambda * std::log(uniform_open(rng));
    return e.b * std::exp(log_gamma_draw(e.a, rng) / e.c);
}

double sample_pointing(const pointing_params& p, rng_t& rng)
{
    return p.a0 * std::pow(uniform_open(rng), 1.0 / (p.rho * p.rho));
}

double sample_snr(const aperture_channel& ch, rng_t& rng)
{
    double h = sample_turbulence(ch.egg, rng) * sample_pointing(ch.pointing, rng);
    double amp = std::sqrt(path_loss_power_gain(ch));
    double x = amp * h;
    return avg_snr_linear(ch) * x * x;
}

namespace {

const std::map<std::string, egg_params>& presets()
{
    static const std::map<std::string, egg_params> m = {
        {"weak", {4.0628e-21, 1.0225, 26.0231, 0.6993, 9.5446}},
        {"moderate-a", {0.1953, 0.5273, 0.7291, 1.0721, 30.3214}},
        {"moderate-b", {0.2109, 0.4603, 0.152, 1.1501, 41.3258}},
        {"moderate-c", {0.3489, 0.4771, 0.01, 1.4531, 74.3650}},
        {"strong", {0.5117, 0.1602, 0.0075, 2.9963, 216.8356}},
    };
    return m;
}

}  // namespace

egg_params egg_preset(const std::string& name)
{
    auto it = presets().find(name);
    if (it == presets().end()) throw config_error("unknown turbulence preset: " + name);
    return it->second;
}

std::vector<std::string> egg_preset_names() { return {"weak", "moderate-a", "moderate-b", "strong"}; }

aperture_channel channel_preset(const std::string& name, double avg_snr_db)
{
    aperture_channel ch;
    ch.egg = egg_preset(name);
    ch.avg_snr_db = avg_snr_db;
    return ch;
}

std::vector<aperture_channel> inid_varied(varied_param which, int n, double avg_snr_db)
{
    static const double omega[] = {4.0628e-21, 0.1953, 0.2109, 0.3489};
    static const double lambda[] = {1.0225, 0.5273, 0.4603, 0.4771};
    static const double a[] = {1.40, 0.7291, 0.152, 0.01};
    static const double b[] = {0.6993, 1.0721, 1.1501, 1.4531};
    static const double c[] = {9.5446, 30.3214, 41.3258, 74.3650};
    if (n < 1) throw precondition_violation("need at least one aperture");
    std::vector<aperture_channel> out;
    for (int i = 0; i < n; ++i) {
        aperture_channel ch = channel_preset("strong", avg_snr_db);
        if (i > 0) {
            // with fewer than five links the last entries of the list are used
            int j = 4 - n + i;
            j = std::clamp(j, 0, 3);
            switch (which) {
            case varied_param::omega: ch.egg.omega = omega[j]; break;
            case varied_param::lambda: ch.egg.lambda = lambda[j]; break;
            case varied_param::a: ch.egg.a = a[j]; break;
            case varied_param::b: ch.egg.b = b[j]; break;
            case varied_param::c: ch.egg.c = c[j]; break;
            }
        }
        out.push_back(ch);
    }
    return out;
}

}  // namespace uowc
