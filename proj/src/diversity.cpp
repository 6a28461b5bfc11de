#include "uowc/diversity.hpp"

#include <algorithm>
#include <cmath>

#include "uowc/errors.hpp"

namespace uowc {

void validate(const aperture_array& arr)
{
    if (arr.channels.empty()) throw precondition_violation("aperture array is empty");
    for (auto& ch : arr.channels) validate(ch);
    if (arr.iid)
        for (auto& ch : arr.channels)
            if (!(ch == arr.channels.front()))
                throw precondition_violation("iid array with differing channels");
}

aperture_array make_iid(const aperture_channel& ch, int n)
{
    if (n < 1) throw precondition_violation("need at least one aperture");
    return {std::vector<aperture_channel>(n, ch), true};
}

aperture_array make_inid(std::vector<aperture_channel> chs) { return {std::move(chs), false}; }

aperture_array with_snr(aperture_array arr, double avg_snr_db)
{
    for (auto& ch : arr.channels) ch.avg_snr_db = avg_snr_db;
    return arr;
}

std::vector<subset_term> expand_product_of_sums(const aperture_array& arr, int cap)
{
    int n = arr.size();
    if (n < 1) throw precondition_violation("need at least one aperture");
    if (n > cap) throw size_limit("subset expansion beyond the aperture cap");
    std::vector<subset_term> out;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        subset_term t;
        t.mask = mask;
        for (int i = 0; i < n; ++i) {
            bool in = (mask >> i) & 1u;
            (in ? t.subset : t.complement).push_back(i);
            t.tags.push_back(in ? branch::exponential : branch::generalized_gamma);
        }
        out.push_back(std::move(t));
    }
    return out;
}

double subset_term_value(const aperture_array& arr, const subset_term& t, double gamma,
                         const quadrature_config& cfg)
{
    double v = 1.0;
    for (int i = 0; i < arr.size(); ++i) v *= branch_cdf(arr.channels[i], t.tags[i], gamma, cfg);
    return v;
}

double sc_cdf(const aperture_array& arr, double gamma, const quadrature_config& cfg)
{
    validate(arr);
    if (arr.iid) return std::pow(snr_cdf(arr.channels.front(), gamma, cfg), arr.size());
    double v = 1.0;
    for (auto& ch : arr.channels) v *= snr_cdf(ch, gamma, cfg);
    return v;
}

double sc_pdf(const aperture_array& arr, double gamma, const quadrature_config& cfg)
{
    validate(arr);
    int n = arr.size();
    if (arr.iid) {
        const auto& ch = arr.channels.front();
        double f = snr_pdf(ch, gamma, cfg);
        if (n == 1) return f;
        return n * std::pow(snr_cdf(ch, gamma, cfg), n - 1) * f;
    }
    std::vector<double> F(n), f(n);
    for (int i = 0; i < n; ++i) {
        F[i] = snr_cdf(arr.channels[i], gamma, cfg);
        f[i] = snr_pdf(arr.channels[i], gamma, cfg);
    }
    double v = 0.0;
    for (int j = 0; j < n; ++j) {
        double p = f[j];
        for (int i = 0; i < n; ++i)
            if (i != j) p *= F[i];
        v += p;
    }
    return v;
}

double sample_sc_snr(const aperture_array& arr, rng_t& rng)
{
    double best = 0.0;
    for (auto& ch : arr.channels) best = std::max(best, sample_snr(ch, rng));
    return best;
}

}  // namespace uowc
