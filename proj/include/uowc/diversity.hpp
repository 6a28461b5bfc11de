#pragma once

#include <cstdint>
#include <vector>

#include "uowc/channel.hpp"

namespace uowc {

struct aperture_array {
    std::vector<aperture_channel> channels;
    bool iid = false;
    int size() const { return int(channels.size()); }
};

void validate(const aperture_array& arr);

aperture_array make_iid(const aperture_channel& ch, int n);
aperture_array make_inid(std::vector<aperture_channel> chs);
// same array at another average SNR (all apertures)
aperture_array with_snr(aperture_array arr, double avg_snr_db);

struct subset_term {
    std::uint32_t mask = 0;          // bit i set: aperture i in S
    std::vector<int> subset;         // exponential branch
    std::vector<int> complement;     // generalized-gamma branch
    std::vector<branch> tags;        // per aperture
};

inline constexpr int default_subset_cap = 10;

std::vector<subset_term> expand_product_of_sums(const aperture_array& arr,
                                                int cap = default_subset_cap);

// product of the branch forms selected by the term at gamma
double subset_term_value(const aperture_array& arr, const subset_term& t, double gamma,
                         const quadrature_config& cfg = {});

double sc_cdf(const aperture_array& arr, double gamma, const quadrature_config& cfg = {});
double sc_pdf(const aperture_array& arr, double gamma, const quadrature_config& cfg = {});

double sample_sc_snr(const aperture_array& arr, rng_t& rng);

}  // namespace uowc
