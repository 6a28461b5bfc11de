#include "uowc/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <thread>

#include "numeric_util.hpp"
#include "uowc/errors.hpp"

namespace uowc {

void validate(const modulation_params& m)
{
    if (!(m.p > 0) || !(m.q > 0)) throw precondition_violation("p and q must be positive");
}

modulation_params modulation_preset(const std::string& name)
{
    if (name == "p05q1" || name == "0.5,1") return {0.5, 1.0};
    if (name == "p1q1" || name == "1,1") return {1.0, 1.0};
    throw config_error("unknown modulation preset: " + name);
}

double ber_from_cdf(const std::function<double(double)>& cdf, const modulation_params& mod,
                    double split, double rel_tol)
{
    validate(mod);
    double p = mod.p, q = mod.q;
    double logc = p * std::log(q) - std::log(2.0) - std::lgamma(p);
    // integrand in u = ln(gamma)
    auto f = [&](double u) {
        double g = std::exp(u);
        double F = cdf(g);
        if (F == 0.0) return 0.0;
        return std::exp(logc - q * g + p * u) * F;
    };
    double u_hi = std::log(60.0 / q + p);
    std::vector<double> cuts = {std::log(p / q), std::log(split)};
    double u_lo = std::min({std::log(p / q), std::log(split), u_hi}) - 7.0;
    cuts.push_back(u_lo);
    cuts.push_back(u_hi);
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
    double total = 0.0;
    for (size_t i = 0; i + 1 < cuts.size(); ++i) {
        if (cuts[i + 1] <= u_lo || cuts[i] >= u_hi) continue;
        total += integrate_gk(f, std::max(cuts[i], u_lo), std::min(cuts[i + 1], u_hi), 0.1 * rel_tol).value;
    }
    // extend downward until the left remainder F(g) g^p / p is negligible
    for (int k = 0; k < 60; ++k) {
        double g = std::exp(u_lo);
        double bound = std::exp(logc + p * u_lo) * cdf(g) / p;
        if (bound <= 1e-3 * rel_tol * total) break;
        double lo = u_lo - 7.0;
        total += integrate_gk(f, lo, u_lo, 0.1 * rel_tol, 1e-4 * rel_tol * total).value;
        u_lo = lo;
    }
    return total;
}

double capacity_from_pdf(const std::function<double(double)>& pdf,
                         const std::function<double(double)>& cdf, double split, double rel_tol)
{
    auto f = [&](double u) {
        double g = std::exp(u);
        double d = pdf(g);
        if (d == 0.0) return 0.0;
        return std::log2(1.0 + g) * g * d;
    };
    double u_mid = std::log(split);
    double u_lo = u_mid - 7.0, u_hi = u_mid + 7.0;
    double total = integrate_gk(f, u_lo, u_mid, 0.1 * rel_tol).value +
                   integrate_gk(f, u_mid, u_hi, 0.1 * rel_tol).value;
    for (int k = 0; k < 60; ++k) {
        double g = std::exp(u_lo);
        if (std::log2(1.0 + g) * cdf(g) <= 1e-3 * rel_tol * total) break;
        total += integrate_gk(f, u_lo - 7.0, u_lo, 0.1 * rel_tol, 1e-4 * rel_tol * total).value;
        u_lo -= 7.0;
    }
    for (int k = 0; k < 60; ++k) {
        double g = std::exp(u_hi);
        if (4.0 * std::log2(1.0 + g) * (1.0 - cdf(g)) <= 1e-3 * rel_tol * total) break;
        total += integrate_gk(f, u_hi, u_hi + 7.0, 0.1 * rel_tol, 1e-4 * rel_tol * total).value;
        u_hi += 7.0;
    }
    return total;
}

double density_mass(const std::function<double(double)>& pdf, double split, double rel_tol)
{
    auto f = [&](double u) {
        double g = std::exp(u);
        return g * pdf(g);
    };
    double u0 = std::log(split);
    double total = integrate_gk(f, u0 - 7.0, u0 + 7.0, 0.1 * rel_tol).value;
    for (int dir : {-1, 1}) {
        double u = u0 + 7.0 * dir;
        int quiet = 0;
        for (int k = 0; k < 200 && quiet < 2; ++k) {
            double v = integrate_gk(f, std::min(u, u + 7.0 * dir), std::max(u, u + 7.0 * dir),
                                    0.1 * rel_tol, 1e-4 * rel_tol * total).value;
            total += v;
            quiet = std::abs(v) <= 1e-3 * rel_tol * total ? quiet + 1 : 0;
            u += 7.0 * dir;
        }
    }
    return total;
}

double ber_quadrature(const aperture_array& arr, const modulation_params& mod,
                      const oracle_options& opt)
{
    validate(arr);
    double gbar = avg_snr_linear(arr.channels.front());
    return ber_from_cdf([&](double g) { return sc_cdf(arr, g, opt.special); }, mod, gbar,
                        opt.rel_tol);
}

double capacity_quadrature(const aperture_array& arr, const oracle_options& opt)
{
    validate(arr);
    // the bulk of the SNR density sits near gbar times the path-loss and pointing scale
    const auto& ch = arr.channels.front();
    double a = effective_a0(ch);
    double split = avg_snr_linear(ch) * a * a;
    return capacity_from_pdf([&](double g) { return sc_pdf(arr, g, opt.special); },
                             [&](double g) { return sc_cdf(arr, g, opt.special); }, split,
                             opt.rel_tol);
}

double conditional_ber(double gamma, const modulation_params& mod)
{
    if (gamma <= 0.0) return 0.5;
    return 0.5 * gamma_q(mod.p, mod.q * gamma);
}

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t stream)
{
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

constexpr long chunk_size = 1 << 16;

struct moments {
    long n = 0;
    double mean = 0.0;
    double m2 = 0.0;
};

moments merge(const moments& x, const moments& y)
{
    if (x.n == 0) return y;
    if (y.n == 0) return x;
    moments r;
    r.n = x.n + y.n;
    double d = y.mean - x.mean;
    r.mean = x.mean + d * double(y.n) / double(r.n);
    r.m2 = x.m2 + y.m2 + d * d * double(x.n) * double(y.n) / double(r.n);
    return r;
}

moments reduce(const std::vector<moments>& v, size_t lo, size_t hi)
{
    if (hi - lo == 1) return v[lo];
    size_t mid = lo + (hi - lo) / 2;
    return merge(reduce(v, lo, mid), reduce(v, mid, hi));
}

template <class Fn>
void for_chunks(long chunks, int workers, Fn fn)
{
    int w = int(std::max<long>(1, std::min<long>(workers, chunks)));
    if (w == 1) {
        for (long c = 0; c < chunks; ++c) fn(c);
        return;
    }
    std::vector<std::thread> pool;
    for (int t = 0; t < w; ++t)
        pool.emplace_back([&, t] {
            for (long c = t; c < chunks; c += w) fn(c);
        });
    for (auto& th : pool) th.join();
}

}  // namespace

ci_result monte_carlo_mean(const aperture_array& arr, const mc_config& cfg,
                           const std::function<double(double)>& kernel)
{
    validate(arr);
    if (cfg.samples < 1) throw precondition_violation("need at least one sample");
    long chunks = (cfg.samples + chunk_size - 1) / chunk_size;
    std::vector<moments> parts(chunks);
    for_chunks(chunks, cfg.workers, [&](long c) {
        rng_t rng(stream_seed(cfg.master_seed, c));
        long n = std::min(chunk_size, cfg.samples - c * chunk_size);
        moments m;
        for (long i = 0; i < n; ++i) {
            double x = kernel(sample_sc_snr(arr, rng));
            ++m.n;
            double d = x - m.mean;
            m.mean += d / double(m.n);
            m.m2 += d * (x - m.mean);
        }
        parts[c] = m;
    });
    moments all = reduce(parts, 0, parts.size());
    ci_result r;
    r.estimate = all.mean;
    r.samples_used = all.n;
    r.std_error = all.n > 1 ? std::sqrt(all.m2 / double(all.n - 1) / double(all.n)) : 0.0;
    return r;
}

ci_result ber_monte_carlo(const aperture_array& arr, const modulation_params& mod,
                          const mc_config& cfg)
{
    validate(mod);
    return monte_carlo_mean(arr, cfg, [&](double g) { return conditional_ber(g, mod); });
}

ci_result capacity_monte_carlo(const aperture_array& arr, const mc_config& cfg)
{
    return monte_carlo_mean(arr, cfg, [](double g) { return std::log2(1.0 + g); });
}

std::vector<double> sample_sc_many(const aperture_array& arr, const mc_config& cfg)
{
    validate(arr);
    long chunks = (cfg.samples + chunk_size - 1) / chunk_size;
    std::vector<double> out(cfg.samples);
    for_chunks(chunks, cfg.workers, [&](long c) {
        rng_t rng(stream_seed(cfg.master_seed, c));
        long n = std::min(chunk_size, cfg.samples - c * chunk_size);
        for (long i = 0; i < n; ++i) out[c * chunk_size + i] = sample_sc_snr(arr, rng);
    });
    return out;
}

cdf_check_report empirical_cdf_check(const aperture_array& arr, const mc_config& cfg, int points)
{
    std::vector<double> s = sample_sc_many(arr, cfg);
    std::sort(s.begin(), s.end());
    double n = double(s.size());
    cdf_check_report rep;
    rep.passed = true;
    for (int i = 0; i < points; ++i) {
        double qtl = 0.02 + 0.96 * i / (points - 1);
        double g = s[size_t(qtl * (n - 1))];
        double emp = double(std::upper_bound(s.begin(), s.end(), g) - s.begin()) / n;
        double F = sc_cdf(arr, g);
        double se = std::sqrt(std::max(F * (1.0 - F), 1e-300) / n);
        double dev = std::abs(emp - F) / se;
        rep.grid.push_back(g);
        rep.empirical.push_back(emp);
        rep.analytic.push_back(F);
        rep.deviation_se.push_back(dev);
        rep.max_deviation_se = std::max(rep.max_deviation_se, dev);
        rep.max_abs_deviation = std::max(rep.max_abs_deviation, std::abs(emp - F));
        if (dev > 3.0) rep.passed = false;
    }
    return rep;
}

}  // namespace uowc
