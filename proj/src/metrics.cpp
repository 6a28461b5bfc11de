#include "uowc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "uowc/errors.hpp"

namespace uowc {

namespace {

// one contour of a metric: 1-D Mellin-Barnes block at exp(log_arg), contributing
// gamma^{-alpha s} to the integrand
struct dim_src {
    fox_h_spec spec;
    double log_arg;
    double alpha;
};

dim_src cdf_dim(const aperture_channel& ch, branch b, int mult = 1)
{
    branch_form f = branch_of(ch, b);
    return {f.cdf, f.log_psi, mult * f.alpha};
}

double branch_mass(const aperture_channel& ch, branch b)
{
    return b == branch::exponential ? ch.egg.omega : 1.0 - ch.egg.omega;
}

// e ln w, with 0 ln 0 = 0
double log_pow(double w, int e) { return e == 0 ? 0.0 : e * std::log(w); }

double log_binomial(int n, int k)
{
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// (1/2 pi i)^M int Gamma(p - sum alpha_l s_l) prod_l Phi_l(s_l) (psi_l q^-alpha_l)^-s_l
multi_fox_h_spec ber_spec(const std::vector<dim_src>& dims, const modulation_params& mod)
{
    multi_fox_h_spec h;
    h.dim = int(dims.size());
    outer_gamma o{mod.p, {}};
    double lq = std::log(mod.q);
    for (auto& d : dims) {
        h.per_dim.push_back(d.spec);
        h.log_args.push_back(d.log_arg - d.alpha * lq);
        o.weights.push_back(-d.alpha);
    }
    h.outer_upper = {o};
    return h;
}

// ln(1 + x) / x
fox_h_spec log_kernel()
{
    return {1, 2, 2, 2, {{0.0, 1.0}, {0.0, 1.0}}, {{0.0, 1.0}, {-1.0, 1.0}}, 1.0};
}

// The pdf contour of aperture k is integrated out against gamma^u,
// u = 1 - s_0 - sum_n alpha_n s_n, leaving its Gamma ratio at u / alpha_k as mixed factors.
// Returns the spec; *log_pref receives ln((1/alpha_k) psi_k^{-1/alpha_k}).
multi_fox_h_spec capacity_spec(const branch_form& pk, const std::vector<dim_src>& cdfs,
                               double* log_pref)
{
    double ak = pk.alpha;
    multi_fox_h_spec h;
    h.dim = 1 + int(cdfs.size());
    h.per_dim.push_back(log_kernel());
    h.log_args.push_back(-pk.log_psi / ak);
    std::vector<double> vw = {-1.0 / ak};
    for (auto& d : cdfs) {
        h.per_dim.push_back(d.spec);
        h.log_args.push_back(d.log_arg - d.alpha / ak * pk.log_psi);
        vw.push_back(-d.alpha / ak);
    }
    double v0 = 1.0 / ak;
    auto add = [&](double c, double w, bool num) {
        outer_gamma o{c + w * v0, {}};
        for (double x : vw) o.weights.push_back(w * x);
        (num ? h.outer_upper : h.outer_lower).push_back(o);
    };
    const fox_h_spec& f = pk.pdf;
    for (int j = 0; j < f.q; ++j) {
        auto [b, B] = f.lower_params[j];
        if (j < f.m) add(b, B, true);
        else add(1.0 - b, -B, false);
    }
    for (int j = 0; j < f.p; ++j) {
        auto [a, A] = f.upper_params[j];
        if (j < f.n) add(1.0 - a, -A, true);
        else add(a, A, false);
    }
    *log_pref = -std::log(ak) - pk.log_psi / ak;
    return h;
}

const aperture_channel& iid_channel(const aperture_array& arr)
{
    validate(arr);
    for (auto& ch : arr.channels)
        if (!(ch == arr.channels.front()))
            throw precondition_violation("identical apertures required");
    return arr.channels.front();
}

void require_omega0(const aperture_array& arr)
{
    for (auto& ch : arr.channels)
        if (ch.egg.omega != 0.0) throw precondition_violation("omega must be 0");
}

double branch_at_psi(const aperture_channel& ch, branch b, const quadrature_config& cfg)
{
    branch_form f = branch_of(ch, b);
    return fox_h_at_log(f.cdf, f.log_psi, cfg).value;
}

double log_ber_norm(const modulation_params& mod) { return -std::log(2.0) - std::lgamma(mod.p); }

// leading small-argument term of one weighted term, and its decay exponent in gbar
struct leading {
    double value;
    double slope;
    bool tie;
};

leading leading_term(const weighted_term& t)
{
    const auto& h = t.spec;
    std::vector<double> e(h.dim);
    double lv = 0.0, sign = 1.0, slope = 0.0;
    bool tie = false;
    for (int l = 0; l < h.dim; ++l) {
        pole_term pt = leading_left_residue(h.per_dim[l]);
        tie = tie || pt.tie;
        e[l] = pt.exponent;
        if (!pt.tie) {
            lv += std::log(std::abs(pt.coeff)) + pt.exponent * h.log_args[l];
            if (pt.coeff < 0) sign = -sign;
        }
    }
    for (int side = 0; side < 2; ++side)
        for (auto& o : side ? h.outer_lower : h.outer_upper) {
            double z = o.coeff;
            for (int l = 0; l < h.dim; ++l) z -= o.weights[l] * e[l];
            int sg;
            double lg = lgamma_r(z, &sg);
            lv += side ? -lg : lg;
            if (sg < 0) sign = -sign;
        }
    // every BER contour carries gamma^{-alpha s}; alpha is the gbar exponent of its argument
    for (int l = 0; l < h.dim; ++l) slope += -h.outer_upper.front().weights[l] * e[l];
    return {t.weight * sign * std::exp(lv), slope, tie};
}

}  // namespace

// ---------------------------------------------------------------- BER

std::vector<weighted_term> ber_inid_terms(const aperture_array& arr, const modulation_params& mod)
{
    validate(arr);
    validate(mod);
    std::vector<weighted_term> out;
    double norm = log_ber_norm(mod);
    for (const subset_term& st : expand_product_of_sums(arr)) {
        double mass = 1.0, lw = norm;
        std::vector<dim_src> dims;
        for (int i = 0; i < arr.size(); ++i) {
            const auto& ch = arr.channels[i];
            branch b = st.tags[i];
            mass *= branch_mass(ch, b);
            lw += std::log(branch_of(ch, b).weight);
            dims.push_back(cdf_dim(ch, b));
        }
        if (mass < negligible_mass) continue;
        out.push_back({std::exp(lw), ber_spec(dims, mod)});
    }
    return out;
}

std::vector<weighted_term> ber_iid_terms(const aperture_array& arr, const modulation_params& mod)
{
    const aperture_channel& ch = iid_channel(arr);
    validate(mod);
    int n = arr.size();
    double we = branch_of(ch, branch::exponential).weight;
    double wg = branch_of(ch, branch::generalized_gamma).weight;
    double om = ch.egg.omega;
    std::vector<weighted_term> out;
    for (int k = 0; k <= n; ++k) {
        // k apertures on the generalized-gamma branch
        double mass = std::pow(om, n - k) * std::pow(1.0 - om, k);
        if (mass < negligible_mass) continue;
        double lw = log_ber_norm(mod) + log_binomial(n, k) + log_pow(we, n - k) + log_pow(wg, k);
        std::vector<dim_src> dims;
        for (int i = 0; i < n - k; ++i) dims.push_back(cdf_dim(ch, branch::exponential));
        for (int i = 0; i < k; ++i) dims.push_back(cdf_dim(ch, branch::generalized_gamma));
        out.push_back({std::exp(lw), ber_spec(dims, mod)});
    }
    return out;
}

std::vector<weighted_term> ber_iid_approx_terms(const aperture_array& arr,
                                                const modulation_params& mod,
                                                const quadrature_config& cfg)
{
    const aperture_channel& ch = iid_channel(arr);
    validate(mod);
    int n = arr.size();
    double we = branch_of(ch, branch::exponential).weight;
    double wg = branch_of(ch, branch::generalized_gamma).weight;
    double om = ch.egg.omega;
    double ge = NAN, gg = NAN;
    std::vector<weighted_term> out;
    for (int k = 0; k <= n; ++k) {
        double mass = std::pow(om, n - k) * std::pow(1.0 - om, k);
        if (mass < negligible_mass) continue;
        double w = std::exp(log_ber_norm(mod) + log_binomial(n, k) + log_pow(we, n - k) + log_pow(wg, k));
        std::vector<dim_src> dims;
        // G(psi)^{M-1} G(psi gamma^{M alpha}) per branch group
        if (n - k > 0) {
            if (n - k > 1) {
                if (std::isnan(ge)) ge = branch_at_psi(ch, branch::exponential, cfg);
                w *= std::pow(ge, n - k - 1);
            }
            dims.push_back(cdf_dim(ch, branch::exponential, n - k));
        }
        if (k > 0) {
            if (k > 1) {
                if (std::isnan(gg)) gg = branch_at_psi(ch, branch::generalized_gamma, cfg);
                w *= std::pow(gg, k - 1);
            }
            dims.push_back(cdf_dim(ch, branch::generalized_gamma, k));
        }
        out.push_back({w, ber_spec(dims, mod)});
    }
    return out;
}

double sum_terms(const std::vector<weighted_term>& terms, const quadrature_config& cfg)
{
    for (auto& t : terms)
        if (t.spec.dim > cfg.max_dim_exact)
            throw dimension_too_high("metric needs more contours than max_dim_exact");
    double s = 0.0;
    for (auto& t : terms)
        if (t.weight != 0.0) s += t.weight * multivariate_fox_h(t.spec, cfg);
    return s;
}

double ber_inid_exact(const aperture_array& arr, const modulation_params& mod,
                      const quadrature_config& cfg)
{
    return sum_terms(ber_inid_terms(arr, mod), cfg);
}

double ber_iid_exact(const aperture_array& arr, const modulation_params& mod,
                     const quadrature_config& cfg)
{
    return sum_terms(ber_iid_terms(arr, mod), cfg);
}

double ber_iid_approx(const aperture_array& arr, const modulation_params& mod,
                      const quadrature_config& cfg)
{
    return sum_terms(ber_iid_approx_terms(arr, mod, cfg), cfg);
}

fox_h_spec ber_omega0_kernel(const aperture_channel& ch, int n, const modulation_params& mod)
{
    const auto& e = ch.egg;
    double r2 = ch.pointing.rho * ch.pointing.rho;
    double rc = r2 / e.c;
    return {2, 2, 3, 3,
            {{1.0, 1.0}, {1.0 - mod.p, 0.5 * n * e.c}, {rc + 1.0, 1.0}},
            {{e.a, 1.0}, {rc, 1.0}, {0.0, 1.0}},
            1.0};
}

double ber_omega0(const aperture_array& arr, const modulation_params& mod,
                  const quadrature_config& cfg)
{
    const aperture_channel& ch = iid_channel(arr);
    require_omega0(arr);
    validate(mod);
    int n = arr.size();
    branch_form f = branch_of(ch, branch::generalized_gamma);
    double g = n > 1 ? fox_h_at_log(f.cdf, f.log_psi, cfg).value : 1.0;
    double lz = f.log_psi - 0.5 * n * ch.egg.c * std::log(mod.q);
    double h = fox_h_at_log(ber_omega0_kernel(ch, n, mod), lz, cfg).value;
    return std::exp(log_ber_norm(mod) + n * std::log(f.weight)) * std::pow(g, n - 1) * h;
}

double ber_omega0_asymptotic(const aperture_array& arr, const modulation_params& mod)
{
    const aperture_channel& ch = iid_channel(arr);
    require_omega0(arr);
    validate(mod);
    int n = arr.size();
    branch_form f = branch_of(ch, branch::generalized_gamma);
    pole_term pg = leading_left_residue(f.cdf);
    pole_term pk = leading_left_residue(ber_omega0_kernel(ch, n, mod));
    if (pg.tie || pk.tie) throw non_convergence("coincident leading poles, no residue asymptote");
    double lz = f.log_psi - 0.5 * n * ch.egg.c * std::log(mod.q);
    double lv = log_ber_norm(mod) + n * std::log(f.weight) +
                (n - 1) * (std::log(pg.coeff) + pg.exponent * f.log_psi) + std::log(pk.coeff) +
                pk.exponent * lz;
    return std::exp(lv);
}

double diversity_order(const aperture_array& arr, bool* tie)
{
    validate(arr);
    double gd = 0.0;
    bool t = false;
    for (auto& ch : arr.channels) {
        std::vector<double> args;
        double r2 = ch.pointing.rho * ch.pointing.rho;
        if (ch.egg.omega > 0) args.push_back(0.5);
        if (ch.egg.omega < 1) args.push_back(0.5 * ch.egg.a * ch.egg.c);
        args.push_back(0.5 * r2);
        std::sort(args.begin(), args.end());
        if (args.size() > 1 && args[1] - args[0] < 1e-9) t = true;
        gd += args[0];
    }
    if (tie) *tie = t;
    return gd;
}

asymptotic_result ber_asymptotic(const aperture_array& arr, const modulation_params& mod,
                                 const quadrature_config& cfg)
{
    validate(arr);
    validate(mod);
    asymptotic_result r;
    bool tie = false;
    r.diversity_order = diversity_order(arr, &tie);
    auto terms_at = [arr, mod](double db) {
        aperture_array a = with_snr(arr, db);
        return ber_inid_terms(a, mod);
    };
    for (auto& t : terms_at(0.0)) tie = tie || leading_term(t).tie;
    r.tie_warning = tie;
    if (!tie) {
        // only the slowest-decaying terms survive in gbar^-G_d
        auto base = terms_at(0.0);
        std::vector<leading> lt;
        double smin = std::numeric_limits<double>::infinity();
        for (auto& t : base) {
            lt.push_back(leading_term(t));
            smin = std::min(smin, lt.back().slope);
        }
        for (auto& l : lt)
            if (l.slope - smin < 1e-9) r.coding_gain += l.value;
        r.curve = [terms_at](double db) {
            double s = 0.0;
            for (auto& t : terms_at(db)) s += leading_term(t).value;
            return s;
        };
        return r;
    }
    // residue expansion degenerates: fit the slope of the exact curve between 50 and 60 dB
    auto exact = [&](double db) {
        aperture_array a = with_snr(arr, db);
        if (a.size() <= cfg.max_dim_exact) return ber_inid_exact(a, mod, cfg);
        return ber_quadrature(a, mod);
    };
    double b50 = exact(50.0), b60 = exact(60.0);
    double slope = (std::log(b50) - std::log(b60)) / std::log(10.0);
    r.coding_gain = b60 * std::pow(1e6, slope);
    r.curve = [b60, slope](double db) { return b60 * std::pow(10.0, -slope * (db - 60.0) / 10.0); };
    return r;
}

// ---------------------------------------------------------------- capacity

std::vector<weighted_term> capacity_inid_terms(const aperture_array& arr)
{
    validate(arr);
    int n = arr.size();
    std::vector<weighted_term> out;
    const double ln2 = std::numbers::ln2;
    for (int k = 0; k < n; ++k) {
        const auto& chk = arr.channels[k];
        for (branch bk : {branch::exponential, branch::generalized_gamma}) {
            if (branch_mass(chk, bk) < negligible_mass) continue;
            branch_form pk = branch_of(chk, bk);
            // every branch choice for the other apertures
            int others = n - 1;
            for (std::uint32_t mask = 0; mask < (1u << others); ++mask) {
                double mass = branch_mass(chk, bk), lw = std::log(pk.pdf_weight) - std::log(ln2);
                std::vector<dim_src> dims;
                int bit = 0;
                for (int i = 0; i < n; ++i) {
                    if (i == k) continue;
                    branch b = (mask >> bit++) & 1u ? branch::exponential : branch::generalized_gamma;
                    mass *= branch_mass(arr.channels[i], b);
                    lw += std::log(branch_of(arr.channels[i], b).weight);
                    dims.push_back(cdf_dim(arr.channels[i], b));
                }
                if (mass < negligible_mass) continue;
                double lp;
                multi_fox_h_spec h = capacity_spec(pk, dims, &lp);
                out.push_back({std::exp(lw + lp), h});
            }
        }
    }
    return out;
}

std::vector<weighted_term> capacity_iid_omega0_terms(const aperture_array& arr)
{
    const aperture_channel& ch = iid_channel(arr);
    require_omega0(arr);
    int n = arr.size();
    branch_form pk = branch_of(ch, branch::generalized_gamma);
    std::vector<dim_src> dims(n - 1, cdf_dim(ch, branch::generalized_gamma));
    double lp;
    multi_fox_h_spec h = capacity_spec(pk, dims, &lp);
    double lw = std::log(double(n)) + std::log(pk.pdf_weight) + (n - 1) * std::log(pk.weight) -
                std::log(std::numbers::ln2);
    return {{std::exp(lw + lp), h}};
}

std::vector<weighted_term> capacity_iid_approx_omega0_terms(const aperture_array& arr,
                                                            const quadrature_config& cfg)
{
    const aperture_channel& ch = iid_channel(arr);
    require_omega0(arr);
    int n = arr.size();
    branch_form pk = branch_of(ch, branch::generalized_gamma);
    std::vector<dim_src> dims;
    double lw = std::log(double(n)) + std::log(pk.pdf_weight) + (n - 1) * std::log(pk.weight) -
                std::log(std::numbers::ln2);
    if (n > 1) {
        dims.push_back(cdf_dim(ch, branch::generalized_gamma, n - 1));
        if (n > 2) lw += (n - 2) * std::log(branch_at_psi(ch, branch::generalized_gamma, cfg));
    }
    double lp;
    multi_fox_h_spec h = capacity_spec(pk, dims, &lp);
    return {{std::exp(lw + lp), h}};
}

double capacity_inid_exact(const aperture_array& arr, const quadrature_config& cfg)
{
    return sum_terms(capacity_inid_terms(arr), cfg);
}

double capacity_iid_exact_omega0(const aperture_array& arr, const quadrature_config& cfg)
{
    return sum_terms(capacity_iid_omega0_terms(arr), cfg);
}

double capacity_iid_approx_omega0(const aperture_array& arr, const quadrature_config& cfg)
{
    return sum_terms(capacity_iid_approx_omega0_terms(arr, cfg), cfg);
}

}  // namespace uowc
