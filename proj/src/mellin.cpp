#include "uowc/mellin.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <functional>
#include <thread>

#include "uowc/errors.hpp"
#include "numeric_util.hpp"
#include "uowc/quadrature.hpp"

namespace uowc {

namespace {

constexpr double pi = std::numbers::pi;
constexpr double inf = std::numeric_limits<double>::infinity();

// Gamma(c0 + w s), one variable
struct factor {
    double c0;
    double w;
};

struct ratio_1d {
    std::vector<factor> num, den;

    // +inf real part at a numerator pole, -inf at a denominator pole
    cplx log_ratio(cplx s) const
    {
        cplx r = 0.0;
        for (auto& f : num) {
            cplx z = f.c0 + f.w * s;
            if (near_pole(z)) return cplx(inf, 0.0);
            r += log_gamma_fast(z);
        }
        for (auto& f : den) {
            cplx z = f.c0 + f.w * s;
            if (near_pole(z)) return cplx(-inf, 0.0);
            r -= log_gamma_fast(z);
        }
        return r;
    }

    cplx dlog_ratio(cplx s) const
    {
        cplx r = 0.0;
        for (auto& f : num) r += f.w * digamma_complex(f.c0 + f.w * s);
        for (auto& f : den) r -= f.w * digamma_complex(f.c0 + f.w * s);
        return r;
    }

    static bool near_pole(cplx z)
    {
        if (std::abs(z.imag()) > 1e-12 || z.real() > 0.5) return false;
        double k = std::round(z.real());
        return std::abs(z.real() - k) < 1e-12;
    }
};

ratio_1d ratio_from(const fox_h_spec& h)
{
    ratio_1d r;
    for (int j = 0; j < h.q; ++j) {
        auto [b, B] = h.lower_params[j];
        if (j < h.m) r.num.push_back({b, B});
        else r.den.push_back({1.0 - b, -B});
    }
    for (int j = 0; j < h.p; ++j) {
        auto [a, A] = h.upper_params[j];
        if (j < h.n) r.num.push_back({1.0 - a, -A});
        else r.den.push_back({a, A});
    }
    return r;
}

std::pair<double, double> strip_of(const std::vector<factor>& num)
{
    double lo = -inf, hi = inf;
    for (auto& f : num) {
        if (f.w > 0) lo = std::max(lo, -f.c0 / f.w);
        else hi = std::min(hi, f.c0 / -f.w);
    }
    return {lo, hi};
}

// distance along the real axis from x to the nearest pole of Gamma(c0 + w s)
double pole_distance(const factor& f, double x)
{
    double y = f.c0 + f.w * x;
    double d;
    if (y > 0) d = y;
    else d = std::min(y - std::floor(y), std::ceil(y) - y);
    return d / std::abs(f.w);
}

double nearest_pole(const std::vector<factor>& num, double x)
{
    double d = inf;
    for (auto& f : num) d = std::min(d, pole_distance(f, x));
    return d;
}

double pole_at(const factor& f, long k) { return (-double(k) - f.c0) / f.w; }

// nearest pole strictly outside [lo, hi], measured from x
double nearest_pole_outside(const std::vector<factor>& num, double x, double lo, double hi)
{
    double d = inf;
    for (auto& f : num) {
        double kl = -(f.c0 + f.w * lo), kh = -(f.c0 + f.w * hi);
        double kmin = std::min(kl, kh), kmax = std::max(kl, kh);
        double eps = 1e-9;
        long k1 = static_cast<long>(std::floor(kmax + eps)) + 1;
        long k2 = static_cast<long>(std::ceil(kmin - eps)) - 1;
        if (k1 >= 0) d = std::min(d, std::abs(pole_at(f, std::max(k1, 0L)) - x));
        if (k2 >= 0) d = std::min(d, std::abs(pole_at(f, k2) - x));
        if (k1 < 0) d = std::min(d, std::abs(pole_at(f, 0) - x));
    }
    return d;
}

// ---------------------------------------------------------------- line quadrature

struct panel {
    double a, b;
};

struct march_result {
    std::vector<panel> panels;
    cplx integral = 0.0;  // level 0, over [0, T]
    double l1 = 0.0;
    long nodes = 0;
};

double osc_width(double omega)
{
    // about 1.5 periods per 16-point panel
    return omega > 0 ? 3.0 * pi / omega : inf;
}

// March panels out from t = 0 until the tail is negligible.
// freq(t) estimates |d phase / dt|.
template <class G, class W>
march_result march_panels(const G& g, const W& freq, double delta, double rel_tol,
                          double width = 0.0, double t_start = 0.0, march_result init = {})
{
    march_result r = std::move(init);
    const auto& gl = gauss_legendre16();
    double t = t_start;
    double h_max = std::max(2.0, 0.5 * width);
    double scale = std::max(delta, 1e-12);
    double min_len = 4.0 * scale;
    int guard = 0;
    while (true) {
        double h = std::max(t, scale * 0.5);
        h = std::min(h, h_max);
        double om = freq(t);
        double w1 = osc_width(om);
        double om2 = freq(t + std::min(h, w1));
        h = std::min({h, w1, osc_width(om2)});
        panel p{t, t + h};
        cplx sum = 0.0;
        double asum = 0.0;
        double mid = 0.5 * (p.a + p.b), half = 0.5 * (p.b - p.a);
        for (int i = 0; i < 16; ++i) {
            cplx v = g(mid + half * gl.x[i]);
            sum += gl.w[i] * v;
            asum += gl.w[i] * std::abs(v);
        }
        r.integral += half * sum;
        r.l1 += half * asum;
        r.nodes += 16;
        r.panels.push_back(p);
        t = p.b;
        double e = std::abs(g(t));
        double tail = e * std::max(1.0, t);
        double mag = std::max(std::abs(r.integral.real()), 1e-14 * r.l1);
        if (t >= min_len && tail < 1e-3 * rel_tol * mag) break;
        if (t > 1e5 * std::max(1.0, width) || ++guard > 200000)
            throw non_convergence("contour tail does not decay");
    }
    return r;
}

template <class G>
std::pair<cplx, double> integrate_panels(const G& g, const std::vector<panel>& ps, int level,
                                         long& nodes)
{
    const auto& gl = gauss_legendre16();
    int split = 1 << level;
    std::vector<cplx> parts;
    parts.reserve(ps.size() * split);
    double l1 = 0.0;
    for (auto& p : ps) {
        double w = (p.b - p.a) / split;
        for (int k = 0; k < split; ++k) {
            double a = p.a + k * w;
            double mid = a + 0.5 * w, half = 0.5 * w;
            cplx sum = 0.0;
            for (int i = 0; i < 16; ++i) {
                cplx v = g(mid + half * gl.x[i]);
                sum += gl.w[i] * v;
                l1 += half * gl.w[i] * std::abs(v);
            }
            parts.push_back(half * sum);
            nodes += 16;
        }
    }
    return {pairwise_sum(parts), l1};
}

struct line_problem {
    ratio_1d ratio;
    double log_z;

    cplx log_value(cplx s) const { return ratio.log_ratio(s) - s * log_z; }
    double freq(double sigma, double t) const
    {
        return std::abs((ratio.dlog_ratio(cplx(sigma, t)) - log_z).real());
    }
};

eval_report line_quadrature(const line_problem& lp, double sigma, int fixed_level,
                            const quadrature_config& cfg)
{
    eval_report rep;
    double ref = lp.log_value(cplx(sigma, 0.0)).real();
    if (!std::isfinite(ref)) throw contour_infeasible("contour passes through a pole");
    auto g = [&](double t) { return std::exp(lp.log_value(cplx(sigma, t)) - ref); };
    auto fr = [&](double t) { return lp.freq(sigma, t); };
    double delta = nearest_pole(lp.ratio.num, sigma);
    // gaussian width of |integrand| around t = 0, matters far out where it is wide
    double e = 1e-3 * std::max(1.0, std::abs(sigma));
    double curv = 2.0 * (ref - lp.log_value(cplx(sigma, e)).real()) / (e * e);
    double width = curv > 0 ? 1.0 / std::sqrt(curv) : 0.0;
    march_result m = march_panels(g, fr, delta, cfg.rel_tol, width);

    // conjugate symmetry of the integrand
    for (double t : {0.1 * delta, delta, 3.0 * delta}) {
        cplx up = g(t), dn = g(-t);
        double d = std::abs(dn - std::conj(up));
        rep.imag_residual = std::max(rep.imag_residual, d / std::max(std::abs(up), 1e-300));
    }
    if (rep.imag_residual > 1e-8)
        throw non_convergence("integrand is not conjugate symmetric");

    double scale = std::exp(ref) / pi;
    long nodes = m.nodes;
    cplx prev = m.integral;
    double l1 = m.l1;
    rep.contour = {sigma, m.panels.back().b, int(m.panels.size() * 16)};
    if (fixed_level >= 0) {
        cplx at = prev;
        for (int lv = 1; lv <= fixed_level; ++lv) at = integrate_panels(g, m.panels, lv, nodes).first;
        cplx next = integrate_panels(g, m.panels, fixed_level + 1, nodes).first;
        rep.value = at.real() * scale;
        rep.error_estimate = std::abs(next.real() - at.real()) * scale;
        rep.nodes = nodes;
        rep.refinements = fixed_level;
        rep.contour.nodes = int(m.panels.size() * 16) << fixed_level;
        return rep;
    }
    for (int lv = 1; lv <= cfg.max_refinements; ++lv) {
        auto [cur, l1n] = integrate_panels(g, m.panels, lv, nodes);
        l1 = l1n;
        double err = std::abs(cur.real() - prev.real());
        rep.value = cur.real() * scale;
        rep.error_estimate = err * scale;
        rep.nodes = nodes;
        rep.refinements = lv;
        rep.contour.nodes = int(m.panels.size() * 16) << lv;
        if (err <= cfg.rel_tol * std::abs(cur.real()) || err <= 1e-14 * l1)
            return rep;
        prev = cur;
    }
    throw non_convergence("line quadrature did not reach rel_tol");
}

// ---------------------------------------------------------------- residues

// (1/2 pi i) contour integral on a circle, returned as a real number
double circle_residue(const line_problem& lp, double center, double r, double dist_out)
{
    double ratio = r / dist_out;
    int n1 = int(std::ceil(40.0 / -std::log(ratio)));
    int n2 = int(std::ceil(std::numbers::e * r * std::abs(lp.log_z))) + 40;
    int n = std::clamp(std::max({32, n1, n2}), 32, 16384);
    n = (n + 7) / 8 * 8;
    std::vector<cplx> lv(n);
    double mx = -inf;
    for (int j = 0; j < n; ++j) {
        double th = 2.0 * pi * (j + 0.5) / n;
        cplx s = center + r * cplx(std::cos(th), std::sin(th));
        lv[j] = lp.log_value(s);
        mx = std::max(mx, lv[j].real());
    }
    std::vector<cplx> terms(n);
    for (int j = 0; j < n; ++j) {
        double th = 2.0 * pi * (j + 0.5) / n;
        terms[j] = std::exp(lv[j] - mx) * cplx(std::cos(th), std::sin(th));
    }
    cplx sum = pairwise_sum(terms);
    return (std::exp(mx) * r / n * sum).real();
}

struct shift_plan {
    double sigma;
    double residues = 0.0;  // already signed
};

double golden_min(const std::function<double(double)>& f, double lo, double hi)
{
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double a = lo, b = hi;
    double c = b - gr * (b - a), d = a + gr * (b - a);
    double fc = f(c), fd = f(d);
    for (int it = 0; it < 60 && (b - a) > 1e-9 * (1.0 + std::abs(a)); ++it) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - gr * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + gr * (b - a);
            fd = f(d);
        }
    }
    return fc < fd ? c : d;
}

// below this the whole line integral is beneath the smallest double
constexpr double underflow_log = -800.0;

// minimum of f walking from start in direction dir, steps doubling until f turns up
double bracket_min(const std::function<double(double)>& f, double start, int dir)
{
    double prev = start, x0 = start, f0 = f(start), step = 1.0;
    for (int it = 0; it < 200; ++it) {
        double x1 = x0 + dir * step;
        double f1 = f(x1);
        if (!(f1 < f0)) return golden_min(f, std::min(prev, x1), std::max(prev, x1));
        if (f1 < underflow_log) return x1;
        prev = x0;
        x0 = x1;
        f0 = f1;
        step *= 2.0;
    }
    throw contour_infeasible("no saddle along the real axis");
}

shift_plan plan_shift(const line_problem& lp, double sigma0, const quadrature_config& cfg)
{
    shift_plan best{sigma0, 0.0};
    double lz = lp.log_z;
    if (std::abs(lz) <= cfg.residue_shift_threshold) return best;
    int dir = lz < 0 ? -1 : 1;
    auto h = [&](double s) { return lp.log_value(cplx(s, 0.0)).real(); };

    // poles in the shift direction
    std::vector<double> poles;
    double first = inf;
    for (auto& f : lp.ratio.num) {
        bool left = f.w > 0;
        if ((dir < 0) != left) continue;
        first = std::min(first, std::abs(pole_at(f, 0) - sigma0));
    }
    double base_bound = h(sigma0) + std::log(std::min(1.0, nearest_pole(lp.ratio.num, sigma0)));
    if (!std::isfinite(first)) {
        // no poles that way: slide to the saddle
        double s = bracket_min(h, sigma0, dir);
        double b = h(s) + std::log(std::min(1.0, nearest_pole(lp.ratio.num, s)));
        if (b < base_bound) best.sigma = s;
        return best;
    }
    double reach = first + 80.0 / std::abs(lz) + 1.0;
    for (auto& f : lp.ratio.num) {
        bool left = f.w > 0;
        if ((dir < 0) != left) continue;
        for (long k = 0; k < 64; ++k) {
            double s = pole_at(f, k);
            if (std::abs(s - sigma0) > reach) break;
            poles.push_back(s);
        }
    }
    std::sort(poles.begin(), poles.end(), [&](double x, double y) {
        return dir < 0 ? x > y : x < y;
    });
    poles.erase(std::unique(poles.begin(), poles.end(),
                            [](double x, double y) { return std::abs(x - y) < 1e-13; }),
                poles.end());
    if (poles.empty()) return best;

    double r_max = std::min(0.5, 3.0 / std::abs(lz));
    double residue_sum = 0.0;
    double best_score = base_bound;
    size_t i = 0;
    while (i + 1 < poles.size()) {
        // cluster of close poles starting at i
        size_t j = i;
        while (j + 1 < poles.size() && std::abs(poles[j + 1] - poles[j]) < r_max) ++j;
        if (j + 1 >= poles.size()) break;
        double lo = std::min(poles[i], poles[j]), hi = std::max(poles[i], poles[j]);
        double center = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double out = nearest_pole_outside(lp.ratio.num, center, lo, hi);
        double margin = std::min(r_max, 0.5 * (out - half));
        double res = circle_residue(lp, center, half + margin, out);
        residue_sum += dir < 0 ? res : -res;

        // best line inside the gap after the cluster
        double g0 = poles[j], g1 = poles[j + 1];
        double a = std::min(g0, g1), b = std::max(g0, g1), eps = 0.02 * (b - a);
        double s = golden_min(h, a + eps, b - eps);
        double bound = h(s) + std::log(std::min(1.0, nearest_pole(lp.ratio.num, s)));
        double target = std::log(std::max(std::abs(residue_sum), 1e-300)) + std::log(1e-6 * cfg.rel_tol);
        if (bound < best_score) {
            best_score = bound;
            best = {s, residue_sum};
        }
        if (bound < target) break;
        i = j + 1;
    }
    return best;
}

double pick_line(const line_problem& lp, std::pair<double, double> strip)
{
    auto [lo, hi] = strip;
    if (!(lo < hi)) throw contour_infeasible("pole groups overlap");
    auto f = [&](double s) { return lp.log_value(cplx(s, 0.0)).real(); };
    if (std::isfinite(lo) && std::isfinite(hi)) return 0.5 * (lo + hi);
    if (std::isfinite(lo)) return std::max(bracket_min(f, lo + 1e-3, 1), lo + 0.05);
    if (std::isfinite(hi)) return std::min(bracket_min(f, hi - 1e-3, -1), hi - 0.05);
    return 0.0;
}

eval_report evaluate_1d(const fox_h_spec& h, double log_z, const quadrature_config& cfg)
{
    validate(h);
    if (!std::isfinite(log_z)) throw precondition_violation("argument must be positive and finite");
    line_problem lp{ratio_from(h), log_z};
    double c = pick_line(lp, strip_of(lp.ratio.num));
    shift_plan sp = plan_shift(lp, c, cfg);
    eval_report rep;
    double h0 = lp.log_value(cplx(sp.sigma, 0.0)).real();
    if (h0 < underflow_log) {
        rep.value = sp.residues;
        rep.residue_part = sp.residues;
        rep.contour.c = sp.sigma;
        return rep;
    }
    double scale = std::exp(h0);
    bool negligible = sp.residues != 0.0 &&
                      scale * std::min(1.0, nearest_pole(lp.ratio.num, sp.sigma)) <
                          1e-6 * cfg.rel_tol * std::abs(sp.residues);
    if (negligible) {
        rep.value = sp.residues;
        rep.contour.c = sp.sigma;
    } else {
        rep = line_quadrature(lp, sp.sigma, -1, cfg);
        rep.value += sp.residues;
    }
    rep.residue_part = sp.residues;
    return rep;
}

// ---------------------------------------------------------------- multivariate

struct multi_problem {
    int dim;
    std::vector<ratio_1d> per_dim;
    std::vector<double> log_arg;
    std::vector<outer_gamma> num, den;
};

multi_problem problem_from(const multi_fox_h_spec& h)
{
    multi_problem mp;
    mp.dim = h.dim;
    for (int l = 0; l < h.dim; ++l) {
        mp.per_dim.push_back(ratio_from(h.per_dim[l]));
        mp.log_arg.push_back(h.log_args.empty() ? std::log(h.per_dim[l].arg_scale * h.args[l])
                                                : h.log_args[l]);
    }
    mp.num = h.outer_upper;
    mp.den = h.outer_lower;
    return mp;
}

cplx outer_log(const multi_problem& mp, const std::vector<cplx>& s)
{
    cplx r = 0.0;
    for (auto& o : mp.num) {
        cplx z = o.coeff;
        for (int l = 0; l < mp.dim; ++l) z += o.weights[l] * s[l];
        r += log_gamma_fast(z);
    }
    for (auto& o : mp.den) {
        cplx z = o.coeff;
        for (int l = 0; l < mp.dim; ++l) z += o.weights[l] * s[l];
        r -= log_gamma_fast(z);
    }
    return r;
}

cplx dim_log(const multi_problem& mp, int l, cplx s)
{
    return mp.per_dim[l].log_ratio(s) - s * mp.log_arg[l];
}

cplx full_log(const multi_problem& mp, const std::vector<cplx>& s)
{
    cplx r = outer_log(mp, s);
    for (int l = 0; l < mp.dim; ++l) r += dim_log(mp, l, s[l]);
    return r;
}

double outer_margin(const multi_problem& mp, const std::vector<double>& sig)
{
    double m = inf;
    for (auto& o : mp.num) {
        double z = o.coeff;
        double wmax = 0.0;
        for (int l = 0; l < mp.dim; ++l) {
            z += o.weights[l] * sig[l];
            wmax = std::max(wmax, std::abs(o.weights[l]));
        }
        m = std::min(m, z);
    }
    return m;
}

std::vector<double> choose_sigmas(const multi_problem& mp)
{
    int M = mp.dim;
    std::vector<double> mid(M), lo(M), hi(M);
    for (int l = 0; l < M; ++l) {
        auto [a, b] = strip_of(mp.per_dim[l].num);
        if (!(a < b)) throw contour_infeasible("pole groups overlap in one dimension");
        lo[l] = a;
        hi[l] = b;
        if (std::isfinite(a) && std::isfinite(b)) mid[l] = 0.5 * (a + b);
        else if (std::isfinite(a)) mid[l] = a + 0.5;
        else if (std::isfinite(b)) mid[l] = b - 0.5;
        else mid[l] = 0.0;
    }
    if (outer_margin(mp, mid) > 1e-3) return mid;
    // push each dimension toward the edge that helps the violated factors
    std::vector<double> target(M);
    for (int l = 0; l < M; ++l) {
        double d = 0.0;
        for (auto& o : mp.num) d += o.weights[l];
        double edge = d > 0 ? hi[l] : lo[l];
        if (!std::isfinite(edge)) edge = mid[l] + (d > 0 ? 2.0 : -2.0);
        target[l] = edge;
    }
    for (int k = 1; k < 50; ++k) {
        double lam = k / 50.0;
        std::vector<double> s(M);
        for (int l = 0; l < M; ++l) s[l] = mid[l] + lam * (target[l] - mid[l]);
        if (outer_margin(mp, s) > 1e-3) return s;
    }
    throw contour_infeasible("no common contour for the mixed Gamma factors");
}

struct dim_nodes {
    std::vector<cplx> s;
    std::vector<double> w;
    std::vector<cplx> plog;  // per-dimension log contribution
};

dim_nodes nodes_for(const multi_problem& mp, int l, double sigma, const std::vector<panel>& ps,
                    int level, bool half_line)
{
    const auto& gl = gauss_legendre16();
    int split = 1 << level;
    dim_nodes d;
    auto push = [&](double t, double w) {
        cplx s(sigma, t);
        d.s.push_back(s);
        d.w.push_back(w);
        d.plog.push_back(dim_log(mp, l, s));
    };
    for (int sign : {1, -1}) {
        if (sign < 0 && half_line) break;
        for (auto& p : ps) {
            double hw = (p.b - p.a) / split;
            for (int k = 0; k < split; ++k) {
                double mid = p.a + (k + 0.5) * hw, half = 0.5 * hw;
                for (int i = 0; i < 16; ++i) push(sign * (mid + half * gl.x[i]), half * gl.w[i]);
            }
        }
    }
    return d;
}

struct tensor_result {
    cplx sum;
    double l1;
    long nodes;
};

tensor_result tensor_sum(const multi_problem& mp, const std::vector<dim_nodes>& dn, double ref,
                         int threads)
{
    int M = mp.dim;
    size_t n0 = dn[0].s.size();
    std::vector<cplx> part(n0);
    std::vector<double> part_l1(n0);

    auto work = [&](size_t i0) {
        // outer arguments accumulate dimension by dimension
        cplx acc = 0.0;
        double l1 = 0.0;
        std::vector<size_t> idx(M, 0);
        idx[0] = i0;
        std::vector<cplx> s(M);
        // odometer over dims 1..M-1
        while (true) {
            cplx lg = -ref;
            double w = 1.0;
            for (int l = 0; l < M; ++l) {
                s[l] = dn[l].s[idx[l]];
                lg += dn[l].plog[idx[l]];
                w *= dn[l].w[idx[l]];
            }
            for (size_t j = 0; j < mp.num.size(); ++j) {
                cplx z = mp.num[j].coeff;
                for (int l = 0; l < M; ++l) z += mp.num[j].weights[l] * s[l];
                lg += log_gamma_fast(z);
            }
            for (size_t j = 0; j < mp.den.size(); ++j) {
                cplx z = mp.den[j].coeff;
                for (int l = 0; l < M; ++l) z += mp.den[j].weights[l] * s[l];
                lg -= log_gamma_fast(z);
            }
            cplx v = std::exp(lg);
            acc += w * v;
            l1 += w * std::abs(v);
            int l = M - 1;
            while (l >= 1) {
                if (++idx[l] < dn[l].s.size()) break;
                idx[l] = 0;
                --l;
            }
            if (l < 1) break;
        }
        part[i0] = acc;
        part_l1[i0] = l1;
    };

    int nt = threads > 0 ? threads : int(std::max(1u, std::thread::hardware_concurrency()));
    nt = int(std::min<size_t>(nt, n0));
    if (nt <= 1) {
        for (size_t i = 0; i < n0; ++i) work(i);
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < nt; ++t)
            pool.emplace_back([&, t] {
                for (size_t i = t; i < n0; i += nt) work(i);
            });
        for (auto& th : pool) th.join();
    }
    long nodes = 1;
    for (auto& d : dn) nodes *= long(d.s.size());
    return {pairwise_sum(part), pairwise_sum(part_l1), nodes};
}

eval_report evaluate_multi(const multi_fox_h_spec& h, const quadrature_config& cfg)
{
    validate(h);
    if (h.dim > cfg.max_dim_exact)
        throw dimension_too_high("multivariate dimension exceeds max_dim_exact");
    multi_problem mp = problem_from(h);
    int M = mp.dim;
    std::vector<double> sig = choose_sigmas(mp);
    std::vector<cplx> s0(M);
    for (int l = 0; l < M; ++l) s0[l] = sig[l];
    double ref = full_log(mp, s0).real();
    if (!std::isfinite(ref)) throw contour_infeasible("contour passes through a pole");

    // per-dimension panels from a one-dimensional slice through the peak
    std::vector<std::vector<panel>> panels(M);
    for (int l = 0; l < M; ++l) {
        auto slice = [&, l](cplx sl) {
            std::vector<cplx> s = s0;
            s[l] = sl;
            return full_log(mp, s);
        };
        auto g = [&](double t) { return std::exp(slice(cplx(sig[l], t)) - ref); };
        auto fr = [&](double t) {
            std::vector<cplx> s = s0;
            s[l] = cplx(sig[l], t);
            cplx d = mp.per_dim[l].dlog_ratio(s[l]) - mp.log_arg[l];
            for (int side = 0; side < 2; ++side)
                for (auto& o : side ? mp.den : mp.num) {
                    if (o.weights[l] == 0.0) continue;
                    cplx z = o.coeff;
                    for (int k = 0; k < M; ++k) z += o.weights[k] * s[k];
                    cplx term = o.weights[l] * digamma_complex(z);
                    d += side ? -term : term;
                }
            return std::abs(d.real());
        };
        double delta = nearest_pole(mp.per_dim[l].num, sig[l]);
        for (auto& o : mp.num) {
            if (o.weights[l] == 0.0) continue;
            double z = o.coeff;
            for (int k = 0; k < M; ++k) z += o.weights[k] * sig[k];
            delta = std::min(delta, z / std::abs(o.weights[l]));
        }
        panels[l] = march_panels(g, fr, delta, cfg.rel_tol).panels;
    }

    // probe boundary faces; extend dimensions whose face still carries mass
    std::uint64_t seed = 0x9e3779b97f4a7c15ULL;
    auto uni = [&seed] {
        seed = seed * 6364136223846793005ULL + 1442695040888963407ULL;
        return double(seed >> 11) * 0x1.0p-53;
    };
    for (int round = 0; round < 6 && M > 1; ++round) {
        bool grew = false;
        for (int l = 0; l < M; ++l) {
            double T = panels[l].back().b;
            double worst = 0.0;
            for (int probe = 0; probe < 64; ++probe) {
                std::vector<cplx> s(M);
                for (int k = 0; k < M; ++k) {
                    double Tk = panels[k].back().b;
                    s[k] = cplx(sig[k], (2.0 * uni() - 1.0) * Tk);
                }
                s[l] = cplx(sig[l], (probe & 1) ? T : -T);
                worst = std::max(worst, std::exp(full_log(mp, s).real() - ref));
            }
            if (worst > 1e-3 * cfg.rel_tol) {
                auto last = panels[l].back();
                double w = last.b - last.a;
                for (double t = T; t < 2.0 * T; t += w) panels[l].push_back({t, t + w});
                grew = true;
            }
        }
        if (!grew) break;
    }

    eval_report rep;
    double norm = std::exp(ref) * 2.0 / std::pow(2.0 * pi, M);
    cplx prev = 0.0;
    long nodes = 0;
    for (int lv = 0; lv <= cfg.max_refinements; ++lv) {
        std::vector<dim_nodes> dn;
        for (int l = 0; l < M; ++l) dn.push_back(nodes_for(mp, l, sig[l], panels[l], lv, l == 0));
        tensor_result tr = tensor_sum(mp, dn, ref, cfg.threads);
        nodes += tr.nodes;
        rep.value = tr.sum.real() * norm;
        rep.nodes = nodes;
        rep.refinements = lv;
        rep.contour = {sig[0], panels[0].back().b, int(dn[0].s.size())};
        if (lv > 0) {
            double err = std::abs(tr.sum.real() - prev.real());
            rep.error_estimate = err * norm;
            if (err <= cfg.rel_tol * std::abs(tr.sum.real()) || err <= 1e-14 * tr.l1) return rep;
        }
        prev = tr.sum;
    }
    throw non_convergence("multivariate quadrature did not reach rel_tol");
}


// ---------------------------------------------------------------- convolution route

struct convolution_form {
    std::vector<double> beta;
    bool has_kernel = false;
    fox_h_spec kernel;
    double log_const = 0.0;  // outer factors with no dependence on s
};

std::optional<convolution_form> common_form(const multi_fox_h_spec& h)
{
    int M = h.dim;
    convolution_form cf;
    cf.beta.assign(M, 0.0);
    struct item {
        const outer_gamma* o;
        bool num;
    };
    std::vector<item> live;
    for (int side = 0; side < 2; ++side)
        for (auto& o : side ? h.outer_lower : h.outer_upper) {
            double wmax = 0.0;
            for (double w : o.weights) wmax = std::max(wmax, std::abs(w));
            if (wmax == 0.0) {
                double lg = std::lgamma(o.coeff);
                cf.log_const += side ? -lg : lg;
                if (o.coeff <= 0 && o.coeff == std::floor(o.coeff)) throw pole_error("constant Gamma factor at a pole");
                continue;
            }
            live.push_back({&o, side == 0});
        }
    if (live.empty()) return cf;

    const auto& ref = live.front().o->weights;
    double rr = 0.0;
    for (double w : ref) rr += w * w;
    std::vector<double> kap;
    for (auto& it : live) {
        double dot = 0.0, wmax = 0.0;
        for (int l = 0; l < M; ++l) {
            dot += it.o->weights[l] * ref[l];
            wmax = std::max(wmax, std::abs(it.o->weights[l]));
        }
        double k = dot / rr;
        for (int l = 0; l < M; ++l)
            if (std::abs(it.o->weights[l] - k * ref[l]) > 1e-12 * wmax) return std::nullopt;
        kap.push_back(k);
    }
    double kmax = 0.0;
    for (double k : kap) kmax = std::max(kmax, std::abs(k));
    for (int l = 0; l < M; ++l) cf.beta[l] = ref[l] * kmax;

    // Gamma(c + k L): k > 0 lower/num, k < 0 upper/num; denominators the other way round
    fox_h_spec& K = cf.kernel;
    std::vector<std::pair<double, double>> lo_num, lo_den, up_num, up_den;
    for (size_t j = 0; j < live.size(); ++j) {
        double c = live[j].o->coeff, k = kap[j] / kmax;
        if (live[j].num) {
            if (k > 0) lo_num.push_back({c, k});
            else up_num.push_back({1.0 - c, -k});
        } else {
            if (k > 0) up_den.push_back({c, k});
            else lo_den.push_back({1.0 - c, -k});
        }
    }
    K.m = int(lo_num.size());
    K.n = int(up_num.size());
    K.lower_params = lo_num;
    K.lower_params.insert(K.lower_params.end(), lo_den.begin(), lo_den.end());
    K.upper_params = up_num;
    K.upper_params.insert(K.upper_params.end(), up_den.begin(), up_den.end());
    K.q = int(K.lower_params.size());
    K.p = int(K.upper_params.size());
    cf.has_kernel = true;
    return cf;
}

// the line of K must sit inside the range swept by sum_l beta_l sigma_l
void check_feasible(const multi_problem& mp, const convolution_form& cf)
{
    double lo = 0.0, hi = 0.0;
    for (int l = 0; l < mp.dim; ++l) {
        auto [a, b] = strip_of(mp.per_dim[l].num);
        if (!(a < b)) throw contour_infeasible("pole groups overlap in one dimension");
        double x = cf.beta[l] * a, y = cf.beta[l] * b;
        if (cf.beta[l] == 0.0) x = y = 0.0;
        lo += std::min(x, y);
        hi += std::max(x, y);
    }
    if (!cf.has_kernel) return;
    auto [ka, kb] = strip_of(ratio_from(cf.kernel).num);
    if (!(std::max(lo, ka) < std::min(hi, kb)))
        throw contour_infeasible("no common contour for the mixed Gamma factors");
}

eval_report evaluate_convolution(const multi_fox_h_spec& h, const convolution_form& cf,
                                 const quadrature_config& cfg)
{
    multi_problem mp = problem_from(h);
    check_feasible(mp, cf);
    quadrature_config inner = cfg;
    inner.rel_tol = std::clamp(0.1 * cfg.rel_tol, 1e-13, 1e-10);
    double tol = std::max(cfg.rel_tol, 1e-9);
    long evals = 0;
    double scale = std::exp(cf.log_const);

    eval_report rep;
    if (!cf.has_kernel) {
        double v = scale;
        for (int l = 0; l < mp.dim; ++l) v *= evaluate_1d(h.per_dim[l], mp.log_arg[l], inner).value;
        rep.value = v;
        rep.nodes = mp.dim;
        return rep;
    }

    auto f = [&](double x) {
        ++evals;
        double v = evaluate_1d(cf.kernel, x, inner).value;
        for (int l = 0; l < mp.dim && v != 0.0; ++l)
            v *= evaluate_1d(h.per_dim[l], mp.log_arg[l] - cf.beta[l] * x, inner).value;
        return v;
    };

    // locate the bulk: fine steps near 0, then geometric
    double x_best = 0.0, f_best = 0.0;
    std::vector<double> probe = {0.0};
    for (double d = 0.5; d <= 8.0; d += 0.5) probe.push_back(d);
    for (double d = 10.0; d < 2e4; d *= 1.25) probe.push_back(d);
    for (double d : probe)
        for (double x : {d, -d}) {
            double v = std::abs(f(x));
            if (v > f_best) {
                f_best = v;
                x_best = x;
            }
            if (d == 0.0) break;
        }
    if (f_best == 0.0) {
        rep.nodes = evals;
        return rep;
    }

    double lo = x_best - 4.0, hi = x_best + 4.0;
    quad_result core = integrate_gk(f, lo, hi, 0.1 * tol);
    double total = core.value, err = core.error;
    for (int side = 0; side < 2; ++side) {
        double w = 4.0;
        int quiet = 0;
        for (int k = 0; quiet < 2; ++k) {
            if (k > 60 || w > 1e6) throw non_convergence("convolution integrand tail does not decay");
            double a = side ? hi : lo - w, b = side ? hi + w : lo;
            quad_result q = integrate_gk(f, a, b, 0.1 * tol, 1e-4 * tol * std::abs(total));
            total += q.value;
            err += q.error;
            if (side) hi = b;
            else lo = a;
            quiet = std::abs(q.value) <= 1e-3 * tol * std::abs(total) ? quiet + 1 : 0;
            w *= 2.0;
        }
    }
    rep.value = total * scale;
    rep.error_estimate = err * std::abs(scale);
    rep.nodes = evals;
    rep.contour = {0.0, std::max(-lo, hi), int(evals)};
    return rep;
}

eval_report evaluate_multi_routed(const multi_fox_h_spec& h, const quadrature_config& cfg)
{
    validate(h);
    if (h.dim > cfg.max_dim_exact)
        throw dimension_too_high("multivariate dimension exceeds max_dim_exact");
    if (cfg.route == multi_route::tensor) return evaluate_multi(h, cfg);
    auto cf = common_form(h);
    if (cfg.route == multi_route::convolution) {
        if (!cf) throw contour_infeasible("mixed Gamma factors do not share one linear form");
        return evaluate_convolution(h, *cf, cfg);
    }
    multi_problem mp = problem_from(h);
    bool wide = false;
    for (double la : mp.log_arg) wide = wide || std::abs(la) > cfg.residue_shift_threshold;
    if (cf && (wide || h.dim > 1)) {
        try {
            return evaluate_convolution(h, *cf, cfg);
        } catch (const non_convergence&) {
            // e.g. rho^2 ~ 1e4: kernels far out on the shifted arguments; the tensor grid copes
        }
    }
    return evaluate_multi(h, cfg);
}

}  // namespace

// ---------------------------------------------------------------- public

fox_h_spec to_fox_h(const meijer_g_spec& g)
{
    fox_h_spec h;
    h.m = g.m;
    h.n = g.n;
    h.p = g.p;
    h.q = g.q;
    h.arg_scale = g.arg_scale;
    for (double a : g.a_coeffs) h.upper_params.push_back({a, 1.0});
    for (double b : g.b_coeffs) h.lower_params.push_back({b, 1.0});
    return h;
}

void validate(const meijer_g_spec& g) { validate(to_fox_h(g)); }

void validate(const fox_h_spec& h)
{
    if (h.m < 0 || h.n < 0 || h.m > h.q || h.n > h.p)
        throw precondition_violation("Fox-H orders need m <= q and n <= p");
    if (int(h.upper_params.size()) != h.p || int(h.lower_params.size()) != h.q)
        throw precondition_violation("parameter list length does not match p, q");
    if (!(h.arg_scale > 0)) throw precondition_violation("arg_scale must be positive");
    for (auto& [a, A] : h.upper_params)
        if (!(A > 0) || !std::isfinite(a)) throw precondition_violation("upper multiplier must be positive");
    for (auto& [b, B] : h.lower_params)
        if (!(B > 0) || !std::isfinite(b)) throw precondition_violation("lower multiplier must be positive");
}

void validate(const multi_fox_h_spec& h)
{
    if (h.dim < 1) throw precondition_violation("dim must be at least 1");
    if (int(h.per_dim.size()) != h.dim)
        throw precondition_violation("per-dimension blocks do not match dim");
    for (auto& b : h.per_dim) validate(b);
    if (h.log_args.empty()) {
        if (int(h.args.size()) != h.dim) throw precondition_violation("args do not match dim");
        for (double a : h.args)
            if (!(a > 0)) throw precondition_violation("arguments must be positive");
    } else {
        if (int(h.log_args.size()) != h.dim) throw precondition_violation("log_args do not match dim");
        for (double a : h.log_args)
            if (!std::isfinite(a)) throw precondition_violation("log arguments must be finite");
    }
    for (auto* v : {&h.outer_upper, &h.outer_lower})
        for (auto& o : *v)
            if (int(o.weights.size()) != h.dim)
                throw precondition_violation("weight vector length does not match dim");
}

std::pair<double, double> admissible_strip(const fox_h_spec& h)
{
    validate(h);
    return strip_of(ratio_from(h).num);
}

contour_spec choose_contour(const fox_h_spec& h, double x, const quadrature_config& cfg)
{
    auto [lo, hi] = admissible_strip(h);
    if (!(lo < hi)) throw contour_infeasible("pole groups overlap");
    line_problem lp{ratio_from(h), std::log(h.arg_scale * x)};
    auto f = [&](double s) { return lp.log_value(cplx(s, 0.0)).real(); };
    double c = pick_line(lp, {lo, hi});
    contour_spec cs;
    cs.c = c;
    double ref = f(c);
    auto g = [&](double t) { return std::exp(lp.log_value(cplx(c, t)) - ref); };
    auto fr = [&](double t) { return lp.freq(c, t); };
    auto m = march_panels(g, fr, nearest_pole(lp.ratio.num, c), cfg.rel_tol);
    cs.half_height = m.panels.back().b;
    cs.nodes = int(m.panels.size() * 16);
    return cs;
}

contour_spec choose_contour(const meijer_g_spec& g, double x, const quadrature_config& cfg)
{
    return choose_contour(to_fox_h(g), x, cfg);
}

eval_report fox_h_report(const fox_h_spec& h, double x, const quadrature_config& cfg)
{
    if (!(x > 0)) throw precondition_violation("argument must be positive");
    return evaluate_1d(h, std::log(h.arg_scale * x), cfg);
}

eval_report fox_h_at_log(const fox_h_spec& h, double log_z, const quadrature_config& cfg)
{
    return evaluate_1d(h, log_z, cfg);
}

double fox_h(const fox_h_spec& h, double x, const quadrature_config& cfg)
{
    return fox_h_report(h, x, cfg).value;
}

double meijer_g(const meijer_g_spec& g, double x, const quadrature_config& cfg)
{
    return fox_h_report(to_fox_h(g), x, cfg).value;
}

eval_report fox_h_line(const fox_h_spec& h, double x, double c, int level,
                       const quadrature_config& cfg)
{
    validate(h);
    line_problem lp{ratio_from(h), std::log(h.arg_scale * x)};
    return line_quadrature(lp, c, level, cfg);
}

eval_report multivariate_fox_h_report(const multi_fox_h_spec& h, const quadrature_config& cfg)
{
    return evaluate_multi_routed(h, cfg);
}

double multivariate_fox_h(const multi_fox_h_spec& h, const quadrature_config& cfg)
{
    return evaluate_multi_routed(h, cfg).value;
}

cplx fox_h_log_ratio(const fox_h_spec& h, cplx s) { return ratio_from(h).log_ratio(s); }

pole_term leading_left_residue(const fox_h_spec& h)
{
    validate(h);
    ratio_1d r = ratio_from(h);
    std::vector<double> cand;
    for (auto& f : r.num)
        if (f.w > 0)
            for (long k = 0; k < 6; ++k) cand.push_back(pole_at(f, k));
    if (cand.empty()) throw precondition_violation("no left poles");
    std::sort(cand.begin(), cand.end(), std::greater<>());

    auto index_at = [](const factor& f, double s, long& k) {
        double y = f.c0 + f.w * s;
        double kk = std::round(-y);
        if (kk >= 0 && std::abs(y + kk) < 1e-9 * std::max(1.0, std::abs(f.w))) {
            k = long(kk);
            return true;
        }
        return false;
    };
    auto order_at = [&](double s) {
        int o = 0;
        long k;
        for (auto& f : r.num) o += index_at(f, s, k);
        for (auto& f : r.den) o -= index_at(f, s, k);
        return o;
    };

    pole_term pt;
    size_t i = 0;
    double s_star = 0.0;
    for (; i < cand.size(); ++i) {
        int o = order_at(cand[i]);
        if (o >= 1) {
            s_star = cand[i];
            if (o >= 2) pt.tie = true;
            break;
        }
    }
    if (i == cand.size()) throw precondition_violation("no left pole survives cancellation");
    for (size_t j = i + 1; j < cand.size(); ++j) {
        if (std::abs(cand[j] - s_star) < 1e-13) continue;
        if (order_at(cand[j]) >= 1) {
            pt.next_exponent = -cand[j];
            if (std::abs(cand[j] - s_star) < 1e-9) pt.tie = true;
            break;
        }
    }
    pt.exponent = -s_star;
    if (pt.tie) {
        pt.coeff = std::numeric_limits<double>::quiet_NaN();
        return pt;
    }
    double logc = 0.0, sign = 1.0;
    auto accum = [&](const factor& f, bool numerator) {
        long k;
        if (index_at(f, s_star, k)) {
            double v = -(std::lgamma(double(k) + 1.0)) - std::log(std::abs(f.w));
            double sg = ((k % 2) ? -1.0 : 1.0) * (f.w > 0 ? 1.0 : -1.0);
            logc += numerator ? v : -v;
            sign *= sg;
        } else {
            cplx lg = log_gamma_complex(cplx(f.c0 + f.w * s_star, 0.0));
            logc += numerator ? lg.real() : -lg.real();
            if (std::abs(std::remainder(lg.imag(), 2.0 * pi)) > 1.0) sign = -sign;
        }
    };
    for (auto& f : r.num) accum(f, true);
    for (auto& f : r.den) accum(f, false);
    pt.coeff = sign * std::exp(logc) * std::pow(h.arg_scale, pt.exponent);
    return pt;
}

}  // namespace uowc
