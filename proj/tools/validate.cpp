#include <cmath>
#include <functional>
#include <ostream>
#include <random>

#include "sweep.hpp"

namespace uowc::cli {

namespace {

struct suite {
    std::ostream& os;
    bool all = true;

    void check(const std::string& name, const std::function<std::string(bool&)>& body)
    {
        bool ok = false;
        std::string detail;
        try {
            detail = body(ok);
        } catch (const std::exception& e) {
            ok = false;
            detail = std::string("error: ") + e.what();
        }
        all = all && ok;
        os << (ok ? "PASS " : "FAIL ") << name;
        if (!detail.empty()) os << "  " << detail;
        os << '\n';
        os.flush();
    }
};

std::string num(double v)
{
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

}  // namespace

bool run_validate(std::ostream& os, const std::vector<sweep_config>& extra)
{
    suite s{os};
    quadrature_config qc;

    s.check("identity exp(-x)", [&](bool& ok) {
        meijer_g_spec g{1, 0, 0, 1, {}, {0.0}, 1.0};
        double worst = 0;
        for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) worst = std::max(worst, rel(meijer_g(g, x, qc), std::exp(-x)));
        ok = worst < 1e-8;
        return "max rel " + num(worst);
    });
    s.check("identity x/(1+x)", [&](bool& ok) {
        meijer_g_spec g{1, 1, 1, 1, {1.0}, {1.0}, 1.0};
        double worst = 0;
        for (double x : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) worst = std::max(worst, rel(meijer_g(g, x, qc), x / (1 + x)));
        ok = worst < 1e-8;
        return "max rel " + num(worst);
    });
    s.check("reduction meijer_g = fox_h = multivariate(M=1)", [&](bool& ok) {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> u(0.1, 2.0);
        double worst = 0;
        for (int i = 0; i < 20; ++i) {
            double rho2 = u(rng), x = u(rng);
            meijer_g_spec g{2, 1, 2, 3, {1.0, rho2 + 1}, {1.0, rho2, 0.0}, u(rng)};
            double vg = meijer_g(g, x, qc);
            fox_h_spec h = to_fox_h(g);
            double vh = fox_h(h, x, qc);
            multi_fox_h_spec m;
            m.dim = 1;
            m.per_dim = {h};
            m.args = {x};
            double vm = multivariate_fox_h(m, qc);
            worst = std::max({worst, rel(vh, vg), rel(vm, vh)});
        }
        ok = worst < 1e-10;
        return "max rel " + num(worst);
    });

    for (const auto& name : egg_preset_names()) {
        s.check("normalization " + name, [&](bool& ok) {
            aperture_channel ch = channel_preset(name, 30.0);
            double split = avg_snr_linear(ch) * std::pow(effective_a0(ch), 2);
            double mass = density_mass([&](double g) { return snr_pdf(ch, g, qc); }, split, 1e-8);
            // the lower tail is a power law with exponent ~ rho^2/2, so F(gbar 1e-12) is not small
            double gbar = avg_snr_linear(ch);
            double g0 = snr_cdf(ch, gbar * 1e-40, qc), g1 = snr_cdf(ch, gbar * 1e6, qc);
            ok = std::abs(mass - 1) < 1e-4 && g0 < 1e-6 && std::abs(g1 - 1) < 1e-6;
            return "mass " + num(mass) + " F(gbar 1e-40) " + num(g0) + " F(gbar 1e6) " + num(g1) +
                   " F(gbar 1e-12) " + num(snr_cdf(ch, gbar * 1e-12, qc));
        });
    }

    modulation_params mod{1.0, 1.0};
    for (int n : {1, 2}) {
        s.check("ber exact vs quadrature strong N=" + std::to_string(n), [&](bool& ok) {
            auto arr = make_iid(channel_preset("strong", 30.0), n);
            double e = ber_iid_exact(arr, mod, qc), o = ber_quadrature(arr, mod);
            ok = rel(e, o) < 1e-3;
            return "rel " + num(rel(e, o));
        });
    }
    s.check("capacity exact vs quadrature strong N=1", [&](bool& ok) {
        auto arr = make_iid(channel_preset("strong", 20.0), 1);
        double e = capacity_inid_exact(arr, qc), o = capacity_quadrature(arr);
        ok = rel(e, o) < 1e-3;
        return "rel " + num(rel(e, o));
    });

    mc_config mc;
    mc.samples = 200'000;
    mc.master_seed = 11;
    s.check("monte carlo vs quadrature strong N=2", [&](bool& ok) {
        auto arr = make_iid(channel_preset("strong", 30.0), 2);
        auto ci = ber_monte_carlo(arr, mod, mc);
        double o = ber_quadrature(arr, mod);
        double z = (ci.estimate - o) / ci.std_error;
        ok = std::abs(z) < 3;
        return "z " + num(z);
    });
    s.check("monte carlo seed stability", [&](bool& ok) {
        auto arr = make_iid(channel_preset("strong", 30.0), 2);
        auto a = ber_monte_carlo(arr, mod, mc);
        auto m4 = mc;
        m4.workers = 4;
        auto b = ber_monte_carlo(arr, mod, mc);
        auto c = ber_monte_carlo(arr, mod, m4);
        ok = a == b && a == c;
        return "";
    });

    s.check("slope vs diversity order (omega = 0, 50-60 dB)", [&](bool& ok) {
        aperture_channel ch = channel_preset("strong", 50.0);
        ch.egg.omega = 0;
        auto arr = make_iid(ch, 1);
        double b50 = ber_iid_exact(arr, mod, qc), b60 = ber_iid_exact(with_snr(arr, 60.0), mod, qc);
        double slope = std::log10(b50 / b60), gd = diversity_order(arr);
        ok = rel(slope, gd) < 0.1;
        return "slope " + num(slope) + " G_d " + num(gd);
    });
    s.check("omega = 0 asymptote at 70 dB", [&](bool& ok) {
        aperture_channel ch = channel_preset("strong", 70.0);
        ch.egg.omega = 0;
        auto arr = make_iid(ch, 1);
        double r = ber_omega0_asymptotic(arr, mod) / ber_omega0(arr, mod, qc);
        ok = std::abs(r - 1) < 0.1;
        return "ratio " + num(r);
    });

    for (const auto& cfg : extra) {
        s.check("config " + (cfg.label.empty() ? std::string("(unnamed)") : cfg.label), [&](bool& ok) {
            validate(cfg);
            ok = true;
            return "";
        });
    }
    os << (s.all ? "all checks passed" : "some checks failed") << '\n';
    return s.all;
}

}  // namespace uowc::cli
