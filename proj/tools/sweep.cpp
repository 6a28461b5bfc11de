#include "sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <memory>
#include <ostream>
#include <thread>

#include "uowc/errors.hpp"

namespace uowc::cli {

std::string to_string(metric m) { return m == metric::ber ? "ber" : "capacity"; }

std::string to_string(method m)
{
    switch (m) {
    case method::exact: return "exact";
    case method::approx: return "approx";
    case method::asymptotic: return "asymptotic";
    case method::quadrature: return "quadrature";
    case method::monte_carlo: return "monte-carlo";
    }
    return "?";
}

metric metric_from_string(const std::string& s)
{
    if (s == "ber") return metric::ber;
    if (s == "capacity") return metric::capacity;
    throw config_error("unknown metric: " + s);
}

method method_from_string(const std::string& s)
{
    if (s == "exact") return method::exact;
    if (s == "approx") return method::approx;
    if (s == "asymptotic") return method::asymptotic;
    if (s == "quadrature") return method::quadrature;
    if (s == "monte-carlo" || s == "mc") return method::monte_carlo;
    throw config_error("unknown method: " + s);
}

std::vector<double> snr_range::points() const
{
    std::vector<double> out;
    int n = int(std::floor((stop - start) / step + 1e-9));
    for (int i = 0; i <= n; ++i) out.push_back(start + i * step);
    return out;
}

namespace {

void check_keys(const YAML::Node& n, std::initializer_list<const char*> allowed, const char* where)
{
    for (auto it = n.begin(); it != n.end(); ++it) {
        auto k = it->first.as<std::string>();
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return k == a; }))
            throw config_error(std::string("unknown key '") + k + "' in " + where);
    }
}

aperture_channel parse_channel(const YAML::Node& n, aperture_channel ch)
{
    if (!n) return ch;
    if (!n.IsMap()) throw config_error("channel block must be a map");
    check_keys(n, {"preset", "omega", "lambda", "a", "b", "c", "a0", "rho", "path_loss_db", "fold"},
               "channel");
    if (n["preset"]) ch.egg = egg_preset(n["preset"].as<std::string>());
    if (n["omega"]) ch.egg.omega = n["omega"].as<double>();
    if (n["lambda"]) ch.egg.lambda = n["lambda"].as<double>();
    if (n["a"]) ch.egg.a = n["a"].as<double>();
    if (n["b"]) ch.egg.b = n["b"].as<double>();
    if (n["c"]) ch.egg.c = n["c"].as<double>();
    if (n["a0"]) ch.pointing.a0 = n["a0"].as<double>();
    if (n["rho"]) ch.pointing.rho = n["rho"].as<double>();
    if (n["path_loss_db"]) ch.pointing.path_loss_db = n["path_loss_db"].as<double>();
    if (n["fold"]) ch.fold = fold_from_string(n["fold"].as<std::string>());
    return ch;
}

varied_param varied_from_string(const std::string& s)
{
    if (s == "omega") return varied_param::omega;
    if (s == "lambda") return varied_param::lambda;
    if (s == "a") return varied_param::a;
    if (s == "b") return varied_param::b;
    if (s == "c") return varied_param::c;
    throw config_error("unknown varied parameter: " + s);
}

template <class T>
std::vector<T> scalar_or_list(const YAML::Node& n)
{
    std::vector<T> out;
    if (n.IsSequence())
        for (auto x : n) out.push_back(x.as<T>());
    else
        out.push_back(n.as<T>());
    return out;
}

}  // namespace

sweep_config parse_config(const YAML::Node& doc)
{
    try {
        if (!doc.IsMap()) throw config_error("config document must be a map");
        check_keys(doc, {"label", "preset", "channel", "channels", "n", "iid", "varied", "snr_db",
                         "metrics", "metric", "methods", "modulation", "mc", "max_dim_exact",
                         "output"},
                   "config");
        sweep_config cfg;
        if (doc["label"]) cfg.label = doc["label"].as<std::string>();

        aperture_channel base = channel_preset("strong", 0.0);
        if (doc["preset"]) base.egg = egg_preset(doc["preset"].as<std::string>());
        base = parse_channel(doc["channel"], base);
        int n = doc["n"] ? doc["n"].as<int>() : 1;
        if (n < 1) throw config_error("n must be at least 1");
        if (doc["channels"]) {
            if (!doc["channels"].IsSequence() || doc["channels"].size() == 0)
                throw config_error("channels must be a non-empty list");
            std::vector<aperture_channel> chs;
            for (auto c : doc["channels"]) chs.push_back(parse_channel(c, base));
            cfg.array = make_inid(chs);
        } else if (doc["varied"]) {
            auto chs = inid_varied(varied_from_string(doc["varied"].as<std::string>()), n, 0.0);
            // pointing and fold come from the channel block
            for (auto& c : chs) {
                c.pointing = base.pointing;
                c.fold = base.fold;
            }
            cfg.array = make_inid(chs);
        } else {
            cfg.array = make_iid(base, n);
        }
        if (doc["iid"]) {
            bool want = doc["iid"].as<bool>();
            if (want && !cfg.array.iid) {
                for (auto& c : cfg.array.channels)
                    if (!(c == cfg.array.channels.front()))
                        throw config_error("iid: true but channels differ");
            }
            cfg.array.iid = want;
        }

        if (auto s = doc["snr_db"]) {
            if (s.IsMap()) {
                check_keys(s, {"start", "stop", "step"}, "snr_db");
                cfg.snr.start = s["start"].as<double>();
                cfg.snr.stop = s["stop"].as<double>();
                cfg.snr.step = s["step"] ? s["step"].as<double>() : 2.0;
            } else {
                cfg.snr.start = cfg.snr.stop = s.as<double>();
                cfg.snr.step = 1.0;
            }
        }
        if (doc["metrics"] || doc["metric"]) {
            cfg.metrics.clear();
            for (auto& m : scalar_or_list<std::string>(doc["metrics"] ? doc["metrics"] : doc["metric"]))
                cfg.metrics.push_back(metric_from_string(m));
        }
        if (!doc["methods"]) throw config_error("methods missing");
        for (auto& m : scalar_or_list<std::string>(doc["methods"]))
            cfg.methods.push_back(method_from_string(m));
        if (auto m = doc["modulation"]) {
            if (m.IsMap()) {
                check_keys(m, {"p", "q"}, "modulation");
                cfg.modulation = {m["p"].as<double>(), m["q"].as<double>()};
            } else {
                cfg.modulation = modulation_preset(m.as<std::string>());
            }
        }
        if (auto m = doc["mc"]) {
            check_keys(m, {"samples", "seed", "workers"}, "mc");
            if (m["samples"]) cfg.mc.samples = long(m["samples"].as<double>());
            if (m["seed"]) cfg.mc.master_seed = m["seed"].as<std::uint64_t>();
            if (m["workers"]) cfg.mc.workers = m["workers"].as<int>();
        }
        if (doc["max_dim_exact"]) cfg.max_dim_exact = doc["max_dim_exact"].as<int>();
        if (doc["output"]) cfg.output_path = doc["output"].as<std::string>();
        validate(cfg);
        return cfg;
    } catch (const YAML::Exception& e) {
        throw config_error(std::string("bad config value: ") + e.what());
    } catch (const config_error&) {
        throw;
    } catch (const error& e) {
        // parameter invariants (negative lambda and the like)
        throw config_error(e.what());
    }
}

std::vector<sweep_config> load_configs(const std::string& path)
{
    std::vector<YAML::Node> docs;
    try {
        docs = YAML::LoadAllFromFile(path);
    } catch (const YAML::Exception& e) {
        throw config_error("cannot read " + path + ": " + e.what());
    }
    std::vector<sweep_config> out;
    for (auto& d : docs) {
        if (d.IsNull()) continue;
        out.push_back(parse_config(d));
    }
    if (out.empty()) throw config_error(path + " has no sweep");
    return out;
}

void validate(const sweep_config& cfg)
{
    try {
        validate(cfg.array);
        validate(cfg.modulation);
    } catch (const config_error&) {
        throw;
    } catch (const error& e) {
        throw config_error(e.what());
    }
    if (!(cfg.snr.step > 0.0)) throw config_error("snr_db step must be positive");
    if (cfg.snr.start > cfg.snr.stop) throw config_error("snr_db start must not exceed stop");
    if (cfg.methods.empty()) throw config_error("methods must not be empty");
    if (cfg.metrics.empty()) throw config_error("metrics must not be empty");
    if (cfg.max_dim_exact < 1) throw config_error("max_dim_exact must be positive");
    if (cfg.mc.samples < 1 || cfg.mc.workers < 1) throw config_error("mc samples and workers must be positive");
    for (auto m : cfg.metrics)
        for (auto h : cfg.methods)
            if (m == metric::capacity && h == method::asymptotic)
                throw config_error("asymptotic is only available for ber");
}

namespace {

bool all_omega0(const aperture_array& arr)
{
    return std::all_of(arr.channels.begin(), arr.channels.end(),
                       [](const aperture_channel& c) { return c.egg.omega == 0.0; });
}

struct evaluator {
    const sweep_config& cfg;
    quadrature_config qc;
    std::shared_ptr<asymptotic_result> asym;
    std::string asym_error;

    result_row run(metric what, method how, double db) const
    {
        result_row r;
        r.snr_db = db;
        r.what = what;
        r.how = how;
        auto t0 = std::chrono::steady_clock::now();
        try {
            aperture_array arr = with_snr(cfg.array, db);
            if (what == metric::ber)
                ber(arr, how, db, r);
            else
                capacity(arr, how, r);
            if (r.value) {
                double v = *r.value;
                if (!std::isfinite(v) || v < 0.0 || (what == metric::ber && v > 0.5 + 1e-9)) {
                    r.failed = true;
                    append(r.note, "value out of range");
                }
            }
        } catch (const std::exception& e) {
            r.value.reset();
            r.std_error.reset();
            r.failed = true;
            append(r.note, std::string("error: ") + e.what());
        }
        r.runtime_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        return r;
    }

    static void append(std::string& note, const std::string& s)
    {
        if (!note.empty()) note += "; ";
        note += s;
    }

    bool over_cap(const aperture_array& arr) const { return arr.size() > qc.max_dim_exact; }

    void ber(const aperture_array& arr, method how, double db, result_row& r) const
    {
        const auto& mod = cfg.modulation;
        switch (how) {
        case method::exact:
            if (!over_cap(arr)) {
                r.value = arr.iid ? ber_iid_exact(arr, mod, qc) : ber_inid_exact(arr, mod, qc);
            } else if (arr.iid) {
                r.value = ber_iid_approx(arr, mod, qc);
                r.note = "routed to approx: N exceeds max_dim_exact";
            } else {
                r.value = ber_quadrature(arr, mod);
                r.note = "routed to quadrature: N exceeds max_dim_exact";
            }
            break;
        case method::approx:
            if (!arr.iid) throw precondition_violation("approx needs an i.i.d. array");
            r.value = ber_iid_approx(arr, mod, qc);
            break;
        case method::asymptotic:
            if (!asym) throw error(asym_error);
            r.value = std::min(0.5, asym->curve(db));
            if (asym->curve(db) > 0.5) r.note = "asymptote clamped at 0.5";
            if (asym->tie_warning) append(r.note, "tie: slope fit of exact curve");
            break;
        case method::quadrature:
            r.value = ber_quadrature(arr, mod);
            break;
        case method::monte_carlo: {
            auto ci = ber_monte_carlo(arr, mod, cfg.mc);
            r.value = ci.estimate;
            r.std_error = ci.std_error;
            break;
        }
        }
    }

    void capacity(const aperture_array& arr, method how, result_row& r) const
    {
        bool omega0_iid = arr.iid && all_omega0(arr);
        switch (how) {
        case method::exact:
            if (!over_cap(arr)) {
                r.value = omega0_iid ? capacity_iid_exact_omega0(arr, qc) : capacity_inid_exact(arr, qc);
            } else if (omega0_iid) {
                r.value = capacity_iid_approx_omega0(arr, qc);
                r.note = "routed to approx: N exceeds max_dim_exact";
            } else {
                r.value = capacity_quadrature(arr);
                r.note = "routed to quadrature: N exceeds max_dim_exact";
            }
            break;
        case method::approx:
            if (!omega0_iid) throw precondition_violation("capacity approx needs i.i.d. channels with omega = 0");
            r.value = capacity_iid_approx_omega0(arr, qc);
            break;
        case method::asymptotic:
            throw precondition_violation("asymptotic is only available for ber");
        case method::quadrature:
            r.value = capacity_quadrature(arr);
            break;
        case method::monte_carlo: {
            auto ci = capacity_monte_carlo(arr, cfg.mc);
            r.value = ci.estimate;
            r.std_error = ci.std_error;
            break;
        }
        }
    }
};

}  // namespace

std::vector<result_row> run_sweep(const sweep_config& cfg, const run_options& opt)
{
    validate(cfg);
    auto metrics = cfg.metrics;
    auto methods = cfg.methods;
    std::sort(metrics.begin(), metrics.end());
    metrics.erase(std::unique(metrics.begin(), metrics.end()), metrics.end());
    std::sort(methods.begin(), methods.end());
    methods.erase(std::unique(methods.begin(), methods.end()), methods.end());
    auto grid = cfg.snr.points();

    struct task {
        metric what;
        method how;
        double db;
    };
    std::vector<task> tasks;
    for (auto m : metrics)
        for (auto h : methods)
            for (double db : grid) tasks.push_back({m, h, db});

    int workers = std::max(1, opt.workers);
    unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    evaluator ev{cfg, {}, nullptr, {}};
    ev.qc.max_dim_exact = cfg.max_dim_exact;
    ev.qc.threads = std::max(1, int(hw) / workers);

    bool want_asym = std::find(methods.begin(), methods.end(), method::asymptotic) != methods.end() &&
                     std::find(metrics.begin(), metrics.end(), metric::ber) != metrics.end();
    if (want_asym) {
        try {
            ev.asym = std::make_shared<asymptotic_result>(ber_asymptotic(cfg.array, cfg.modulation, ev.qc));
        } catch (const std::exception& e) {
            ev.asym_error = e.what();
        }
    }

    std::vector<result_row> rows(tasks.size());
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i; (i = next++) < tasks.size();)
            rows[i] = ev.run(tasks[i].what, tasks[i].how, tasks[i].db);
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    return rows;
}

namespace {

std::string csv_field(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<result_row>& rows, bool timing)
{
    os << csv_header << '\n';
    for (auto& r : rows) {
        os << fmt("%.6g", r.snr_db) << ',' << to_string(r.what) << ',' << to_string(r.how) << ','
           << (r.value ? fmt("%.12g", *r.value) : "") << ','
           << (r.std_error ? fmt("%.6g", *r.std_error) : "") << ','
           << (timing ? fmt("%.1f", r.runtime_ms) : "0") << ',' << csv_field(r.note) << '\n';
    }
}

}  // namespace uowc::cli
