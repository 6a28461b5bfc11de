#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "sweep.hpp"
#include "uowc/errors.hpp"

using namespace uowc;
using namespace uowc::cli;

namespace {

struct flags {
    std::string config, preset, out;
    int n = 0;
    std::vector<double> snr_db;
    std::vector<std::string> methods;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int workers = 1;
    bool no_timing = false;
};

void add_common(CLI::App* sub, flags& f)
{
    sub->add_option("--config", f.config, "YAML sweep config (one sweep per document)");
    sub->add_option("--preset", f.preset, "turbulence preset: weak, moderate-a, moderate-b, moderate-c, strong");
    sub->add_option("--n", f.n, "number of apertures");
    sub->add_option("--snr-db", f.snr_db, "average SNR in dB; one value, or start stop step");
    sub->add_option("--method", f.methods, "exact, approx, asymptotic, quadrature, monte-carlo");
    sub->add_option("--seed", f.seed, "Monte Carlo master seed")->each([&](const std::string&) { f.seed_set = true; });
    sub->add_option("--out", f.out, "CSV output path (default stdout)");
    sub->add_option("--workers", f.workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_flag("--no-timing", f.no_timing, "write 0 in the runtime_ms column");
}

// command-line flags override the document
void apply(YAML::Node doc, const flags& f, const char* force_metric)
{
    if (!f.preset.empty()) {
        if (doc["channel"] && doc["channel"]["preset"]) doc["channel"]["preset"] = f.preset;
        else doc["preset"] = f.preset;
    }
    if (f.n > 0) doc["n"] = f.n;
    if (f.snr_db.size() == 1) {
        doc["snr_db"] = f.snr_db[0];
    } else if (f.snr_db.size() == 3) {
        YAML::Node r;
        r["start"] = f.snr_db[0];
        r["stop"] = f.snr_db[1];
        r["step"] = f.snr_db[2];
        doc["snr_db"] = r;
    } else if (!f.snr_db.empty()) {
        throw config_error("--snr-db takes one value or start stop step");
    }
    if (!f.methods.empty()) {
        YAML::Node m(YAML::NodeType::Sequence);
        for (auto& s : f.methods) m.push_back(s);
        doc["methods"] = m;
    }
    if (f.seed_set) doc["mc"]["seed"] = f.seed;
    if (f.workers > 1) doc["mc"]["workers"] = f.workers;
    if (force_metric) {
        doc.remove("metric");
        doc["metrics"] = force_metric;
    }
}

std::vector<YAML::Node> documents(const flags& f, bool need_config)
{
    std::vector<YAML::Node> docs;
    if (!f.config.empty()) {
        try {
            for (auto& d : YAML::LoadAllFromFile(f.config))
                if (!d.IsNull()) docs.push_back(d);
        } catch (const YAML::Exception& e) {
            throw config_error("cannot read " + f.config + ": " + e.what());
        }
        if (docs.empty()) throw config_error(f.config + " has no sweep");
    } else if (need_config) {
        throw config_error("--config is required");
    } else {
        YAML::Node d(YAML::NodeType::Map);
        d["snr_db"] = 30.0;
        d["methods"] = "exact";
        docs.push_back(d);
    }
    return docs;
}

int run(const flags& f, const char* metric_name, bool need_config)
{
    std::vector<sweep_config> cfgs;
    for (auto& d : documents(f, need_config)) {
        apply(d, f, metric_name);
        cfgs.push_back(parse_config(d));
    }
    bool failed = false;
    bool to_stdout_written = false;
    for (auto& cfg : cfgs) {
        auto rows = run_sweep(cfg, {f.workers});
        for (auto& r : rows) failed = failed || r.failed;
        std::string path = !f.out.empty() && cfgs.size() == 1 ? f.out : cfg.output_path;
        if (path.empty() && !f.out.empty()) path = f.out;
        if (path.empty()) {
            if (to_stdout_written) std::cout << '\n';
            write_csv(std::cout, rows, !f.no_timing);
            to_stdout_written = true;
        } else {
            auto parent = std::filesystem::path(path).parent_path();
            if (!parent.empty()) std::filesystem::create_directories(parent);
            std::ofstream os(path);
            if (!os) throw config_error("cannot write " + path);
            write_csv(os, rows, !f.no_timing);
            std::cerr << (cfg.label.empty() ? path : cfg.label) << ": " << rows.size() << " rows -> "
                      << path << '\n';
        }
    }
    return failed ? 1 : 0;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"average BER and ergodic capacity of SC multi-aperture UOWC links"};
    app.require_subcommand(1);
    flags f;
    auto* ber = app.add_subcommand("ber", "average BER");
    auto* cap = app.add_subcommand("capacity", "ergodic capacity");
    auto* sweep = app.add_subcommand("sweep", "run the sweeps of a config file");
    auto* val = app.add_subcommand("validate", "run the invariant checks");
    for (auto* s : {ber, cap, sweep}) add_common(s, f);
    val->add_option("--config", f.config, "also validate this config");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*ber) return run(f, "ber", false);
        if (*cap) return run(f, "capacity", false);
        if (*sweep) return run(f, nullptr, true);
        std::vector<sweep_config> extra;
        if (!f.config.empty()) {
            try {
                extra = load_configs(f.config);
            } catch (const config_error& e) {
                std::cout << "FAIL config " << f.config << "  " << e.what() << '\n';
                return 2;
            }
        }
        return run_validate(std::cout, extra) ? 0 : 1;
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
