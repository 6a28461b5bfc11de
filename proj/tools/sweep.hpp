#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "uowc/metrics.hpp"

namespace uowc::cli {

enum class metric { ber, capacity };
enum class method { exact, approx, asymptotic, quadrature, monte_carlo };

std::string to_string(metric m);
std::string to_string(method m);
metric metric_from_string(const std::string& s);
method method_from_string(const std::string& s);

struct snr_range {
    double start = 0.0;
    double stop = 60.0;
    double step = 2.0;
    std::vector<double> points() const;
};

struct sweep_config {
    std::string label;
    aperture_array array;  // avg_snr_db of the channels is replaced per grid point
    snr_range snr;
    std::vector<metric> metrics{metric::ber};
    std::vector<method> methods;
    modulation_params modulation;
    mc_config mc;
    int max_dim_exact = 3;
    std::string output_path;
};

struct result_row {
    double snr_db = 0.0;
    metric what = metric::ber;
    method how = method::exact;
    std::optional<double> value;
    std::optional<double> std_error;
    double runtime_ms = 0.0;
    std::string note;
    bool failed = false;
};

// one config per YAML document
std::vector<sweep_config> load_configs(const std::string& path);
sweep_config parse_config(const YAML::Node& doc);
void validate(const sweep_config& cfg);

struct run_options {
    int workers = 1;
};

// rows ordered by (metric, method, snr_db)
std::vector<result_row> run_sweep(const sweep_config& cfg, const run_options& opt = {});

inline constexpr const char* csv_header = "snr_db,metric,method,value,std_error,runtime_ms,note";
void write_csv(std::ostream& os, const std::vector<result_row>& rows, bool timing = true);

// invariant suite; prints one line per check, returns true when all pass
bool run_validate(std::ostream& os, const std::vector<sweep_config>& extra = {});

}  // namespace uowc::cli
