#include <doctest.h>

#include <sstream>

#include "sweep.hpp"
#include "uowc/errors.hpp"

using namespace uowc;
using namespace uowc::cli;

namespace {

sweep_config from_yaml(const std::string& text) { return parse_config(YAML::Load(text)); }

std::string csv(const std::vector<result_row>& rows)
{
    std::ostringstream os;
    write_csv(os, rows, false);
    return os.str();
}

}  // namespace

TEST_CASE("config parsing")
{
    auto cfg = from_yaml(R"(
preset: moderate-b
n: 3
channel: {rho: 2.215, fold: off}
snr_db: {start: 0, stop: 20, step: 5}
metrics: [ber, capacity]
methods: [quadrature, exact]
modulation: {p: 0.5, q: 1}
mc: {samples: 1e5, seed: 9}
)");
    CHECK(cfg.array.size() == 3);
    CHECK(cfg.array.iid);
    CHECK(cfg.array.channels[0].egg == egg_preset("moderate-b"));
    CHECK(cfg.array.channels[0].pointing.rho == 2.215);
    CHECK(cfg.array.channels[0].fold == path_loss_fold::off);
    CHECK(cfg.snr.points() == std::vector<double>{0, 5, 10, 15, 20});
    CHECK(cfg.modulation.p == 0.5);
    CHECK(cfg.mc.samples == 100000);
    CHECK(cfg.mc.master_seed == 9);

    auto inid = from_yaml("varied: c\nn: 4\nmethods: quadrature\n");
    CHECK_FALSE(inid.array.iid);
    CHECK(inid.array.channels[3].egg.c != inid.array.channels[0].egg.c);
}

TEST_CASE("config errors")
{
    CHECK_THROWS_AS(from_yaml("preset: strong\nmethods: []\n"), config_error);
    CHECK_THROWS_AS(from_yaml("preset: strong\n"), config_error);
    CHECK_THROWS_AS(from_yaml("channel: {lambda: -1}\nmethods: [exact]\n"), config_error);
    CHECK_THROWS_AS(from_yaml("preset: nowhere\nmethods: [exact]\n"), config_error);
    CHECK_THROWS_AS(from_yaml("methods: [exact]\nsnr_db: {start: 10, stop: 0, step: 1}\n"), config_error);
    CHECK_THROWS_AS(from_yaml("methods: [exact]\nsnr_db: {start: 0, stop: 10, step: 0}\n"), config_error);
    CHECK_THROWS_AS(from_yaml("methods: [sorcery]\n"), config_error);
    CHECK_THROWS_AS(from_yaml("methods: [exact]\ncolour: blue\n"), config_error);
    CHECK_THROWS_AS(from_yaml("methods: [asymptotic]\nmetrics: [capacity]\n"), config_error);
}

TEST_CASE("quadrature sweep over the full range")
{
    auto cfg = from_yaml("preset: strong\nn: 1\nsnr_db: {start: 0, stop: 60, step: 10}\nmethods: [quadrature]\n");
    auto rows = run_sweep(cfg);
    REQUIRE(rows.size() == 7);
    for (size_t i = 1; i < rows.size(); ++i) {
        CHECK_FALSE(rows[i].failed);
        CHECK(*rows[i].value <= *rows[i - 1].value);
    }
}

TEST_CASE("exact rows agree with quadrature rows")
{
    auto cfg = from_yaml("preset: strong\nn: 2\nsnr_db: {start: 20, stop: 40, step: 20}\nmethods: [exact, quadrature]\n");
    auto rows = run_sweep(cfg, {2});
    REQUIRE(rows.size() == 4);
    // ordered by (metric, method, snr)
    CHECK(rows[0].how == method::exact);
    CHECK(rows[0].snr_db == 20);
    CHECK(rows[1].snr_db == 40);
    CHECK(rows[2].how == method::quadrature);
    for (int i = 0; i < 2; ++i) CHECK(std::abs(*rows[i].value / *rows[i + 2].value - 1) < 1e-3);
}

TEST_CASE("csv output is fixed and repeatable")
{
    auto cfg = from_yaml(R"(
preset: strong
n: 5
snr_db: {start: 10, stop: 30, step: 10}
metrics: [capacity, ber]
methods: [monte-carlo, exact]
mc: {samples: 20000, seed: 3}
)");
    cfg.metrics = {metric::capacity, metric::ber};
    cfg.methods = {method::monte_carlo, method::exact};
    auto a = run_sweep(cfg, {1});
    auto b = run_sweep(cfg, {3});
    CHECK(csv(a) == csv(b));
    std::string text = csv(a);
    CHECK(text.rfind(std::string(csv_header) + "\n", 0) == 0);
    REQUIRE(a.size() == 12);
    CHECK(a[0].what == metric::ber);
    CHECK(a[0].how == method::exact);
    CHECK(a[0].note.find("routed") != std::string::npos);
    CHECK(a[3].how == method::monte_carlo);
    CHECK(a[3].std_error.has_value());
    CHECK_FALSE(a[0].std_error.has_value());
    CHECK(a[6].what == metric::capacity);
}

TEST_CASE("failed rows carry the error")
{
    auto cfg = from_yaml("preset: strong\nn: 2\nsnr_db: 30\nmetrics: capacity\nmethods: [approx]\n");
    auto rows = run_sweep(cfg);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].failed);
    CHECK_FALSE(rows[0].value.has_value());
    CHECK(rows[0].note.find("error") != std::string::npos);
}
