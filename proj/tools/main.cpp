#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <vector>

#include "hydrofcr/errors.hpp"
#include "hydrofcr/harness.hpp"
#include "hydrofcr/kpi.hpp"
#include "hydrofcr/scenario.hpp"

namespace fs = std::filesystem;
using namespace hydrofcr;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRunAbort = 3;

void print_run_summary(const harness::RunResult& r) {
    std::printf("run %-24s controller=%-10s steps=%zu wall=%.1fs mean_step=%.3fms max_step=%.3fms\n",
                r.log.run_id.c_str(), r.log.controller.c_str(), r.log.rows.size(), r.wall_seconds,
                r.mean_step_ms, r.max_step_ms);
    if (r.max_step_ms > 10.0)
        std::fprintf(stderr, "warning: controller step exceeded the 10 ms budget (%.2f ms)\n",
                     r.max_step_ms);
    std::printf("  te_rms_1s=%.4f e10=%.4f e30=%.4f e60=%.4f mileage=%.2f nom=%ld soe_viol=%ld "
                "fallbacks=%ld\n",
                r.report.te_rms_1s, r.report.e10, r.report.e30, r.report.e60,
                r.report.mileage_kw, r.report.nom, r.report.soe_violations, r.report.fallbacks);
}

int run_simulate(const std::string& scenario_path, const std::string& kpi_csv) {
    Scenario s = load_scenario(scenario_path);
    validate_scenario(s);
    const std::string kpi_path =
        kpi_csv.empty() ? (fs::path(s.output_dir) / "kpi.csv").string() : kpi_csv;
    const harness::RunResult r = harness::run_scenario_files(s, kpi_path);
    print_run_summary(r);
    return kExitOk;
}

int run_matrix(const std::string& dir, const std::string& kpi_csv) {
    std::vector<fs::path> configs;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".cfg")
            configs.push_back(entry.path());
    if (configs.empty()) throw ConfigError("matrix: no .cfg files in '" + dir + "'");
    std::sort(configs.begin(), configs.end());
    int rc = kExitOk;
    for (const fs::path& cfg : configs) {
        Scenario s = load_scenario(cfg.string());
        validate_scenario(s);
        const std::string kpi_path =
            kpi_csv.empty() ? (fs::path(s.output_dir) / "kpi.csv").string() : kpi_csv;
        try {
            print_run_summary(harness::run_scenario_files(s, kpi_path));
        } catch (const VoltageWindowViolated& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            rc = kExitRunAbort;
        }
    }
    return rc;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-loop simulator of a battery-hybridized run-of-river plant providing "
                 "frequency containment reserve"};
    app.require_subcommand(1);

    std::string scenario_path, kpi_csv, matrix_dir;
    auto* sim = app.add_subcommand("simulate", "Run one scenario config");
    sim->add_option("scenario", scenario_path, "scenario .cfg file")->required();
    sim->add_option("--kpi-csv", kpi_csv, "KPI csv to append to (default <output_dir>/kpi.csv)");

    auto* matrix = app.add_subcommand("matrix", "Run every scenario .cfg in a directory");
    matrix->add_option("dir", matrix_dir, "directory of scenario configs")->required();
    matrix->add_option("--kpi-csv", kpi_csv, "shared KPI csv (default per-scenario output dir)");

    std::uint64_t seed = 1;
    double hours = 12.0;
    bool split = false;
    std::string out_path = "trace.csv";
    harness::SynthParams synth_params;
    double std_mhz = 20.0, split_offset_mhz = -150.0;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic frequency trace");
    synth->add_option("--seed", seed, "RNG seed");
    synth->add_option("--hours", hours, "trace length in hours");
    synth->add_flag("--split", split, "append a sustained grid-split deviation segment");
    synth->add_option("--out", out_path, "output csv path");
    synth->add_option("--std-mhz", std_mhz, "stationary deviation std in mHz");
    synth->add_option("--theta", synth_params.mean_reversion_per_s, "mean reversion rate 1/s");
    synth->add_option("--split-offset-mhz", split_offset_mhz, "split deviation in mHz");
    synth->add_option("--split-start-h", synth_params.split_start_h, "split start hour");
    synth->add_option("--split-hours", synth_params.split_duration_h, "split duration hours");

    std::string trace_path;
    double train_frac = 0.8;
    auto* backtest = app.add_subcommand("forecast-backtest",
                                        "Score the hourly-integral forecasters on a trace");
    backtest->add_option("trace", trace_path, "frequency trace csv")->required();
    backtest->add_option("--train-frac", train_frac, "training fraction");
    backtest->add_option("--out", out_path, "optional csv output (default stdout)")
        ->default_val("");

    double coverage = 0.95, sigma_f = 125.0;
    auto* size = app.add_subcommand("size", "Battery power rating covering a deviation quantile");
    size->add_option("trace", trace_path, "frequency trace csv")->required();
    size->add_option("--coverage", coverage, "deviation coverage in (0.5, 1)");
    size->add_option("--sigma-f", sigma_f, "droop in kW/Hz");

    std::string kpi_path, baseline, reductions_out = "reductions.csv";
    auto* cmp = app.add_subcommand("compare", "Percent change of each KPI against a baseline run");
    cmp->add_option("kpi", kpi_path, "kpi.csv produced by simulate/matrix")->required();
    cmp->add_option("--baseline", baseline, "baseline run_id")->required();
    cmp->add_option("--out", reductions_out, "reductions csv path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) return run_simulate(scenario_path, kpi_csv);
        if (matrix->parsed()) return run_matrix(matrix_dir, kpi_csv);
        if (synth->parsed()) {
            synth_params.target_std_hz = std_mhz / 1000.0;
            synth_params.split = split;
            synth_params.split_offset_hz = split_offset_mhz / 1000.0;
            const FrequencyTrace trace = harness::synth_trace(seed, hours, synth_params);
            std::ofstream out(out_path);
            if (!out) throw Error("synth: cannot write '" + out_path + "'");
            harness::write_trace_csv(out, trace);
            std::printf("wrote %zu samples to %s\n", trace.size(), out_path.c_str());
            return kExitOk;
        }
        if (backtest->parsed()) {
            const FrequencyTrace trace = harness::ingest_trace(trace_path);
            const auto rows = harness::forecast_backtest(trace, 50.0, train_frac);
            if (out_path.empty()) {
                harness::write_backtest_csv(std::cout, rows);
            } else {
                std::ofstream out(out_path);
                if (!out) throw Error("backtest: cannot write '" + out_path + "'");
                harness::write_backtest_csv(out, rows);
            }
            return kExitOk;
        }
        if (size->parsed()) {
            const FrequencyTrace trace = harness::ingest_trace(trace_path);
            std::printf("%.6g\n", harness::size_bess(sigma_f, trace, coverage));
            return kExitOk;
        }
        if (cmp->parsed()) {
            const auto reports = harness::read_kpi_csv(kpi_path);
            const auto table = harness::compare(reports, baseline);
            std::ofstream out(reductions_out);
            if (!out) throw Error("compare: cannot write '" + reductions_out + "'");
            harness::write_reductions_csv(out, table);
            std::cout << harness::format_reduction_table(table);
            return kExitOk;
        }
    } catch (const VoltageWindowViolated& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitRunAbort;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitValidation;
    }
    return kExitOk;
}
