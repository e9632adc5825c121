#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "hydrofcr/errors.hpp"
#include "hydrofcr/harness.hpp"
#include "hydrofcr/plant.hpp"

using namespace hydrofcr;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    const fs::path dir = fs::temp_directory_path() / "hydrofcr_tests";
    fs::create_directories(dir);
    return dir;
}

std::string write_temp(const std::string& name, const std::string& content) {
    const fs::path p = temp_dir() / name;
    std::ofstream out(p);
    out << content;
    return p.string();
}

std::string runlog_string(const kpi::RunLog& log) {
    std::ostringstream os;
    kpi::write_runlog_csv(os, log);
    return os.str();
}

Scenario flat_scenario(const std::string& name, control::ControllerType type) {
    Scenario s;
    s.name = name;
    s.duration_h = 1.0;
    s.controller.type = type;
    if (type == control::ControllerType::HydroOnly)
        s.bess.reset();
    else
        s.bess = default_bess_config(9.0);
    return s;
}

} // namespace

TEST_CASE("trace ingestion") {
    SUBCASE("a valid half-day file loads completely") {
        std::ostringstream os;
        os << "timestamp_utc,frequency_hz\n";
        for (int i = 0; i < 43200; ++i) os << (1609459200 + i) << ",50.01\n";
        const std::string path = write_temp("valid.csv", os.str());
        const FrequencyTrace t = harness::ingest_trace(path);
        CHECK(t.size() == 43200);
        CHECK(t.dt() == 1.0);
    }
    SUBCASE("a two-second gap is rejected with its line number") {
        const std::string path = write_temp(
            "gap.csv", "timestamp_utc,frequency_hz\n100,50.0\n101,50.0\n103,50.0\n");
        try {
            harness::ingest_trace(path);
            FAIL("expected GapError");
        } catch (const GapError& e) {
            CHECK(std::string(e.what()).find("line 4") != std::string::npos);
        }
    }
    SUBCASE("an absurd frequency is rejected") {
        const std::string path =
            write_temp("range.csv", "timestamp_utc,frequency_hz\n100,50.0\n101,61.2\n");
        CHECK_THROWS_AS(harness::ingest_trace(path), RangeError);
    }
    SUBCASE("bad header and malformed rows are parse errors") {
        CHECK_THROWS_AS(harness::ingest_trace(write_temp("hdr.csv", "time,freq\n1,50\n2,50\n")),
                        ParseError);
        CHECK_THROWS_AS(harness::ingest_trace(write_temp(
                            "row.csv", "timestamp_utc,frequency_hz\n1,50\nnot-a-number,50\n")),
                        ParseError);
    }
}

TEST_CASE("trace csv round trip") {
    const FrequencyTrace t = harness::synth_trace(7, 1.0);
    std::ostringstream os;
    harness::write_trace_csv(os, t);
    std::istringstream is(os.str());
    const FrequencyTrace back = harness::parse_trace(is, "roundtrip");
    REQUIRE(back.size() == t.size());
    CHECK(back.t0() == t.t0());
    for (std::size_t i = 0; i < t.size(); i += 97) CHECK(back[i] == doctest::Approx(t[i]));
}

TEST_CASE("synthetic traces are reproducible and hit the target std") {
    const FrequencyTrace a = harness::synth_trace(42, 2.0);
    const FrequencyTrace b = harness::synth_trace(42, 2.0);
    CHECK(a.samples() == b.samples());
    CHECK(harness::synth_trace(43, 2.0).samples() != a.samples());

    harness::SynthParams params;
    const FrequencyTrace big = harness::synth_trace(1, 278.0, params);  // ~1e6 samples
    double mean = 0.0;
    for (double f : big.samples()) mean += f - 50.0;
    mean /= static_cast<double>(big.size());
    double var = 0.0;
    for (double f : big.samples()) var += (f - 50.0 - mean) * (f - 50.0 - mean);
    const double std = std::sqrt(var / static_cast<double>(big.size() - 1));
    CHECK(std == doctest::Approx(params.target_std_hz).epsilon(0.10));
}

TEST_CASE("split segment sustains the configured deviation") {
    harness::SynthParams params;
    params.split = true;
    params.split_offset_hz = -0.150;
    params.split_start_h = 1.0;
    params.split_duration_h = 1.0;
    const FrequencyTrace t = harness::synth_trace(5, 3.0, params);
    long sustained = 0;
    for (std::size_t k = 3700; k < 7100; ++k)
        if (std::abs(t[k] - 50.0) > 0.100) ++sustained;
    CHECK(sustained > 3000);
}

TEST_CASE("hydro-only equilibrium run") {
    const FrequencyTrace flat(0.0, 1.0, std::vector<double>(3600, 50.0));
    const Scenario s = flat_scenario("hydro_flat", control::ControllerType::HydroOnly);
    const harness::RunResult r = harness::run_scenario(s, flat);
    CHECK(r.report.nom == 0);
    CHECK(r.report.mileage_kw == doctest::Approx(0.0));
    CHECK(r.report.te_rms_1s == doctest::Approx(0.0).epsilon(1e-9));
    for (const auto& row : r.log.rows) CHECK(row.h_kw == doctest::Approx(27.0));
}

TEST_CASE("one upper-layer invocation per simulated hour") {
    const FrequencyTrace t = harness::synth_trace(11, 3.0);
    Scenario s = flat_scenario("dbf_hours", control::ControllerType::Dbf);
    s.duration_h = 3.0;
    s.controller.dbf_threshold_hz = 0.072;
    const harness::RunResult r = harness::run_scenario(s, t);
    CHECK(r.upper_layer_invocations == 3);
}

TEST_CASE("runs are deterministic byte for byte") {
    const FrequencyTrace t = harness::synth_trace(17, 2.0);
    Scenario s = flat_scenario("dbf_det", control::ControllerType::Dbf);
    s.duration_h = 2.0;
    s.controller.dbf_threshold_hz = 0.040;
    const harness::RunResult a = harness::run_scenario(s, t);
    const harness::RunResult b = harness::run_scenario(s, t);
    CHECK(runlog_string(a.log) == runlog_string(b.log));
    CHECK(kpi::kpi_csv_row(a.report) == kpi::kpi_csv_row(b.report));
}

TEST_CASE("oracle-forecast hindsight pins the end-of-hour SOE") {
    // hour 0 charges the battery at ~3.6 kW net, hour 1 is quiet
    std::vector<double> f(2 * 3600, 50.0);
    std::fill(f.begin(), f.begin() + 3600, 50.04);
    const FrequencyTrace trace(0.0, 1.0, f);

    Scenario s = flat_scenario("dlmpc_hindsight", control::ControllerType::Dlmpc);
    s.duration_h = 2.0;
    s.forecast_kind = ForecastProviderKind::Oracle;
    s.bess->eta_ch = 1.0;
    s.bess->eta_dch = 1.0;

    const harness::RunResult r = harness::run_scenario(s, trace);
    REQUIRE_FALSE(r.log.aborted);
    // upper layer predicted SOE_end = soe_max for the charging hour
    const double soe_end_hour0 = r.log.rows[3599].soe;
    CHECK(std::abs(soe_end_hour0 - s.bess->soe_max) <= 0.01);

    // PCC dispatch neutrality during the quiet hour, after the boundary settles
    for (std::size_t k = 3660; k < r.log.rows.size(); k += 60) {
        const auto& row = r.log.rows[k];
        CHECK(std::abs((row.h_kw - row.b_kw) - 27.0) <= 0.05);
    }
}

TEST_CASE("mis-sized battery aborts the run with a partial log") {
    std::vector<double> f(3600, 49.9);  // sustained 5 kW discharge demand
    const FrequencyTrace trace(0.0, 1.0, f);
    Scenario s = flat_scenario("dbf_abort", control::ControllerType::Dbf);
    s.controller.dbf_threshold_hz = 0.040;
    s.bess->ttc.r_s_ohm = 30.0;  // deliverable power far below the demand
    const harness::RunResult r = harness::run_scenario(s, trace);
    CHECK(r.log.aborted);
    CHECK(r.log.rows.size() < 3600);
}

TEST_CASE("bess sizing from deviation quantiles") {
    SUBCASE("constructed quantiles reproduce the 5 kW and 9 kW points exactly") {
        std::vector<double> f(101);
        for (int i = 0; i <= 94; ++i) f[static_cast<std::size_t>(i)] = 0.0004 * i;
        f[95] = 0.040;
        f[96] = 0.050;
        f[97] = 0.060;
        f[98] = 0.065;
        f[99] = 0.072;
        f[100] = 0.080;
        // place the 95th percentile of |deviation| at 40 mHz and the 99th at 72 mHz
        std::swap(f[94], f[95]);
        for (std::size_t i = 0; i < f.size(); ++i)
            f[i] = i % 2 == 0 ? 50.0 + f[i] : 50.0 - f[i];
        const FrequencyTrace trace(0.0, 1.0, f);
        CHECK(harness::size_bess(125.0, trace, 0.95) == doctest::Approx(5.0).epsilon(1e-12));
        CHECK(harness::size_bess(125.0, trace, 0.99) == doctest::Approx(9.0).epsilon(1e-12));
    }
    SUBCASE("a flat trace needs no battery") {
        const FrequencyTrace flat(0.0, 1.0, std::vector<double>(100, 50.0));
        CHECK(harness::size_bess(125.0, flat, 0.95) == 0.0);
    }
    SUBCASE("coverage must be a usable quantile") {
        const FrequencyTrace flat(0.0, 1.0, std::vector<double>(100, 50.0));
        CHECK_THROWS_AS(harness::size_bess(125.0, flat, 0.3), ConfigError);
    }
}

TEST_CASE("comparison tables") {
    kpi::KpiReport hydro;
    hydro.run_id = "only_hydro";
    hydro.controller = "hydro_only";
    hydro.mileage_kw = 32.93;
    hydro.nom = 9261;
    hydro.te_rms_1s = 0.2405;
    hydro.e30 = 0.7331;
    kpi::KpiReport dlmpc = hydro;
    dlmpc.run_id = "dlmpc9";
    dlmpc.controller = "dlmpc";
    dlmpc.mileage_kw = 1.98;
    dlmpc.nom = 64;
    dlmpc.e30 = 0.3468;

    const harness::ReductionTable table = harness::compare({hydro, dlmpc}, "only_hydro");
    REQUIRE(table.rows.size() == 2);
    CHECK(table.rows[0].mileage_pct == doctest::Approx(0.0));
    CHECK(table.rows[0].nom_pct == doctest::Approx(0.0));
    CHECK(table.rows[1].nom_pct == doctest::Approx(-99.3).epsilon(0.001));
    CHECK(table.rows[1].mileage_pct == doctest::Approx(-94.0).epsilon(0.001));

    CHECK_THROWS_AS(harness::compare({hydro}, "missing"), MissingBaseline);

    std::ostringstream os;
    harness::write_reductions_csv(os, table);
    CHECK(os.str().find("dlmpc9") != std::string::npos);
    CHECK(harness::format_reduction_table(table).find("baseline: only_hydro") !=
          std::string::npos);
}

TEST_CASE("kpi csv io round trip") {
    const fs::path dir = temp_dir();
    const fs::path kpi_path = dir / "kpi_roundtrip.csv";
    fs::remove(kpi_path);
    {
        std::ofstream out(kpi_path);
        out << kpi::kKpiCsvHeader << "\n";
        kpi::KpiReport r;
        r.run_id = "abc";
        r.controller = "dbf";
        r.bess_kw = 5;
        r.e30 = 0.25;
        r.nom = 17;
        out << kpi::kpi_csv_row(r) << "\n";
    }
    const auto reports = harness::read_kpi_csv(kpi_path.string());
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].run_id == "abc");
    CHECK(reports[0].e30 == doctest::Approx(0.25));
    CHECK(reports[0].nom == 17);
}

TEST_CASE("forecast backtest emits one row per fit-able model") {
    const FrequencyTrace t = harness::synth_trace(3, 400.0);
    const auto rows = harness::forecast_backtest(t, 50.0, 0.8);
    REQUIRE(rows.size() == 3);  // persistence, seasonal naive, seasonal AR
    for (const auto& row : rows) {
        CHECK(std::isfinite(row.mse));
        CHECK(row.durbin_watson >= 0.0);
        CHECK(row.durbin_watson <= 4.0);
    }
    std::ostringstream os;
    harness::write_backtest_csv(os, rows);
    CHECK(os.str().rfind("model,mse,sigma,gamma_95,gamma_99,dw", 0) == 0);
}

TEST_CASE("run_scenario_files writes the artifacts") {
    const fs::path dir = temp_dir() / "artifacts";
    fs::remove_all(dir);

    const FrequencyTrace t = harness::synth_trace(23, 1.0);
    const fs::path trace_path = temp_dir() / "artifact_trace.csv";
    {
        std::ofstream out(trace_path);
        harness::write_trace_csv(out, t);
    }
    Scenario s = flat_scenario("files_demo", control::ControllerType::Dbf);
    s.trace_path = trace_path.string();
    s.output_dir = dir.string();
    s.controller.dbf_threshold_hz = 0.072;

    const fs::path kpi_path = dir / "kpi.csv";
    harness::run_scenario_files(s, kpi_path.string());
    CHECK(fs::exists(dir / "runlog_files_demo.csv"));
    const auto reports = harness::read_kpi_csv(kpi_path.string());
    REQUIRE(reports.size() == 1);
    CHECK(reports[0].run_id == "files_demo");
}
