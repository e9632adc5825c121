#include "hydrofcr/kpi.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "hydrofcr/errors.hpp"
#include "hydrofcr/forecast.hpp"

namespace hydrofcr::kpi {

std::vector<double> tracking_error_series(const RunLog& log) {
    std::vector<double> te;
    te.reserve(log.rows.size());
    for (const RunLogRow& r : log.rows) te.push_back(r.p_set_kw - (r.h_kw - r.b_kw));
    return te;
}

double energy_error(std::span<const double> te, double delta_t_s, double dt_s) {
    const long steps = std::lround(delta_t_s / dt_s);
    if (steps < 1 || std::abs(static_cast<double>(steps) * dt_s - delta_t_s) > 1e-9)
        throw ConfigError("energy_error: delta_t must be a positive multiple of dt");
    if (te.size() < static_cast<std::size_t>(steps))
        throw WindowLargerThanLog("energy_error: window larger than log");
    const std::size_t windows = te.size() / static_cast<std::size_t>(steps);
    double acc = 0.0;
    for (std::size_t w = 0; w < windows; ++w) {
        double mean = 0.0;
        for (long j = 0; j < steps; ++j)
            mean += te[w * static_cast<std::size_t>(steps) + static_cast<std::size_t>(j)];
        mean /= static_cast<double>(steps);
        acc += mean * mean;
    }
    return std::sqrt(acc / static_cast<double>(windows));
}

std::pair<double, long> servo_kpis(const RunLog& log, double eps_move_kw) {
    double mileage = 0.0;
    long nom = 0;
    bool in_move = false;
    for (std::size_t i = 1; i < log.rows.size(); ++i) {
        const double dh = std::abs(log.rows[i].h_set_kw - log.rows[i - 1].h_set_kw);
        if (dh > eps_move_kw) {
            mileage += dh;
            if (!in_move) ++nom;
            in_move = true;
        } else {
            in_move = false;
        }
    }
    return {mileage, nom};
}

std::vector<double> dh_cdf(const RunLog& log, std::span<const double> quantiles) {
    if (log.rows.size() < 2) throw InsufficientData("dh_cdf: need >= 2 steps");
    std::vector<double> rates;
    rates.reserve(log.rows.size() - 1);
    for (std::size_t i = 1; i < log.rows.size(); ++i)
        rates.push_back(std::abs(log.rows[i].h_kw - log.rows[i - 1].h_kw) / log.dt_s);
    std::vector<double> out;
    out.reserve(quantiles.size());
    for (double p : quantiles) out.push_back(forecast::quantile(rates, p));
    return out;
}

SoeSafety soe_safety(const RunLog& log, const BessConfig& bess) {
    SoeSafety s;
    for (const RunLogRow& r : log.rows) {
        s.soe_min_seen = std::min(s.soe_min_seen, r.soe);
        s.soe_max_seen = std::max(s.soe_max_seen, r.soe);
        if (r.soe < bess.soe_min || r.soe > bess.soe_max) ++s.violation_steps;
    }
    return s;
}

double default_eps_move(const PlantConfig& plant) { return 0.0025 * plant.h_max_kw; }

KpiReport compute_kpis(const RunLog& log, const PlantConfig& plant, const BessConfig* bess,
                       double eps_move_kw) {
    KpiReport r;
    r.run_id = log.run_id;
    r.controller = log.controller;
    r.bess_kw = log.bess_kw;
    r.fallbacks = log.fallback_count;

    const std::vector<double> te = tracking_error_series(log);
    double ss = 0.0;
    for (double v : te) ss += v * v;
    r.te_rms_1s = te.empty() ? 0.0 : std::sqrt(ss / static_cast<double>(te.size()));
    const auto window_rms = [&](double delta_t) {
        // aborted runs can leave a log shorter than the aggregation window
        return te.size() * log.dt_s >= delta_t ? energy_error(te, delta_t, log.dt_s) : 0.0;
    };
    r.e10 = window_rms(10.0);
    r.e30 = window_rms(30.0);
    r.e60 = window_rms(60.0);

    const auto [mileage, nom] = servo_kpis(log, eps_move_kw);
    r.mileage_kw = mileage;
    r.nom = nom;

    const double q95[] = {0.95};
    r.dh_p95 = log.rows.size() >= 2 ? dh_cdf(log, q95).front() : 0.0;

    if (bess) {
        const SoeSafety s = soe_safety(log, *bess);
        r.soe_violations = s.violation_steps;
        r.soe_min_seen = s.soe_min_seen;
        r.soe_max_seen = s.soe_max_seen;
    }
    (void)plant;
    return r;
}

const char* const kKpiCsvHeader =
    "run_id,controller,bess_kw,te_rms_1s,e10,e30,e60,mileage,nom,dh_p95,soe_viol,fallbacks";

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

} // namespace

std::string kpi_csv_row(const KpiReport& r) {
    std::string row = r.run_id;
    row += ',';
    row += r.controller;
    row += ',';
    row += fmt(r.bess_kw);
    row += ',';
    row += fmt(r.te_rms_1s);
    row += ',';
    row += fmt(r.e10);
    row += ',';
    row += fmt(r.e30);
    row += ',';
    row += fmt(r.e60);
    row += ',';
    row += fmt(r.mileage_kw);
    row += ',';
    row += std::to_string(r.nom);
    row += ',';
    row += fmt(r.dh_p95);
    row += ',';
    row += std::to_string(r.soe_violations);
    row += ',';
    row += std::to_string(r.fallbacks);
    return row;
}

void write_runlog_csv(std::ostream& out, const RunLog& log) {
    out << "k,f_hz,p_set_kw,h_set_kw,h_kw,b_set_kw,b_kw,soe,v_dc,flags\n";
    char buf[320];
    for (const RunLogRow& r : log.rows) {
        std::snprintf(buf, sizeof(buf), "%ld,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%u\n", r.k,
                      r.f_hz, r.p_set_kw, r.h_set_kw, r.h_kw, r.b_set_kw, r.b_kw, r.soe, r.v_dc,
                      r.flags);
        out << buf;
    }
}

} // namespace hydrofcr::kpi
