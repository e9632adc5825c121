#include "hydrofcr/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hydrofcr/errors.hpp"

namespace hydrofcr::forecast {

namespace {

double sample_std(std::span<const double> v) {
    const std::size_t n = v.size();
    if (n < 2) return 0.0;
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return std::sqrt(ss / static_cast<double>(n - 1));
}

/// y_g = W_g - W_{g-s}, defined for g >= s.
std::vector<double> seasonal_difference(const std::vector<double>& w, int s) {
    std::vector<double> y;
    if (static_cast<int>(w.size()) <= s) return y;
    y.reserve(w.size() - static_cast<std::size_t>(s));
    for (std::size_t g = static_cast<std::size_t>(s); g < w.size(); ++g)
        y.push_back(w[g] - w[g - static_cast<std::size_t>(s)]);
    return y;
}

} // namespace

const char* model_kind_name(ModelKind k) {
    switch (k) {
        case ModelKind::Persistence: return "persistence";
        case ModelKind::SeasonalNaive24: return "seasonal_naive24";
        case ModelKind::SeasonalAR: return "seasonal_ar";
    }
    return "unknown";
}

HourlyIntegralSeries integrate_hourly(const FrequencyTrace& trace, double f_nominal_hz) {
    const double dt = trace.dt();
    const long steps_per_hour = std::lround(3600.0 / dt);
    if (steps_per_hour < 1 || std::abs(static_cast<double>(steps_per_hour) * dt - 3600.0) > 1e-6)
        throw ConfigError("integrate_hourly: dt must divide one hour");

    const double offset = std::fmod(trace.t0(), 3600.0);
    std::size_t start = 0;
    if (std::abs(offset) > 1e-9 && std::abs(offset - 3600.0) > 1e-9)
        start = static_cast<std::size_t>(std::lround((3600.0 - offset) / dt));
    if (start >= trace.size()) throw TraceTooShort("integrate_hourly: no hour boundary in trace");

    const std::size_t hours = (trace.size() - start) / static_cast<std::size_t>(steps_per_hour);
    if (hours < 1) throw TraceTooShort("integrate_hourly: trace shorter than one aligned hour");

    HourlyIntegralSeries out;
    out.t0_hour = trace.t0() + static_cast<double>(start) * dt;
    out.values.reserve(hours);
    for (std::size_t g = 0; g < hours; ++g) {
        double acc = 0.0;
        const std::size_t base = start + g * static_cast<std::size_t>(steps_per_hour);
        for (long j = 0; j < steps_per_hour; ++j)
            acc += (f_nominal_hz - trace[base + static_cast<std::size_t>(j)]) * dt;
        out.values.push_back(acc / 3600.0);
    }
    return out;
}

std::vector<double> one_step_residuals(const ForecastModel& model,
                                       const HourlyIntegralSeries& series) {
    const std::vector<double>& w = series.values;
    std::vector<double> r;
    switch (model.kind) {
        case ModelKind::Persistence:
            for (std::size_t g = 1; g < w.size(); ++g) r.push_back(w[g] - w[g - 1]);
            break;
        case ModelKind::SeasonalNaive24: {
            const std::size_t s = static_cast<std::size_t>(model.seasonal_period);
            for (std::size_t g = s; g < w.size(); ++g) r.push_back(w[g] - w[g - s]);
            break;
        }
        case ModelKind::SeasonalAR: {
            const std::vector<double> y = seasonal_difference(w, model.seasonal_period);
            const int p = model.ar_order;
            for (std::size_t t = static_cast<std::size_t>(p); t < y.size(); ++t) {
                double pred = 0.0;
                for (int i = 0; i < p; ++i)
                    pred += model.coefficients[i] * y[t - 1 - static_cast<std::size_t>(i)];
                r.push_back(y[t] - pred);
            }
            break;
        }
    }
    return r;
}

ForecastModel fit(const HourlyIntegralSeries& series, ModelKind kind, double level, int ar_order,
                  int seasonal_period) {
    if (level <= 0.0 || level >= 1.0) throw ConfigError("fit: level in (0, 1)");
    const std::vector<double>& w = series.values;
    const std::size_t n = w.size();

    ForecastModel model;
    model.kind = kind;
    model.ar_order = ar_order;
    model.seasonal_period = seasonal_period;
    model.level = level;

    switch (kind) {
        case ModelKind::Persistence:
            if (n < 2) throw InsufficientData("fit: persistence needs >= 2 hours");
            break;
        case ModelKind::SeasonalNaive24:
            if (static_cast<int>(n) < seasonal_period + 1)
                throw InsufficientData("fit: seasonal naive needs >= period + 1 hours");
            break;
        case ModelKind::SeasonalAR: {
            const std::size_t need = 10 * static_cast<std::size_t>(ar_order + seasonal_period);
            if (n < need) throw InsufficientData("fit: seasonal AR needs >= 10*(p + period) hours");
            const std::vector<double> y = seasonal_difference(w, seasonal_period);
            const int p = ar_order;
            const Eigen::Index rows = static_cast<Eigen::Index>(y.size()) - p;
            Eigen::MatrixXd X(rows, p);
            Eigen::VectorXd t(rows);
            for (Eigen::Index r = 0; r < rows; ++r) {
                t[r] = y[static_cast<std::size_t>(r + p)];
                for (int i = 0; i < p; ++i)
                    X(r, i) = y[static_cast<std::size_t>(r + p - 1 - i)];
            }
            Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
            if (qr.rank() < p) {
                // collinear design: ridge with a tiny diagonal
                Eigen::MatrixXd G = X.transpose() * X;
                G.diagonal().array() += 1e-8;
                model.coefficients = G.ldlt().solve(X.transpose() * t);
                model.ridge_fallback = true;
            } else {
                model.coefficients = qr.solve(t);
            }
            break;
        }
    }

    const std::vector<double> resid = one_step_residuals(model, series);
    model.resid_sigma = sample_std(resid);
    if (!resid.empty()) {
        const double alpha = 1.0 - level;
        model.resid_q_lo = quantile(resid, alpha / 2.0);
        model.resid_q_hi = quantile(resid, 1.0 - alpha / 2.0);
    }
    return model;
}

WForecast predict_next_hour(const ForecastModel& model, const HourlyIntegralSeries& history) {
    const std::vector<double>& w = history.values;
    const std::size_t n = w.size();

    WForecast fc;
    fc.level = model.level;
    switch (model.kind) {
        case ModelKind::Persistence:
            if (n < 1) throw InsufficientData("predict: persistence needs >= 1 hour");
            fc.w_hat = w.back();
            break;
        case ModelKind::SeasonalNaive24: {
            const std::size_t s = static_cast<std::size_t>(model.seasonal_period);
            if (n < s) throw InsufficientData("predict: seasonal naive needs >= period hours");
            fc.w_hat = w[n - s];
            break;
        }
        case ModelKind::SeasonalAR: {
            const std::size_t s = static_cast<std::size_t>(model.seasonal_period);
            const std::size_t p = static_cast<std::size_t>(model.ar_order);
            if (n < s + p) throw InsufficientData("predict: seasonal AR needs >= period + p hours");
            const std::vector<double> y = seasonal_difference(w, model.seasonal_period);
            double pred = 0.0;
            for (std::size_t i = 0; i < p; ++i)
                pred += model.coefficients[static_cast<Eigen::Index>(i)] * y[y.size() - 1 - i];
            fc.w_hat = w[n - s] + pred;
            break;
        }
    }
    fc.w_up = std::max(0.0, model.resid_q_hi);
    fc.w_down = std::max(0.0, -model.resid_q_lo);
    return fc;
}

double gamma_t(std::span<const double> residuals, int k_sigma) {
    if (residuals.empty()) return 0.0;
    const double sigma = sample_std(residuals);
    if (sigma == 0.0) return 0.0;
    const double threshold = static_cast<double>(k_sigma) * sigma;
    std::size_t count = 0;
    for (double r : residuals)
        if (std::abs(r) >= threshold) ++count;
    return static_cast<double>(count) / static_cast<double>(residuals.size());
}

double durbin_watson(std::span<const double> residuals) {
    if (residuals.size() < 2) throw InsufficientData("durbin_watson: needs >= 2 residuals");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < residuals.size(); ++i) {
        den += residuals[i] * residuals[i];
        if (i >= 1) {
            const double d = residuals[i] - residuals[i - 1];
            num += d * d;
        }
    }
    if (den == 0.0) throw AllZeroResiduals("durbin_watson: all residuals zero");
    return num / den;
}

std::vector<double> short_term_frequency(const FrequencyTrace& trace_so_far, int horizon_p) {
    if (horizon_p <= 0) return {};
    return std::vector<double>(static_cast<std::size_t>(horizon_p), trace_so_far.samples().back());
}

double quantile(std::vector<double> values, double p) {
    if (values.empty()) throw InsufficientData("quantile: empty sample");
    p = std::min(std::max(p, 0.0), 1.0);
    std::sort(values.begin(), values.end());
    const double pos = p * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(pos));
    if (lo == hi) return values[lo];
    const double frac = pos - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

} // namespace hydrofcr::forecast
