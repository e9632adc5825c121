#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hydrofcr/errors.hpp"
#include "hydrofcr/forecast.hpp"
#include "hydrofcr/trace.hpp"

using namespace hydrofcr;
using forecast::HourlyIntegralSeries;
using forecast::ModelKind;

namespace {

FrequencyTrace constant_trace(double f, std::size_t hours, double t0 = 0.0) {
    return FrequencyTrace(t0, 1.0, std::vector<double>(hours * 3600, f));
}

HourlyIntegralSeries series_of(std::vector<double> values) {
    HourlyIntegralSeries s;
    s.values = std::move(values);
    return s;
}

} // namespace

TEST_CASE("hourly integration of constant deviations") {
    CHECK(forecast::integrate_hourly(constant_trace(50.0, 1), 50.0).values[0] ==
          doctest::Approx(0.0));
    CHECK(forecast::integrate_hourly(constant_trace(49.9, 1), 50.0).values[0] ==
          doctest::Approx(0.1));
}

TEST_CASE("half-hour sign flip integrates to zero") {
    std::vector<double> f(3600, 49.9);
    std::fill(f.begin() + 1800, f.end(), 50.1);
    const FrequencyTrace trace(0.0, 1.0, std::move(f));
    CHECK(forecast::integrate_hourly(trace, 50.0).values[0] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("partial edge hours are dropped and short traces rejected") {
    std::vector<double> f(3600 + 1800, 49.95);
    const FrequencyTrace trace(1800.0, 1.0, std::move(f));  // starts mid-hour
    const HourlyIntegralSeries s = forecast::integrate_hourly(trace, 50.0);
    CHECK(s.values.size() == 1);
    CHECK(s.t0_hour == doctest::Approx(3600.0));

    CHECK_THROWS_AS(forecast::integrate_hourly(
                        FrequencyTrace(0.0, 1.0, std::vector<double>(1000, 50.0)), 50.0),
                    TraceTooShort);
}

TEST_CASE("integration is linear in the deviation") {
    std::vector<double> f1(3600 * 2), f2(3600 * 2);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-0.05, 0.05);
    for (std::size_t i = 0; i < f1.size(); ++i) {
        const double dev = unif(rng);
        f1[i] = 50.0 - dev;
        f2[i] = 50.0 - 2.0 * dev;
    }
    const auto w1 = forecast::integrate_hourly(FrequencyTrace(0, 1, f1), 50.0);
    const auto w2 = forecast::integrate_hourly(FrequencyTrace(0, 1, f2), 50.0);
    for (std::size_t g = 0; g < w1.values.size(); ++g)
        CHECK(w2.values[g] == doctest::Approx(2.0 * w1.values[g]).epsilon(1e-9));
}

TEST_CASE("exact period-24 repetition gives zero seasonal-AR residuals") {
    std::vector<double> w;
    for (int rep = 0; rep < 15; ++rep)
        for (int h = 0; h < 24; ++h) w.push_back(0.01 * std::sin(2.0 * M_PI * h / 24.0));
    const auto model = forecast::fit(series_of(w), ModelKind::SeasonalAR);
    CHECK(model.resid_sigma == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("persistence residual sigma on white noise is sqrt(2) times the std") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> gauss(0.0, 0.02);
    std::vector<double> w(10000);
    for (double& v : w) v = gauss(rng);
    const auto model = forecast::fit(series_of(w), ModelKind::Persistence);
    CHECK(model.resid_sigma == doctest::Approx(0.02 * std::sqrt(2.0)).epsilon(0.15));
}

TEST_CASE("seasonal AR recovers an AR(1) coefficient") {
    std::mt19937_64 rng(13);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double phi = 0.8;
    std::vector<double> y(5000 + 24, 0.0);
    for (std::size_t i = 1; i < y.size(); ++i) y[i] = phi * y[i - 1] + gauss(rng);
    // integrate the seasonal difference so that the differenced series is AR(1)
    std::vector<double> w(y.size());
    for (std::size_t i = 0; i < y.size(); ++i)
        w[i] = i < 24 ? y[i] : w[i - 24] + y[i];
    const auto model = forecast::fit(series_of(w), ModelKind::SeasonalAR);
    CHECK(model.coefficients[0] == doctest::Approx(phi).epsilon(0.125));
}

TEST_CASE("insufficient data raises") {
    CHECK_THROWS_AS(forecast::fit(series_of({0.1}), ModelKind::Persistence), InsufficientData);
    CHECK_THROWS_AS(forecast::fit(series_of(std::vector<double>(20, 0.0)),
                                  ModelKind::SeasonalNaive24),
                    InsufficientData);
    CHECK_THROWS_AS(forecast::fit(series_of(std::vector<double>(100, 0.0)), ModelKind::SeasonalAR),
                    InsufficientData);
}

TEST_CASE("point predictions follow the model definitions") {
    std::vector<double> w(60);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.001 * static_cast<double>(i);
    w.back() = 0.08;
    const HourlyIntegralSeries hist = series_of(w);

    const auto persistence = forecast::fit(hist, ModelKind::Persistence);
    CHECK(forecast::predict_next_hour(persistence, hist).w_hat == doctest::Approx(0.08));

    const auto naive = forecast::fit(hist, ModelKind::SeasonalNaive24);
    CHECK(forecast::predict_next_hour(naive, hist).w_hat ==
          doctest::Approx(w[w.size() - 24]));
}

TEST_CASE("confidence bands are order consistent") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 0.01);
    std::vector<double> w(500);
    for (double& v : w) v = gauss(rng);
    const HourlyIntegralSeries hist = series_of(w);
    const auto model = forecast::fit(hist, ModelKind::Persistence);
    const auto fc = forecast::predict_next_hour(model, hist);
    CHECK(fc.w_up >= 0.0);
    CHECK(fc.w_down >= 0.0);
    CHECK(fc.w_hat - fc.w_down <= fc.w_hat);
    CHECK(fc.w_hat <= fc.w_hat + fc.w_up);
    CHECK(fc.w_up > 0.0);  // noisy residuals must give a nonempty band
}

TEST_CASE("seasonal AR beats persistence on a held-out seasonal series") {
    std::mt19937_64 rng(19);
    std::normal_distribution<double> gauss(0.0, 0.004);
    const std::size_t n = 600, n_train = 480;
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i)
        w[i] = 0.03 * std::sin(2.0 * M_PI * static_cast<double>(i % 24) / 24.0) + gauss(rng);

    HourlyIntegralSeries train;
    train.values.assign(w.begin(), w.begin() + n_train);
    const auto sar = forecast::fit(train, ModelKind::SeasonalAR);
    const auto persistence = forecast::fit(train, ModelKind::Persistence);

    double mse_sar = 0.0, mse_persistence = 0.0;
    HourlyIntegralSeries hist = train;
    for (std::size_t t = n_train; t < n; ++t) {
        const double e1 = w[t] - forecast::predict_next_hour(sar, hist).w_hat;
        const double e2 = w[t] - forecast::predict_next_hour(persistence, hist).w_hat;
        mse_sar += e1 * e1;
        mse_persistence += e2 * e2;
        hist.values.push_back(w[t]);
    }
    CHECK(mse_sar < mse_persistence);
}

TEST_CASE("gamma_t") {
    SUBCASE("all-zero residuals have no exceedances") {
        const std::vector<double> r(10, 0.0);
        CHECK(forecast::gamma_t(r, 2) == 0.0);
    }
    SUBCASE("normal tail mass at two sigma") {
        std::mt19937_64 rng(23);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> r(100000);
        for (double& v : r) v = gauss(rng);
        CHECK(forecast::gamma_t(r, 2) == doctest::Approx(0.0455).epsilon(0.22));
        CHECK(std::abs(forecast::gamma_t(r, 2) - 0.0455) <= 0.01);
    }
    SUBCASE("single spike among zeros") {
        std::vector<double> r(100, 0.0);
        r[42] = 1.0;
        // sample std = 0.1, so only the spike exceeds 2 sigma
        CHECK(forecast::gamma_t(r, 2) == doctest::Approx(0.01));
    }
    SUBCASE("invariant to positive scaling") {
        std::mt19937_64 rng(29);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> r(1000), r_scaled(1000);
        for (std::size_t i = 0; i < r.size(); ++i) {
            r[i] = gauss(rng);
            r_scaled[i] = 137.0 * r[i];
        }
        CHECK(forecast::gamma_t(r, 3) == forecast::gamma_t(r_scaled, 3));
    }
}

TEST_CASE("durbin-watson") {
    CHECK(forecast::durbin_watson(std::vector<double>{1, -1, 1, -1}) == doctest::Approx(3.0));
    CHECK(forecast::durbin_watson(std::vector<double>{1, 1, 1, 1}) == doctest::Approx(0.0));
    CHECK_THROWS_AS(forecast::durbin_watson(std::vector<double>{0, 0, 0}), AllZeroResiduals);

    SUBCASE("iid residuals give 2 within 0.05") {
        std::mt19937_64 rng(31);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<double> r(10000);
        for (double& v : r) v = gauss(rng);
        CHECK(std::abs(forecast::durbin_watson(r) - 2.0) <= 0.05);
    }
    SUBCASE("always within [0, 4]") {
        std::mt19937_64 rng(37);
        std::uniform_real_distribution<double> unif(-1.0, 1.0);
        for (int trial = 0; trial < 50; ++trial) {
            std::vector<double> r(50);
            for (double& v : r) v = unif(rng);
            const double s = forecast::durbin_watson(r);
            CHECK(s >= 0.0);
            CHECK(s <= 4.0);
        }
    }
}

TEST_CASE("short-term frequency is persistence of the last sample") {
    const FrequencyTrace t(0.0, 1.0, {50.0, 49.95});
    const auto f_hat = forecast::short_term_frequency(t, 30);
    CHECK(f_hat.size() == 30);
    for (double v : f_hat) CHECK(v == doctest::Approx(49.95));
    CHECK(forecast::short_term_frequency(t, 0).empty());
}
