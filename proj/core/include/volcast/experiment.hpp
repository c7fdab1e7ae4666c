#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "volcast/arima.hpp"
#include "volcast/config.hpp"
#include "volcast/marketdata.hpp"
#include "volcast/metrics.hpp"

namespace volcast::harness {

// Per-task seed derived from the master seed; stable across runs and
// independent of execution order.
std::uint64_t derive_seed(std::uint64_t master, std::string_view tag);

// Uniform sample of `count` tickers without replacement, deterministic in
// seed. The input order does not matter; tickers are sorted first.
std::set<std::string> select_holdouts(std::vector<std::string> tickers, int count,
                                      std::uint64_t seed);

// Walk-forward result for one holdout stock. A prediction vector is empty
// when that model was skipped (allow_partial) or disabled.
struct StockEvaluation {
    std::string ticker;
    std::vector<Date> dates;
    std::vector<double> actual;
    std::vector<double> previous_actual;
    std::vector<double> pred_individual;
    std::vector<double> pred_joint;
    std::vector<double> pred_arima;
    std::optional<metrics::MetricRow> row_individual;
    std::optional<metrics::MetricRow> row_joint;
    std::optional<metrics::MetricRow> row_arima;
    std::optional<arima::ArimaModel> arima_fit;
    std::vector<double> individual_loss;
};

struct EvaluationReport {
    std::vector<StockEvaluation> stocks; // ordered by ticker
    std::optional<metrics::MetricRow> avg_individual;
    std::optional<metrics::MetricRow> avg_joint;
    std::optional<metrics::MetricRow> avg_arima;
    std::vector<double> joint_loss;
    std::uint64_t seed = 0;
    std::string config_json;
    std::string digest;
    std::vector<std::string> warnings;
    // split/leakage audit summary
    std::set<std::string> joint_training_tickers;
    Date last_joint_train_date;
    Date first_test_date;
};

// Loads or generates the configured volatility panel.
std::vector<marketdata::VolatilitySeries> load_panel(const ExperimentConfig& cfg);

// The full protocol: select holdouts, train the joint CNN once on everything
// else, train one individual CNN and fit one auto-ARIMA per holdout stock,
// then produce one-day-ahead walk-forward forecasts over the test period and
// score them. Deterministic given config + seed.
EvaluationReport run_experiment(const ExperimentConfig& cfg);

} // namespace volcast::harness
