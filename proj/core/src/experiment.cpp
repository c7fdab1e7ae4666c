#include "volcast/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "volcast/errors.hpp"
#include "volcast/report.hpp"
#include "volcast/synthetic.hpp"
#include "volcast/tcn.hpp"
#include "volcast/train.hpp"

namespace volcast::harness {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : s) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

// rethrows any failure with the stage and stock attached
template <typename Fn>
auto stage(const std::string& name, const std::string& stock, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        throw NumericError("stage '" + name + "'" +
                           (stock.empty() ? std::string() : ", stock '" + stock + "'") + ": " +
                           e.what());
    }
}

} // namespace

std::uint64_t derive_seed(std::uint64_t master, std::string_view tag) {
    return splitmix64(master ^ fnv1a64(tag));
}

std::set<std::string> select_holdouts(std::vector<std::string> tickers, int count,
                                      std::uint64_t seed) {
    if (count < 0 || static_cast<std::size_t>(count) > tickers.size()) {
        throw ConfigError("select_holdouts: count exceeds ticker pool");
    }
    std::sort(tickers.begin(), tickers.end());
    std::mt19937_64 rng(seed);
    std::set<std::string> chosen;
    // partial Fisher-Yates: the first `count` positions become the sample
    for (int i = 0; i < count; ++i) {
        std::uniform_int_distribution<std::size_t> dist(static_cast<std::size_t>(i),
                                                        tickers.size() - 1);
        std::swap(tickers[static_cast<std::size_t>(i)], tickers[dist(rng)]);
        chosen.insert(tickers[static_cast<std::size_t>(i)]);
    }
    return chosen;
}

std::vector<marketdata::VolatilitySeries> load_panel(const ExperimentConfig& cfg) {
    switch (cfg.data.kind) {
        case DataKind::kSynthetic:
            return marketdata::generate_synthetic_panel(cfg.data.n_series, cfg.data.n_days,
                                                        derive_seed(cfg.seed, "generator"),
                                                        cfg.data.generator);
        case DataKind::kPricesCsv: {
            const auto ingest = marketdata::ingest_prices(cfg.data.path, cfg.data.max_missing);
            std::vector<marketdata::VolatilitySeries> panel;
            panel.reserve(ingest.series.size());
            for (const auto& prices : ingest.series) {
                panel.push_back(marketdata::volatility_from_prices(prices));
            }
            return panel;
        }
        case DataKind::kVolatilityCsv:
            return marketdata::load_volatility_csv(cfg.data.path);
    }
    throw ConfigError("unknown data kind");
}

namespace {

EvaluationReport run_experiment_impl(const ExperimentConfig& cfg, EvaluationReport& report) {
    const auto panel = stage("load-data", "", [&] { return load_panel(cfg); });
    if (static_cast<int>(panel.size()) <= cfg.holdout_count) {
        throw ConfigError("holdout_count must leave at least one training ticker");
    }

    std::vector<std::string> tickers;
    tickers.reserve(panel.size());
    for (const auto& s : panel) tickers.push_back(s.ticker);
    const auto holdouts =
        select_holdouts(tickers, cfg.holdout_count, derive_seed(cfg.seed, "holdouts"));

    marketdata::SplitSpec split;
    split.train_fraction = cfg.train_fraction;
    split.holdout_tickers = holdouts;
    split.seed = cfg.seed;
    const auto bundle = stage("build-datasets", "", [&] {
        return marketdata::build_datasets(panel, split, cfg.cnn.input_length);
    });
    report.first_test_date = bundle.first_test_date;
    for (const auto& origin : bundle.joint_train.origin) {
        report.joint_training_tickers.insert(origin.ticker);
        report.last_joint_train_date = std::max(report.last_joint_train_date, origin.end_date);
        if (holdouts.count(origin.ticker)) {
            throw NumericError("leakage: holdout ticker '" + origin.ticker +
                               "' found in joint training pool");
        }
    }

    tcn::TrainConfig joint_cfg = cfg.cnn.train;
    joint_cfg.threads = cfg.threads;
    joint_cfg.seed = derive_seed(cfg.seed, "shuffle/joint");
    const auto joint_model = stage("train-joint", "", [&] {
        auto model = tcn::TcnModel::make(cfg.cnn.hidden_layers, cfg.cnn.filters, cfg.cnn.kernel,
                                         cfg.cnn.input_length, derive_seed(cfg.seed, "init/joint"));
        return tcn::train(std::move(model), bundle.joint_train, joint_cfg);
    });
    report.joint_loss = joint_model.epoch_loss;

    std::map<std::string, const marketdata::VolatilitySeries*> by_ticker;
    for (const auto& s : panel) by_ticker[s.ticker] = &s;

    for (const auto& ticker : holdouts) {
        StockEvaluation eval;
        eval.ticker = ticker;
        const auto& series = *by_ticker.at(ticker);
        const auto& individual_ds = bundle.individual_train.at(ticker);
        const auto& test_slices = bundle.test_windows.at(ticker);
        const std::size_t train_len = bundle.train_value_count.at(ticker);
        const std::size_t w = static_cast<std::size_t>(cfg.cnn.input_length);

        // individual CNN
        std::optional<tcn::TcnModel> individual_model;
        try {
            tcn::TrainConfig ind_cfg = cfg.cnn.train;
            ind_cfg.threads = cfg.threads;
            ind_cfg.seed = derive_seed(cfg.seed, "shuffle/" + ticker);
            auto trained = stage("train-individual", ticker, [&] {
                auto model =
                    tcn::TcnModel::make(cfg.cnn.hidden_layers, cfg.cnn.filters, cfg.cnn.kernel,
                                        cfg.cnn.input_length, derive_seed(cfg.seed, "init/" + ticker));
                return tcn::train(std::move(model), individual_ds, ind_cfg);
            });
            eval.individual_loss = trained.epoch_loss;
            individual_model = std::move(trained.model);
        } catch (const std::exception& e) {
            if (!cfg.allow_partial) throw;
            report.warnings.push_back(e.what());
        }

        // ARIMA baseline on the raw training-period volatility
        if (cfg.arima.enabled) {
            try {
                eval.arima_fit = stage("fit-arima", ticker, [&] {
                    return arima::auto_arima(
                        std::span<const double>(series.values.data(), train_len), ticker,
                        cfg.arima.max_p, cfg.arima.max_q, cfg.arima.max_d);
                });
            } catch (const std::exception& e) {
                if (!cfg.allow_partial) throw;
                report.warnings.push_back(e.what());
            }
        }

        // walk-forward over the test period, one day ahead from realized data
        stage("evaluate", ticker, [&] {
            eval.dates.reserve(test_slices.size());
            for (const auto& slice : test_slices) {
                const std::size_t target_idx = slice.offset + w;
                if (series.dates[target_idx] != slice.end_date ||
                    !(series.dates[target_idx - 1] < slice.end_date)) {
                    throw NumericError("walk-forward audit failed: slice dates out of order");
                }
                eval.dates.push_back(slice.end_date);
                eval.actual.push_back(series.values[target_idx]);
                eval.previous_actual.push_back(series.values[target_idx - 1]);
                const std::span<const double> window(series.values.data() + slice.offset, w);
                if (individual_model) {
                    eval.pred_individual.push_back(tcn::predict_next(
                        *individual_model, window, individual_ds.mean, individual_ds.stddev));
                }
                eval.pred_joint.push_back(tcn::predict_next(
                    joint_model.model, window, bundle.joint_train.mean, bundle.joint_train.stddev));
                if (eval.arima_fit) {
                    const std::span<const double> history(series.values.data(), target_idx);
                    eval.pred_arima.push_back(arima::forecast_one_step(*eval.arima_fit, history));
                }
            }
            return 0;
        });

        auto score = [&](const std::vector<double>& pred) -> std::optional<metrics::MetricRow> {
            if (pred.empty()) return std::nullopt;
            metrics::ForecastSeries fs;
            fs.ticker = ticker;
            fs.dates = eval.dates;
            fs.actual = eval.actual;
            fs.predicted = pred;
            fs.previous_actual = eval.previous_actual;
            return metrics::evaluate(fs);
        };
        eval.row_individual = score(eval.pred_individual);
        eval.row_joint = score(eval.pred_joint);
        eval.row_arima = score(eval.pred_arima);
        report.stocks.push_back(std::move(eval));
    }

    auto average = [&](auto member) -> std::optional<metrics::MetricRow> {
        std::vector<metrics::MetricRow> rows;
        for (const auto& stock : report.stocks) {
            if (const auto& row = stock.*member) rows.push_back(*row);
        }
        if (rows.empty()) return std::nullopt;
        return metrics::aggregate(rows);
    };
    report.avg_individual = average(&StockEvaluation::row_individual);
    report.avg_joint = average(&StockEvaluation::row_joint);
    report.avg_arima = average(&StockEvaluation::row_arima);
    return report;
}

} // namespace

EvaluationReport run_experiment(const ExperimentConfig& cfg) {
    EvaluationReport report;
    report.seed = cfg.seed;
    report.config_json = config_to_json(cfg);
    report.digest = config_digest(cfg);
    try {
        return run_experiment_impl(cfg, report);
    } catch (const std::exception& e) {
        if (!cfg.output_dir.empty()) flush_partial(report, cfg.output_dir, e.what());
        throw;
    }
}

} // namespace volcast::harness
