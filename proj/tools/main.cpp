#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "volcast/arima.hpp"
#include "volcast/config.hpp"
#include "volcast/csv.hpp"
#include "volcast/errors.hpp"
#include "volcast/experiment.hpp"
#include "volcast/marketdata.hpp"
#include "volcast/report.hpp"
#include "volcast/synthetic.hpp"
#include "volcast/train.hpp"
#include "volcast/weights_io.hpp"

namespace {

namespace fs = std::filesystem;
using namespace volcast;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool allow_partial = false;
    std::optional<int> threads;
    bool print_config = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts) {
    cmd->add_option("--config", opts.config_path, "JSON config file (defaults apply without it)");
    cmd->add_option("--seed", opts.seed, "Master seed (overrides config)");
    cmd->add_option("--out", opts.out, "Output directory (overrides config)");
    cmd->add_flag("--allow-partial", opts.allow_partial,
                  "Keep going when one stock's model fails");
    cmd->add_option("--threads", opts.threads, "Worker threads, 0 = hardware (overrides config)");
    cmd->add_flag("--print-config", opts.print_config,
                  "Print the fully resolved config as JSON and exit");
}

harness::ExperimentConfig resolve_config(const CommonOpts& opts) {
    harness::ExperimentConfig cfg;
    if (!opts.config_path.empty()) cfg = harness::load_config(opts.config_path);
    if (opts.seed) cfg.seed = *opts.seed;
    if (opts.out) cfg.output_dir = *opts.out;
    if (opts.allow_partial) cfg.allow_partial = true;
    if (opts.threads) cfg.threads = *opts.threads;
    return cfg;
}

// returns true when --print-config consumed the invocation
bool maybe_print_config(const CommonOpts& opts, const harness::ExperimentConfig& cfg) {
    if (!opts.print_config) return false;
    std::cout << harness::config_to_json(cfg) << '\n';
    return true;
}

int cmd_featurize(const std::string& input, const std::string& output, int max_missing) {
    const auto ingest = marketdata::ingest_prices(input, max_missing);
    std::vector<marketdata::VolatilitySeries> panel;
    panel.reserve(ingest.series.size());
    for (const auto& prices : ingest.series) {
        panel.push_back(marketdata::volatility_from_prices(prices));
    }
    marketdata::write_volatility_csv(output, panel);
    std::cout << "featurize: " << panel.size() << " series written to " << output << " ("
              << ingest.stats.dropped_too_many_missing << " dropped for missing data, "
              << ingest.stats.dropped_leading_missing << " dropped for leading gaps, "
              << ingest.stats.filled_values << " values forward-filled)\n";
    return 0;
}

int cmd_generate(const CommonOpts& opts, const std::string& output) {
    const auto cfg = resolve_config(opts);
    if (maybe_print_config(opts, cfg)) return 0;
    const auto panel = marketdata::generate_synthetic_panel(
        cfg.data.n_series, cfg.data.n_days, harness::derive_seed(cfg.seed, "generator"),
        cfg.data.generator);
    marketdata::write_volatility_csv(output, panel);
    std::cout << "generate: " << panel.size() << " series x " << cfg.data.n_days
              << " days written to " << output << '\n';
    return 0;
}

int cmd_train_cnn(const CommonOpts& opts, const std::string& mode, const std::string& ticker) {
    auto cfg = resolve_config(opts);
    if (maybe_print_config(opts, cfg)) return 0;
    const auto panel = harness::load_panel(cfg);
    fs::create_directories(cfg.output_dir);

    marketdata::SplitSpec split;
    split.train_fraction = cfg.train_fraction;
    split.seed = cfg.seed;

    std::string label;
    const marketdata::WindowedDataset* dataset = nullptr;
    marketdata::DatasetBundle bundle;
    if (mode == "joint") {
        std::vector<std::string> tickers;
        for (const auto& s : panel) tickers.push_back(s.ticker);
        split.holdout_tickers = harness::select_holdouts(tickers, cfg.holdout_count,
                                                         harness::derive_seed(cfg.seed, "holdouts"));
        bundle = marketdata::build_datasets(panel, split, cfg.cnn.input_length);
        dataset = &bundle.joint_train;
        label = "joint";
    } else {
        if (ticker.empty()) throw ConfigError("train-cnn --mode individual needs --ticker");
        split.holdout_tickers = {ticker};
        bundle = marketdata::build_datasets(panel, split, cfg.cnn.input_length);
        dataset = &bundle.individual_train.at(ticker);
        label = ticker;
    }

    tcn::TrainConfig train_cfg = cfg.cnn.train;
    train_cfg.threads = cfg.threads;
    train_cfg.seed = harness::derive_seed(cfg.seed, "shuffle/" + label);
    auto model = tcn::TcnModel::make(cfg.cnn.hidden_layers, cfg.cnn.filters, cfg.cnn.kernel,
                                     cfg.cnn.input_length,
                                     harness::derive_seed(cfg.seed, "init/" + label));
    const auto result = tcn::train(std::move(model), *dataset, train_cfg);

    const fs::path weights = fs::path(cfg.output_dir) / ("cnn_" + label + ".bin");
    const fs::path losses = fs::path(cfg.output_dir) / ("loss_" + label + ".csv");
    tcn::save_weights(result.model, weights);
    tcn::write_loss_history_csv(losses, result.epoch_loss);
    std::cout << "train-cnn: " << label << " model on " << dataset->size() << " windows, final loss "
              << format_double(result.epoch_loss.back()) << ", weights in " << weights.string()
              << '\n';
    return 0;
}

int cmd_fit_arima(const CommonOpts& opts) {
    const auto cfg = resolve_config(opts);
    if (maybe_print_config(opts, cfg)) return 0;
    const auto panel = harness::load_panel(cfg);
    std::vector<std::string> tickers;
    for (const auto& s : panel) tickers.push_back(s.ticker);
    const auto holdouts = harness::select_holdouts(tickers, cfg.holdout_count,
                                                   harness::derive_seed(cfg.seed, "holdouts"));
    const Date cut = marketdata::split_cut_date(panel, cfg.train_fraction);

    fs::create_directories(cfg.output_dir);
    const fs::path out_path = fs::path(cfg.output_dir) / "arima_models.csv";
    std::ofstream out(out_path);
    if (!out) throw DataError("cannot write " + out_path.string());
    out << "ticker,p,d,q,coefficients,sigma2,aic,n_obs\n";
    for (const auto& series : panel) {
        if (!holdouts.count(series.ticker)) continue;
        std::size_t train_len = 0;
        while (train_len < series.dates.size() && series.dates[train_len] < cut) ++train_len;
        const auto fit = arima::auto_arima(
            std::span<const double>(series.values.data(), train_len), series.ticker,
            cfg.arima.max_p, cfg.arima.max_q, cfg.arima.max_d);
        std::string coefs;
        for (std::size_t i = 0; i < fit.ar.size(); ++i) {
            coefs += (coefs.empty() ? "" : ";") + ("ar" + std::to_string(i + 1)) + "=" +
                     format_double(fit.ar[i]);
        }
        for (std::size_t j = 0; j < fit.ma.size(); ++j) {
            coefs += (coefs.empty() ? "" : ";") + ("ma" + std::to_string(j + 1)) + "=" +
                     format_double(fit.ma[j]);
        }
        if (fit.include_mean) {
            coefs += (coefs.empty() ? "" : ";") + std::string("mean=") + format_double(fit.mean);
        }
        out << series.ticker << ',' << fit.order.p << ',' << fit.order.d << ',' << fit.order.q
            << ',' << coefs << ',' << format_double(fit.sigma2) << ',' << format_double(fit.aic)
            << ',' << fit.n_obs << '\n';
        std::cout << series.ticker << ": ARIMA(" << fit.order.p << ',' << fit.order.d << ','
                  << fit.order.q << ") aic=" << format_double(fit.aic) << '\n';
    }
    std::cout << "fit-arima: models written to " << out_path.string() << '\n';
    return 0;
}

int cmd_evaluate(const std::vector<std::string>& files) {
    std::vector<fs::path> paths(files.begin(), files.end());
    harness::EvaluationReport report;
    report.stocks = harness::load_forecast_csvs(paths);
    auto average = [&](auto member) -> std::optional<metrics::MetricRow> {
        std::vector<metrics::MetricRow> rows;
        for (const auto& stock : report.stocks) {
            if (const auto& row = stock.*member) rows.push_back(*row);
        }
        if (rows.empty()) return std::nullopt;
        return metrics::aggregate(rows);
    };
    report.avg_individual = average(&harness::StockEvaluation::row_individual);
    report.avg_joint = average(&harness::StockEvaluation::row_joint);
    report.avg_arima = average(&harness::StockEvaluation::row_arima);
    std::cout << harness::render_metrics_table(report);
    return 0;
}

int cmd_run(const CommonOpts& opts) {
    const auto cfg = resolve_config(opts);
    if (maybe_print_config(opts, cfg)) return 0;
    const auto report = harness::run_experiment(cfg);
    const auto files = harness::emit_report(report, cfg.output_dir);
    std::cout << harness::render_metrics_table(report) << '\n'
              << "run: " << files.size() << " files written to " << cfg.output_dir << " (digest "
              << report.digest << ")\n";
    for (const auto& warning : report.warnings) std::cout << "warning: " << warning << '\n';
    return 0;
}

int cmd_report(const std::string& run_dir) {
    const auto files = harness::rebuild_report_files(run_dir);
    std::cout << "report: rebuilt";
    for (const auto& f : files) std::cout << ' ' << f;
    std::cout << " in " << run_dir << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"volatility forecasting: dilated causal CNNs vs auto-ARIMA"};
    app.require_subcommand(1);

    // featurize
    auto* featurize = app.add_subcommand("featurize", "Prices CSV -> volatility CSV");
    std::string feat_input, feat_output;
    int feat_max_missing = 10;
    featurize->add_option("--input", feat_input, "date,ticker,close CSV")->required();
    featurize->add_option("--out", feat_output, "Output volatility CSV")->required();
    featurize->add_option("--max-missing", feat_max_missing,
                          "Drop tickers with more missing closes than this");

    // generate
    auto* generate = app.add_subcommand("generate", "Synthetic panel -> volatility CSV");
    CommonOpts gen_opts;
    add_common(generate, gen_opts);
    std::string gen_output = "volatility.csv";
    generate->add_option("--out-csv", gen_output, "Output volatility CSV");

    // train-cnn
    auto* train_cnn = app.add_subcommand("train-cnn", "Train one CNN (joint or individual)");
    CommonOpts train_opts;
    add_common(train_cnn, train_opts);
    std::string train_mode = "joint", train_ticker;
    train_cnn->add_option("--mode", train_mode, "joint | individual")
        ->check(CLI::IsMember({"joint", "individual"}));
    train_cnn->add_option("--ticker", train_ticker, "Ticker for individual mode");

    // fit-arima
    auto* fit_arima = app.add_subcommand("fit-arima", "Auto-ARIMA per holdout stock");
    CommonOpts arima_opts;
    add_common(fit_arima, arima_opts);

    // evaluate
    auto* evaluate = app.add_subcommand("evaluate", "Metrics from forecast CSVs");
    std::vector<std::string> eval_files;
    evaluate->add_option("files", eval_files, "forecasts_*.csv files")->required();

    // run
    auto* run = app.add_subcommand("run", "Full experiment: train, walk forward, report");
    CommonOpts run_opts;
    add_common(run, run_opts);

    // report
    auto* report = app.add_subcommand("report", "Rebuild report files from a run directory");
    std::string report_dir;
    report->add_option("--run-dir", report_dir, "Directory with forecasts_*.csv")->required();

    try {
        app.parse(argc, argv);
        if (featurize->parsed()) return cmd_featurize(feat_input, feat_output, feat_max_missing);
        if (generate->parsed()) return cmd_generate(gen_opts, gen_output);
        if (train_cnn->parsed()) return cmd_train_cnn(train_opts, train_mode, train_ticker);
        if (fit_arima->parsed()) return cmd_fit_arima(arima_opts);
        if (evaluate->parsed()) return cmd_evaluate(eval_files);
        if (run->parsed()) return cmd_run(run_opts);
        if (report->parsed()) return cmd_report(report_dir);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}
