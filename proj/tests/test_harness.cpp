#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "volcast/config.hpp"
#include "volcast/csv.hpp"
#include "volcast/errors.hpp"
#include "volcast/experiment.hpp"
#include "volcast/report.hpp"

using namespace volcast;
using namespace volcast::harness;

namespace {

namespace fs = std::filesystem;

fs::path temp_dir(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "volcast_test_harness" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

ExperimentConfig tiny_config(const std::string& out_dir) {
    ExperimentConfig cfg;
    cfg.seed = 2025;
    cfg.output_dir = out_dir;
    cfg.threads = 2;
    cfg.data.kind = DataKind::kSynthetic;
    cfg.data.n_series = 12;
    cfg.data.n_days = 300;
    cfg.holdout_count = 5;
    cfg.cnn.train.epochs = 5;
    cfg.cnn.train.batch_size = 32;
    return cfg;
}

} // namespace

TEST_CASE("derive_seed separates tags and masters") {
    CHECK(derive_seed(1, "a") != derive_seed(1, "b"));
    CHECK(derive_seed(1, "a") != derive_seed(2, "a"));
    CHECK(derive_seed(1, "a") == derive_seed(1, "a"));
}

TEST_CASE("select_holdouts basics") {
    std::vector<std::string> tickers = {"D", "B", "A", "C"};
    SUBCASE("count equal to the pool returns the full set") {
        const auto all = select_holdouts(tickers, 4, 9);
        CHECK(all == std::set<std::string>{"A", "B", "C", "D"});
    }
    SUBCASE("deterministic in the seed, input order irrelevant") {
        const auto a = select_holdouts(tickers, 2, 7);
        std::vector<std::string> shuffled = {"C", "A", "D", "B"};
        const auto b = select_holdouts(shuffled, 2, 7);
        CHECK(a == b);
        CHECK(a.size() == 2);
    }
    SUBCASE("count larger than the pool throws") {
        CHECK_THROWS_AS(select_holdouts(tickers, 5, 1), ConfigError);
    }
}

TEST_CASE("select_holdouts sampling is uniform (10 of 440, 1000 seeds)") {
    std::vector<std::string> tickers;
    for (int i = 0; i < 440; ++i) {
        char name[8];
        std::snprintf(name, sizeof(name), "T%03d", i);
        tickers.push_back(name);
    }
    std::map<std::string, int> counts;
    const int seeds = 1000;
    for (int seed = 0; seed < seeds; ++seed) {
        for (const auto& t : select_holdouts(tickers, 10, static_cast<std::uint64_t>(seed))) {
            ++counts[t];
        }
    }
    const double p = 10.0 / 440.0;
    const double sigma = std::sqrt(p * (1.0 - p) * seeds);
    const double expected = p * seeds;
    int outliers = 0;
    for (const auto& t : tickers) {
        const double deviation = std::abs(counts[t] - expected);
        if (deviation > 3.0 * sigma) ++outliers;
    }
    // 440 three-sigma tests admit the occasional statistical outlier; the
    // draw itself is fixed by the seeds, so this bound is stable
    CHECK(outliers <= 2);
    for (const auto& t : tickers) {
        CHECK(std::abs(counts[t] - expected) <= 5.0 * sigma);
    }
}

TEST_CASE("config parsing") {
    SUBCASE("defaults") {
        const auto cfg = parse_config_json("{}");
        CHECK(cfg.seed == 42);
        CHECK(cfg.holdout_count == 10);
        CHECK(cfg.cnn.train.epochs == 300);
        CHECK(cfg.cnn.train.batch_size == 32);
        CHECK(cfg.arima.enabled);
        CHECK(cfg.data.kind == DataKind::kSynthetic);
    }
    SUBCASE("values and nesting") {
        const auto cfg = parse_config_json(R"({
            "seed": 7,
            "split": {"train_fraction": 0.8, "holdout_count": 3},
            "cnn": {"epochs": 12, "loss": "last_step"},
            "data": {"kind": "synthetic", "synthetic": {"n_series": 9, "phi": 0.5}},
            "arima": {"enabled": false}
        })");
        CHECK(cfg.seed == 7);
        CHECK(cfg.train_fraction == 0.8);
        CHECK(cfg.holdout_count == 3);
        CHECK(cfg.cnn.train.epochs == 12);
        CHECK(cfg.cnn.train.loss_mode == tcn::LossMode::kLastStep);
        CHECK(cfg.data.n_series == 9);
        CHECK(cfg.data.generator.phi == 0.5);
        CHECK_FALSE(cfg.arima.enabled);
    }
    SUBCASE("unknown keys are rejected") {
        CHECK_THROWS_AS(parse_config_json(R"({"sedd": 1})"), ConfigError);
        CHECK_THROWS_AS(parse_config_json(R"({"cnn": {"epoch": 1}})"), ConfigError);
    }
    SUBCASE("invalid values are rejected") {
        CHECK_THROWS_AS(parse_config_json(R"({"split": {"train_fraction": 1.5}})"), ConfigError);
        CHECK_THROWS_AS(parse_config_json(R"({"data": {"kind": "csv"}})"), ConfigError);
        CHECK_THROWS_AS(parse_config_json(R"({"data": {"kind": "prices_csv"}})"), ConfigError);
        CHECK_THROWS_AS(parse_config_json("[1,2]"), ConfigError);
    }
    SUBCASE("echo round-trips") {
        auto cfg = tiny_config("x");
        cfg.data.generator.mu_min = -2.25;
        const auto echoed = parse_config_json(config_to_json(cfg));
        CHECK(config_to_json(echoed) == config_to_json(cfg));
        CHECK(config_digest(echoed) == config_digest(cfg));
    }
}

TEST_CASE("run_experiment structural checks on a tiny synthetic panel") {
    const auto out = temp_dir("structural");
    const auto cfg = tiny_config(out.string());
    const auto report = run_experiment(cfg);

    REQUIRE(report.stocks.size() == 5);
    for (const auto& stock : report.stocks) {
        CHECK(stock.row_individual.has_value());
        CHECK(stock.row_joint.has_value());
        CHECK(stock.row_arima.has_value());
        CHECK(stock.dates.size() == stock.actual.size());
        CHECK(stock.pred_individual.size() == stock.actual.size());
        CHECK(stock.pred_joint.size() == stock.actual.size());
        CHECK(stock.pred_arima.size() == stock.actual.size());
        CHECK(stock.arima_fit.has_value());
        CHECK(stock.individual_loss.size() == 5);
    }
    CHECK(report.joint_loss.size() == 5);

    SUBCASE("averaged rows equal aggregate of the per-stock rows exactly") {
        std::vector<metrics::MetricRow> ind, joint, ar;
        for (const auto& stock : report.stocks) {
            ind.push_back(*stock.row_individual);
            joint.push_back(*stock.row_joint);
            ar.push_back(*stock.row_arima);
        }
        const auto agg = metrics::aggregate(ind);
        CHECK(report.avg_individual->rmse == agg.rmse);
        CHECK(report.avg_individual->smape == agg.smape);
        CHECK(report.avg_individual->accuracy == agg.accuracy);
        CHECK(report.avg_individual->f1 == agg.f1);
        CHECK(report.avg_joint->rmse == metrics::aggregate(joint).rmse);
        CHECK(report.avg_arima->rmse == metrics::aggregate(ar).rmse);
    }

    SUBCASE("no leakage and honest walk-forward dates") {
        const auto panel = load_panel(cfg);
        std::vector<std::string> tickers;
        for (const auto& s : panel) tickers.push_back(s.ticker);
        const auto holdouts =
            select_holdouts(tickers, cfg.holdout_count, derive_seed(cfg.seed, "holdouts"));
        for (const auto& h : holdouts) CHECK(report.joint_training_tickers.count(h) == 0);
        CHECK(report.joint_training_tickers.size() == 7);
        CHECK(report.last_joint_train_date < report.first_test_date);
        for (const auto& stock : report.stocks) {
            CHECK(holdouts.count(stock.ticker) == 1);
            for (std::size_t t = 0; t < stock.dates.size(); ++t) {
                CHECK_FALSE(stock.dates[t] < report.first_test_date);
                if (t > 0) CHECK(stock.dates[t - 1] < stock.dates[t]);
            }
        }
    }

    SUBCASE("emit_report writes exactly the documented file set") {
        const auto files = emit_report(report, out);
        std::set<std::string> expected = {"metrics.csv",   "metrics.txt",
                                          "rmse_scores.csv", "accuracy_scores.csv",
                                          "loss_joint.csv",  "arima_models.csv",
                                          "manifest.json"};
        for (const auto& stock : report.stocks) {
            expected.insert("forecasts_" + stock.ticker + ".csv");
            expected.insert("loss_" + stock.ticker + ".csv");
        }
        std::set<std::string> written(files.begin(), files.end());
        CHECK(written == expected);
        std::set<std::string> on_disk;
        for (const auto& entry : fs::directory_iterator(out)) {
            on_disk.insert(entry.path().filename().string());
        }
        CHECK(on_disk == expected);

        SUBCASE("metrics csv reloads to the in-memory values") {
            std::ifstream in(out / "metrics.csv");
            std::string line;
            std::getline(in, line);
            CHECK(line == "ticker,model,rmse,smape,accuracy,f1");
            std::map<std::string, metrics::MetricRow> loaded;
            while (std::getline(in, line)) {
                const auto fields = split_csv_line(line);
                REQUIRE(fields.size() == 6);
                metrics::MetricRow row;
                row.rmse = parse_double_field(fields[2], "rmse");
                row.smape = parse_double_field(fields[3], "smape");
                row.accuracy = parse_double_field(fields[4], "accuracy");
                row.f1 = parse_double_field(fields[5], "f1");
                loaded[std::string(fields[0]) + "/" + std::string(fields[1])] = row;
            }
            for (const auto& stock : report.stocks) {
                const auto& row = loaded.at(stock.ticker + "/joint");
                CHECK(std::abs(row.rmse - stock.row_joint->rmse) < 1e-12);
                CHECK(std::abs(row.smape - stock.row_joint->smape) < 1e-12);
            }
            const auto& avg = loaded.at("AVERAGE/arima");
            CHECK(std::abs(avg.rmse - report.avg_arima->rmse) < 1e-12);
        }

        SUBCASE("score files have one row per holdout") {
            std::ifstream in(out / "rmse_scores.csv");
            std::string line;
            int rows = -1; // header
            while (std::getline(in, line)) {
                if (!line.empty()) ++rows;
            }
            CHECK(rows == 5);
        }

        SUBCASE("forecast csvs reload and rescore") {
            std::vector<fs::path> paths;
            for (const auto& stock : report.stocks) {
                paths.push_back(out / ("forecasts_" + stock.ticker + ".csv"));
            }
            const auto reloaded = load_forecast_csvs(paths);
            REQUIRE(reloaded.size() == report.stocks.size());
            for (std::size_t i = 0; i < reloaded.size(); ++i) {
                CHECK(reloaded[i].ticker == report.stocks[i].ticker);
                // first row has no in-file predecessor, so one fewer point
                CHECK(reloaded[i].actual.size() == report.stocks[i].actual.size() - 1);
                CHECK(reloaded[i].row_joint.has_value());
            }
        }
    }
}

TEST_CASE("full runs are deterministic: byte-identical CSV outputs") {
    const auto out_a = temp_dir("det_a");
    const auto out_b = temp_dir("det_b");
    auto cfg = tiny_config(out_a.string());
    cfg.cnn.train.epochs = 3;
    cfg.data.n_series = 8;
    cfg.holdout_count = 3;
    const auto report_a = run_experiment(cfg);
    const auto files_a = emit_report(report_a, out_a);
    cfg.output_dir = out_b.string();
    const auto report_b = run_experiment(cfg);
    const auto files_b = emit_report(report_b, out_b);
    REQUIRE(files_a == files_b);
    for (const auto& name : files_a) {
        if (name == "manifest.json") continue; // carries a timestamp
        CHECK_MESSAGE(slurp(out_a / name) == slurp(out_b / name), "file differs: ", name);
    }
    CHECK(report_a.digest == report_b.digest);
}

TEST_CASE("allow_partial downgrades a failing stage to a warning") {
    const auto out = temp_dir("partial");
    auto cfg = tiny_config(out.string());
    cfg.cnn.train.epochs = 2;
    // empty ARIMA grid: every per-stock fit fails
    cfg.arima.max_p = -1;
    cfg.arima.max_q = -1;
    SUBCASE("strict mode aborts") {
        cfg.allow_partial = false;
        CHECK_THROWS_AS(run_experiment(cfg), NumericError);
        CHECK(fs::exists(out / "failure.txt")); // partial outputs flushed
    }
    SUBCASE("allow_partial keeps going without the failing model") {
        cfg.allow_partial = true;
        const auto report = run_experiment(cfg);
        REQUIRE(report.stocks.size() == 5);
        CHECK_FALSE(report.warnings.empty());
        CHECK_FALSE(report.avg_arima.has_value());
        for (const auto& stock : report.stocks) {
            CHECK(stock.row_joint.has_value());
            CHECK(stock.row_individual.has_value());
            CHECK_FALSE(stock.row_arima.has_value());
            CHECK(stock.pred_arima.empty());
        }
    }
}

TEST_CASE("rebuild_report_files recomputes tables from forecast csvs") {
    const auto out = temp_dir("rebuild");
    auto cfg = tiny_config(out.string());
    cfg.cnn.train.epochs = 2;
    const auto report = run_experiment(cfg);
    emit_report(report, out);
    const auto before = slurp(out / "metrics.csv");
    fs::remove(out / "metrics.csv");
    fs::remove(out / "metrics.txt");
    const auto files = rebuild_report_files(out);
    CHECK(fs::exists(out / "metrics.csv"));
    CHECK(fs::exists(out / "metrics.txt"));
    const auto after = slurp(out / "metrics.csv");
    // recomputed from one fewer row per stock, so values differ slightly but
    // the structure must match
    CHECK(after.substr(0, after.find('\n')) == before.substr(0, before.find('\n')));
}
