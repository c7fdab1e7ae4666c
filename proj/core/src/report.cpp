#include "volcast/report.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "volcast/csv.hpp"
#include "volcast/errors.hpp"

namespace volcast::harness {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path.string());
    return out;
}

void write_metric_csv_row(std::ostream& out, const std::string& ticker, const char* model,
                          const metrics::MetricRow& row) {
    out << ticker << ',' << model << ',' << format_double(row.rmse) << ','
        << format_double(row.smape) << ',' << format_double(row.accuracy) << ','
        << format_double(row.f1) << '\n';
}

std::string coefficient_field(const arima::ArimaModel& fit) {
    std::ostringstream os;
    bool first = true;
    auto add = [&](const std::string& name, double value) {
        if (!first) os << ';';
        first = false;
        os << name << '=' << format_double(value);
    };
    for (std::size_t i = 0; i < fit.ar.size(); ++i) add("ar" + std::to_string(i + 1), fit.ar[i]);
    for (std::size_t j = 0; j < fit.ma.size(); ++j) add("ma" + std::to_string(j + 1), fit.ma[j]);
    if (fit.include_mean) add("mean", fit.mean);
    return os.str();
}

std::string cell(const std::optional<metrics::MetricRow>& row, double metrics::MetricRow::*field) {
    if (!row) return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", (*row).*field);
    return buf;
}

} // namespace

std::string render_metrics_table(const EvaluationReport& report) {
    std::ostringstream os;
    auto line = [&](const std::string& label, const std::string& a, const std::string& b,
                    const std::string& c) {
        os << "  ";
        os.width(10);
        os << std::left << label << std::right;
        os.width(16);
        os << a;
        os.width(12);
        os << b;
        os.width(12);
        os << c;
        os << '\n';
    };
    os << "Evaluation metrics averaged over " << report.stocks.size() << " stocks\n\n";
    line("", "CNN Individual", "ARIMA", "CNN Joint");
    os << "Value Forecasts\n";
    line("RMSE", cell(report.avg_individual, &metrics::MetricRow::rmse),
         cell(report.avg_arima, &metrics::MetricRow::rmse),
         cell(report.avg_joint, &metrics::MetricRow::rmse));
    line("SMAPE", cell(report.avg_individual, &metrics::MetricRow::smape),
         cell(report.avg_arima, &metrics::MetricRow::smape),
         cell(report.avg_joint, &metrics::MetricRow::smape));
    os << "Direction Forecasts\n";
    line("Accuracy", cell(report.avg_individual, &metrics::MetricRow::accuracy),
         cell(report.avg_arima, &metrics::MetricRow::accuracy),
         cell(report.avg_joint, &metrics::MetricRow::accuracy));
    line("F1", cell(report.avg_individual, &metrics::MetricRow::f1),
         cell(report.avg_arima, &metrics::MetricRow::f1),
         cell(report.avg_joint, &metrics::MetricRow::f1));
    return os.str();
}

std::vector<std::string> emit_report(const EvaluationReport& report,
                                     const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> files;
    auto note = [&](const std::string& name) {
        files.push_back(name);
        return dir / name;
    };

    {
        auto out = open_out(note("metrics.csv"));
        out << "ticker,model,rmse,smape,accuracy,f1\n";
        for (const auto& stock : report.stocks) {
            if (stock.row_individual) write_metric_csv_row(out, stock.ticker, "individual", *stock.row_individual);
            if (stock.row_joint) write_metric_csv_row(out, stock.ticker, "joint", *stock.row_joint);
            if (stock.row_arima) write_metric_csv_row(out, stock.ticker, "arima", *stock.row_arima);
        }
        if (report.avg_individual) write_metric_csv_row(out, "AVERAGE", "individual", *report.avg_individual);
        if (report.avg_joint) write_metric_csv_row(out, "AVERAGE", "joint", *report.avg_joint);
        if (report.avg_arima) write_metric_csv_row(out, "AVERAGE", "arima", *report.avg_arima);
    }
    {
        auto out = open_out(note("metrics.txt"));
        out << render_metrics_table(report);
    }
    {
        auto out = open_out(note("rmse_scores.csv"));
        out << "ticker,individual,joint,arima\n";
        for (const auto& stock : report.stocks) {
            out << stock.ticker << ','
                << (stock.row_individual ? format_double(stock.row_individual->rmse) : "") << ','
                << (stock.row_joint ? format_double(stock.row_joint->rmse) : "") << ','
                << (stock.row_arima ? format_double(stock.row_arima->rmse) : "") << '\n';
        }
    }
    {
        auto out = open_out(note("accuracy_scores.csv"));
        out << "ticker,individual,joint,arima\n";
        for (const auto& stock : report.stocks) {
            out << stock.ticker << ','
                << (stock.row_individual ? format_double(stock.row_individual->accuracy) : "")
                << ',' << (stock.row_joint ? format_double(stock.row_joint->accuracy) : "") << ','
                << (stock.row_arima ? format_double(stock.row_arima->accuracy) : "") << '\n';
        }
    }
    for (const auto& stock : report.stocks) {
        auto out = open_out(note("forecasts_" + stock.ticker + ".csv"));
        out << "date,actual,individual,joint,arima\n";
        for (std::size_t t = 0; t < stock.dates.size(); ++t) {
            out << stock.dates[t].to_string() << ',' << format_double(stock.actual[t]) << ','
                << (t < stock.pred_individual.size() ? format_double(stock.pred_individual[t]) : "")
                << ',' << (t < stock.pred_joint.size() ? format_double(stock.pred_joint[t]) : "")
                << ',' << (t < stock.pred_arima.size() ? format_double(stock.pred_arima[t]) : "")
                << '\n';
        }
    }
    if (!report.joint_loss.empty()) {
        auto out = open_out(note("loss_joint.csv"));
        out << "epoch,mean_loss\n";
        for (std::size_t i = 0; i < report.joint_loss.size(); ++i) {
            out << (i + 1) << ',' << format_double(report.joint_loss[i]) << '\n';
        }
    }
    for (const auto& stock : report.stocks) {
        if (stock.individual_loss.empty()) continue;
        auto out = open_out(note("loss_" + stock.ticker + ".csv"));
        out << "epoch,mean_loss\n";
        for (std::size_t i = 0; i < stock.individual_loss.size(); ++i) {
            out << (i + 1) << ',' << format_double(stock.individual_loss[i]) << '\n';
        }
    }
    {
        bool any = false;
        for (const auto& stock : report.stocks) any = any || stock.arima_fit.has_value();
        if (any) {
            auto out = open_out(note("arima_models.csv"));
            out << "ticker,p,d,q,coefficients,sigma2,aic,n_obs\n";
            for (const auto& stock : report.stocks) {
                if (!stock.arima_fit) continue;
                const auto& fit = *stock.arima_fit;
                out << stock.ticker << ',' << fit.order.p << ',' << fit.order.d << ','
                    << fit.order.q << ',' << coefficient_field(fit) << ','
                    << format_double(fit.sigma2) << ',' << format_double(fit.aic) << ','
                    << fit.n_obs << '\n';
            }
        }
    }
    {
        nlohmann::json manifest;
        manifest["seed"] = report.seed;
        manifest["config_digest"] = report.digest;
        manifest["config"] = nlohmann::json::parse(report.config_json);
        std::vector<std::string> sorted_files = files;
        sorted_files.push_back("manifest.json");
        std::sort(sorted_files.begin(), sorted_files.end());
        manifest["files"] = sorted_files;
        manifest["warnings"] = report.warnings;
        const auto now = std::chrono::system_clock::now();
        manifest["generated_at_unix"] =
            std::chrono::duration_cast<std::chrono::seconds>(now.time_since_epoch()).count();
        auto out = open_out(note("manifest.json"));
        out << manifest.dump(2) << '\n';
    }
    return files;
}

void flush_partial(const EvaluationReport& partial, const std::filesystem::path& dir,
                   const std::string& failure) noexcept {
    try {
        std::filesystem::create_directories(dir);
        {
            auto out = open_out(dir / "failure.txt");
            out << failure << '\n';
        }
        for (const auto& stock : partial.stocks) {
            auto out = open_out(dir / ("forecasts_" + stock.ticker + ".csv"));
            out << "date,actual,individual,joint,arima\n";
            for (std::size_t t = 0; t < stock.dates.size(); ++t) {
                out << stock.dates[t].to_string() << ',' << format_double(stock.actual[t]) << ','
                    << (t < stock.pred_individual.size() ? format_double(stock.pred_individual[t])
                                                         : "")
                    << ','
                    << (t < stock.pred_joint.size() ? format_double(stock.pred_joint[t]) : "")
                    << ','
                    << (t < stock.pred_arima.size() ? format_double(stock.pred_arima[t]) : "")
                    << '\n';
            }
        }
    } catch (...) {
        // diagnosis output only; the original error is what matters
    }
}

std::vector<StockEvaluation> load_forecast_csvs(const std::vector<std::filesystem::path>& files) {
    std::vector<StockEvaluation> stocks;
    for (const auto& path : files) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open forecast CSV: " + path.string());
        std::string line;
        if (!std::getline(in, line)) throw DataError("empty forecast CSV: " + path.string());

        StockEvaluation eval;
        std::string name = path.stem().string();
        if (name.rfind("forecasts_", 0) == 0) name = name.substr(10);
        eval.ticker = name;

        std::size_t line_no = 1;
        double previous = 0.0;
        bool have_previous = false;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            if (line.back() == '\r') line.pop_back();
            const auto fields = split_csv_line(line);
            const std::string where = path.string() + ":" + std::to_string(line_no);
            if (fields.size() != 5) throw DataError("malformed forecast row (" + where + ")");
            const Date date = Date::parse(fields[0]);
            const double actual = parse_double_field(fields[1], where);
            // the first row has no realized predecessor in the file; walk-forward
            // metrics start with the second row
            if (have_previous) {
                eval.dates.push_back(date);
                eval.actual.push_back(actual);
                eval.previous_actual.push_back(previous);
                if (!fields[2].empty()) {
                    eval.pred_individual.push_back(parse_double_field(fields[2], where));
                }
                if (!fields[3].empty()) {
                    eval.pred_joint.push_back(parse_double_field(fields[3], where));
                }
                if (!fields[4].empty()) {
                    eval.pred_arima.push_back(parse_double_field(fields[4], where));
                }
            }
            previous = actual;
            have_previous = true;
        }
        auto score = [&](const std::vector<double>& pred) -> std::optional<metrics::MetricRow> {
            if (pred.empty()) return std::nullopt;
            if (pred.size() != eval.actual.size()) {
                throw DataError("forecast CSV has partial model column: " + path.string());
            }
            metrics::ForecastSeries fs;
            fs.ticker = eval.ticker;
            fs.dates = eval.dates;
            fs.actual = eval.actual;
            fs.predicted = pred;
            fs.previous_actual = eval.previous_actual;
            return metrics::evaluate(fs);
        };
        eval.row_individual = score(eval.pred_individual);
        eval.row_joint = score(eval.pred_joint);
        eval.row_arima = score(eval.pred_arima);
        stocks.push_back(std::move(eval));
    }
    std::sort(stocks.begin(), stocks.end(),
              [](const StockEvaluation& a, const StockEvaluation& b) { return a.ticker < b.ticker; });
    return stocks;
}

std::vector<std::string> rebuild_report_files(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> forecast_files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind("forecasts_", 0) == 0 && entry.path().extension() == ".csv") {
            forecast_files.push_back(entry.path());
        }
    }
    if (forecast_files.empty()) {
        throw DataError("no forecasts_*.csv files in " + dir.string());
    }
    std::sort(forecast_files.begin(), forecast_files.end());

    EvaluationReport report;
    report.stocks = load_forecast_csvs(forecast_files);
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

    std::vector<std::string> files;
    {
        std::ofstream out(dir / "metrics.csv");
        if (!out) throw DataError("cannot write metrics.csv in " + dir.string());
        out << "ticker,model,rmse,smape,accuracy,f1\n";
        for (const auto& stock : report.stocks) {
            if (stock.row_individual) write_metric_csv_row(out, stock.ticker, "individual", *stock.row_individual);
            if (stock.row_joint) write_metric_csv_row(out, stock.ticker, "joint", *stock.row_joint);
            if (stock.row_arima) write_metric_csv_row(out, stock.ticker, "arima", *stock.row_arima);
        }
        if (report.avg_individual) write_metric_csv_row(out, "AVERAGE", "individual", *report.avg_individual);
        if (report.avg_joint) write_metric_csv_row(out, "AVERAGE", "joint", *report.avg_joint);
        if (report.avg_arima) write_metric_csv_row(out, "AVERAGE", "arima", *report.avg_arima);
        files.push_back("metrics.csv");
    }
    {
        std::ofstream out(dir / "metrics.txt");
        out << render_metrics_table(report);
        files.push_back("metrics.txt");
    }
    {
        std::ofstream out(dir / "rmse_scores.csv");
        out << "ticker,individual,joint,arima\n";
        for (const auto& stock : report.stocks) {
            out << stock.ticker << ','
                << (stock.row_individual ? format_double(stock.row_individual->rmse) : "") << ','
                << (stock.row_joint ? format_double(stock.row_joint->rmse) : "") << ','
                << (stock.row_arima ? format_double(stock.row_arima->rmse) : "") << '\n';
        }
        files.push_back("rmse_scores.csv");
    }
    {
        std::ofstream out(dir / "accuracy_scores.csv");
        out << "ticker,individual,joint,arima\n";
        for (const auto& stock : report.stocks) {
            out << stock.ticker << ','
                << (stock.row_individual ? format_double(stock.row_individual->accuracy) : "")
                << ',' << (stock.row_joint ? format_double(stock.row_joint->accuracy) : "") << ','
                << (stock.row_arima ? format_double(stock.row_arima->accuracy) : "") << '\n';
        }
        files.push_back("accuracy_scores.csv");
    }
    return files;
}

} // namespace volcast::harness
