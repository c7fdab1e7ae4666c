#include "volcast/marketdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>

#include "volcast/csv.hpp"
#include "volcast/errors.hpp"

namespace volcast::marketdata {

namespace {

struct RawRow {
    Date date;
    std::optional<double> close;
};

} // namespace

IngestResult ingest_prices(const std::filesystem::path& path, int max_missing) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open price CSV: " + path.string());

    std::string line;
    if (!std::getline(in, line)) throw DataError("empty price CSV: " + path.string());

    std::map<std::string, std::vector<RawRow>> by_ticker;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.back() == '\r') line.pop_back();
        auto fields = split_csv_line(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (fields.size() != 3 || fields[1].empty()) {
            throw DataError("malformed price row (" + where + "): '" + line + "'");
        }
        RawRow row;
        try {
            row.date = Date::parse(fields[0]);
        } catch (const DataError& e) {
            throw DataError("malformed price row (" + where + "): " + e.what());
        }
        if (!fields[2].empty()) {
            double close = parse_double_field(fields[2], where);
            if (!(close > 0.0)) {
                throw DataError("malformed price row (" + where + "): non-positive close");
            }
            row.close = close;
        }
        by_ticker[std::string(fields[1])].push_back(row);
    }

    IngestResult result;
    result.stats.tickers_seen = static_cast<int>(by_ticker.size());
    for (auto& [ticker, rows] : by_ticker) {
        std::stable_sort(rows.begin(), rows.end(),
                         [](const RawRow& a, const RawRow& b) { return a.date < b.date; });
        for (std::size_t i = 1; i < rows.size(); ++i) {
            if (rows[i].date == rows[i - 1].date) {
                throw DataError("duplicate date " + rows[i].date.to_string() + " for ticker " + ticker);
            }
        }
        int missing = 0;
        for (const auto& r : rows)
            if (!r.close) ++missing;
        if (missing > max_missing) {
            ++result.stats.dropped_too_many_missing;
            continue;
        }
        if (!rows.empty() && !rows.front().close) {
            ++result.stats.dropped_leading_missing;
            continue;
        }

        PriceSeries series;
        series.ticker = ticker;
        series.dates.reserve(rows.size());
        series.closes.reserve(rows.size());
        double last = 0.0;
        for (const auto& r : rows) {
            if (r.close) {
                last = *r.close;
            } else {
                ++result.stats.filled_values;
            }
            series.dates.push_back(r.date);
            series.closes.push_back(last);
        }
        result.series.push_back(std::move(series));
    }
    return result;
}

std::vector<double> log_returns(const PriceSeries& series) {
    if (series.closes.size() < 2) {
        throw DataError("log_returns: series '" + series.ticker + "' has fewer than 2 prices");
    }
    std::vector<double> out(series.closes.size() - 1);
    for (std::size_t t = 0; t + 1 < series.closes.size(); ++t) {
        if (!(series.closes[t] > 0.0) || !(series.closes[t + 1] > 0.0)) {
            throw DataError("log_returns: non-positive price in series '" + series.ticker + "'");
        }
        out[t] = std::log(series.closes[t + 1] / series.closes[t]);
    }
    return out;
}

std::vector<double> rolling_volatility(std::span<const double> returns, int window, double annualize) {
    if (window < 2) throw ConfigError("rolling_volatility: window must be >= 2");
    if (returns.size() < static_cast<std::size_t>(window)) {
        throw DataError("rolling_volatility: series shorter than window (" +
                        std::to_string(returns.size()) + " < " + std::to_string(window) + ")");
    }
    const std::size_t w = static_cast<std::size_t>(window);
    const std::size_t n_out = returns.size() - w + 1;
    std::vector<double> out(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        // two-pass around the first element, so a constant window is exactly zero
        const double shift = returns[i];
        double mean = 0.0;
        for (std::size_t j = 0; j < w; ++j) mean += returns[i + j] - shift;
        mean /= static_cast<double>(w);
        double ss = 0.0;
        for (std::size_t j = 0; j < w; ++j) {
            const double d = (returns[i + j] - shift) - mean;
            ss += d * d;
        }
        out[i] = annualize * std::sqrt(ss / static_cast<double>(window - 1));
    }
    return out;
}

VolatilitySeries volatility_from_prices(const PriceSeries& series, int window, double annualize) {
    const auto returns = log_returns(series);
    VolatilitySeries vol;
    vol.ticker = series.ticker;
    vol.window = window;
    vol.annualization = annualize;
    vol.values = rolling_volatility(returns, window, annualize);
    // value i covers returns [i, i+window), dated at the window's last return
    vol.dates.assign(series.dates.begin() + window, series.dates.end());
    return vol;
}

std::vector<WindowSlice> windowize(const VolatilitySeries& vol, int window_len) {
    std::vector<WindowSlice> slices;
    const std::size_t need = static_cast<std::size_t>(window_len) + 1;
    if (vol.values.size() < need) return slices;
    const std::size_t n = vol.values.size() - need + 1;
    slices.reserve(n);
    for (std::size_t off = 0; off < n; ++off) {
        slices.push_back({off, vol.dates[off + need - 1]});
    }
    return slices;
}

namespace {

Standardization pool_standardization(const std::vector<const VolatilitySeries*>& series,
                                     const std::vector<std::vector<WindowSlice>>& slices,
                                     int window_len) {
    const std::size_t slice_len = static_cast<std::size_t>(window_len) + 1;
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t s = 0; s < series.size(); ++s) {
        for (const auto& slice : slices[s]) {
            for (std::size_t j = 0; j < slice_len; ++j) sum += series[s]->values[slice.offset + j];
            n += slice_len;
        }
    }
    Standardization st;
    st.mean = sum / static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t s = 0; s < series.size(); ++s) {
        for (const auto& slice : slices[s]) {
            for (std::size_t j = 0; j < slice_len; ++j) {
                const double d = series[s]->values[slice.offset + j] - st.mean;
                ss += d * d;
            }
        }
    }
    st.stddev = std::sqrt(ss / static_cast<double>(n));
    if (!(st.stddev > 0.0)) st.stddev = 1.0; // constant pool standardizes to all zeros
    return st;
}

WindowedDataset make_dataset(const std::vector<const VolatilitySeries*>& series,
                             const std::vector<std::vector<WindowSlice>>& slices,
                             int window_len) {
    WindowedDataset ds;
    ds.window_len = window_len;
    const auto st = pool_standardization(series, slices, window_len);
    ds.mean = st.mean;
    ds.stddev = st.stddev;
    std::size_t total = 0;
    for (const auto& v : slices) total += v.size();
    ds.count = total;
    const std::size_t w = static_cast<std::size_t>(window_len);
    ds.inputs.resize(total * w);
    ds.targets.resize(total * w);
    ds.scalar_targets.resize(total);
    ds.origin.reserve(total);
    std::size_t row = 0;
    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& values = series[s]->values;
        for (const auto& slice : slices[s]) {
            double* in = ds.inputs.data() + row * w;
            double* tg = ds.targets.data() + row * w;
            for (std::size_t j = 0; j < w; ++j) {
                in[j] = standardize(values[slice.offset + j], st);
                tg[j] = standardize(values[slice.offset + j + 1], st);
            }
            ds.scalar_targets[row] = tg[w - 1];
            ds.origin.push_back({series[s]->ticker, slice.end_date});
            ++row;
        }
    }
    return ds;
}

} // namespace

Date split_cut_date(const std::vector<VolatilitySeries>& panel, double train_fraction) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw ConfigError("train_fraction must be in (0,1)");
    }
    std::vector<Date> all_dates;
    for (const auto& s : panel) all_dates.insert(all_dates.end(), s.dates.begin(), s.dates.end());
    std::sort(all_dates.begin(), all_dates.end());
    all_dates.erase(std::unique(all_dates.begin(), all_dates.end()), all_dates.end());
    const std::size_t cut =
        static_cast<std::size_t>(train_fraction * static_cast<double>(all_dates.size()));
    if (cut == 0 || cut >= all_dates.size()) {
        throw DataError("degenerate train/test split: no dates on one side of the cut");
    }
    return all_dates[cut];
}

DatasetBundle build_datasets(const std::vector<VolatilitySeries>& panel,
                             const SplitSpec& split, int window_len) {
    std::map<std::string, const VolatilitySeries*> by_ticker;
    for (const auto& s : panel) by_ticker[s.ticker] = &s;
    for (const auto& h : split.holdout_tickers) {
        if (!by_ticker.count(h)) throw DataError("holdout ticker not in panel: " + h);
    }
    const Date first_test_date = split_cut_date(panel, split.train_fraction);

    DatasetBundle bundle;
    bundle.first_test_date = first_test_date;

    std::vector<const VolatilitySeries*> joint_series;
    std::vector<std::vector<WindowSlice>> joint_slices;
    for (const auto& [ticker, series] : by_ticker) {
        auto slices = windowize(*series, window_len);
        std::vector<WindowSlice> train_part, test_part;
        for (const auto& sl : slices) {
            (sl.end_date < first_test_date ? train_part : test_part).push_back(sl);
        }
        if (split.holdout_tickers.count(ticker)) {
            if (train_part.empty()) {
                throw DataError("holdout ticker '" + ticker + "' has no training windows");
            }
            if (test_part.empty()) {
                throw DataError("holdout ticker '" + ticker + "' has no test windows");
            }
            bundle.individual_train[ticker] =
                make_dataset({series}, {std::move(train_part)}, window_len);
            bundle.test_windows[ticker] = std::move(test_part);
            std::size_t train_values = 0;
            while (train_values < series->dates.size() &&
                   series->dates[train_values] < first_test_date) {
                ++train_values;
            }
            bundle.train_value_count[ticker] = train_values;
        } else if (!train_part.empty()) {
            joint_series.push_back(series);
            joint_slices.push_back(std::move(train_part));
        }
    }
    if (joint_series.empty()) throw DataError("joint training pool is empty");
    bundle.joint_train = make_dataset(joint_series, joint_slices, window_len);
    return bundle;
}

void write_volatility_csv(const std::filesystem::path& path,
                          std::span<const VolatilitySeries> panel) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write volatility CSV: " + path.string());
    out << "date,ticker,volatility\n";
    for (const auto& series : panel) {
        for (std::size_t i = 0; i < series.values.size(); ++i) {
            out << series.dates[i].to_string() << ',' << series.ticker << ','
                << format_double(series.values[i]) << '\n';
        }
    }
    if (!out) throw DataError("write failed: " + path.string());
}

std::vector<VolatilitySeries> load_volatility_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open volatility CSV: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw DataError("empty volatility CSV: " + path.string());

    std::map<std::string, VolatilitySeries> by_ticker;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line.back() == '\r') line.pop_back();
        auto fields = split_csv_line(line);
        const std::string where = path.string() + ":" + std::to_string(line_no);
        if (fields.size() != 3 || fields[1].empty() || fields[2].empty()) {
            throw DataError("malformed volatility row (" + where + "): '" + line + "'");
        }
        const Date date = Date::parse(fields[0]);
        const double value = parse_double_field(fields[2], where);
        if (value < 0.0) throw DataError("negative volatility (" + where + ")");
        auto& series = by_ticker[std::string(fields[1])];
        series.ticker = fields[1];
        series.dates.push_back(date);
        series.values.push_back(value);
    }
    std::vector<VolatilitySeries> panel;
    panel.reserve(by_ticker.size());
    for (auto& [ticker, series] : by_ticker) {
        std::vector<std::size_t> idx(series.dates.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            return series.dates[a] < series.dates[b];
        });
        VolatilitySeries sorted;
        sorted.ticker = series.ticker;
        sorted.dates.reserve(idx.size());
        sorted.values.reserve(idx.size());
        for (std::size_t i : idx) {
            if (!sorted.dates.empty() && sorted.dates.back() == series.dates[i]) {
                throw DataError("duplicate date " + series.dates[i].to_string() +
                                " for ticker " + ticker + " in " + path.string());
            }
            sorted.dates.push_back(series.dates[i]);
            sorted.values.push_back(series.values[i]);
        }
        panel.push_back(std::move(sorted));
    }
    return panel;
}

} // namespace volcast::marketdata
