#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "volcast/date.hpp"

namespace volcast::marketdata {

inline constexpr int kVolatilityWindow = 21;
inline const double kAnnualizationFactor = std::sqrt(252.0);
inline constexpr int kInputWindowLength = 64;

// Dated closing prices for one ticker. After ingestion the series is
// gap-free, dates strictly increasing, closes strictly positive.
struct PriceSeries {
    std::string ticker;
    std::vector<Date> dates;
    std::vector<double> closes;
};

// Annualized rolling-std volatility estimates. values[i] is dated at the
// last return of its window, so a price series of length N yields N-21
// values for the default 21-day window.
struct VolatilitySeries {
    std::string ticker;
    std::vector<Date> dates;
    std::vector<double> values;
    int window = kVolatilityWindow;
    double annualization = kAnnualizationFactor;
};

struct IngestStats {
    int tickers_seen = 0;
    int dropped_too_many_missing = 0; // more than max_missing empty closes
    int dropped_leading_missing = 0;  // first observation missing, cannot forward-fill
    int filled_values = 0;            // gaps forward-filled
};

struct IngestResult {
    std::vector<PriceSeries> series; // sorted by ticker, each sorted by date
    IngestStats stats;
};

// Reads a `date,ticker,close` CSV (one file, many tickers; empty close =
// missing). Tickers with more than max_missing missing closes are dropped,
// remaining gaps are forward-filled from the last observed close.
IngestResult ingest_prices(const std::filesystem::path& path, int max_missing = 10);

// Daily logarithmic returns, ln(close[t+1]/close[t]). Length n-1.
std::vector<double> log_returns(const PriceSeries& series);

// Rolling sample standard deviation (divisor window-1) of `returns`,
// scaled by `annualize`. Output length = returns.size() - window + 1.
std::vector<double> rolling_volatility(std::span<const double> returns,
                                       int window = kVolatilityWindow,
                                       double annualize = kAnnualizationFactor);

// Full price -> volatility featurization for one series.
VolatilitySeries volatility_from_prices(const PriceSeries& series,
                                        int window = kVolatilityWindow,
                                        double annualize = kAnnualizationFactor);

// One overlapping slice of window_len inputs plus the next value. The slice
// is vol.values[offset .. offset+window_len] inclusive; end_date is the date
// of the final (target) element and decides train/test membership.
struct WindowSlice {
    std::size_t offset = 0;
    Date end_date;
};

// All stride-1 slices of length window_len+1. A series shorter than
// window_len+1 yields no slices (not an error).
std::vector<WindowSlice> windowize(const VolatilitySeries& vol,
                                   int window_len = kInputWindowLength);

struct WindowOrigin {
    std::string ticker;
    Date end_date;
};

// Standardized training windows. inputs[i] holds window_len consecutive
// standardized values, targets[i] the same slice shifted one step ahead,
// scalar_targets[i] the standardized value one past the input window.
// Rows are stored flat, window_len entries per row.
struct WindowedDataset {
    int window_len = kInputWindowLength;
    std::size_t count = 0;
    std::vector<double> inputs;
    std::vector<double> targets;
    std::vector<double> scalar_targets;
    double mean = 0.0;
    double stddev = 1.0;
    std::vector<WindowOrigin> origin;

    std::span<const double> input(std::size_t i) const {
        return {inputs.data() + i * static_cast<std::size_t>(window_len),
                static_cast<std::size_t>(window_len)};
    }
    std::span<const double> target(std::size_t i) const {
        return {targets.data() + i * static_cast<std::size_t>(window_len),
                static_cast<std::size_t>(window_len)};
    }
    std::size_t size() const { return count; }
};

struct SplitSpec {
    double train_fraction = 0.7;
    std::set<std::string> holdout_tickers;
    std::uint64_t seed = 0;
};

// Training and evaluation data for one experiment. Test slices stay raw
// (unstandardized); each consumer standardizes with its own training
// constants. test_windows offsets index into the panel series passed to
// build_datasets, matched by ticker.
struct DatasetBundle {
    WindowedDataset joint_train;
    std::map<std::string, WindowedDataset> individual_train;
    std::map<std::string, std::vector<WindowSlice>> test_windows;
    std::map<std::string, std::size_t> train_value_count; // per holdout: #values in the train period
    Date first_test_date;
};

// First date of the test period: the global distinct-date calendar is cut
// after its first train_fraction of entries.
Date split_cut_date(const std::vector<VolatilitySeries>& panel, double train_fraction);

// Splits on window end-dates over the global calendar: the first
// train_fraction of the distinct dates observed across the panel are the
// training period. The joint pool excludes every holdout ticker entirely.
DatasetBundle build_datasets(const std::vector<VolatilitySeries>& panel,
                             const SplitSpec& split,
                             int window_len = kInputWindowLength);

// Standardization constants of a window pool: plain mean and population
// standard deviation over every value of every slice (overlap counted).
struct Standardization {
    double mean = 0.0;
    double stddev = 1.0;
};

inline double standardize(double v, const Standardization& s) { return (v - s.mean) / s.stddev; }
inline double destandardize(double v, const Standardization& s) { return v * s.stddev + s.mean; }

// Volatility cache I/O: `date,ticker,volatility` CSV, 17 significant digits.
void write_volatility_csv(const std::filesystem::path& path,
                          std::span<const VolatilitySeries> panel);
std::vector<VolatilitySeries> load_volatility_csv(const std::filesystem::path& path);

} // namespace volcast::marketdata
