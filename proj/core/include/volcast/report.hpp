#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "volcast/experiment.hpp"

namespace volcast::harness {

// Writes the full run output into `dir` (created if missing):
//   metrics.csv            ticker,model,rmse,smape,accuracy,f1 (+ AVERAGE rows)
//   metrics.txt            aligned three-model table, value/direction sections
//   rmse_scores.csv        ticker,individual,joint,arima
//   accuracy_scores.csv    ticker,individual,joint,arima
//   forecasts_<ticker>.csv date,actual,individual,joint,arima
//   loss_joint.csv         epoch,mean_loss
//   loss_<ticker>.csv      epoch,mean_loss
//   arima_models.csv       ticker,p,d,q,coefficients,sigma2,aic,n_obs
//   manifest.json          seed, digest, resolved config, file list, timestamp
// Every CSV is deterministic for a given config+seed; only the manifest
// carries a timestamp. Returns the list of files written.
std::vector<std::string> emit_report(const EvaluationReport& report,
                                     const std::filesystem::path& dir);

// Best-effort flush of whatever a failed run produced, plus failure.txt
// with the offending stage. Never throws.
void flush_partial(const EvaluationReport& partial, const std::filesystem::path& dir,
                   const std::string& failure) noexcept;

// Rendered Table-1-style text (also written as metrics.txt).
std::string render_metrics_table(const EvaluationReport& report);

// Reads back forecasts_<ticker>.csv files (as written by emit_report) and
// rebuilds per-stock evaluations with recomputed metric rows.
std::vector<StockEvaluation> load_forecast_csvs(const std::vector<std::filesystem::path>& files);

// Recomputes metrics from the forecast files in a run directory and rewrites
// metrics.csv, metrics.txt, rmse_scores.csv and accuracy_scores.csv.
std::vector<std::string> rebuild_report_files(const std::filesystem::path& dir);

} // namespace volcast::harness
