#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "volcast/synthetic.hpp"
#include "volcast/train.hpp"

namespace volcast::harness {

enum class DataKind : std::uint8_t { kSynthetic = 0, kPricesCsv = 1, kVolatilityCsv = 2 };

struct DataConfig {
    DataKind kind = DataKind::kSynthetic;
    std::string path; // for the csv kinds
    int n_series = 60;
    int n_days = 2000;
    marketdata::GeneratorParams generator;
    int max_missing = 10; // prices_csv ingestion threshold
};

struct CnnConfig {
    int hidden_layers = 6;
    int filters = 8;
    int kernel = 2;
    int input_length = 64;
    tcn::TrainConfig train; // epochs, batch size, loss mode, rho/epsilon
};

struct ArimaConfig {
    bool enabled = true;
    int max_p = 3;
    int max_q = 3;
    int max_d = 2;
};

struct ExperimentConfig {
    std::uint64_t seed = 42;
    std::string output_dir = "out";
    bool allow_partial = false;
    int threads = 0; // 0 = hardware concurrency
    DataConfig data;
    double train_fraction = 0.7;
    int holdout_count = 10;
    CnnConfig cnn;
    ArimaConfig arima;
};

// JSON config document. Every key is optional and defaults as above;
// unknown keys are rejected. See the README for the schema.
ExperimentConfig parse_config_json(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical echo of the fully resolved configuration (alphabetical keys,
// 2-space indent). Feeding the echo back reproduces the config exactly.
std::string config_to_json(const ExperimentConfig& cfg);

// FNV-1a hash (hex) of the result-determining configuration: everything in
// the echo except output_dir, threads and allow_partial. Two runs with equal
// digests produce byte-identical CSVs.
std::string config_digest(const ExperimentConfig& cfg);

} // namespace volcast::harness
