#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "volcast/marketdata.hpp"
#include "volcast/tcn.hpp"

namespace volcast::tcn {

enum class LossMode : std::uint8_t {
    kSequence = 0, // mean squared error over the full shifted output sequence
    kLastStep = 1, // squared error at the final position only
};

struct TrainConfig {
    int epochs = 300;
    int batch_size = 32;
    std::uint64_t seed = 0;
    LossMode loss_mode = LossMode::kSequence;
    bool shuffle_each_epoch = true;
    double rho = 0.95;
    double epsilon = 1e-6;
    // Worker threads for per-batch gradients. <= 0 means hardware
    // concurrency. Gradients are reduced in window order, so the result
    // does not depend on this value.
    int threads = 1;
};

struct TrainResult {
    TcnModel model;
    std::vector<double> epoch_loss; // mean per-window training loss per epoch
    int skipped_steps = 0;          // batches skipped due to non-finite gradients
};

// Runs epochs * ceil(n/batch_size) Adadelta steps on mini-batch mean loss.
// Shuffling is seeded from cfg.seed; with the model's seeded initialization
// the whole run is deterministic.
TrainResult train(TcnModel model, const marketdata::WindowedDataset& data,
                  const TrainConfig& cfg);

// `epoch,mean_loss` CSV, epochs 1-based, 17 significant digits.
void write_loss_history_csv(const std::filesystem::path& path,
                            const std::vector<double>& epoch_loss);

} // namespace volcast::tcn
