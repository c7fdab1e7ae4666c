#include "volcast/train.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "volcast/csv.hpp"
#include "volcast/errors.hpp"

namespace volcast::tcn {

namespace {

// Persistent worker pool: run(fn, count) executes fn(worker, i) for
// i in [0,count) across the workers and blocks until all are done.
// Worker ids are stable: 0 is the calling thread, 1..width-1 the pool.
class WorkerPool {
public:
    explicit WorkerPool(int threads) {
        const int n = std::max(1, threads);
        for (int t = 1; t < n; ++t) {
            workers_.emplace_back([this, t] { worker_loop(t); });
        }
    }

    ~WorkerPool() {
        {
            std::lock_guard lock(mutex_);
            stop_ = true;
            ++generation_;
        }
        start_cv_.notify_all();
        for (auto& w : workers_) w.join();
    }

    int width() const { return static_cast<int>(workers_.size()) + 1; }

    void run(const std::function<void(int, int)>& fn, int count) {
        if (workers_.empty() || count <= 1) {
            for (int i = 0; i < count; ++i) fn(0, i);
            return;
        }
        {
            std::lock_guard lock(mutex_);
            job_ = &fn;
            next_.store(0, std::memory_order_relaxed);
            count_ = count;
            pending_ = static_cast<int>(workers_.size());
            ++generation_;
        }
        start_cv_.notify_all();
        drain(0);
        std::unique_lock lock(mutex_);
        done_cv_.wait(lock, [this] { return pending_ == 0; });
        job_ = nullptr;
    }

private:
    void drain(int worker) {
        int i;
        while ((i = next_.fetch_add(1, std::memory_order_relaxed)) < count_) (*job_)(worker, i);
    }

    void worker_loop(int worker) {
        std::uint64_t seen = 0;
        while (true) {
            {
                std::unique_lock lock(mutex_);
                start_cv_.wait(lock, [&] { return generation_ != seen; });
                seen = generation_;
                if (stop_) return;
            }
            drain(worker);
            {
                std::lock_guard lock(mutex_);
                if (--pending_ == 0) done_cv_.notify_all();
            }
        }
    }

    std::vector<std::thread> workers_;
    std::mutex mutex_;
    std::condition_variable start_cv_, done_cv_;
    const std::function<void(int, int)>* job_ = nullptr;
    std::atomic<int> next_{0};
    int count_ = 0;
    int pending_ = 0;
    std::uint64_t generation_ = 0;
    bool stop_ = false;
};

struct Workspace {
    ForwardTape tape;
    BackwardScratch scratch;
    std::vector<double> out_grad;
};

double model_param_norm(const TcnModel& model) {
    double sum = 0.0;
    for (const auto& layer : model.layers) {
        for (double v : layer.weights) sum += v * v;
        for (double v : layer.biases) sum += v * v;
    }
    return std::sqrt(sum);
}

} // namespace

TrainResult train(TcnModel model, const marketdata::WindowedDataset& data,
                  const TrainConfig& cfg) {
    if (cfg.epochs < 1) throw ConfigError("train: epochs must be >= 1");
    if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
    if (data.count == 0) throw ConfigError("train: empty dataset");
    if (data.window_len != model.input_length) {
        throw ConfigError("train: dataset window length != model input length");
    }

    const std::size_t n = data.count;
    const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
    const int T = model.input_length;

    int threads = cfg.threads;
    if (threads <= 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = std::max(1, std::min<int>(threads, static_cast<int>(batch)));
    WorkerPool pool(threads);

    std::vector<Workspace> workspaces(static_cast<std::size_t>(pool.width()));
    for (auto& ws : workspaces) ws.out_grad.resize(static_cast<std::size_t>(T));
    std::vector<Gradients> slots(std::min(batch, n), Gradients::zeros_like(model));
    std::vector<double> slot_loss(slots.size(), 0.0);
    Gradients batch_grad = Gradients::zeros_like(model);
    AdadeltaState state = AdadeltaState::init(model, cfg.rho, cfg.epsilon);

    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::mt19937_64 shuffle_rng(cfg.seed);

    TrainResult result;
    result.epoch_loss.reserve(static_cast<std::size_t>(cfg.epochs));

    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        if (cfg.shuffle_each_epoch) std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        std::size_t batch_index = 0;
        for (std::size_t start = 0; start < n; start += batch, ++batch_index) {
            const std::size_t count = std::min(batch, n - start);
            pool.run(
                [&](int worker, int i) {
                    Workspace& ws = workspaces[static_cast<std::size_t>(worker)];
                    const std::size_t slot = static_cast<std::size_t>(i);
                    const std::size_t idx = order[start + slot];
                    forward_into(model, data.input(idx), ws.tape);
                    const auto& out = ws.tape.activations.back().values;
                    double loss = 0.0;
                    if (cfg.loss_mode == LossMode::kSequence) {
                        const auto target = data.target(idx);
                        const double scale = 2.0 / static_cast<double>(T);
                        for (int t = 0; t < T; ++t) {
                            const std::size_t u = static_cast<std::size_t>(t);
                            const double diff = out[u] - target[u];
                            loss += diff * diff;
                            ws.out_grad[u] = scale * diff;
                        }
                        loss /= static_cast<double>(T);
                    } else {
                        const double diff = out.back() - data.scalar_targets[idx];
                        loss = diff * diff;
                        std::fill(ws.out_grad.begin(), ws.out_grad.end(), 0.0);
                        ws.out_grad.back() = 2.0 * diff;
                    }
                    slot_loss[slot] = loss;
                    slots[slot].fill(0.0);
                    backward_into(model, ws.tape, ws.out_grad, slots[slot], ws.scratch);
                },
                static_cast<int>(count));

            double batch_loss = 0.0;
            for (std::size_t i = 0; i < count; ++i) batch_loss += slot_loss[i];
            if (!std::isfinite(batch_loss)) {
                std::ostringstream msg;
                msg << "train: non-finite loss at epoch " << epoch << ", batch " << batch_index
                    << ", parameter L2 norm " << format_double(model_param_norm(model));
                throw NumericError(msg.str());
            }
            loss_sum += batch_loss;

            batch_grad.fill(0.0);
            for (std::size_t i = 0; i < count; ++i) batch_grad.accumulate(slots[i], 1.0);
            batch_grad.scale(1.0 / static_cast<double>(count));
            if (!adadelta_step(model, batch_grad, state)) ++result.skipped_steps;
        }
        result.epoch_loss.push_back(loss_sum / static_cast<double>(n));
    }

    result.model = std::move(model);
    return result;
}

void write_loss_history_csv(const std::filesystem::path& path,
                            const std::vector<double>& epoch_loss) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write loss history: " + path.string());
    out << "epoch,mean_loss\n";
    for (std::size_t i = 0; i < epoch_loss.size(); ++i) {
        out << (i + 1) << ',' << format_double(epoch_loss[i]) << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

} // namespace volcast::tcn
