#pragma once

// Adam with geometric learning-rate decay over freshly sampled batches.
// Single writer, single thread: a run is a pure function of (config, seed).

#include "bergomi/losses.hpp"
#include "bergomi/network.hpp"
#include "bergomi/sampler.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace bergomi {

struct TrainConfig {
    std::size_t batch = 1000;
    std::size_t samples = 2'000'000; ///< samples drawn per epoch
    std::size_t epochs = 1;          ///< budget = samples * epochs, all freshly drawn
    double lr_start = 1e-3;
    double lr_end = 1e-5;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double clip_norm = 10.0; ///< global gradient norm; <= 0 disables clipping
    std::uint64_t seed = 1;
    std::size_t log_every = 10;
    std::size_t checkpoint_every = 0; ///< 0: only the final checkpoint
    std::size_t ma_window = 50;       ///< trailing window of the logged moving average

    /// Throws ConfigError unless lr_start > lr_end > 0, batch >= 1 and the
    /// budget is a whole number of batches.
    void validate() const;
    std::size_t total_steps() const;
};

/// lr_start (lr_end / lr_start)^(step / total_steps).
double lr_at(std::size_t step, std::size_t total_steps, const TrainConfig& cfg);

struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;
};

/// One bias-corrected Adam update. Throws TrainingError on a non-finite gradient.
void adam_step(std::span<double> weights, std::span<const double> grads, AdamState& state, double lr,
               const TrainConfig& cfg);

/// Scales grads in place to global norm <= max_norm; returns the norm before clipping.
double clip_global_norm(std::span<double> grads, double max_norm);

struct LogRow {
    std::size_t step;
    double lr;
    double loss;
    double ma_loss;
    LossTerms terms;
    double grad_norm;
};

std::string log_header();
std::string format_log_row(const LogRow& row);

struct TrainJob {
    Architecture arch;
    TrainConfig train;
    LossConfig loss;
    /// Frozen vanilla network; required for knock-in kinds, never modified.
    const PricingNetwork* vanilla = nullptr;
    std::filesystem::path checkpoint_path; ///< empty: no checkpoint files
    std::filesystem::path log_path;        ///< empty: no CSV log
    std::function<void(const LogRow&)> on_log;
};

struct TrainResult {
    PricingNetwork net;
    std::vector<LogRow> log;
};

TrainResult train(const TrainJob& job);

/// Sampling stream of training batch `step` (step counts from 1).
std::vector<ParamPoint> training_batch(const Architecture& arch, const TrainConfig& cfg, std::size_t step);

} // namespace bergomi
