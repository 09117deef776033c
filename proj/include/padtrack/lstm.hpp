#pragma once
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "padtrack/core.hpp"

namespace padtrack::lstm {

struct ModelConfig {
    int layers = 2;       // stacked LSTM layers (paper runs use 6)
    int hidden = 32;      // units per layer (paper runs use 256)
    int window = 30;      // input frames per sample
    int channels = 6;     // input features per frame
    int batch = 64;
    int epochs = 20;
    double learning_rate = 0.01;
    double lr_decay = 0.9;     // multiplied in every lr_decay_every epochs
    int lr_decay_every = 2;
    double grad_clip = 50.0;   // global L2 norm ceiling
    bool adam = false;         // adaptive-moment optimizer; plain GD when off
    bool interlayer_norm = false;  // standardize hidden outputs between layers
    std::uint64_t seed = 1;

    void validate() const;
    static ModelConfig paper_scale();
};

// Learning rate for a 0-based epoch index under the decay schedule.
double lr_for_epoch(const ModelConfig& cfg, int epoch);

// All trainable tensors flattened into one vector, per layer
// [Wx (4h x d), Wh (4h x h), b (4h)] then the output map [wo (h), bo].
// Gate row order is [input, forget, cell, output]. Input standardization
// stats ride along so inference reuses what training saw.
struct ModelParams {
    ModelConfig cfg;
    std::vector<double> w;
    std::vector<double> input_mean, input_std;     // per channel
    std::vector<double> inter_mean, inter_std;     // per (layer-1)*hidden, when interlayer_norm

    std::size_t param_count() const { return w.size(); }
    bool finite() const;

    std::size_t wx_offset(int layer) const;
    std::size_t wh_offset(int layer) const;
    std::size_t b_offset(int layer) const;
    std::size_t wo_offset() const;
    std::size_t bo_offset() const;
    int input_dim(int layer) const { return layer == 0 ? cfg.channels : cfg.hidden; }
};

struct EpochStats {
    int epoch = 0;
    double lr = 0.0;
    double train_mse = 0.0;
    double val_mse = 0.0;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    int best_epoch = -1;
    double wall_seconds = 0.0;                // console-only; never serialized
    bool train_monotone_after_warmup = true;  // train MSE non-increasing from epoch 3 on
};

// Small uniform weights, forget-gate biases at 1; deterministic per seed.
ModelParams init(const ModelConfig& cfg, std::uint64_t seed);

// Last-timestep top-layer state through the output affine map. Degrees.
double forward(const ModelParams& params, const core::Window& window);
std::vector<double> forward_batch(const ModelParams& params, std::span<const core::Window> windows);

// (1/n) * sum (pred - target)^2
double mse_loss(std::span<const double> predictions, std::span<const double> targets);

struct BackwardResult {
    std::vector<double> predictions;
    double loss = 0.0;
    std::vector<double> grads;  // same layout as ModelParams::w
};

// Full BPTT gradients of the mean MSE over the batch.
BackwardResult backward(const ModelParams& params, std::span<const core::Window> windows,
                        std::span<const double> targets);

// BPTT with caller-supplied dLoss/dOutput per sample (used by the transfer
// objective). Returns predictions alongside the gradients.
BackwardResult backward_outputs(const ModelParams& params, std::span<const core::Window> windows,
                                std::span<const double> dloss_dout);

// Scales gradients so the global L2 norm is at most max_norm; returns the
// pre-clip norm.
double clip_gradients(std::span<double> grads, double max_norm);

// Mini-batch gradient descent with the decay schedule; returns the params of
// the best validation epoch.
std::pair<ModelParams, TrainReport> fit(ModelParams params, std::span<const core::Window> train,
                                        std::span<const core::Window> validate,
                                        const ModelConfig& cfg);

// One estimate per window position; the first W-1 frames carry none. The
// session must already be normalized (and ranked, if the model was trained on
// ranked channels).
std::vector<std::optional<double>> predict_series(const ModelParams& params,
                                                  const core::Session& session);

// Versioned text checkpoint; round-trips doubles exactly. `extras` carries
// caller provenance (ranking criterion, hashes, ...) as key=value lines.
void save_checkpoint(const ModelParams& params, const std::filesystem::path& path,
                     const std::map<std::string, std::string>& extras = {});
std::pair<ModelParams, std::map<std::string, std::string>> load_checkpoint(
    const std::filesystem::path& path);

} // namespace padtrack::lstm
