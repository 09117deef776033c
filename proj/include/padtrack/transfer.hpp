#pragma once
#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "padtrack/entropy.hpp"
#include "padtrack/lstm.hpp"

namespace padtrack::transfer {

struct TransferConfig {
    double eta_weight = 5e6;      // weight of the MMD term in the combined loss
    double schedule_m = 1.01e8;   // lambda ramp constant
    std::array<double, 5> kernel_multipliers{0.25, 0.5, 1.0, 2.0, 4.0};
    int target_budget = 2000;     // max unlabeled target windows
    int epoch_switch = 5;         // steeper lambda ramp from this epoch on
    bool unbiased = false;        // exclude i = j from the MMD self terms

    void validate() const;
};

// Fine-tuning knobs (the network itself keeps its architecture).
struct FitOptions {
    int epochs = 8;
    int batch = 64;
    double learning_rate = 0.01;
    double grad_clip = 5.0;
    std::uint64_t seed = 1;
};

struct TransferStats {
    int epoch = 0;
    double source_mse = 0.0;
    double mmd_value = 0.0;
    double lambda_last = 0.0;
};

struct TransferReport {
    std::vector<TransferStats> epochs;
    std::vector<std::size_t> selected_sources;  // indices into the ranking list
    long long iterations = 0;
};

// Squared multi-kernel MMD between two scalar samples, biased estimator by
// default: (1/m^2) sum k(a_i,a_j) - (2/mn) sum k(a_i,b_j) + (1/n^2) sum
// k(b_i,b_j), with k the mean of Gaussian kernels exp(-(x-y)^2 / (2 b^2)).
double mmd(std::span<const double> a, std::span<const double> b,
           std::span<const double> bandwidths, bool unbiased = false);

// Median of pairwise absolute differences over the pooled sample, times the
// multipliers. Floors the base at 1e-9 when all points coincide.
std::vector<double> mmd_bandwidths(std::span<const double> a, std::span<const double> b,
                                   std::span<const double> multipliers);

// d(MMD)/da_i and d(MMD)/db_j, bandwidths treated as constants.
void mmd_gradients(std::span<const double> a, std::span<const double> b,
                   std::span<const double> bandwidths, std::span<double> da, std::span<double> db,
                   bool unbiased = false);

// Ramp in [0,1): 2/(1+exp(-10 i / m)) - 1 before the epoch switch, with m/10
// afterwards. i is the global mini-batch step and never resets.
double lambda_schedule(long long iteration, int epoch, double m, int epoch_switch = 5);

// L = mse + eta_weight * lambda * mmd
double total_loss(double mse, double mmd_value, double eta_weight, double lambda);

// Alg-style source filter: keep source placements whose two lowest-entropy
// channel indices intersect the target's two. Throws when nothing matches,
// naming the all-placements fallback.
std::vector<std::size_t> select_source(const std::vector<entropy::EntropyRanking>& source_rankings,
                                       const entropy::EntropyRanking& target_ranking);

// Unsupervised refinement: MSE on labeled source windows plus the scheduled
// MMD between source and target predicted angles. Target windows are
// unlabeled and capped by the budget.
std::pair<lstm::ModelParams, TransferReport> transfer_fit(lstm::ModelParams params,
                                                          std::span<const core::Window> source,
                                                          std::span<const core::Window> target,
                                                          const TransferConfig& cfg,
                                                          const FitOptions& opt);

} // namespace padtrack::transfer
