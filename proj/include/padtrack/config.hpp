#pragma once
#include <array>
#include <cstdint>
#include <filesystem>
#include <string>

#include "padtrack/entropy.hpp"
#include "padtrack/eval.hpp"
#include "padtrack/lstm.hpp"
#include "padtrack/smooth.hpp"
#include "padtrack/transfer.hpp"

namespace padtrack::cli {

// Everything a run needs, one section per module. Parsed from an INI-style
// file (key=value under [section]); unknown sections or keys are rejected.
// Command-line --set overrides win over the file.
struct RunConfig {
    // [run]
    std::uint64_t seed = 42;
    int sensors = core::kChannels;   // active channel count, ablation axis

    // [core]
    double outlier_z = 3.0;
    double train_frac = 2.0 / 3.0;
    double validate_frac = 1.0 / 6.0;
    double test_frac = 1.0 / 6.0;

    // [entropy]
    entropy::EntropyConfig entropy;
    entropy::RankCriterion ranking = entropy::RankCriterion::none;
    bool rank_descending = false;

    // [sim]
    double delta_eta_cm = 4.0;       // 3 x 8 desk grid by default
    double delta_beta_deg = 45.0;
    std::string templates = "bend";  // comma-separated motion names
    int users = 1;
    double duration_s = 20.0;
    double rate_hz = 50.0;
    double noise_scale = 2.0;
    double chaos_scale = 30.0;

    // [model]
    lstm::ModelConfig model;         // channels is driven by run.sensors
    int window_stride = 1;           // training window subsampling

    // [transfer]
    transfer::TransferConfig transfer;
    int transfer_epochs = 8;
    double transfer_lr = 0.0;        // 0 means model.learning_rate

    // [kalman]
    smooth::KalmanConfig kalman;

    // [eval]
    eval::ReportOptions report;
    bool smooth_output = false;

    void validate() const;
};

RunConfig parse_config_file(const std::filesystem::path& path);

// "section.key=value" override, same keys as the file.
void apply_override(RunConfig& cfg, const std::string& assignment);

// Fixed-order dump of every key; the basis of the config hash and of
// `config dump`.
std::string canonical_dump(const RunConfig& cfg);

// FNV-1a over the canonical dump (semantic config only, no paths).
std::uint64_t config_hash(const RunConfig& cfg);

// Hash over what determines dataset bytes (the sim section and the seed);
// recorded in dataset manifests and checked by downstream stages.
std::uint64_t dataset_chain_hash(const RunConfig& cfg);

} // namespace padtrack::cli
