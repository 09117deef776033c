#pragma once
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "padtrack/config.hpp"

namespace padtrack::cli {

// ---- dataset store ----------------------------------------------------------
// A dataset directory holds one CSV+meta pair per session plus manifest.txt
// (sorted session list, seed, and the dataset chain hash for provenance).

core::Dataset build_sim_dataset(const RunConfig& cfg);
void write_dataset(const core::Dataset& ds, const std::filesystem::path& dir, const RunConfig& cfg);

struct StoredDataset {
    core::Dataset dataset;
    std::uint64_t chain_hash = 0;     // recorded at generation time
    std::uint64_t manifest_hash = 0;  // hash of the manifest file bytes
};
StoredDataset load_dataset(const std::filesystem::path& dir);

// ---- preprocessing ----------------------------------------------------------

struct PreprocessSpec {
    double outlier_z = 3.0;
    entropy::RankCriterion criterion = entropy::RankCriterion::none;
    entropy::EntropyConfig entropy;
    bool descending = false;
    int sensors = core::kChannels;

    static PreprocessSpec from_config(const RunConfig& cfg);
    std::map<std::string, std::string> to_extras() const;   // checkpoint provenance
    static PreprocessSpec from_extras(const std::map<std::string, std::string>& extras);
};

struct Prepared {
    core::Session session;            // normalized, outlier-cleaned, ranked
    entropy::EntropyRanking ranking;
};
Prepared prepare_session(const core::Session& raw, const PreprocessSpec& spec);

// Windows of every session in the list, in order; stride subsamples.
std::vector<core::Window> collect_windows(const std::vector<const core::Session*>& sessions,
                                          const PreprocessSpec& spec, int window, int stride = 1);

// ---- stages -----------------------------------------------------------------

struct TrainedModel {
    lstm::ModelParams params;
    lstm::TrainReport report;
};

// Partitions by placement, preprocesses, fits; the returned params carry the
// preprocessing provenance when saved through save_model.
TrainedModel train_stage(const core::Dataset& ds, const RunConfig& cfg);

void save_model(const TrainedModel& model, const PreprocessSpec& spec,
                const std::filesystem::path& path, std::uint64_t config_hash_value,
                std::uint64_t source_hash);

struct LoadedModel {
    lstm::ModelParams params;
    PreprocessSpec spec;
    std::uint64_t config_hash_value = 0;
    std::uint64_t source_hash = 0;  // manifest hash of the training data, 0 if n/a
};
LoadedModel load_model(const std::filesystem::path& path);

struct TransferOutcome {
    lstm::ModelParams params;
    transfer::TransferReport report;
    std::vector<core::Placement> selected;  // contributing source placements
    bool used_all_sources = false;
};

// Alg-style unsupervised refinement against one unlabeled target session.
// `all_sources` skips the entropy-overlap source filter.
TransferOutcome transfer_stage(const LoadedModel& model, const core::Dataset& source,
                               const core::Session& target_raw, const RunConfig& cfg,
                               bool all_sources = false);

// Per-frame estimates for a raw session (preprocessing applied internally).
std::vector<std::optional<double>> predict_stage(const LoadedModel& model,
                                                 const core::Session& raw);

// Report over the listed raw sessions (must carry truth).
eval::ErrorReport evaluate_stage(const LoadedModel& model,
                                 const std::vector<const core::Session*>& sessions,
                                 const RunConfig& cfg);

// Predict-the-mean reference: MAE of always answering the train-target mean.
double mean_baseline_mae(const std::vector<core::Window>& train,
                         const std::vector<const core::Session*>& test_sessions, int window);

} // namespace padtrack::cli
