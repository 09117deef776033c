// padtrack CLI: sim gen -> rank -> train -> transfer -> predict -> evaluate.
// Exit codes: 0 ok, 1 usage, 2 data/validation, 3 numeric failure.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "padtrack/pipeline.hpp"
#include "padtrack/text.hpp"

namespace fs = std::filesystem;
using namespace padtrack;
using cli::RunConfig;

namespace {

struct CommonOpts {
    std::string config_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    std::optional<int> sensors;
    bool smooth = false;
    bool force = false;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool with_smooth = false) {
    cmd->add_option("--config", opts.config_path, "run configuration file (INI sections)");
    cmd->add_option("--set", opts.overrides, "override, repeatable: section.key=value")
        ->take_all();
    cmd->add_option("--seed", opts.seed, "override run.seed");
    cmd->add_option("--sensors", opts.sensors, "active sensor count 1..6 (ablation)");
    cmd->add_flag("--force", opts.force, "proceed despite provenance hash mismatches");
    if (with_smooth) cmd->add_flag("--smooth", opts.smooth, "apply the Kalman smoother to outputs");
}

RunConfig effective_config(const CommonOpts& opts) {
    RunConfig cfg;
    if (!opts.config_path.empty()) cfg = cli::parse_config_file(opts.config_path);
    for (const auto& o : opts.overrides) cli::apply_override(cfg, o);
    if (opts.seed) cli::apply_override(cfg, "run.seed=" + fmt(static_cast<std::int64_t>(*opts.seed)));
    if (opts.sensors) cli::apply_override(cfg, "run.sensors=" + fmt(static_cast<std::int64_t>(*opts.sensors)));
    if (opts.smooth) cli::apply_override(cfg, "eval.smooth=true");
    cfg.validate();
    return cfg;
}

std::string provenance_header(const RunConfig& cfg, std::uint64_t source_hash) {
    return "# config_hash=" + hex64(cli::config_hash(cfg)) + " source_hash=" + hex64(source_hash) +
           " seed=" + fmt(static_cast<std::int64_t>(cfg.seed)) + "\n";
}

void check_chain(const cli::StoredDataset& data, const RunConfig& cfg, bool force) {
    const std::uint64_t want = cli::dataset_chain_hash(cfg);
    if (data.chain_hash != want) {
        const std::string msg = "dataset was generated under config hash " + hex64(data.chain_hash) +
                                " but the current config hashes to " + hex64(want);
        if (!force) throw ValidationError(msg + " (rerun with --force to override)");
        std::cerr << "warning: " << msg << ", continuing due to --force\n";
    }
}

void check_source(const cli::LoadedModel& model, const cli::StoredDataset& data, bool force) {
    if (model.source_hash == 0) return;
    if (model.source_hash != data.manifest_hash) {
        const std::string msg = "model was trained on manifest " + hex64(model.source_hash) +
                                " but this dataset's manifest hashes to " + hex64(data.manifest_hash);
        if (!force) throw ValidationError(msg + " (rerun with --force to override)");
        std::cerr << "warning: " << msg << ", continuing due to --force\n";
    }
}

std::vector<const core::Session*> split_sessions(const core::Dataset& ds, const std::string& which) {
    if (which == "all") {
        std::vector<const core::Session*> out;
        for (const auto& s : ds.sessions) out.push_back(&s);
        return out;
    }
    if (which == "train") return ds.sessions_in(core::Split::train);
    if (which == "validate") return ds.sessions_in(core::Split::validate);
    if (which == "test") return ds.sessions_in(core::Split::test);
    throw UsageError("unknown split '" + which + "' (train|validate|test|all)");
}

std::string order_string(const std::vector<int>& order) {
    std::string s;
    for (std::size_t i = 0; i < order.size(); ++i) {
        if (i) s += '-';
        s += fmt(static_cast<std::int64_t>(order[i]));
    }
    return s;
}

// ---- subcommands ------------------------------------------------------------

int cmd_sim_gen(const CommonOpts& opts, const std::string& out_dir) {
    RunConfig cfg = effective_config(opts);
    auto ds = cli::build_sim_dataset(cfg);
    cli::write_dataset(ds, out_dir, cfg);
    std::cout << "wrote " << ds.sessions.size() << " sessions to " << out_dir << " (config_hash "
              << hex64(cli::dataset_chain_hash(cfg)) << ", seed " << cfg.seed << ")\n";
    return 0;
}

int cmd_rank(const CommonOpts& opts, const std::string& data_dir, const std::string& out_path,
             const std::string& criterion) {
    RunConfig cfg = effective_config(opts);
    if (!criterion.empty()) cli::apply_override(cfg, "entropy.criterion=" + criterion);
    if (cfg.ranking == entropy::RankCriterion::none)
        cli::apply_override(cfg, "entropy.criterion=fuzzy");

    auto data = cli::load_dataset(data_dir);
    check_chain(data, cfg, opts.force);
    const auto spec = cli::PreprocessSpec::from_config(cfg);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + out_path);
    out << provenance_header(cfg, data.manifest_hash);
    out << "eta_cm,beta_deg";
    for (int c = 1; c <= cfg.sensors; ++c) out << ",e" << c;
    out << ",order\n";
    for (const auto& s : data.dataset.sessions) {
        auto prep = cli::prepare_session(s, spec);
        out << fmt(s.placement.eta_cm) << ',' << fmt(s.placement.beta_deg);
        for (double e : prep.ranking.entropies) out << ',' << fmt(e);
        out << ',' << order_string(prep.ranking.order) << '\n';
    }
    std::cout << "ranked " << data.dataset.sessions.size() << " sessions ("
              << entropy::criterion_name(cfg.ranking) << ") -> " << out_path << "\n";
    return 0;
}

int cmd_train(const CommonOpts& opts, const std::string& data_dir, const std::string& out_path,
              const std::string& report_path) {
    RunConfig cfg = effective_config(opts);
    auto data = cli::load_dataset(data_dir);
    check_chain(data, cfg, opts.force);

    auto trained = cli::train_stage(data.dataset, cfg);
    cli::save_model(trained, cli::PreprocessSpec::from_config(cfg), out_path,
                    cli::config_hash(cfg), data.manifest_hash);

    if (!report_path.empty()) {
        std::ofstream rep(report_path, std::ios::binary);
        if (!rep) throw IoError("cannot write " + report_path);
        rep << provenance_header(cfg, data.manifest_hash);
        rep << "epoch,lr,train_mse,val_mse\n";
        for (const auto& e : trained.report.epochs)
            rep << e.epoch << ',' << fmt(e.lr) << ',' << fmt(e.train_mse) << ',' << fmt(e.val_mse)
                << '\n';
    }
    const auto& last = trained.report.epochs.back();
    std::cout << "trained " << trained.report.epochs.size() << " epochs in "
              << fmt_fixed(trained.report.wall_seconds, 1) << " s; best epoch "
              << trained.report.best_epoch << ", final train MSE " << fmt_fixed(last.train_mse, 3)
              << ", val MSE " << fmt_fixed(last.val_mse, 3) << " -> " << out_path << "\n";
    if (!trained.report.train_monotone_after_warmup)
        std::cerr << "warning: training loss was not monotone after warmup\n";
    return 0;
}

int cmd_transfer(const CommonOpts& opts, const std::string& model_path, const std::string& source_dir,
                 const std::string& target_path, const std::string& out_path,
                 const std::string& report_path, bool all_sources) {
    RunConfig cfg = effective_config(opts);
    auto model = cli::load_model(model_path);
    auto source = cli::load_dataset(source_dir);
    check_source(model, source, opts.force);
    auto target = core::load_session(target_path);

    auto outcome = cli::transfer_stage(model, source.dataset, target, cfg, all_sources);
    cli::TrainedModel refined{std::move(outcome.params), {}};
    // refined checkpoints clear the source hash: the window pool mixes domains
    cli::save_model(refined, model.spec, out_path, cli::config_hash(cfg), 0);

    if (!report_path.empty()) {
        std::ofstream rep(report_path, std::ios::binary);
        if (!rep) throw IoError("cannot write " + report_path);
        rep << provenance_header(cfg, source.manifest_hash);
        rep << "selected_placements," << outcome.selected.size() << '\n';
        for (const auto& p : outcome.selected)
            rep << "placement," << fmt(p.eta_cm) << ',' << fmt(p.beta_deg) << '\n';
        rep << "epoch,source_mse,mmd,lambda\n";
        for (const auto& e : outcome.report.epochs)
            rep << e.epoch << ',' << fmt(e.source_mse) << ',' << fmt(e.mmd_value) << ','
                << fmt(e.lambda_last) << '\n';
    }
    std::cout << "transfer used " << outcome.selected.size() << " source placements"
              << (outcome.used_all_sources ? " (all)" : "") << ", " << outcome.report.iterations
              << " iterations -> " << out_path << "\n";
    return 0;
}

int cmd_predict(const CommonOpts& opts, const std::string& model_path, const std::string& input_path,
                const std::string& out_path) {
    RunConfig cfg = effective_config(opts);
    auto model = cli::load_model(model_path);
    auto session = core::load_session(input_path);
    auto est = cli::predict_stage(model, session);

    std::vector<double> dense;
    for (const auto& e : est)
        if (e) dense.push_back(*e);
    if (dense.empty())
        std::cerr << "warning: session is shorter than one " << model.params.cfg.window
                  << "-frame window; no estimates\n";
    std::vector<double> smoothed;
    if (cfg.smooth_output && !dense.empty()) smoothed = smooth::smooth_series(dense, cfg.kalman);

    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write " + out_path);
    out << provenance_header(cfg, model.source_hash);
    out << (cfg.smooth_output ? "timestamp_ms,angle_deg,angle_smooth_deg\n" : "timestamp_ms,angle_deg\n");
    std::size_t k = 0;
    for (std::size_t i = 0; i < est.size(); ++i) {
        out << fmt(session.frames[i].timestamp_ms) << ',';
        if (est[i]) {
            out << fmt(*est[i]);
            if (cfg.smooth_output) out << ',' << fmt(smoothed[k]);
            ++k;
        } else if (cfg.smooth_output) {
            out << ',';
        }
        out << '\n';
    }
    std::cout << "predicted " << dense.size() << " frames -> " << out_path << "\n";
    return 0;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& model_path, const std::string& data_dir,
                 const std::string& out_dir, const std::string& which, bool as_json) {
    RunConfig cfg = effective_config(opts);
    auto model = cli::load_model(model_path);
    auto data = cli::load_dataset(data_dir);
    check_source(model, data, opts.force);

    core::Dataset ds = core::partition(std::move(data.dataset), cfg.train_frac, cfg.validate_frac,
                                       cfg.test_frac, cfg.seed);
    auto sessions = split_sessions(ds, which);
    if (sessions.empty()) throw ValidationError("evaluate: split '" + which + "' is empty");
    auto report = cli::evaluate_stage(model, sessions, cfg);

    fs::create_directories(out_dir);
    const std::string header = provenance_header(cfg, data.manifest_hash);
    if (as_json) {
        nlohmann::json j;
        j["overall_mae_deg"] = report.overall_mae;
        j["total_samples"] = report.total_samples;
        j["smoothed"] = report.options.smoothed;
        j["split"] = which;
        j["config_hash"] = hex64(cli::config_hash(cfg));
        j["source_hash"] = hex64(data.manifest_hash);
        j["by_placement"] = nlohmann::json::array();
        j["by_angle"] = nlohmann::json::array();
        j["by_velocity"] = nlohmann::json::array();
        for (const auto& p : report.by_placement)
            j["by_placement"].push_back({{"eta_cm", p.placement.eta_cm},
                                         {"beta_deg", p.placement.beta_deg},
                                         {"mae_deg", p.mae},
                                         {"count", p.count}});
        for (const auto& b : report.by_angle)
            j["by_angle"].push_back(
                {{"lo_deg", b.lo}, {"hi_deg", b.hi}, {"mae_deg", b.mae}, {"count", b.count}});
        for (const auto& b : report.by_velocity)
            j["by_velocity"].push_back(
                {{"lo_dpm", b.lo}, {"hi_dpm", b.hi}, {"mae_deg", b.mae}, {"count", b.count}});
        if (report.corr_velocity_vs_error) j["corr_velocity_vs_error"] = *report.corr_velocity_vs_error;
        if (report.corr_angle_count_vs_mae) j["corr_angle_count_vs_mae"] = *report.corr_angle_count_vs_mae;
        std::ofstream out(fs::path(out_dir) / "report.json", std::ios::binary);
        out << j.dump(2) << '\n';
    } else {
        {
            std::ofstream out(fs::path(out_dir) / "overall.csv", std::ios::binary);
            out << header << "metric,value\n";
            out << "overall_mae_deg," << fmt(report.overall_mae) << '\n';
            out << "total_samples," << report.total_samples << '\n';
            out << "smoothed," << (report.options.smoothed ? 1 : 0) << '\n';
            if (report.corr_velocity_vs_error)
                out << "corr_velocity_vs_error," << fmt(*report.corr_velocity_vs_error) << '\n';
            if (report.corr_angle_count_vs_mae)
                out << "corr_angle_count_vs_mae," << fmt(*report.corr_angle_count_vs_mae) << '\n';
        }
        {
            std::ofstream out(fs::path(out_dir) / "by_placement.csv", std::ios::binary);
            out << header << "eta_cm,beta_deg,mae_deg,count\n";
            for (const auto& p : report.by_placement)
                out << fmt(p.placement.eta_cm) << ',' << fmt(p.placement.beta_deg) << ','
                    << fmt(p.mae) << ',' << p.count << '\n';
        }
        {
            std::ofstream out(fs::path(out_dir) / "by_angle.csv", std::ios::binary);
            out << header << "bin_lo_deg,bin_hi_deg,mae_deg,count\n";
            for (const auto& b : report.by_angle)
                out << fmt(b.lo) << ',' << fmt(b.hi) << ',' << fmt(b.mae) << ',' << b.count << '\n';
        }
        {
            std::ofstream out(fs::path(out_dir) / "by_velocity.csv", std::ios::binary);
            out << header << "bin_lo_dpm,bin_hi_dpm,mae_deg,count\n";
            for (const auto& b : report.by_velocity)
                out << fmt(b.lo) << ',' << fmt(b.hi) << ',' << fmt(b.mae) << ',' << b.count << '\n';
        }
    }
    std::cout << "evaluated split '" << which << "': MAE " << fmt_fixed(report.overall_mae, 3)
              << " deg over " << report.total_samples << " samples -> " << out_dir << "\n";
    return 0;
}

int cmd_config(const CommonOpts& opts) {
    RunConfig cfg = effective_config(opts);
    std::cout << cli::canonical_dump(cfg);
    std::cout << "# config_hash=" << hex64(cli::config_hash(cfg)) << "\n";
    std::cout << "# dataset_chain_hash=" << hex64(cli::dataset_chain_hash(cfg)) << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"displacement-robust joint-angle estimation from a stretch-sensor pad"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string out_dir, data_dir, out_path, report_path, criterion, model_path, source_dir;
    std::string target_path, input_path, which = "test";
    bool all_sources = false, as_json = false;

    auto* sim_cmd = app.add_subcommand("sim", "synthetic data");
    sim_cmd->require_subcommand(1);
    auto* gen = sim_cmd->add_subcommand("gen", "generate a placement-grid dataset");
    add_common(gen, opts);
    gen->add_option("--out", out_dir, "output dataset directory")->required();

    auto* rank = app.add_subcommand("rank", "per-placement channel ranking report");
    add_common(rank, opts);
    rank->add_option("--data", data_dir, "dataset directory")->required();
    rank->add_option("--out", out_path, "ranking CSV path")->required();
    rank->add_option("--criterion", criterion, "fuzzy|sd|jitter (default fuzzy)");

    auto* train = app.add_subcommand("train", "fit the recurrent regressor");
    add_common(train, opts);
    train->add_option("--data", data_dir, "dataset directory")->required();
    train->add_option("--out", out_path, "checkpoint path")->required();
    train->add_option("--report", report_path, "per-epoch loss CSV");

    auto* transfer = app.add_subcommand("transfer", "unsupervised calibration to a new session");
    add_common(transfer, opts);
    transfer->add_option("--model", model_path, "pre-trained checkpoint")->required();
    transfer->add_option("--source", source_dir, "labeled source dataset directory")->required();
    transfer->add_option("--target", target_path, "unlabeled target session CSV")->required();
    transfer->add_option("--out", out_path, "refined checkpoint path")->required();
    transfer->add_option("--report", report_path, "selection + loss curve CSV");
    transfer->add_flag("--all-sources", all_sources, "skip the entropy-overlap source filter");

    auto* predict = app.add_subcommand("predict", "per-frame angle estimates for one session");
    add_common(predict, opts, true);
    predict->add_option("--model", model_path, "checkpoint")->required();
    predict->add_option("--input", input_path, "session CSV")->required();
    predict->add_option("--out", out_path, "prediction CSV")->required();

    auto* evaluate = app.add_subcommand("evaluate", "error report over a dataset split");
    add_common(evaluate, opts, true);
    evaluate->add_option("--model", model_path, "checkpoint")->required();
    evaluate->add_option("--data", data_dir, "dataset directory")->required();
    evaluate->add_option("--out-dir", out_dir, "report output directory")->required();
    evaluate->add_option("--split", which, "train|validate|test|all (default test)");
    evaluate->add_flag("--json", as_json, "emit one report.json instead of CSV tables");

    auto* config_cmd = app.add_subcommand("config", "print the effective configuration and hashes");
    add_common(config_cmd, opts);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage errors are exit 1, help is 0
    }

    try {
        if (gen->parsed()) return cmd_sim_gen(opts, out_dir);
        if (rank->parsed()) return cmd_rank(opts, data_dir, out_path, criterion);
        if (train->parsed()) return cmd_train(opts, data_dir, out_path, report_path);
        if (transfer->parsed())
            return cmd_transfer(opts, model_path, source_dir, target_path, out_path, report_path,
                                all_sources);
        if (predict->parsed()) return cmd_predict(opts, model_path, input_path, out_path);
        if (evaluate->parsed())
            return cmd_evaluate(opts, model_path, data_dir, out_dir, which, as_json);
        if (config_cmd->parsed()) return cmd_config(opts);
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {  // parse/validation/io
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
