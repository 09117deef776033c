#include "padtrack/pipeline.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "padtrack/rng.hpp"
#include "padtrack/sim.hpp"
#include "padtrack/text.hpp"

namespace padtrack::cli {

namespace {

std::string session_basename(const core::Session& s, std::size_t index) {
    std::ostringstream name;
    name << "s" << index << "_eta" << fmt(s.placement.eta_cm) << "_beta" << fmt(s.placement.beta_deg)
         << "_" << s.motion_id << "_" << s.user_id;
    std::string out = name.str();
    for (auto& c : out)
        if (c == '.') c = 'p';
        else if (c == '-') c = 'm';
    return out + ".csv";
}

std::string read_file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<sim::MotionTemplate> parse_templates(const std::string& list) {
    std::vector<sim::MotionTemplate> out;
    for (auto name : split(list, ','))
        if (!trim(name).empty()) out.push_back(sim::MotionTemplate::named(std::string(trim(name))));
    if (out.empty()) throw ValidationError("sim: no motion templates configured");
    return out;
}

} // namespace

core::Dataset build_sim_dataset(const RunConfig& cfg) {
    cfg.validate();
    sim::GridSpec grid{cfg.delta_eta_cm, cfg.delta_beta_deg};
    std::vector<sim::UserProfile> users;
    for (int u = 0; u < cfg.users; ++u) {
        auto p = sim::UserProfile::standard(hash_combine(cfg.seed, 0xa0aULL + static_cast<std::uint64_t>(u)));
        p.noise_scale = cfg.noise_scale;
        p.chaos_scale = cfg.chaos_scale;
        users.push_back(p);
    }
    return sim::gen_dataset(grid, parse_templates(cfg.templates), users, sim::SensorLayout{},
                            cfg.duration_s, cfg.rate_hz, cfg.seed);
}

void write_dataset(const core::Dataset& ds, const std::filesystem::path& dir, const RunConfig& cfg) {
    std::filesystem::create_directories(dir);
    const std::string hash_line = "config_hash=" + hex64(dataset_chain_hash(cfg)) + "\n";
    std::vector<std::string> names;
    for (std::size_t i = 0; i < ds.sessions.size(); ++i) {
        const std::string name = session_basename(ds.sessions[i], i);
        core::save_session(ds.sessions[i], dir / name, hash_line);
        names.push_back(name);
    }
    std::ofstream manifest(dir / "manifest.txt", std::ios::binary);
    if (!manifest) throw IoError("cannot write manifest in " + dir.string());
    manifest << "padtrack-manifest 1\n";
    manifest << "config_hash " << hex64(dataset_chain_hash(cfg)) << '\n';
    manifest << "seed " << fmt(static_cast<std::int64_t>(cfg.seed)) << '\n';
    manifest << "sessions " << fmt(static_cast<std::int64_t>(names.size())) << '\n';
    for (const auto& n : names) manifest << n << '\n';
}

StoredDataset load_dataset(const std::filesystem::path& dir) {
    const auto manifest_path = dir / "manifest.txt";
    if (!std::filesystem::exists(manifest_path))
        throw IoError("no dataset manifest at " + manifest_path.string() +
                      " (generate the dataset first with `padtrack sim gen`)");
    const std::string bytes = read_file_bytes(manifest_path);
    StoredDataset out;
    out.manifest_hash = fnv1a(bytes);

    std::istringstream in(bytes);
    std::string line;
    long line_no = 0;
    if (!std::getline(in, line) || trim(line) != "padtrack-manifest 1")
        throw ParseError(manifest_path.string(), 1, "not a padtrack manifest");
    ++line_no;
    std::size_t expect = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view v = trim(line);
        if (v.empty()) continue;
        if (v.starts_with("config_hash ")) {
            out.chain_hash = std::stoull(std::string(v.substr(12)), nullptr, 16);
        } else if (v.starts_with("seed ")) {
            // provenance only
        } else if (v.starts_with("sessions ")) {
            expect = static_cast<std::size_t>(parse_i64(v.substr(9)));
        } else {
            out.dataset.sessions.push_back(core::load_session(dir / std::string(v)));
        }
    }
    if (expect != out.dataset.sessions.size())
        throw ParseError(manifest_path.string(), line_no, "manifest session count mismatch");
    out.dataset.sort_canonical();
    return out;
}

PreprocessSpec PreprocessSpec::from_config(const RunConfig& cfg) {
    PreprocessSpec s;
    s.outlier_z = cfg.outlier_z;
    s.criterion = cfg.ranking;
    s.entropy = cfg.entropy;
    s.descending = cfg.rank_descending;
    s.sensors = cfg.sensors;
    return s;
}

std::map<std::string, std::string> PreprocessSpec::to_extras() const {
    return {
        {"ranking", entropy::criterion_name(criterion)},
        {"outlier_z", fmt(outlier_z)},
        {"entropy_m", fmt(static_cast<std::int64_t>(entropy.m))},
        {"entropy_r", fmt(entropy.r)},
        {"entropy_power", fmt(entropy.fuzzy_power)},
        {"entropy_r_times_sd", entropy.r_times_sd ? "1" : "0"},
        {"rank_descending", descending ? "1" : "0"},
        {"sensors", fmt(static_cast<std::int64_t>(sensors))},
    };
}

PreprocessSpec PreprocessSpec::from_extras(const std::map<std::string, std::string>& extras) {
    PreprocessSpec s;
    auto get = [&](const char* k) -> std::optional<std::string> {
        auto it = extras.find(k);
        if (it == extras.end()) return std::nullopt;
        return it->second;
    };
    if (auto v = get("ranking")) s.criterion = entropy::criterion_from_name(*v);
    if (auto v = get("outlier_z")) s.outlier_z = parse_double(*v);
    if (auto v = get("entropy_m")) s.entropy.m = static_cast<int>(parse_i64(*v));
    if (auto v = get("entropy_r")) s.entropy.r = parse_double(*v);
    if (auto v = get("entropy_power")) s.entropy.fuzzy_power = parse_double(*v);
    if (auto v = get("entropy_r_times_sd")) s.entropy.r_times_sd = (*v == "1");
    if (auto v = get("rank_descending")) s.descending = (*v == "1");
    if (auto v = get("sensors")) s.sensors = static_cast<int>(parse_i64(*v));
    return s;
}

Prepared prepare_session(const core::Session& raw, const PreprocessSpec& spec) {
    auto [normalized, stats] = core::normalize_minmax(raw);
    core::Session cleaned = core::remove_outliers(normalized, spec.outlier_z);
    auto [ranked, ranking] =
        entropy::rank_channels(cleaned, spec.criterion, spec.entropy, spec.sensors, spec.descending);
    return {std::move(ranked), std::move(ranking)};
}

std::vector<core::Window> collect_windows(const std::vector<const core::Session*>& sessions,
                                          const PreprocessSpec& spec, int window, int stride) {
    if (stride < 1) throw ValidationError("collect_windows: stride must be >= 1");
    std::vector<core::Window> out;
    for (const core::Session* s : sessions) {
        Prepared prep = prepare_session(*s, spec);
        auto ws = core::make_windows(prep.session, window, spec.sensors);
        for (std::size_t i = 0; i < ws.size(); i += static_cast<std::size_t>(stride))
            out.push_back(std::move(ws[i]));
    }
    return out;
}

TrainedModel train_stage(const core::Dataset& ds, const RunConfig& cfg) {
    cfg.validate();
    core::Dataset split_ds = ds;
    if (split_ds.split.empty())
        split_ds = core::partition(std::move(split_ds), cfg.train_frac, cfg.validate_frac,
                                   cfg.test_frac, cfg.seed);

    const PreprocessSpec spec = PreprocessSpec::from_config(cfg);
    lstm::ModelConfig mc = cfg.model;
    mc.channels = cfg.sensors;
    mc.seed = cfg.seed;

    const auto train_sessions = split_ds.sessions_in(core::Split::train);
    const auto val_sessions = split_ds.sessions_in(core::Split::validate);
    if (train_sessions.empty() || val_sessions.empty())
        throw ValidationError("train: empty train or validation split");

    const auto train_w = collect_windows(train_sessions, spec, mc.window, cfg.window_stride);
    const auto val_w = collect_windows(val_sessions, spec, mc.window, cfg.window_stride);
    if (train_w.empty() || val_w.empty())
        throw ValidationError("train: sessions shorter than one window");

    auto params = lstm::init(mc, cfg.seed);
    auto [fitted, report] = lstm::fit(std::move(params), train_w, val_w, mc);
    return {std::move(fitted), std::move(report)};
}

void save_model(const TrainedModel& model, const PreprocessSpec& spec,
                const std::filesystem::path& path, std::uint64_t config_hash_value,
                std::uint64_t source_hash) {
    auto extras = spec.to_extras();
    extras["config_hash"] = hex64(config_hash_value);
    extras["source_hash"] = hex64(source_hash);
    lstm::save_checkpoint(model.params, path, extras);
}

LoadedModel load_model(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path))
        throw IoError("no checkpoint at " + path.string() +
                      " (produce one first with `padtrack train`)");
    auto [params, extras] = lstm::load_checkpoint(path);
    LoadedModel m;
    m.params = std::move(params);
    m.spec = PreprocessSpec::from_extras(extras);
    if (auto it = extras.find("config_hash"); it != extras.end())
        m.config_hash_value = std::stoull(it->second, nullptr, 16);
    if (auto it = extras.find("source_hash"); it != extras.end())
        m.source_hash = std::stoull(it->second, nullptr, 16);
    return m;
}

TransferOutcome transfer_stage(const LoadedModel& model, const core::Dataset& source,
                               const core::Session& target_raw, const RunConfig& cfg,
                               bool all_sources) {
    const PreprocessSpec& spec = model.spec;

    Prepared target = prepare_session(target_raw, spec);
    auto target_windows = core::make_windows(target.session, model.params.cfg.window, spec.sensors);
    if (target_windows.empty()) throw ValidationError("transfer: target session shorter than one window");
    for (auto& w : target_windows) w.target.reset();  // unsupervised by construction
    if (target_windows.size() > static_cast<std::size_t>(cfg.transfer.target_budget)) {
        // deterministic even subsample down to the budget
        std::vector<core::Window> capped;
        const std::size_t n = target_windows.size();
        const std::size_t want = static_cast<std::size_t>(cfg.transfer.target_budget);
        for (std::size_t k = 0; k < want; ++k) capped.push_back(std::move(target_windows[k * n / want]));
        target_windows = std::move(capped);
    }

    // rank every source placement, filter by low-entropy channel overlap
    std::vector<Prepared> prepared_sources;
    prepared_sources.reserve(source.sessions.size());
    for (const auto& s : source.sessions) prepared_sources.push_back(prepare_session(s, spec));

    TransferOutcome out;
    std::vector<std::size_t> chosen;
    if (all_sources || spec.criterion == entropy::RankCriterion::none) {
        chosen.resize(prepared_sources.size());
        for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] = i;
        out.used_all_sources = true;
    } else {
        std::vector<entropy::EntropyRanking> rankings;
        rankings.reserve(prepared_sources.size());
        for (const auto& p : prepared_sources) rankings.push_back(p.ranking);
        chosen = transfer::select_source(rankings, target.ranking);
    }

    std::vector<core::Window> source_windows;
    for (std::size_t idx : chosen) {
        out.selected.push_back(source.sessions[idx].placement);
        auto ws = core::make_windows(prepared_sources[idx].session, model.params.cfg.window, spec.sensors);
        for (std::size_t i = 0; i < ws.size(); i += static_cast<std::size_t>(cfg.window_stride)) {
            if (!ws[i].target) throw ValidationError("transfer: source session lacks ground truth");
            source_windows.push_back(std::move(ws[i]));
        }
    }
    std::sort(out.selected.begin(), out.selected.end());
    out.selected.erase(std::unique(out.selected.begin(), out.selected.end()), out.selected.end());

    transfer::FitOptions opt;
    opt.epochs = cfg.transfer_epochs;
    opt.batch = cfg.model.batch;
    opt.learning_rate = cfg.transfer_lr > 0.0 ? cfg.transfer_lr : cfg.model.learning_rate;
    opt.grad_clip = cfg.model.grad_clip;
    opt.seed = cfg.seed;

    auto [params, report] =
        transfer::transfer_fit(model.params, source_windows, target_windows, cfg.transfer, opt);
    out.params = std::move(params);
    out.report = std::move(report);
    return out;
}

std::vector<std::optional<double>> predict_stage(const LoadedModel& model,
                                                 const core::Session& raw) {
    Prepared prep = prepare_session(raw, model.spec);
    return lstm::predict_series(model.params, prep.session);
}

eval::ErrorReport evaluate_stage(const LoadedModel& model,
                                 const std::vector<const core::Session*>& sessions,
                                 const RunConfig& cfg) {
    if (sessions.empty()) throw ValidationError("evaluate: empty split");
    std::vector<eval::SessionEval> evals;
    for (const core::Session* raw : sessions) {
        if (!raw->has_truth()) throw ValidationError("evaluate: session lacks ground truth");
        auto est = predict_stage(model, *raw);
        const auto vel =
            eval::velocity_series(raw->truth, raw->rate_hz, cfg.report.velocity_window_frames);

        eval::SessionEval se;
        se.placement = raw->placement;
        std::vector<double> dense;
        for (std::size_t i = 0; i < est.size(); ++i) {
            if (!est[i]) continue;
            dense.push_back(*est[i]);
            se.truth.push_back(raw->truth[i]);
            se.velocity.push_back(vel.empty() ? 0.0 : vel[i]);
        }
        if (dense.empty()) continue;
        se.pred = cfg.smooth_output ? smooth::smooth_series(dense, cfg.kalman) : std::move(dense);
        evals.push_back(std::move(se));
    }
    if (evals.empty()) throw ValidationError("evaluate: no session long enough for a window");
    eval::ReportOptions opts = cfg.report;
    opts.smoothed = cfg.smooth_output;
    return eval::build_report(evals, opts);
}

double mean_baseline_mae(const std::vector<core::Window>& train,
                         const std::vector<const core::Session*>& test_sessions, int window) {
    double mean = 0.0;
    std::size_t n = 0;
    for (const auto& w : train)
        if (w.target) {
            mean += *w.target;
            ++n;
        }
    if (n == 0) throw ValidationError("baseline: no targets");
    mean /= static_cast<double>(n);

    double err = 0.0;
    std::size_t count = 0;
    for (const core::Session* s : test_sessions) {
        if (s->frames.size() < static_cast<std::size_t>(window)) continue;
        for (std::size_t i = static_cast<std::size_t>(window) - 1; i < s->truth.size(); ++i) {
            err += std::abs(mean - s->truth[i]);
            ++count;
        }
    }
    if (count == 0) throw ValidationError("baseline: no test samples");
    return err / static_cast<double>(count);
}

} // namespace padtrack::cli
