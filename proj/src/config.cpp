#include "padtrack/config.hpp"

#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include "padtrack/text.hpp"

namespace padtrack::cli {

namespace {

struct Key {
    const char* section;
    const char* name;
    std::function<std::string(const RunConfig&)> get;
    std::function<void(RunConfig&, std::string_view)> set;
};

std::string fmt_bool(bool b) { return b ? "true" : "false"; }

bool parse_bool(std::string_view v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ParseError("expected true/false, got '" + std::string(v) + "'");
}

std::string fmt_multipliers(const std::array<double, 5>& m) {
    std::string s;
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (i) s += ',';
        s += fmt(m[i]);
    }
    return s;
}

void parse_multipliers(std::array<double, 5>& dst, std::string_view v) {
    auto parts = split(v, ',');
    if (parts.size() != dst.size())
        throw ParseError("kernel_multipliers needs exactly 5 comma-separated values");
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = parse_double(trim(parts[i]));
}

// Single source of truth for file keys, overrides, dump, and hashing.
const std::vector<Key>& key_table() {
    static const std::vector<Key> table = {
        {"run", "seed", [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.seed)); },
         [](RunConfig& c, std::string_view v) { c.seed = static_cast<std::uint64_t>(parse_i64(v)); }},
        {"run", "sensors", [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.sensors)); },
         [](RunConfig& c, std::string_view v) { c.sensors = static_cast<int>(parse_i64(v)); }},

        {"core", "outlier_z", [](const RunConfig& c) { return fmt(c.outlier_z); },
         [](RunConfig& c, std::string_view v) { c.outlier_z = parse_double(v); }},
        {"core", "train_frac", [](const RunConfig& c) { return fmt(c.train_frac); },
         [](RunConfig& c, std::string_view v) { c.train_frac = parse_double(v); }},
        {"core", "validate_frac", [](const RunConfig& c) { return fmt(c.validate_frac); },
         [](RunConfig& c, std::string_view v) { c.validate_frac = parse_double(v); }},
        {"core", "test_frac", [](const RunConfig& c) { return fmt(c.test_frac); },
         [](RunConfig& c, std::string_view v) { c.test_frac = parse_double(v); }},

        {"entropy", "m", [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.entropy.m)); },
         [](RunConfig& c, std::string_view v) { c.entropy.m = static_cast<int>(parse_i64(v)); }},
        {"entropy", "r", [](const RunConfig& c) { return fmt(c.entropy.r); },
         [](RunConfig& c, std::string_view v) { c.entropy.r = parse_double(v); }},
        {"entropy", "fuzzy_power", [](const RunConfig& c) { return fmt(c.entropy.fuzzy_power); },
         [](RunConfig& c, std::string_view v) { c.entropy.fuzzy_power = parse_double(v); }},
        {"entropy", "r_times_sd", [](const RunConfig& c) { return fmt_bool(c.entropy.r_times_sd); },
         [](RunConfig& c, std::string_view v) { c.entropy.r_times_sd = parse_bool(v); }},
        {"entropy", "criterion",
         [](const RunConfig& c) { return std::string(entropy::criterion_name(c.ranking)); },
         [](RunConfig& c, std::string_view v) { c.ranking = entropy::criterion_from_name(std::string(v)); }},
        {"entropy", "descending", [](const RunConfig& c) { return fmt_bool(c.rank_descending); },
         [](RunConfig& c, std::string_view v) { c.rank_descending = parse_bool(v); }},

        {"sim", "delta_eta_cm", [](const RunConfig& c) { return fmt(c.delta_eta_cm); },
         [](RunConfig& c, std::string_view v) { c.delta_eta_cm = parse_double(v); }},
        {"sim", "delta_beta_deg", [](const RunConfig& c) { return fmt(c.delta_beta_deg); },
         [](RunConfig& c, std::string_view v) { c.delta_beta_deg = parse_double(v); }},
        {"sim", "templates", [](const RunConfig& c) { return c.templates; },
         [](RunConfig& c, std::string_view v) { c.templates = std::string(v); }},
        {"sim", "users", [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.users)); },
         [](RunConfig& c, std::string_view v) { c.users = static_cast<int>(parse_i64(v)); }},
        {"sim", "duration_s", [](const RunConfig& c) { return fmt(c.duration_s); },
         [](RunConfig& c, std::string_view v) { c.duration_s = parse_double(v); }},
        {"sim", "rate_hz", [](const RunConfig& c) { return fmt(c.rate_hz); },
         [](RunConfig& c, std::string_view v) { c.rate_hz = parse_double(v); }},
        {"sim", "noise_scale", [](const RunConfig& c) { return fmt(c.noise_scale); },
         [](RunConfig& c, std::string_view v) { c.noise_scale = parse_double(v); }},
        {"sim", "chaos_scale", [](const RunConfig& c) { return fmt(c.chaos_scale); },
         [](RunConfig& c, std::string_view v) { c.chaos_scale = parse_double(v); }},

        {"model", "layers", [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.model.layers)); },
         [](RunConfig& c, std::string_view v) { c.model.layers = static_cast<int>(parse_i64(v)); }},
        {"model", "hidden", [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.model.hidden)); },
         [](RunConfig& c, std::string_view v) { c.model.hidden = static_cast<int>(parse_i64(v)); }},
        {"model", "window", [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.model.window)); },
         [](RunConfig& c, std::string_view v) { c.model.window = static_cast<int>(parse_i64(v)); }},
        {"model", "batch", [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.model.batch)); },
         [](RunConfig& c, std::string_view v) { c.model.batch = static_cast<int>(parse_i64(v)); }},
        {"model", "epochs", [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.model.epochs)); },
         [](RunConfig& c, std::string_view v) { c.model.epochs = static_cast<int>(parse_i64(v)); }},
        {"model", "learning_rate", [](const RunConfig& c) { return fmt(c.model.learning_rate); },
         [](RunConfig& c, std::string_view v) { c.model.learning_rate = parse_double(v); }},
        {"model", "lr_decay", [](const RunConfig& c) { return fmt(c.model.lr_decay); },
         [](RunConfig& c, std::string_view v) { c.model.lr_decay = parse_double(v); }},
        {"model", "lr_decay_every",
         [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.model.lr_decay_every)); },
         [](RunConfig& c, std::string_view v) { c.model.lr_decay_every = static_cast<int>(parse_i64(v)); }},
        {"model", "grad_clip", [](const RunConfig& c) { return fmt(c.model.grad_clip); },
         [](RunConfig& c, std::string_view v) { c.model.grad_clip = parse_double(v); }},
        {"model", "adam", [](const RunConfig& c) { return fmt_bool(c.model.adam); },
         [](RunConfig& c, std::string_view v) { c.model.adam = parse_bool(v); }},
        {"model", "interlayer_norm", [](const RunConfig& c) { return fmt_bool(c.model.interlayer_norm); },
         [](RunConfig& c, std::string_view v) { c.model.interlayer_norm = parse_bool(v); }},
        {"model", "window_stride",
         [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.window_stride)); },
         [](RunConfig& c, std::string_view v) { c.window_stride = static_cast<int>(parse_i64(v)); }},

        {"transfer", "eta_weight", [](const RunConfig& c) { return fmt(c.transfer.eta_weight); },
         [](RunConfig& c, std::string_view v) { c.transfer.eta_weight = parse_double(v); }},
        {"transfer", "schedule_m", [](const RunConfig& c) { return fmt(c.transfer.schedule_m); },
         [](RunConfig& c, std::string_view v) { c.transfer.schedule_m = parse_double(v); }},
        {"transfer", "kernel_multipliers",
         [](const RunConfig& c) { return fmt_multipliers(c.transfer.kernel_multipliers); },
         [](RunConfig& c, std::string_view v) { parse_multipliers(c.transfer.kernel_multipliers, v); }},
        {"transfer", "target_budget",
         [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.transfer.target_budget)); },
         [](RunConfig& c, std::string_view v) { c.transfer.target_budget = static_cast<int>(parse_i64(v)); }},
        {"transfer", "epoch_switch",
         [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.transfer.epoch_switch)); },
         [](RunConfig& c, std::string_view v) { c.transfer.epoch_switch = static_cast<int>(parse_i64(v)); }},
        {"transfer", "unbiased", [](const RunConfig& c) { return fmt_bool(c.transfer.unbiased); },
         [](RunConfig& c, std::string_view v) { c.transfer.unbiased = parse_bool(v); }},
        {"transfer", "epochs",
         [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.transfer_epochs)); },
         [](RunConfig& c, std::string_view v) { c.transfer_epochs = static_cast<int>(parse_i64(v)); }},
        {"transfer", "learning_rate", [](const RunConfig& c) { return fmt(c.transfer_lr); },
         [](RunConfig& c, std::string_view v) { c.transfer_lr = parse_double(v); }},

        {"kalman", "ratio", [](const RunConfig& c) { return fmt(c.kalman.ratio); },
         [](RunConfig& c, std::string_view v) { c.kalman.ratio = parse_double(v); }},
        {"kalman", "dt_s", [](const RunConfig& c) { return fmt(c.kalman.dt_s); },
         [](RunConfig& c, std::string_view v) { c.kalman.dt_s = parse_double(v); }},
        {"kalman", "process_noise", [](const RunConfig& c) { return fmt(c.kalman.process_noise); },
         [](RunConfig& c, std::string_view v) { c.kalman.process_noise = parse_double(v); }},

        {"eval", "angle_bin_deg", [](const RunConfig& c) { return fmt(c.report.angle_bin_deg); },
         [](RunConfig& c, std::string_view v) { c.report.angle_bin_deg = parse_double(v); }},
        {"eval", "velocity_bin", [](const RunConfig& c) { return fmt(c.report.velocity_bin); },
         [](RunConfig& c, std::string_view v) { c.report.velocity_bin = parse_double(v); }},
        {"eval", "velocity_window",
         [](const RunConfig& c) { return fmt(static_cast<std::int64_t>(c.report.velocity_window_frames)); },
         [](RunConfig& c, std::string_view v) {
             c.report.velocity_window_frames = static_cast<int>(parse_i64(v));
         }},
        {"eval", "smooth", [](const RunConfig& c) { return fmt_bool(c.smooth_output); },
         [](RunConfig& c, std::string_view v) { c.smooth_output = parse_bool(v); }},
    };
    return table;
}

const Key* find_key(std::string_view section, std::string_view name) {
    for (const auto& k : key_table())
        if (section == k.section && name == k.name) return &k;
    return nullptr;
}

} // namespace

void RunConfig::validate() const {
    if (sensors < 1 || sensors > core::kChannels)
        throw ValidationError("config: sensors must be in [1, 6]");
    if (!(outlier_z > 0.0)) throw ValidationError("config: outlier_z must be positive");
    if (window_stride < 1) throw ValidationError("config: window_stride must be >= 1");
    if (transfer_epochs < 1) throw ValidationError("config: transfer epochs must be >= 1");
    if (users < 1) throw ValidationError("config: users must be >= 1");
    if (!(duration_s > 0.0) || !(rate_hz > 0.0))
        throw ValidationError("config: sim duration and rate must be positive");
    entropy.validate();
    model.validate();
    transfer.validate();
    kalman.validate();
}

RunConfig parse_config_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    RunConfig cfg;
    std::string line, section;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view v = trim(line);
        if (v.empty() || v.front() == '#' || v.front() == ';') continue;
        if (v.front() == '[') {
            if (v.back() != ']') throw ParseError(path.string(), line_no, "unterminated section");
            section = std::string(v.substr(1, v.size() - 2));
            continue;
        }
        const std::size_t eq = v.find('=');
        if (eq == std::string_view::npos) throw ParseError(path.string(), line_no, "expected key=value");
        const std::string_view key = trim(v.substr(0, eq));
        const std::string_view val = trim(v.substr(eq + 1));
        const Key* k = find_key(section, key);
        if (!k)
            throw ParseError(path.string(), line_no,
                             "unknown key '" + section + "." + std::string(key) + "'");
        try {
            k->set(cfg, val);
        } catch (const ParseError& e) {
            throw ParseError(path.string(), line_no, e.what());
        }
    }
    cfg.model.channels = cfg.sensors;
    return cfg;
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
    const std::size_t eq = assignment.find('=');
    const std::size_t dot = assignment.find('.');
    if (eq == std::string::npos || dot == std::string::npos || dot > eq)
        throw UsageError("override must be section.key=value: '" + assignment + "'");
    const std::string section = assignment.substr(0, dot);
    const std::string key = assignment.substr(dot + 1, eq - dot - 1);
    const std::string val = assignment.substr(eq + 1);
    const Key* k = find_key(section, key);
    if (!k) throw UsageError("unknown config key '" + section + "." + key + "'");
    k->set(cfg, val);
    cfg.model.channels = cfg.sensors;
}

std::string canonical_dump(const RunConfig& cfg) {
    std::ostringstream out;
    std::string current;
    for (const auto& k : key_table()) {
        if (current != k.section) {
            current = k.section;
            out << '[' << current << "]\n";
        }
        out << k.name << '=' << k.get(cfg) << '\n';
    }
    return out.str();
}

std::uint64_t config_hash(const RunConfig& cfg) { return fnv1a(canonical_dump(cfg)); }

std::uint64_t dataset_chain_hash(const RunConfig& cfg) {
    // only what determines the generated bytes: the sim section and the seed
    std::ostringstream out;
    out << "run.seed=" << fmt(static_cast<std::int64_t>(cfg.seed)) << '\n';
    for (const auto& k : key_table())
        if (std::string_view(k.section) == "sim")
            out << k.section << '.' << k.name << '=' << k.get(cfg) << '\n';
    return fnv1a(out.str());
}

} // namespace padtrack::cli
