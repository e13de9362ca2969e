#include "multirat/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <zlib.h>

namespace multirat::harness {

namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "scenario.num_pens", "scenario.num_rans", "scenario.step_duration_s", "scenario.resource_share_s",
        "scenario.seizure_mean_duration_steps", "scenario.connection_threshold", "scenario.ratio_init",
        "scenario.fading_mean_sq", "scenario.energy_norm_j", "scenario.cost_norm", "scenario.latency_norm_s",
        "scenario.norm_min_bw_fraction", "scenario.norm_weak_fading_mag_sq",
        "channel.tx_power_w", "channel.tx_power_dbm", "channel.noise_density_w_per_hz",
        "channel.noise_density_dbm_per_hz", "channel.path_loss", "channel.ber",
        "rans.names", "rans.bandwidth_hz", "rans.cost_per_bit", "rans.access_delay_s", "rans.energy_scale",
        "rans.energy_offset_j", "rans.rate_cap_bps", "rans.rate_cap_mbps",
        "pens.raw_data_bits", "pens.raw_data_mb", "pens.battery_capacity_j", "pens.seizure_prob",
        "pens.weights_normal", "pens.weights_seizure",
        "distortion.c1", "distortion.c2", "distortion.c3", "distortion.c4", "distortion.c5", "distortion.c6",
        "distortion.filter_length", "distortion.ratio_max",
        "network.hidden_layers", "network.hidden_activation",
        "train.episodes", "train.steps_per_episode", "train.gamma", "train.buffer_capacity", "train.batch_size",
        "train.critic_lr", "train.actor_lr", "train.adam_beta1", "train.adam_beta2", "train.adam_epsilon",
        "train.soft_update", "train.train_interval", "train.updates_per_train", "train.warmup_episodes",
        "train.noise_start", "train.noise_end", "train.noise_decay_episodes", "train.grad_clip_norm", "train.seed",
        "eval.episodes", "eval.seed", "eval.max_steps",
        "baselines.utilization_resolution", "baselines.ratio_resolution", "baselines.onsra_max_rounds",
        "baselines.onsra_tol", "baselines.recompute_every_steps", "baselines.fading_aware",
        "baselines.planning_fading_mag_sq"};
    return keys;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

class Entries {
public:
    explicit Entries(std::string_view text) {
        std::string section;
        std::istringstream in{std::string(text)};
        int line_no = 0;
        for (std::string raw; std::getline(in, raw);) {
            ++line_no;
            const auto hash = raw.find('#');
            const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section");
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
            if (section.empty()) throw ConfigError("line " + std::to_string(line_no) + ": key outside a section");
            const std::string key = section + "." + trim(line.substr(0, eq));
            if (!known_keys().count(key)) throw ConfigError("unknown key '" + key + "'");
            if (values_.count(key)) throw ConfigError("duplicate key '" + key + "'");
            values_[key] = trim(line.substr(eq + 1));
        }
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    const std::string& raw(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end()) throw ConfigError("missing required key '" + key + "'");
        return it->second;
    }

    double number(const std::string& key) const { return parse_double(key, raw(key)); }
    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    long long integer(const std::string& key) const { return parse_int(key, raw(key)); }
    long long integer(const std::string& key, long long fallback) const {
        return has(key) ? integer(key) : fallback;
    }

    bool boolean(const std::string& key, bool fallback) const {
        if (!has(key)) return fallback;
        const auto& v = raw(key);
        if (v == "true") return true;
        if (v == "false") return false;
        throw ConfigError(key + ": expected true or false, got '" + v + "'");
    }

    std::vector<std::string> strings(const std::string& key) const {
        std::vector<std::string> out;
        std::stringstream ss(raw(key));
        for (std::string tok; std::getline(ss, tok, ',');) out.push_back(trim(tok));
        if (out.empty() || std::any_of(out.begin(), out.end(), [](const auto& s) { return s.empty(); }))
            throw ConfigError(key + ": empty list element");
        return out;
    }

    std::vector<double> numbers(const std::string& key) const {
        std::vector<double> out;
        for (const auto& s : strings(key)) out.push_back(parse_double(key, s));
        return out;
    }

    // Either one value broadcast to every slot or exactly `count` values.
    std::vector<double> per_item(const std::string& key, int count, double fallback) const {
        if (!has(key)) return std::vector<double>(count, fallback);
        auto v = numbers(key);
        if (v.size() == 1) return std::vector<double>(count, v[0]);
        if (static_cast<int>(v.size()) != count)
            throw ConfigError(key + ": expected 1 or " + std::to_string(count) + " values, got " +
                              std::to_string(v.size()));
        return v;
    }

    static double parse_double(const std::string& key, const std::string& s) {
        double v = 0.0;
        const auto* end = s.data() + s.size();
        const auto res = std::from_chars(s.data(), end, v);
        if (res.ec != std::errc{} || res.ptr != end || !std::isfinite(v))
            throw ConfigError(key + ": expected a finite number, got '" + s + "'");
        return v;
    }

    static long long parse_int(const std::string& key, const std::string& s) {
        long long v = 0;
        const auto* end = s.data() + s.size();
        const auto res = std::from_chars(s.data(), end, v);
        if (res.ec != std::errc{} || res.ptr != end) throw ConfigError(key + ": expected an integer, got '" + s + "'");
        return v;
    }

private:
    std::map<std::string, std::string> values_;
};

int positive_int(const Entries& e, const std::string& key, long long fallback, long long min_value = 1) {
    const long long v = e.integer(key, fallback);
    if (v < min_value || v > 1'000'000'000)
        throw ConfigError(key + ": must be an integer in [" + std::to_string(min_value) + ", 1e9]");
    return static_cast<int>(v);
}

double exclusive(const Entries& e, const std::string& a, const std::string& b, double b_scale, double fallback,
                 bool db_to_watts = false) {
    if (e.has(a) && e.has(b)) throw ConfigError("keys '" + a + "' and '" + b + "' are mutually exclusive");
    if (e.has(b)) return db_to_watts ? radio::dbm_to_watts(e.number(b)) : e.number(b) * b_scale;
    return e.number(a, fallback);
}

void fill_scenario(const Entries& e, ExperimentConfig& cfg) {
    auto& sc = cfg.scenario;
    const int n = positive_int(e, "scenario.num_pens", 0);
    const int m = positive_int(e, "scenario.num_rans", 0);
    sc.step_duration_s = e.number("scenario.step_duration_s", 10.0);
    sc.resource_share_s = e.number("scenario.resource_share_s", 0.02);
    sc.seizure_mean_duration_steps = e.number("scenario.seizure_mean_duration_steps", 10.0);
    sc.connection_threshold = e.number("scenario.connection_threshold", 1e-3);
    sc.ratio_init = e.number("scenario.ratio_init", 0.5);
    sc.fading_mean_sq = e.number("scenario.fading_mean_sq", 1.0);
    cfg.norm_min_bw_fraction = e.number("scenario.norm_min_bw_fraction", 0.02);
    cfg.norm_weak_fading_mag_sq = e.number("scenario.norm_weak_fading_mag_sq", 0.1);

    auto& ch = sc.channel;
    ch.tx_power_w = exclusive(e, "channel.tx_power_w", "channel.tx_power_dbm", 0.0, 0.1, true);
    ch.noise_density_w_per_hz =
        exclusive(e, "channel.noise_density_w_per_hz", "channel.noise_density_dbm_per_hz", 0.0,
                  radio::dbm_to_watts(-174.0), true);
    ch.path_loss = e.number("channel.path_loss", 3.6e-6);
    ch.ber = e.number("channel.ber", 1e-3);

    std::vector<std::string> names;
    if (e.has("rans.names")) {
        names = e.strings("rans.names");
        if (static_cast<int>(names.size()) != m)
            throw ConfigError("rans.names: expected " + std::to_string(m) + " names");
    } else {
        for (int j = 0; j < m; ++j) names.push_back("ran" + std::to_string(j));
    }
    if (!e.has("rans.bandwidth_hz")) throw ConfigError("missing required key 'rans.bandwidth_hz'");
    if (!e.has("rans.cost_per_bit")) throw ConfigError("missing required key 'rans.cost_per_bit'");
    const auto bw = e.per_item("rans.bandwidth_hz", m, 0.0);
    const auto cost = e.per_item("rans.cost_per_bit", m, 0.0);
    const auto delay = e.per_item("rans.access_delay_s", m, 0.0);
    const auto scale = e.per_item("rans.energy_scale", m, 1.0);
    const auto offset = e.per_item("rans.energy_offset_j", m, 1e-4);
    if (e.has("rans.rate_cap_bps") && e.has("rans.rate_cap_mbps"))
        throw ConfigError("keys 'rans.rate_cap_bps' and 'rans.rate_cap_mbps' are mutually exclusive");
    auto cap = e.has("rans.rate_cap_mbps") ? e.per_item("rans.rate_cap_mbps", m, 0.0)
                                           : e.per_item("rans.rate_cap_bps", m, 0.0);
    if (e.has("rans.rate_cap_mbps"))
        for (auto& c : cap) c *= 1e6;
    sc.rans.clear();
    for (int j = 0; j < m; ++j) {
        radio::RanProfile r;
        r.id = j;
        r.name = names[j];
        r.total_bandwidth_hz = bw[j];
        r.cost_per_bit = cost[j];
        r.access_delay_s = delay[j];
        r.energy_scale = scale[j];
        r.energy_offset_j = offset[j];
        if (cap[j] < 0.0) throw ConfigError("rans.rate_cap: must be >= 0 (0 disables the cap)");
        if (cap[j] > 0.0) r.nominal_rate_cap_bps = cap[j];
        sc.rans.push_back(r);
    }

    if (!e.has("pens.battery_capacity_j")) throw ConfigError("missing required key 'pens.battery_capacity_j'");
    if (e.has("pens.raw_data_bits") && e.has("pens.raw_data_mb"))
        throw ConfigError("keys 'pens.raw_data_bits' and 'pens.raw_data_mb' are mutually exclusive");
    auto bits = e.has("pens.raw_data_mb") ? e.per_item("pens.raw_data_mb", n, 1.0)
                                          : e.per_item("pens.raw_data_bits", n, 1e6);
    if (e.has("pens.raw_data_mb"))
        for (auto& b : bits) b *= 1e6;
    const auto battery = e.per_item("pens.battery_capacity_j", n, 0.0);
    const auto seizure = e.per_item("pens.seizure_prob", n, 0.1);
    std::vector<double> wn(4 * n, 0.25), ws(2 * n, 0.5);
    if (e.has("pens.weights_normal")) {
        const auto v = e.numbers("pens.weights_normal");
        if (v.size() == 4) {
            for (int i = 0; i < n; ++i) std::copy(v.begin(), v.end(), wn.begin() + 4 * i);
        } else if (static_cast<int>(v.size()) == 4 * n) {
            wn = v;
        } else {
            throw ConfigError("pens.weights_normal: expected 4 or 4*num_pens values");
        }
    }
    if (e.has("pens.weights_seizure")) {
        const auto v = e.numbers("pens.weights_seizure");
        if (v.size() == 2) {
            for (int i = 0; i < n; ++i) std::copy(v.begin(), v.end(), ws.begin() + 2 * i);
        } else if (static_cast<int>(v.size()) == 2 * n) {
            ws = v;
        } else {
            throw ConfigError("pens.weights_seizure: expected 2 or 2*num_pens values");
        }
    }
    sc.pens.clear();
    for (int i = 0; i < n; ++i) {
        env::PenProfile p;
        p.id = i;
        p.raw_bits_per_step = bits[i];
        p.battery_capacity_j = battery[i];
        p.seizure_prob = seizure[i];
        p.weights_normal = {wn[4 * i], wn[4 * i + 1], wn[4 * i + 2], wn[4 * i + 3]};
        p.weights_seizure = {ws[2 * i], ws[2 * i + 1]};
        sc.pens.push_back(p);
    }

    auto& d = sc.distortion;
    for (int k = 0; k < 6; ++k) d.coefficients[k] = e.number("distortion.c" + std::to_string(k + 1));
    d.filter_length = e.number("distortion.filter_length", 4.0);
    d.ratio_max = e.number("distortion.ratio_max", compression::kDefaultRatioMax);

    // Validate the physical parts before deriving normalization from them.
    for (const auto& r : sc.rans) r.validate();
    for (const auto& p : sc.pens) p.validate();
    ch.validate();
    if (!(cfg.norm_min_bw_fraction > 0.0 && cfg.norm_min_bw_fraction <= 1.0))
        throw ConfigError("scenario.norm_min_bw_fraction: must lie in (0, 1]");
    if (!(cfg.norm_weak_fading_mag_sq > 0.0)) throw ConfigError("scenario.norm_weak_fading_mag_sq: must be > 0");
    const bool all_given =
        e.has("scenario.energy_norm_j") && e.has("scenario.cost_norm") && e.has("scenario.latency_norm_s");
    env::Normalization derived{1.0, 1.0, 1.0};
    if (!all_given) derived = env::derive_normalization(sc, cfg.norm_min_bw_fraction, cfg.norm_weak_fading_mag_sq);
    sc.normalization.energy_j = e.number("scenario.energy_norm_j", derived.energy_j);
    sc.normalization.cost = e.number("scenario.cost_norm", derived.cost);
    sc.normalization.latency_s = e.number("scenario.latency_norm_s", derived.latency_s);
}

void fill_learning(const Entries& e, ExperimentConfig& cfg) {
    auto& net = cfg.network;
    if (e.has("network.hidden_layers")) {
        net.hidden_layers.clear();
        for (const auto& s : e.strings("network.hidden_layers")) {
            const long long v = Entries::parse_int("network.hidden_layers", s);
            if (v <= 0 || v > 100000) throw ConfigError("network.hidden_layers: sizes must lie in [1, 100000]");
            net.hidden_layers.push_back(static_cast<int>(v));
        }
    }
    if (e.has("network.hidden_activation")) {
        const auto& a = e.raw("network.hidden_activation");
        if (a == "relu") net.activation = nn::Activation::relu;
        else if (a == "tanh") net.activation = nn::Activation::tanh;
        else throw ConfigError("network.hidden_activation: expected relu or tanh");
    }

    auto& t = cfg.train;
    t.episodes = positive_int(e, "train.episodes", 6000);
    t.steps_per_episode = positive_int(e, "train.steps_per_episode", 200);
    t.gamma = e.number("train.gamma", 0.95);
    t.buffer_capacity = static_cast<std::size_t>(positive_int(e, "train.buffer_capacity", 10000));
    t.batch_size = static_cast<std::size_t>(positive_int(e, "train.batch_size", 128));
    t.critic_adam.learning_rate = e.number("train.critic_lr", 3e-4);
    t.actor_adam.learning_rate = e.number("train.actor_lr", 1e-4);
    for (auto* a : {&t.critic_adam, &t.actor_adam}) {
        a->beta1 = e.number("train.adam_beta1", 0.9);
        a->beta2 = e.number("train.adam_beta2", 0.999);
        a->epsilon_hat = e.number("train.adam_epsilon", 1e-8);
    }
    t.soft_epsilon = e.number("train.soft_update", 0.01);
    t.train_interval = positive_int(e, "train.train_interval", 1);
    t.updates_per_train = positive_int(e, "train.updates_per_train", 1);
    t.warmup_episodes = positive_int(e, "train.warmup_episodes", 0, 0);
    t.noise_start = e.number("train.noise_start", 1.0);
    t.noise_end = e.number("train.noise_end", 0.05);
    t.noise_decay_episodes = positive_int(e, "train.noise_decay_episodes", 1000, 0);
    t.grad_clip_norm = e.number("train.grad_clip_norm", 1.0);
    const long long seed = e.integer("train.seed", 1);
    if (seed < 0) throw ConfigError("train.seed: must be >= 0");
    t.seed = static_cast<std::uint64_t>(seed);

    cfg.eval.episodes = positive_int(e, "eval.episodes", 10);
    const long long eval_seed = e.integer("eval.seed", 1000);
    if (eval_seed < 0) throw ConfigError("eval.seed: must be >= 0");
    cfg.eval.seed = static_cast<std::uint64_t>(eval_seed);
    cfg.eval.max_steps = positive_int(e, "eval.max_steps", 100000);

    auto& b = cfg.baselines;
    b.grid.utilization_resolution = positive_int(e, "baselines.utilization_resolution", 11);
    b.grid.ratio_resolution = positive_int(e, "baselines.ratio_resolution", 21);
    b.onsra_max_rounds = positive_int(e, "baselines.onsra_max_rounds", 50);
    b.onsra_tol = e.number("baselines.onsra_tol", 1e-9);
    b.recompute_every_steps = positive_int(e, "baselines.recompute_every_steps", 0, 0);
    b.fading_aware = e.boolean("baselines.fading_aware", false);
    b.planning_fading_mag_sq = e.number("baselines.planning_fading_mag_sq", 1.0);
}

std::string num(double v) { return metrics::format_double(v); }

template <typename F>
std::string join(int count, F&& item) {
    std::string out;
    for (int k = 0; k < count; ++k) {
        if (k) out += ", ";
        out += item(k);
    }
    return out;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
    const Entries entries(text);
    ExperimentConfig cfg;
    try {
        fill_scenario(entries, cfg);
        fill_learning(entries, cfg);
        cfg.scenario.validate();
        cfg.network.validate();
        cfg.train.validate();
        cfg.baselines.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("invalid config: ") + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
}

std::string serialize_config(const ExperimentConfig& cfg) {
    const auto& sc = cfg.scenario;
    const int n = sc.num_pens(), m = sc.num_rans();
    std::ostringstream os;
    os << "[scenario]\n"
       << "num_pens = " << n << "\n"
       << "num_rans = " << m << "\n"
       << "step_duration_s = " << num(sc.step_duration_s) << "\n"
       << "resource_share_s = " << num(sc.resource_share_s) << "\n"
       << "seizure_mean_duration_steps = " << num(sc.seizure_mean_duration_steps) << "\n"
       << "connection_threshold = " << num(sc.connection_threshold) << "\n"
       << "ratio_init = " << num(sc.ratio_init) << "\n"
       << "fading_mean_sq = " << num(sc.fading_mean_sq) << "\n"
       << "energy_norm_j = " << num(sc.normalization.energy_j) << "\n"
       << "cost_norm = " << num(sc.normalization.cost) << "\n"
       << "latency_norm_s = " << num(sc.normalization.latency_s) << "\n"
       << "norm_min_bw_fraction = " << num(cfg.norm_min_bw_fraction) << "\n"
       << "norm_weak_fading_mag_sq = " << num(cfg.norm_weak_fading_mag_sq) << "\n\n";
    os << "[channel]\n"
       << "tx_power_w = " << num(sc.channel.tx_power_w) << "\n"
       << "noise_density_w_per_hz = " << num(sc.channel.noise_density_w_per_hz) << "\n"
       << "path_loss = " << num(sc.channel.path_loss) << "\n"
       << "ber = " << num(sc.channel.ber) << "\n\n";
    os << "[rans]\n"
       << "names = " << join(m, [&](int j) { return sc.rans[j].name; }) << "\n"
       << "bandwidth_hz = " << join(m, [&](int j) { return num(sc.rans[j].total_bandwidth_hz); }) << "\n"
       << "cost_per_bit = " << join(m, [&](int j) { return num(sc.rans[j].cost_per_bit); }) << "\n"
       << "access_delay_s = " << join(m, [&](int j) { return num(sc.rans[j].access_delay_s); }) << "\n"
       << "energy_scale = " << join(m, [&](int j) { return num(sc.rans[j].energy_scale); }) << "\n"
       << "energy_offset_j = " << join(m, [&](int j) { return num(sc.rans[j].energy_offset_j); }) << "\n"
       << "rate_cap_bps = "
       << join(m, [&](int j) { return num(sc.rans[j].nominal_rate_cap_bps.value_or(0.0)); }) << "\n\n";
    os << "[pens]\n"
       << "raw_data_bits = " << join(n, [&](int i) { return num(sc.pens[i].raw_bits_per_step); }) << "\n"
       << "battery_capacity_j = " << join(n, [&](int i) { return num(sc.pens[i].battery_capacity_j); }) << "\n"
       << "seizure_prob = " << join(n, [&](int i) { return num(sc.pens[i].seizure_prob); }) << "\n"
       << "weights_normal = " << join(n, [&](int i) {
              const auto& w = sc.pens[i].weights_normal;
              return num(w.energy) + ", " + num(w.cost) + ", " + num(w.latency) + ", " + num(w.distortion);
          }) << "\n"
       << "weights_seizure = " << join(n, [&](int i) {
              const auto& w = sc.pens[i].weights_seizure;
              return num(w.latency) + ", " + num(w.distortion);
          }) << "\n\n";
    os << "[distortion]\n";
    for (int k = 0; k < 6; ++k) os << "c" << k + 1 << " = " << num(sc.distortion.coefficients[k]) << "\n";
    os << "filter_length = " << num(sc.distortion.filter_length) << "\n"
       << "ratio_max = " << num(sc.distortion.ratio_max) << "\n\n";
    const auto& net = cfg.network;
    os << "[network]\n"
       << "hidden_layers = "
       << join(static_cast<int>(net.hidden_layers.size()), [&](int k) { return std::to_string(net.hidden_layers[k]); })
       << "\n"
       << "hidden_activation = " << (net.activation == nn::Activation::relu ? "relu" : "tanh") << "\n\n";
    const auto& t = cfg.train;
    os << "[train]\n"
       << "episodes = " << t.episodes << "\n"
       << "steps_per_episode = " << t.steps_per_episode << "\n"
       << "gamma = " << num(t.gamma) << "\n"
       << "buffer_capacity = " << t.buffer_capacity << "\n"
       << "batch_size = " << t.batch_size << "\n"
       << "critic_lr = " << num(t.critic_adam.learning_rate) << "\n"
       << "actor_lr = " << num(t.actor_adam.learning_rate) << "\n"
       << "adam_beta1 = " << num(t.critic_adam.beta1) << "\n"
       << "adam_beta2 = " << num(t.critic_adam.beta2) << "\n"
       << "adam_epsilon = " << num(t.critic_adam.epsilon_hat) << "\n"
       << "soft_update = " << num(t.soft_epsilon) << "\n"
       << "train_interval = " << t.train_interval << "\n"
       << "updates_per_train = " << t.updates_per_train << "\n"
       << "warmup_episodes = " << t.warmup_episodes << "\n"
       << "noise_start = " << num(t.noise_start) << "\n"
       << "noise_end = " << num(t.noise_end) << "\n"
       << "noise_decay_episodes = " << t.noise_decay_episodes << "\n"
       << "grad_clip_norm = " << num(t.grad_clip_norm) << "\n"
       << "seed = " << t.seed << "\n\n";
    os << "[eval]\n"
       << "episodes = " << cfg.eval.episodes << "\n"
       << "seed = " << cfg.eval.seed << "\n"
       << "max_steps = " << cfg.eval.max_steps << "\n\n";
    const auto& b = cfg.baselines;
    os << "[baselines]\n"
       << "utilization_resolution = " << b.grid.utilization_resolution << "\n"
       << "ratio_resolution = " << b.grid.ratio_resolution << "\n"
       << "onsra_max_rounds = " << b.onsra_max_rounds << "\n"
       << "onsra_tol = " << num(b.onsra_tol) << "\n"
       << "recompute_every_steps = " << b.recompute_every_steps << "\n"
       << "fading_aware = " << (b.fading_aware ? "true" : "false") << "\n"
       << "planning_fading_mag_sq = " << num(b.planning_fading_mag_sq) << "\n";
    return os.str();
}

std::uint32_t config_hash(const ExperimentConfig& config) {
    const auto text = serialize_config(config);
    return static_cast<std::uint32_t>(
        crc32(0L, reinterpret_cast<const Bytef*>(text.data()), static_cast<uInt>(text.size())));
}

}  // namespace multirat::harness
