#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "multirat/checkpoint.hpp"
#include "multirat/commands.hpp"
#include "multirat/config.hpp"

using namespace multirat;
using namespace multirat::harness;
namespace fs = std::filesystem;

namespace {

const fs::path kConfigs = fs::path(MULTIRAT_SOURCE_DIR) / "configs";

fs::path scratch(const std::string& name) {
    auto dir = fs::temp_directory_path() / ("multirat_harness_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const fs::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << text;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(std::move(cells));
    }
    return rows;
}

std::string replace_line(std::string text, const std::string& key, const std::string& replacement) {
    const auto at = text.find("\n" + key + " =");
    REQUIRE(at != std::string::npos);
    const auto end = text.find('\n', at + 1);
    return text.substr(0, at + 1) + replacement + text.substr(end);
}

}  // namespace

TEST_CASE("shipped default file carries the published parameters") {
    const auto c = load_config(kConfigs / "default.cfg");
    const auto& sc = c.scenario;
    CHECK(sc.num_pens() == 5);
    CHECK(sc.num_rans() == 3);
    CHECK(c.train.gamma == 0.95);
    CHECK(c.train.batch_size == 128);
    CHECK(c.train.buffer_capacity == 10000);
    CHECK(c.train.steps_per_episode == 200);
    CHECK(c.train.critic_adam.learning_rate == 3e-4);
    CHECK(c.train.actor_adam.learning_rate == 1e-4);
    CHECK(sc.resource_share_s == 0.02);
    CHECK(sc.channel.path_loss == 3.6e-6);
    CHECK(std::abs(sc.channel.noise_density_w_per_hz - 3.981071705534972507702523050877520434877e-21) < 1e-33);
    const std::vector<std::string> names{"5G", "4G", "3G"};
    const std::vector<double> rates{40e6, 25e6, 15e6}, costs{6e-6, 3e-6, 0.1e-6};
    for (int j = 0; j < 3; ++j) {
        CHECK(sc.rans[j].name == names[j]);
        CHECK(sc.rans[j].total_bandwidth_hz == 20e6);
        CHECK(*sc.rans[j].nominal_rate_cap_bps == rates[j]);
        CHECK(sc.rans[j].cost_per_bit == costs[j]);
    }
    for (const auto& p : sc.pens) {
        CHECK(p.seizure_prob == 0.1);
        CHECK(p.raw_bits_per_step == 1e6);
    }
}

TEST_CASE("every shipped config parses") {
    for (const auto& e : fs::directory_iterator(kConfigs))
        if (e.path().extension() == ".cfg") CHECK_NOTHROW(load_config(e.path()));
}

TEST_CASE("invalid values and unknown keys are rejected with the key named") {
    const auto text = slurp(kConfigs / "smoke.cfg");
    CHECK_THROWS_WITH_AS(parse_config(replace_line(text, "gamma", "gamma = 1.5")),
                         doctest::Contains("discount factor must be < 1"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(text + "\n[train]\nbogus_key = 3\n"), doctest::Contains("bogus_key"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_config(replace_line(text, "c3", "# c3 removed")), doctest::Contains("c3"),
                         ConfigError);
    CHECK_THROWS_AS(parse_config(replace_line(text, "seizure_prob", "seizure_prob = 1.5")), ConfigError);
}

TEST_CASE("canonical text round trips") {
    for (const char* name : {"default.cfg", "desk.cfg", "smoke.cfg"}) {
        const auto c = load_config(kConfigs / name);
        const auto text = serialize_config(c);
        const auto again = parse_config(text);
        CHECK(serialize_config(again) == text);
        CHECK(config_hash(again) == config_hash(c));
        CHECK(again.scenario.normalization.energy_j == c.scenario.normalization.energy_j);
    }
}

TEST_CASE("checkpoint") {
    const auto dir = scratch("ckpt");
    const auto c = load_config(kConfigs / "smoke.cfg");
    auto pens = marl::make_pen_team(c.scenario, c.network, 1, 3);
    auto rans = marl::make_ran_team(c.scenario, c.network, 1, 4);
    pens.agents[0].actor.adam_step(nn::Vector::Ones(pens.agents[0].actor.parameter_count()), {}, nn::Direction::ascend);
    pens.agents[1].critic.soft_update(0.3);
    const auto hash = config_hash(c);
    const auto path = dir / "checkpoint";
    save_checkpoint(path, make_checkpoint(pens, rans, hash, "rng state 1 2 3"));
    CHECK_FALSE(fs::exists(dir / "checkpoint.tmp"));

    SUBCASE("round trip is bit-identical") {
        const auto loaded = load_checkpoint(path);
        CHECK(loaded.rng_state == "rng state 1 2 3");
        auto p2 = marl::make_pen_team(c.scenario, c.network, 1, 99);
        auto r2 = marl::make_ran_team(c.scenario, c.network, 1, 98);
        apply_checkpoint(loaded, hash, false, p2, r2);
        for (int k = 0; k < 2; ++k) {
            for (auto [a, b] : {std::pair{&pens.agents[k], &p2.agents[k]}, std::pair{&rans.agents[k], &r2.agents[k]}}) {
                CHECK(a->actor.params() == b->actor.params());
                CHECK(a->actor.target_params() == b->actor.target_params());
                CHECK(a->actor.first_moment() == b->actor.first_moment());
                CHECK(a->actor.second_moment() == b->actor.second_moment());
                CHECK(a->actor.step_count() == b->actor.step_count());
                CHECK(a->critic.params() == b->critic.params());
                CHECK(a->critic.target_params() == b->critic.target_params());
            }
        }
    }
    SUBCASE("truncation") {
        const auto data = slurp(path);
        spit(path, data.substr(0, data.size() - 100));
        CHECK_THROWS_AS(load_checkpoint(path), CheckpointIntegrityError);
        spit(path, data.substr(0, 40));
        CHECK_THROWS_AS(load_checkpoint(path), CheckpointIntegrityError);
    }
    SUBCASE("corruption") {
        auto data = slurp(path);
        data[data.size() - 500] ^= 0x20;
        spit(path, data);
        CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("checksum"), CheckpointIntegrityError);
    }
    SUBCASE("future version") {
        auto data = slurp(path);
        const auto at = data.find("version 1\n");
        data.replace(at, 10, "version 9\n");
        spit(path, data);
        CHECK_THROWS_WITH_AS(load_checkpoint(path), doctest::Contains("newer"), CheckpointError);
    }
    SUBCASE("config hash mismatch") {
        const auto loaded = load_checkpoint(path);
        CHECK_THROWS_AS(apply_checkpoint(loaded, hash ^ 1u, false, pens, rans), ConfigMismatchError);
        CHECK_NOTHROW(apply_checkpoint(loaded, hash ^ 1u, true, pens, rans));
    }
    SUBCASE("shape mismatch") {
        auto net = c.network;
        net.hidden_layers = {8};
        auto p3 = marl::make_pen_team(c.scenario, net, 1, 1);
        auto r3 = marl::make_ran_team(c.scenario, net, 1, 1);
        CHECK_THROWS_AS(apply_checkpoint(load_checkpoint(path), hash, false, p3, r3), CheckpointError);
    }
}

TEST_CASE("commands") {
    const auto dir = scratch("cmd");
    CommandOptions o;
    o.config = kConfigs / "smoke.cfg";
    o.out_dir = dir / "train";
    REQUIRE(cmd_train(o) == kExitOk);
    for (const char* f : {"training.csv", "checkpoint", "manifest", "config.cfg"}) CHECK(fs::exists(o.out_dir / f));
    const auto first = slurp(o.out_dir / "training.csv");
    CHECK(first.rfind(std::string(kTrainingCsvHeader) + "\n", 0) == 0);
    CHECK(load_config(o.out_dir / "config.cfg").train.seed == load_config(o.config).train.seed);

    auto again = o;
    again.out_dir = dir / "train2";
    REQUIRE(cmd_train(again) == kExitOk);
    CHECK(slurp(again.out_dir / "training.csv") == first);

    CommandOptions cmp;
    cmp.config = o.config;
    cmp.checkpoint = o.out_dir / "checkpoint";
    cmp.out_dir = dir / "compare";
    REQUIRE(cmd_compare(cmp) == kExitOk);
    const auto cfg = load_config(o.config);
    const auto rows = read_csv(cmp.out_dir / "compare.csv");
    REQUIRE(rows.size() > 1);
    std::map<std::string, std::map<std::string, std::vector<double>>> values;
    for (std::size_t k = 1; k < rows.size(); ++k) values[rows[k][0]][rows[k][2]].push_back(std::stod(rows[k][3]));
    CHECK(values.size() == 4);
    for (const auto& [policy, metrics] : values) {
        CHECK(metrics.size() == 6);
        for (const auto& [metric, v] : metrics) CHECK(v.size() == static_cast<std::size_t>(cfg.eval.episodes));
    }
    const auto summary = read_csv(cmp.out_dir / "summary.csv");
    REQUIRE(summary.size() == 5);
    for (std::size_t r = 1; r < summary.size(); ++r) {
        const auto& policy = summary[r][0];
        const auto& lifetimes = values[policy]["lifetime_hours"];
        double sum = 0.0;
        for (double v : lifetimes) sum += v;
        CHECK(std::abs(std::stod(summary[r][2]) - sum / lifetimes.size()) <= 1e-12 * std::max(1.0, sum));
    }

    CommandOptions ev = cmp;
    ev.out_dir = dir / "eval";
    CHECK(cmd_eval(ev) == kExitOk);
    CHECK(fs::exists(ev.out_dir / "eval.csv"));

    // A checkpoint from a different config is refused unless overridden.
    auto other = slurp(o.config);
    other = replace_line(other, "gamma", "gamma = 0.9");
    spit(dir / "other.cfg", other);
    ev.config = dir / "other.cfg";
    CHECK(cmd_eval(ev) == kExitFailure);
    ev.allow_config_mismatch = true;
    CHECK(cmd_eval(ev) == kExitOk);

    CommandOptions base;
    base.config = o.config;
    base.out_dir = dir / "baseline";
    base.policy = "onsra";
    CHECK(cmd_baseline(base) == kExitOk);
    base.policy = "greedy";
    CHECK(cmd_baseline(base) == kExitUsage);
    CHECK(cmd_compare(CommandOptions{o.config, dir / "x"}) == kExitUsage);
}
