#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "multirat/radio.hpp"
#include "support.hpp"

using namespace multirat::radio;
using testsupport::rel_close;

namespace {

// Frozen from a 40-digit evaluation.
constexpr double kK = 0.2831087487266322471914226478910140503474;
constexpr double kGain = 1.019191495415876089889121532407650581251e-6;
constexpr double kShannon20MHz = 405763090.0895091895398912561352531450194;

ChannelParams table_channel() {
    ChannelParams c;
    c.tx_power_w = 0.1;
    c.noise_density_w_per_hz = 3.98e-21;
    c.path_loss = 3.6e-6;
    c.ber = 1e-3;
    return c;
}

RanProfile ran(std::optional<double> cap = std::nullopt) {
    RanProfile r;
    r.total_bandwidth_hz = 20e6;
    r.cost_per_bit = 6e-6;
    r.access_delay_s = 0.001;
    r.energy_scale = 1.0;
    r.energy_offset_j = 1e-4;
    r.nominal_rate_cap_bps = cap;
    return r;
}

}  // namespace

TEST_CASE("gain constant and product") {
    const auto c = table_channel();
    CHECK(rel_close(c.k_factor(), kK, 1e-14));
    CHECK(rel_close(channel_gain(c, 1.0), kGain, 1e-14));
    CHECK(channel_gain(c, 0.0) == 0.0);
    CHECK(rel_close(channel_gain(c, 2.0), 2.0 * channel_gain(c, 1.0), 1e-15));
}

TEST_CASE("channel validation rejects a BER that makes the constant non-positive") {
    auto c = table_channel();
    c.ber = 0.25;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
    c.ber = 1e-3;
    c.tx_power_w = 0.0;
    CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("rate: zero gain, uncapped value, cap") {
    const auto c = table_channel();
    CHECK(link_rate(ran(), c, 1.0, 0.0) == 0.0);
    CHECK(link_rate(ran(), c, 0.0, kGain) == 0.0);
    CHECK(rel_close(link_rate(ran(), c, 1.0, kGain), kShannon20MHz, 1e-12));
    CHECK(link_rate(ran(40e6), c, 1.0, kGain) == 40e6);
    CHECK(rel_close(shannon_rate(ran(40e6), c, 1.0, kGain), kShannon20MHz, 1e-12));
}

TEST_CASE("rate is monotone in bandwidth fraction and gain") {
    const auto c = table_channel();
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
        const double a = u(rng), b = u(rng), g1 = u(rng) * 3e-6, g2 = u(rng) * 3e-6;
        CHECK(link_rate(ran(), c, std::min(a, b), g1) <= link_rate(ran(), c, std::max(a, b), g1));
        CHECK(link_rate(ran(), c, a, std::min(g1, g2)) <= link_rate(ran(), c, a, std::max(g1, g2)));
    }
}

TEST_CASE("energy: offset only, closed form, linearity, zero rate") {
    const auto c = table_channel();
    const auto r = ran();
    CHECK(link_energy(r, c, 0.0, 1.0, kGain, 0.0) == r.energy_offset_j);
    const double rate = shannon_rate(r, c, 0.5, kGain);
    const double e1 = link_energy(r, c, 1e6, 0.5, kGain, rate);
    CHECK(rel_close(e1, 1e6 * 0.1 / rate + 1e-4, 1e-9));
    const double e2 = link_energy(r, c, 2e6, 0.5, kGain, rate);
    CHECK(rel_close(e2 - r.energy_offset_j, 2.0 * (e1 - r.energy_offset_j), 1e-12));
    CHECK_THROWS_WITH_AS(link_energy(r, c, 1.0, 0.5, kGain, 0.0), "zero-rate transmission", std::domain_error);
}

TEST_CASE("latency and cost") {
    auto r = ran();
    r.access_delay_s = 0.010;
    CHECK(link_latency(r, 1e6, 25e6) == doctest::Approx(0.04 + 0.010).epsilon(1e-15));
    CHECK(link_latency(r, 1e6, 25e6) - r.access_delay_s == 1e6 / 25e6);
    CHECK(link_latency(r, 0.0, 0.0) == r.access_delay_s);
    CHECK(link_latency(r, 1e6, 1e7) >= link_latency(r, 1e6, 2e7));
    CHECK_THROWS_WITH_AS(link_latency(r, 1.0, 0.0), "zero-rate transmission", std::domain_error);

    r.cost_per_bit = 6e-6;
    CHECK(link_cost(r, 1e6) == doctest::Approx(6.0).epsilon(1e-15));
    CHECK(link_cost(r, 0.0) == 0.0);
    r.cost_per_bit = 0.1e-6;
    CHECK(link_cost(r, 1e6) == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("profile validation") {
    auto r = ran();
    r.total_bandwidth_hz = 0.0;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    r = ran();
    r.cost_per_bit = -1.0;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

TEST_CASE("dBm conversion") {
    CHECK(rel_close(dbm_to_watts(-174.0), 3.981071705534972507702523050877520434877e-21, 1e-13));
    CHECK(rel_close(dbm_to_watts(20.0), 0.1, 1e-15));
}
