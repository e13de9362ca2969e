#pragma once

#include <optional>
#include <string>

// Physical-layer and cost metrics of a single (PEN, RAN) link. All values SI.
namespace multirat::radio {

struct RanProfile {
    int id = 0;
    std::string name;
    double total_bandwidth_hz = 20e6;
    double cost_per_bit = 0.0;
    double access_delay_s = 0.0;
    double energy_scale = 1.0;
    double energy_offset_j = 0.0;
    std::optional<double> nominal_rate_cap_bps;

    void validate() const;
};

struct ChannelParams {
    double tx_power_w = 0.1;
    double noise_density_w_per_hz = 3.98e-21;
    double path_loss = 3.6e-6;
    double ber = 1e-3;

    // K = -1.5 / ln(5 BER); positive only for BER < 0.2.
    double k_factor() const;
    void validate() const;
};

struct LinkState {
    double fading_mag_sq = 0.0;
    double bw_fraction = 0.0;
    double gain = 0.0;
    double rate_bps = 0.0;
};

double dbm_to_watts(double dbm);

double channel_gain(const ChannelParams& params, double fading_mag_sq);

// Shannon rate of the allocated slice, ignoring any nominal cap.
double shannon_rate(const RanProfile& ran, const ChannelParams& params, double bw_fraction,
                    double gain);

// Shannon rate clipped to the RAN's nominal rate when a cap is configured.
double link_rate(const RanProfile& ran, const ChannelParams& params, double bw_fraction,
                 double gain);

LinkState make_link(const RanProfile& ran, const ChannelParams& params, double fading_mag_sq,
                    double bw_fraction);

// Throws std::domain_error("zero-rate transmission") when bits > 0 and rate is 0.
double link_energy(const RanProfile& ran, const ChannelParams& params, double bits,
                   double bw_fraction, double gain, double rate_bps);

double link_latency(const RanProfile& ran, double bits, double rate_bps);

double link_cost(const RanProfile& ran, double bits);

}  // namespace multirat::radio
