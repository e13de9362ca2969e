#include "multirat/radio.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace multirat::radio {

void RanProfile::validate() const {
    if (!(total_bandwidth_hz > 0.0)) throw std::invalid_argument("ran " + name + ": bandwidth must be > 0");
    if (!(cost_per_bit >= 0.0)) throw std::invalid_argument("ran " + name + ": cost_per_bit must be >= 0");
    if (!(access_delay_s >= 0.0)) throw std::invalid_argument("ran " + name + ": access delay must be >= 0");
    if (!(energy_scale > 0.0)) throw std::invalid_argument("ran " + name + ": energy_scale must be > 0");
    if (!(energy_offset_j >= 0.0)) throw std::invalid_argument("ran " + name + ": energy_offset must be >= 0");
    if (nominal_rate_cap_bps && !(*nominal_rate_cap_bps > 0.0))
        throw std::invalid_argument("ran " + name + ": rate cap must be > 0 when set");
}

double ChannelParams::k_factor() const { return -1.5 / std::log(5.0 * ber); }

void ChannelParams::validate() const {
    if (!(tx_power_w > 0.0)) throw std::invalid_argument("channel: tx power must be > 0");
    if (!(noise_density_w_per_hz > 0.0)) throw std::invalid_argument("channel: noise density must be > 0");
    if (!(path_loss > 0.0)) throw std::invalid_argument("channel: path loss must be > 0");
    if (!(ber > 0.0 && ber < 0.2)) throw std::invalid_argument("channel: ber must lie in (0, 0.2)");
}

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double channel_gain(const ChannelParams& params, double fading_mag_sq) {
    return params.k_factor() * params.path_loss * fading_mag_sq;
}

double shannon_rate(const RanProfile& ran, const ChannelParams& params, double bw_fraction,
                    double gain) {
    if (bw_fraction <= 0.0) return 0.0;
    const double bandwidth = bw_fraction * ran.total_bandwidth_hz;
    const double snr = params.tx_power_w * gain / (params.noise_density_w_per_hz * bandwidth);
    return bandwidth * std::log2(1.0 + snr);
}

double link_rate(const RanProfile& ran, const ChannelParams& params, double bw_fraction,
                 double gain) {
    const double rate = shannon_rate(ran, params, bw_fraction, gain);
    return ran.nominal_rate_cap_bps ? std::min(rate, *ran.nominal_rate_cap_bps) : rate;
}

LinkState make_link(const RanProfile& ran, const ChannelParams& params, double fading_mag_sq,
                    double bw_fraction) {
    LinkState link;
    link.fading_mag_sq = fading_mag_sq;
    link.bw_fraction = bw_fraction;
    link.gain = channel_gain(params, fading_mag_sq);
    link.rate_bps = link_rate(ran, params, bw_fraction, link.gain);
    return link;
}

double link_energy(const RanProfile& ran, const ChannelParams& params, double bits,
                   double bw_fraction, double gain, double rate_bps) {
    if (bits <= 0.0) return ran.energy_offset_j;
    if (!(rate_bps > 0.0) || !(gain > 0.0) || !(bw_fraction > 0.0))
        throw std::domain_error("zero-rate transmission");
    const double bandwidth = bw_fraction * ran.total_bandwidth_hz;
    // expm1 keeps 2^(r/W) - 1 accurate when the spectral efficiency is small.
    const double power_term = std::expm1(rate_bps / bandwidth * std::log(2.0));
    return ran.energy_scale * (bits * params.noise_density_w_per_hz * bandwidth / (rate_bps * gain)) *
               power_term +
           ran.energy_offset_j;
}

double link_latency(const RanProfile& ran, double bits, double rate_bps) {
    if (bits <= 0.0) return ran.access_delay_s;
    if (!(rate_bps > 0.0)) throw std::domain_error("zero-rate transmission");
    return bits / rate_bps + ran.access_delay_s;
}

double link_cost(const RanProfile& ran, double bits) { return bits * ran.cost_per_bit; }

}  // namespace multirat::radio
