#pragma once

#include <cmath>
#include <string>

#include "multirat/env.hpp"

namespace testsupport {

inline bool rel_close(double a, double b, double rel, double abs_floor = 0.0) {
    return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_floor);
}

// Two PENs on 5G + 4G with the shipped placeholder distortion curve.
inline multirat::env::Scenario desk_scenario(double battery_j = 0.03) {
    using namespace multirat;
    env::Scenario sc;
    radio::RanProfile g5{0, "5G", 20e6, 6e-6, 0.001, 1.0, 1e-4, 40e6};
    radio::RanProfile g4{1, "4G", 20e6, 3e-6, 0.010, 1.0, 1e-4, 25e6};
    sc.rans = {g5, g4};
    for (int i = 0; i < 2; ++i) {
        env::PenProfile p;
        p.id = i;
        p.raw_bits_per_step = 1e6;
        p.battery_capacity_j = battery_j;
        p.seizure_prob = 0.1;
        sc.pens.push_back(p);
    }
    sc.channel.noise_density_w_per_hz = radio::dbm_to_watts(-174.0);
    sc.distortion.coefficients = {0.5, 10.4, 0.5, 1.0, 1.0, 10.009140914229523};
    sc.normalization = env::derive_normalization(sc, 0.02, 0.1);
    sc.validate();
    return sc;
}

}  // namespace testsupport
