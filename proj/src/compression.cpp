#include "multirat/compression.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace multirat::compression {

namespace {
constexpr int kMonotonicitySamples = 2001;
}

void DistortionModel::validate() const {
    if (!(filter_length >= 1.0)) throw std::invalid_argument("distortion: filter_length must be >= 1");
    if (!(ratio_max >= 0.0 && ratio_max < 1.0))
        throw std::invalid_argument("distortion: ratio_max must lie in [0, 1)");
    for (double c : coefficients)
        if (!std::isfinite(c)) throw std::invalid_argument("distortion: coefficients must be finite");
    double previous = distortion(*this, 0.0);
    for (int k = 1; k < kMonotonicitySamples; ++k) {
        const double ratio = ratio_max * k / (kMonotonicitySamples - 1);
        const double current = distortion(*this, ratio);
        if (current < previous - 1e-12)
            throw std::invalid_argument("distortion: curve must be nondecreasing in ratio (fails near " +
                                        std::to_string(ratio) + ")");
        previous = current;
    }
}

double compressed_length(double raw_bits, double ratio) {
    if (!(ratio >= 0.0 && ratio < 1.0)) throw std::domain_error("compression ratio must lie in [0, 1)");
    if (raw_bits < 0.0) throw std::domain_error("raw bits must be >= 0");
    return raw_bits * (1.0 - ratio);
}

CompressionDecision decide(double raw_bits, double ratio, double ratio_max) {
    if (ratio > ratio_max) throw std::domain_error("compression ratio exceeds ratio_max");
    return {ratio, raw_bits, compressed_length(raw_bits, ratio)};
}

double raw_distortion(const DistortionModel& model, double ratio) {
    if (!(ratio >= 0.0 && ratio < 1.0)) throw std::domain_error("compression ratio must lie in [0, 1)");
    const auto& c = model.coefficients;
    const double kept = 1.0 - ratio;
    return (c[0] * std::exp(kept) + c[1] * std::pow(kept, -c[2]) +
            c[3] * std::pow(model.filter_length, -c[4]) - c[5]) /
           100.0;
}

DistortionValue distortion_checked(const DistortionModel& model, double ratio) {
    const double raw = raw_distortion(model, ratio);
    if (raw < 0.0) return {0.0, true};
    if (raw > 1.0) return {1.0, true};
    return {raw, false};
}

double distortion(const DistortionModel& model, double ratio) {
    return distortion_checked(model, ratio).value;
}

}  // namespace multirat::compression
