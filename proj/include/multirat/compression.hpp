#pragma once

#include <array>

// Adaptive lossy compression: payload length and parametric reconstruction
// distortion as functions of the compression ratio kappa.
namespace multirat::compression {

inline constexpr double kDefaultRatioMax = 0.99;

struct DistortionModel {
    // c1..c6 of the fitted wavelet-compression distortion curve.
    std::array<double, 6> coefficients{};
    double filter_length = 4.0;
    double ratio_max = kDefaultRatioMax;

    // Checks filter length, ratio_max, and monotonicity over [0, ratio_max]
    // by dense sampling. Throws std::invalid_argument.
    void validate() const;
};

struct DistortionValue {
    double value = 0.0;
    bool clamped = false;
};

struct CompressionDecision {
    double ratio = 0.0;
    double raw_bits = 0.0;
    double compressed_bits = 0.0;
};

double compressed_length(double raw_bits, double ratio);

CompressionDecision decide(double raw_bits, double ratio, double ratio_max = kDefaultRatioMax);

// Unclamped curve value; throws std::domain_error for ratio outside [0, 1).
double raw_distortion(const DistortionModel& model, double ratio);

DistortionValue distortion_checked(const DistortionModel& model, double ratio);

double distortion(const DistortionModel& model, double ratio);

}  // namespace multirat::compression
