#pragma once

#include <atomic>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

// Small multilayer perceptrons with hand-written reverse mode, Adam, and a
// soft-updated target copy. Batches are column-major: one sample per column.
namespace multirat::nn {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

enum class Activation { relu, tanh };

enum class HeadActivation {
    linear,
    simplex,        // exponential normalization over the head
    unit_interval,  // logistic squash scaled to [0, interval_max]
};

struct Head {
    int width = 1;
    HeadActivation activation = HeadActivation::linear;

    bool operator==(const Head&) const = default;
};

struct MlpSpec {
    std::vector<int> layer_sizes;
    Activation hidden_activation = Activation::relu;
    std::vector<Head> heads;
    double interval_max = 0.99;

    int input_width() const { return layer_sizes.front(); }
    int output_width() const { return layer_sizes.back(); }
    void validate() const;
    // Compact textual form, e.g. "7-64-64-3|relu|simplex:2,unit:1|0.99".
    std::string describe() const;
    static MlpSpec parse(const std::string& text);

    bool operator==(const MlpSpec&) const = default;
};

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon_hat = 1e-8;

    void validate() const;
};

enum class Direction { ascend, descend };

// Intermediate values kept for the backward pass.
struct ForwardTrace {
    std::vector<Matrix> activations;  // activations[0] is the input
    std::vector<Matrix> pre;          // pre-activation of each affine layer
    Matrix output;
};

struct Gradients {
    Vector params;
    Matrix input;
};

enum class ParamSet { online, target };

class MlpNet {
public:
    MlpNet() = default;
    MlpNet(const MlpNet& other);
    MlpNet& operator=(const MlpNet& other);

    static MlpNet init(const MlpSpec& spec, std::uint64_t seed);

    const MlpSpec& spec() const { return spec_; }
    std::size_t parameter_count() const { return static_cast<std::size_t>(params_.size()); }

    // head_noise, when given, is added to the final pre-activations before
    // the head activations are applied.
    Matrix forward(const Matrix& input, ParamSet which = ParamSet::online,
                   const Matrix* head_noise = nullptr) const;
    std::vector<double> forward(std::span<const double> input, ParamSet which = ParamSet::online) const;

    ForwardTrace trace(const Matrix& input, const Matrix* head_noise = nullptr) const;
    // Gradient of sum_k upstream(:,k) . output(:,k) w.r.t. the online
    // parameters and the input.
    Gradients backward(const ForwardTrace& trace, const Matrix& upstream) const;
    Gradients gradient(const Matrix& input, const Matrix& upstream) const;

    // Throws std::domain_error("non-finite gradient").
    void adam_step(const Vector& grad, const AdamConfig& cfg, Direction direction);
    void soft_update(double epsilon);

    const Vector& params() const { return params_; }
    const Vector& target_params() const { return target_; }
    const Vector& first_moment() const { return moment1_; }
    const Vector& second_moment() const { return moment2_; }
    std::int64_t step_count() const { return steps_; }

    Vector& mutable_params() { return params_; }
    Vector& mutable_target_params() { return target_; }
    void restore(Vector params, Vector target, Vector moment1, Vector moment2, std::int64_t steps);

    // Number of forward/gradient evaluations since construction.
    std::uint64_t read_count() const { return reads_.load(std::memory_order_relaxed); }

private:
    struct LayerSlot {
        int in = 0;
        int out = 0;
        Eigen::Index weight_offset = 0;
        Eigen::Index bias_offset = 0;
    };

    void build_layout();
    Matrix run(const Vector& params, const Matrix& input, const Matrix* head_noise, ForwardTrace* trace) const;

    MlpSpec spec_;
    std::vector<LayerSlot> layout_;
    Vector params_;
    Vector target_;
    Vector moment1_;
    Vector moment2_;
    std::int64_t steps_ = 0;
    mutable std::atomic<std::uint64_t> reads_{0};
};

// Applies the spec's head activations to raw final-layer values in place.
void squash_heads(const MlpSpec& spec, Matrix& values);

// Scales grad in place so its Euclidean norm is at most max_norm; returns the
// norm before clipping.
double clip_global_norm(Vector& grad, double max_norm);

}  // namespace multirat::nn
