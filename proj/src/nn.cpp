#include "multirat/nn.hpp"

#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace multirat::nn {

void MlpSpec::validate() const {
    if (layer_sizes.size() < 2) throw std::invalid_argument("mlp: at least two layers required");
    for (int s : layer_sizes)
        if (s <= 0) throw std::invalid_argument("mlp: layer sizes must be positive");
    if (heads.empty()) throw std::invalid_argument("mlp: at least one output head required");
    int total = 0;
    for (const auto& h : heads) {
        if (h.width <= 0) throw std::invalid_argument("mlp: head widths must be positive");
        total += h.width;
    }
    if (total != output_width()) throw std::invalid_argument("mlp: head widths must sum to the output width");
    if (!(interval_max > 0.0 && interval_max <= 1.0))
        throw std::invalid_argument("mlp: interval_max must lie in (0, 1]");
}

std::string MlpSpec::describe() const {
    std::ostringstream os;
    for (std::size_t k = 0; k < layer_sizes.size(); ++k) os << (k ? "-" : "") << layer_sizes[k];
    os << '|' << (hidden_activation == Activation::relu ? "relu" : "tanh") << '|';
    for (std::size_t k = 0; k < heads.size(); ++k) {
        os << (k ? "," : "");
        switch (heads[k].activation) {
            case HeadActivation::linear: os << "linear"; break;
            case HeadActivation::simplex: os << "simplex"; break;
            case HeadActivation::unit_interval: os << "unit"; break;
        }
        os << ':' << heads[k].width;
    }
    os.precision(17);
    os << '|' << interval_max;
    return os.str();
}

MlpSpec MlpSpec::parse(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, '|');) parts.push_back(part);
    if (parts.size() != 4) throw std::invalid_argument("mlp spec: expected 4 '|'-separated fields: " + text);
    MlpSpec spec;
    std::stringstream layers(parts[0]);
    for (std::string tok; std::getline(layers, tok, '-');) spec.layer_sizes.push_back(std::stoi(tok));
    if (parts[1] == "relu") spec.hidden_activation = Activation::relu;
    else if (parts[1] == "tanh") spec.hidden_activation = Activation::tanh;
    else throw std::invalid_argument("mlp spec: unknown activation " + parts[1]);
    std::stringstream heads(parts[2]);
    for (std::string tok; std::getline(heads, tok, ',');) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos) throw std::invalid_argument("mlp spec: bad head " + tok);
        Head h;
        const std::string kind = tok.substr(0, colon);
        if (kind == "linear") h.activation = HeadActivation::linear;
        else if (kind == "simplex") h.activation = HeadActivation::simplex;
        else if (kind == "unit") h.activation = HeadActivation::unit_interval;
        else throw std::invalid_argument("mlp spec: unknown head " + kind);
        h.width = std::stoi(tok.substr(colon + 1));
        spec.heads.push_back(h);
    }
    spec.interval_max = std::stod(parts[3]);
    spec.validate();
    return spec;
}

void AdamConfig::validate() const {
    if (!(learning_rate > 0.0)) throw std::invalid_argument("adam: learning rate must be > 0");
    if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0))
        throw std::invalid_argument("adam: betas must lie in (0, 1)");
    if (!(epsilon_hat > 0.0)) throw std::invalid_argument("adam: epsilon must be > 0");
}

MlpNet::MlpNet(const MlpNet& other)
    : spec_(other.spec_),
      layout_(other.layout_),
      params_(other.params_),
      target_(other.target_),
      moment1_(other.moment1_),
      moment2_(other.moment2_),
      steps_(other.steps_),
      reads_(other.reads_.load()) {}

MlpNet& MlpNet::operator=(const MlpNet& other) {
    if (this == &other) return *this;
    spec_ = other.spec_;
    layout_ = other.layout_;
    params_ = other.params_;
    target_ = other.target_;
    moment1_ = other.moment1_;
    moment2_ = other.moment2_;
    steps_ = other.steps_;
    reads_.store(other.reads_.load());
    return *this;
}

void MlpNet::build_layout() {
    layout_.clear();
    Eigen::Index offset = 0;
    for (std::size_t k = 0; k + 1 < spec_.layer_sizes.size(); ++k) {
        LayerSlot slot;
        slot.in = spec_.layer_sizes[k];
        slot.out = spec_.layer_sizes[k + 1];
        slot.weight_offset = offset;
        offset += static_cast<Eigen::Index>(slot.in) * slot.out;
        slot.bias_offset = offset;
        offset += slot.out;
        layout_.push_back(slot);
    }
    params_ = Vector::Zero(offset);
}

MlpNet MlpNet::init(const MlpSpec& spec, std::uint64_t seed) {
    spec.validate();
    MlpNet net;
    net.spec_ = spec;
    net.build_layout();
    std::mt19937_64 rng(seed);
    for (const auto& slot : net.layout_) {
        const double bound = std::sqrt(6.0 / (slot.in + slot.out));
        std::uniform_real_distribution<double> weight(-bound, bound);
        for (Eigen::Index k = 0; k < static_cast<Eigen::Index>(slot.in) * slot.out; ++k)
            net.params_[slot.weight_offset + k] = weight(rng);
    }
    net.target_ = net.params_;
    net.moment1_ = Vector::Zero(net.params_.size());
    net.moment2_ = Vector::Zero(net.params_.size());
    return net;
}

void MlpNet::restore(Vector params, Vector target, Vector moment1, Vector moment2, std::int64_t steps) {
    if (layout_.empty()) build_layout();
    const auto n = params_.size();
    if (params.size() != n || target.size() != n || moment1.size() != n || moment2.size() != n)
        throw std::invalid_argument("mlp restore: parameter block length mismatch");
    if (steps < 0) throw std::invalid_argument("mlp restore: negative step counter");
    params_ = std::move(params);
    target_ = std::move(target);
    moment1_ = std::move(moment1);
    moment2_ = std::move(moment2);
    steps_ = steps;
}

void squash_heads(const MlpSpec& spec, Matrix& values) {
    if (values.rows() != spec.output_width()) throw std::invalid_argument("squash_heads: row count mismatch");
    Eigen::Index row = 0;
    for (const auto& head : spec.heads) {
        auto block = values.middleRows(row, head.width);
        switch (head.activation) {
            case HeadActivation::linear: break;
            case HeadActivation::simplex:
                for (Eigen::Index c = 0; c < block.cols(); ++c) {
                    auto col = block.col(c);
                    col.array() = (col.array() - col.maxCoeff()).exp();
                    col /= col.sum();
                }
                break;
            case HeadActivation::unit_interval:
                block = (spec.interval_max / (1.0 + (-block.array()).exp())).matrix();
                break;
        }
        row += head.width;
    }
}

Matrix MlpNet::run(const Vector& params, const Matrix& input, const Matrix* head_noise, ForwardTrace* trace) const {
    if (input.rows() != spec_.input_width())
        throw std::invalid_argument("mlp forward: input width " + std::to_string(input.rows()) + " != " +
                                    std::to_string(spec_.input_width()));
    if (head_noise && (head_noise->rows() != spec_.output_width() || head_noise->cols() != input.cols()))
        throw std::invalid_argument("mlp forward: noise shape mismatch");
    reads_.fetch_add(1, std::memory_order_relaxed);
    if (trace) {
        trace->activations.clear();
        trace->pre.clear();
        trace->activations.push_back(input);
    }
    Matrix current = input;
    for (std::size_t k = 0; k < layout_.size(); ++k) {
        const auto& slot = layout_[k];
        Eigen::Map<const Matrix> w(params.data() + slot.weight_offset, slot.out, slot.in);
        Eigen::Map<const Vector> b(params.data() + slot.bias_offset, slot.out);
        Matrix z = w * current;
        z.colwise() += b;
        const bool last = k + 1 == layout_.size();
        if (last && head_noise) z += *head_noise;
        if (trace) trace->pre.push_back(z);
        if (last) {
            squash_heads(spec_, z);
        } else if (spec_.hidden_activation == Activation::relu) {
            z = z.cwiseMax(0.0);
        } else {
            z = z.array().tanh().matrix();
        }
        current = std::move(z);
        if (trace && !last) trace->activations.push_back(current);
    }
    if (trace) trace->output = current;
    return current;
}

Matrix MlpNet::forward(const Matrix& input, ParamSet which, const Matrix* head_noise) const {
    return run(which == ParamSet::online ? params_ : target_, input, head_noise, nullptr);
}

std::vector<double> MlpNet::forward(std::span<const double> input, ParamSet which) const {
    Matrix x = Eigen::Map<const Matrix>(input.data(), static_cast<Eigen::Index>(input.size()), 1);
    const Matrix y = forward(x, which);
    return {y.data(), y.data() + y.size()};
}

ForwardTrace MlpNet::trace(const Matrix& input, const Matrix* head_noise) const {
    ForwardTrace t;
    run(params_, input, head_noise, &t);
    return t;
}

Gradients MlpNet::backward(const ForwardTrace& trace, const Matrix& upstream) const {
    if (upstream.rows() != spec_.output_width() || upstream.cols() != trace.output.cols())
        throw std::invalid_argument("mlp gradient: upstream shape mismatch");
    Gradients g;
    g.params = Vector::Zero(params_.size());

    // Back through the heads to the final pre-activation.
    Matrix delta = upstream;
    Eigen::Index row = 0;
    for (const auto& head : spec_.heads) {
        auto d = delta.middleRows(row, head.width);
        const auto y = trace.output.middleRows(row, head.width);
        switch (head.activation) {
            case HeadActivation::linear: break;
            case HeadActivation::simplex: {
                const Eigen::RowVectorXd dot = (d.array() * y.array()).colwise().sum();
                d = (y.array() * (d.array().rowwise() - dot.array())).matrix();
                break;
            }
            case HeadActivation::unit_interval: {
                const auto s = y.array() / spec_.interval_max;
                d = (d.array() * spec_.interval_max * s * (1.0 - s)).matrix();
                break;
            }
        }
        row += head.width;
    }

    for (std::size_t k = layout_.size(); k-- > 0;) {
        const auto& slot = layout_[k];
        if (k + 1 < layout_.size()) {
            const Matrix& z = trace.pre[k];
            if (spec_.hidden_activation == Activation::relu) {
                delta = (z.array() > 0.0).select(delta, 0.0);
            } else {
                const Matrix& a = trace.activations[k + 1];
                delta = (delta.array() * (1.0 - a.array().square())).matrix();
            }
        }
        const Matrix& a_in = trace.activations[k];
        Eigen::Map<Matrix> gw(g.params.data() + slot.weight_offset, slot.out, slot.in);
        Eigen::Map<Vector> gb(g.params.data() + slot.bias_offset, slot.out);
        gw.noalias() = delta * a_in.transpose();
        gb = delta.rowwise().sum();
        Eigen::Map<const Matrix> w(params_.data() + slot.weight_offset, slot.out, slot.in);
        delta = w.transpose() * delta;
    }
    g.input = std::move(delta);
    return g;
}

Gradients MlpNet::gradient(const Matrix& input, const Matrix& upstream) const {
    return backward(trace(input), upstream);
}

void MlpNet::adam_step(const Vector& grad, const AdamConfig& cfg, Direction direction) {
    if (grad.size() != params_.size()) throw std::invalid_argument("adam: gradient length mismatch");
    if (!grad.allFinite()) throw std::domain_error("non-finite gradient");
    ++steps_;
    moment1_ = cfg.beta1 * moment1_ + (1.0 - cfg.beta1) * grad;
    moment2_ = cfg.beta2 * moment2_ + (1.0 - cfg.beta2) * grad.cwiseProduct(grad);
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(steps_));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(steps_));
    const double sign = direction == Direction::ascend ? 1.0 : -1.0;
    params_.array() +=
        sign * cfg.learning_rate * (moment1_.array() / c1) / ((moment2_.array() / c2).sqrt() + cfg.epsilon_hat);
}

void MlpNet::soft_update(double epsilon) {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw std::invalid_argument("soft update: epsilon must lie in [0, 1]");
    if (epsilon == 1.0) {
        target_ = params_;
        return;
    }
    target_ = (1.0 - epsilon) * target_ + epsilon * params_;
}

double clip_global_norm(Vector& grad, double max_norm) {
    const double norm = grad.norm();
    if (max_norm > 0.0 && norm > max_norm) grad *= max_norm / norm;
    return norm;
}

}  // namespace multirat::nn
