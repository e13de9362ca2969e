#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "multirat/marl.hpp"
#include "multirat/nn.hpp"
#include "support.hpp"

using namespace multirat;
using namespace multirat::nn;

namespace {

MlpSpec toy_spec(Activation act = Activation::tanh) {
    MlpSpec s;
    s.layer_sizes = {8, 16, 8};
    s.hidden_activation = act;
    s.heads = {{8, HeadActivation::linear}};
    return s;
}

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> n(0.0, scale);
    Matrix m(rows, cols);
    for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = n(rng);
    return m;
}

double weighted_output(const MlpNet& net, const Matrix& x, const Matrix& up) {
    return (net.forward(x).array() * up.array()).sum();
}

// Central differences over every parameter and input coordinate.
void check_gradient(MlpNet net, std::uint64_t seed, double rel, double abs_floor) {
    std::mt19937_64 rng(seed);
    const Matrix x = random_matrix(net.spec().input_width(), 3, rng);
    const Matrix up = random_matrix(net.spec().output_width(), 3, rng);
    const auto g = net.gradient(x, up);
    const double h = 1e-5;
    int bad = 0;
    for (Eigen::Index k = 0; k < net.params().size(); ++k) {
        const double keep = net.params()[k];
        net.mutable_params()[k] = keep + h;
        const double fp = weighted_output(net, x, up);
        net.mutable_params()[k] = keep - h;
        const double fm = weighted_output(net, x, up);
        net.mutable_params()[k] = keep;
        const double fd = (fp - fm) / (2 * h);
        if (!testsupport::rel_close(g.params[k], fd, rel, abs_floor)) ++bad;
    }
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        Matrix xp = x, xm = x;
        xp.data()[k] += h;
        xm.data()[k] -= h;
        const double fd = (weighted_output(net, xp, up) - weighted_output(net, xm, up)) / (2 * h);
        if (!testsupport::rel_close(g.input.data()[k], fd, rel, abs_floor)) ++bad;
    }
    CHECK(bad == 0);
}

}  // namespace

TEST_CASE("spec text round trip and validation") {
    MlpSpec s;
    s.layer_sizes = {9, 64, 64, 3};
    s.heads = {{2, HeadActivation::simplex}, {1, HeadActivation::unit_interval}};
    CHECK(MlpSpec::parse(s.describe()) == s);
    s.heads = {{2, HeadActivation::simplex}};
    CHECK_THROWS(s.validate());
    s.layer_sizes = {3};
    CHECK_THROWS(s.validate());
}

TEST_CASE("forward basics") {
    auto net = MlpNet::init(toy_spec(), 1);
    net.mutable_params().setZero();
    const auto y = net.forward(std::vector<double>(8, 0.7));
    for (double v : y) CHECK(v == 0.0);

    MlpSpec s;
    s.layer_sizes = {4, 5, 3};
    s.heads = {{3, HeadActivation::simplex}};
    auto simplex = MlpNet::init(s, 2);
    simplex.mutable_params().setZero();
    const auto p = simplex.forward(std::vector<double>(4, 1.0));
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    CHECK_THROWS_AS(net.forward(std::vector<double>(7, 0.0)), std::invalid_argument);
}

TEST_CASE("simplex heads sum to one and interval heads stay in range") {
    MlpSpec s;
    s.layer_sizes = {9, 32, 4};
    s.heads = {{3, HeadActivation::simplex}, {1, HeadActivation::unit_interval}};
    auto net = MlpNet::init(s, 3);
    std::mt19937_64 rng(4);
    const Matrix x = random_matrix(9, 1000, rng, 5.0);
    const Matrix y = net.forward(x);
    for (Eigen::Index k = 0; k < y.cols(); ++k) {
        CHECK(std::abs(y.col(k).head(3).sum() - 1.0) < 1e-9);
        CHECK((y.col(k).head(3).array() >= 0.0).all());
        CHECK((y(3, k) >= 0.0 && y(3, k) <= 0.99));
    }
}

TEST_CASE("gradient matches finite differences on a small net") {
    check_gradient(MlpNet::init(toy_spec(), 5), 6, 1e-5, 1e-8);
    check_gradient(MlpNet::init(toy_spec(Activation::relu), 7), 8, 1e-5, 1e-8);
}

TEST_CASE("gradient matches finite differences on the shipped shapes") {
    const auto sc = testsupport::desk_scenario();
    const marl::NetworkConfig net;
    const auto pens = marl::TeamLayout::uniform(sc.num_pens(), sc.pen_obs_width(), sc.pen_action_width());
    const auto rans = marl::TeamLayout::uniform(sc.num_rans(), sc.ran_obs_width(), sc.ran_action_width());
    check_gradient(MlpNet::init(marl::pen_actor_spec(sc, net), 9), 10, 1e-5, 1e-8);
    check_gradient(MlpNet::init(marl::ran_actor_spec(sc, net), 11), 12, 1e-5, 1e-8);
    check_gradient(MlpNet::init(marl::critic_spec(pens, net), 13), 14, 1e-5, 1e-8);
    check_gradient(MlpNet::init(marl::critic_spec(rans, net), 15), 16, 1e-5, 1e-8);
}

TEST_CASE("gradient edge cases") {
    const auto net = MlpNet::init(toy_spec(), 17);
    std::mt19937_64 rng(18);
    const Matrix x = random_matrix(8, 4, rng);
    const auto zero = net.gradient(x, Matrix::Zero(8, 4));
    CHECK(zero.params.isZero(0.0));
    const Matrix up = random_matrix(8, 4, rng);
    CHECK(net.gradient(x, up).params == net.gradient(x, up).params);
    CHECK_THROWS_AS(net.gradient(x, Matrix::Zero(7, 4)), std::invalid_argument);
}

TEST_CASE("adam") {
    MlpSpec s;
    s.layer_sizes = {1, 1};
    s.heads = {{1, HeadActivation::linear}};
    auto net = MlpNet::init(s, 0);
    REQUIRE(net.parameter_count() == 2);
    const Vector before = net.params();
    const AdamConfig cfg{1e-3};
    net.adam_step(Vector::Ones(2), cfg, Direction::ascend);
    CHECK((net.params() - before).array().abs().maxCoeff() == doctest::Approx(1e-3).epsilon(1e-4));
    CHECK(net.params()[0] > before[0]);
    auto down = MlpNet::init(s, 0);
    down.adam_step(Vector::Ones(2), cfg, Direction::descend);
    CHECK(down.params()[0] < before[0]);

    auto fresh = MlpNet::init(toy_spec(), 19);
    const Vector p0 = fresh.params();
    fresh.adam_step(Vector::Zero(p0.size()), cfg, Direction::descend);
    CHECK(fresh.params() == p0);
    CHECK(fresh.step_count() == 1);

    Vector bad = Vector::Zero(p0.size());
    bad[3] = std::nan("");
    CHECK_THROWS_WITH_AS(fresh.adam_step(bad, cfg, Direction::descend), "non-finite gradient", std::domain_error);

    auto a = MlpNet::init(toy_spec(), 20), b = MlpNet::init(toy_spec(), 20);
    std::mt19937_64 rng(21);
    for (int k = 0; k < 10; ++k) {
        const Vector g = random_matrix(static_cast<int>(a.parameter_count()), 1, rng).col(0);
        a.adam_step(g, cfg, Direction::descend);
        b.adam_step(g, cfg, Direction::descend);
    }
    CHECK(a.params() == b.params());
}

TEST_CASE("soft update") {
    auto net = MlpNet::init(toy_spec(), 22);
    std::mt19937_64 rng(23);
    net.mutable_params() += random_matrix(static_cast<int>(net.parameter_count()), 1, rng).col(0);
    const Vector online = net.params();
    const Vector target0 = net.target_params();

    auto same = net;
    same.soft_update(0.0);
    CHECK(same.target_params() == target0);
    auto full = net;
    full.soft_update(1.0);
    CHECK(full.target_params() == online);

    for (int k = 0; k < 3; ++k) net.soft_update(0.01);
    const Vector expected = online + std::pow(0.99, 3) * (target0 - online);
    CHECK((net.target_params() - expected).lpNorm<Eigen::Infinity>() < 1e-14);
    CHECK_THROWS_AS(net.soft_update(1.5), std::invalid_argument);
    CHECK_THROWS_AS(net.soft_update(-0.1), std::invalid_argument);
}

TEST_CASE("init") {
    MlpSpec s;
    s.layer_sizes = {256, 256};
    s.heads = {{256, HeadActivation::linear}};
    const auto net = MlpNet::init(s, 24);
    CHECK(net.target_params() == net.params());
    CHECK(MlpNet::init(s, 24).params() == net.params());
    CHECK(MlpNet::init(s, 25).params() != net.params());
    const Vector& p = net.params();
    const Eigen::Index weights = 256 * 256;
    const double bound = std::sqrt(6.0 / 512.0);
    int out_of_bound = 0;
    double mean = 0.0;
    for (Eigen::Index k = 0; k < p.size(); ++k) {
        if (std::abs(p[k]) > bound) ++out_of_bound;
    }
    // Biases are zero, so the weight mean is the parameter sum over the weights.
    mean = p.sum() / static_cast<double>(weights);
    CHECK(out_of_bound == 0);
    CHECK(std::abs(mean) < 0.01);
    CHECK((p.array() == 0.0).count() >= 256);
}

TEST_CASE("global norm clipping") {
    Vector g(2);
    g << 3.0, 4.0;
    CHECK(clip_global_norm(g, 1.0) == 5.0);
    CHECK(g.norm() == doctest::Approx(1.0).epsilon(1e-15));
    Vector small(2);
    small << 0.1, 0.0;
    clip_global_norm(small, 1.0);
    CHECK(small[0] == 0.1);
}
