#include <doctest.h>

#include <cmath>
#include <random>

#include "flowagg/errors.hpp"
#include "flowagg/neural_net.hpp"
#include "oracles.hpp"

using namespace flowagg;

namespace {

MlpModel single_neuron(double w0, double w1, double b, Activation out) {
    MlpModel m = make_mlp({2, 1}, Activation::ReLU, out, 0);
    m.weights[0] << w0, w1;
    m.biases[0] << b;
    return m;
}

// Two separable Gaussian blobs in the plane.
void blobs(std::size_t n, std::uint64_t seed, Eigen::MatrixXd& x, std::vector<int>& y) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    x.resize(static_cast<Eigen::Index>(n), 2);
    y.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int c = static_cast<int>(i % 2);
        const double cx = c ? 2.0 : -2.0;
        x(i, 0) = cx + noise(gen);
        x(i, 1) = -cx + noise(gen);
        y[i] = c;
    }
}

}  // namespace

TEST_CASE("forward pass examples") {
    SUBCASE("zero weights, identity output") {
        MlpModel m = make_mlp({3, 4, 2}, Activation::Tanh, Activation::Identity, 1);
        for (auto& w : m.weights) w.setZero();
        for (auto& b : m.biases) b.setZero();
        const double x[] = {1.0, -2.0, 3.0};
        CHECK(forward(m, x).isZero());
    }
    SUBCASE("single ReLU neuron") {
        const double x[] = {1.0, 2.0};
        CHECK(forward(single_neuron(0.5, -0.25, 0.1, Activation::ReLU), x)[0] == doctest::Approx(0.1));
    }
    SUBCASE("sigmoid at zero") {
        const double x[] = {3.0, -6.0};
        CHECK(forward(single_neuron(2.0, 1.0, 0.0, Activation::Sigmoid), x)[0] == doctest::Approx(0.5));
    }
    SUBCASE("dimension mismatch") {
        const double x[] = {1.0};
        CHECK_THROWS_AS(forward(single_neuron(1, 1, 0, Activation::Identity), x), ValidationError);
    }
    SUBCASE("non-finite input") {
        const double x[] = {1.0, NAN};
        CHECK_THROWS_AS(forward(single_neuron(1, 1, 0, Activation::Identity), x), ValidationError);
    }
}

TEST_CASE("softmax outputs are a distribution") {
    std::mt19937_64 gen(31);
    const MlpModel m = make_mlp({6, 5, 4}, Activation::ReLU, Activation::Softmax, 9);
    std::uniform_real_distribution<double> u(-50, 50);
    for (int trial = 0; trial < 100; ++trial) {
        double x[6];
        for (auto& v : x) v = u(gen);
        const auto out = forward(m, x);
        CHECK(std::fabs(out.sum() - 1.0) <= 1e-9);
        for (Eigen::Index i = 0; i < out.size(); ++i) {
            CHECK(out[i] >= 0.0);
            CHECK(out[i] <= 1.0);
        }
    }
}

TEST_CASE("Glorot initialization bounds, zero biases, seeded") {
    const MlpModel m = make_mlp({10, 8, 5}, Activation::ReLU, Activation::Softmax, 4);
    CHECK(m.weights[0].rows() == 10);
    CHECK(m.weights[0].cols() == 8);
    CHECK(m.weights[1].rows() == 8);
    CHECK(m.weights[1].cols() == 5);
    CHECK(m.weights[0].cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 18.0));
    CHECK(m.weights[1].cwiseAbs().maxCoeff() <= std::sqrt(6.0 / 13.0));
    CHECK(m.biases[0].isZero());
    CHECK(m == make_mlp({10, 8, 5}, Activation::ReLU, Activation::Softmax, 4));
    CHECK_FALSE(m == make_mlp({10, 8, 5}, Activation::ReLU, Activation::Softmax, 5));
    CHECK_NOTHROW(m.validate());
    CHECK_THROWS_AS(make_mlp({3}, Activation::ReLU, Activation::Softmax, 0), ValidationError);
}

TEST_CASE("analytic gradients match central differences") {
    std::mt19937_64 gen(32);
    std::uniform_real_distribution<double> u(-1, 1);
    const Activation hidden[] = {Activation::ReLU, Activation::Tanh, Activation::Sigmoid};
    for (int net = 0; net < 12; ++net) {
        const bool classifier = net % 2 == 0;
        const std::vector<std::size_t> sizes =
            net < 6 ? std::vector<std::size_t>{5, 3, 2} : std::vector<std::size_t>{4, 6, 3, 3};
        const auto out = classifier ? Activation::Softmax : (net % 4 == 1 ? Activation::Identity : Activation::Sigmoid);
        const MlpModel m = make_mlp(sizes, hidden[net % 3], out, gen());
        Eigen::MatrixXd x(5, sizes.front()), y = Eigen::MatrixXd::Zero(5, sizes.back());
        for (Eigen::Index r = 0; r < 5; ++r) {
            for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = u(gen);
            if (classifier) y(r, r % y.cols()) = 1.0;
            else
                for (Eigen::Index c = 0; c < y.cols(); ++c) y(r, c) = u(gen);
        }
        const auto check = oracle::check_gradients(m, x, y, classifier ? Loss::CrossEntropy : Loss::MSE);
        CHECK(check.max_relative < 1e-4);
    }
}

TEST_CASE("the gradient check catches a 1% error") {
    const MlpModel m = make_mlp({5, 3, 2}, Activation::Tanh, Activation::Softmax, 11);
    Eigen::MatrixXd x(4, 5), y = Eigen::MatrixXd::Zero(4, 2);
    x.setRandom();
    for (Eigen::Index r = 0; r < 4; ++r) y(r, r % 2) = 1.0;
    Gradients g;
    loss_and_gradients(m, x, y, Loss::CrossEntropy, g);
    CHECK(oracle::compare_gradients(m, x, y, Loss::CrossEntropy, g).max_relative < 1e-4);
    g.weights[0] *= 1.01;
    CHECK(oracle::compare_gradients(m, x, y, Loss::CrossEntropy, g).max_relative > 5e-3);
}

TEST_CASE("a gradient step is w - lr * grad") {
    const MlpModel m0 = make_mlp({3, 4, 2}, Activation::Tanh, Activation::Softmax, 3);
    Eigen::MatrixXd x(4, 3);
    x << 0.1, 0.2, 0.3, -0.5, 0.4, 0.0, 0.9, -0.1, 0.2, 0.3, 0.3, -0.7;
    const std::vector<int> y = {0, 1, 1, 0};
    Gradients g;
    loss_and_gradients(m0, x, one_hot(y, 2), Loss::CrossEntropy, g);
    TrainingConfig cfg;
    cfg.learning_rate = 0.3;
    cfg.epochs = 1;
    const auto r = train_classifier(m0, x, y, cfg);
    for (std::size_t l = 0; l < m0.weights.size(); ++l) {
        CHECK((r.model.weights[l] - (m0.weights[l] - 0.3 * g.weights[l])).cwiseAbs().maxCoeff() < 1e-15);
        CHECK((r.model.biases[l] - (m0.biases[l] - 0.3 * g.biases[l])).cwiseAbs().maxCoeff() < 1e-15);
    }
}

TEST_CASE("zero learning rate leaves the model untouched") {
    Eigen::MatrixXd x;
    std::vector<int> y;
    blobs(40, 1, x, y);
    const MlpModel m0 = make_mlp({2, 3, 2}, Activation::ReLU, Activation::Softmax, 8);
    TrainingConfig cfg;
    cfg.learning_rate = 0.0;
    cfg.epochs = 5;
    const auto r = train_classifier(m0, x, y, cfg);
    CHECK(r.model == m0);
    CHECK(r.loss_history.size() == 5);
}

TEST_CASE("separable blobs are learned") {
    Eigen::MatrixXd x;
    std::vector<int> y;
    blobs(200, 2, x, y);
    TrainingConfig cfg;
    cfg.learning_rate = 0.1;
    cfg.epochs = 200;
    cfg.seed = 6;
    const auto r = train_classifier(make_mlp({2, 3, 2}, Activation::ReLU, Activation::Softmax, 6), x, y, cfg);
    const auto pred = predict_classes(r.model, x);
    std::size_t correct = 0;
    for (std::size_t i = 0; i < y.size(); ++i) correct += pred[i] == y[i];
    CHECK(static_cast<double>(correct) / y.size() >= 0.99);
    CHECK(r.loss_history.back() < r.loss_history.front());

    const double held_out[] = {2.1, -1.9};
    CHECK(predict_class(r.model, held_out) == 1);
    const double other[] = {-2.2, 2.05};
    CHECK(predict_class(r.model, other) == 0);

    SUBCASE("mini-batch training also fits") {
        TrainingConfig mb = cfg;
        mb.batch_size = 16;
        mb.epochs = 50;
        const auto r2 = train_classifier(make_mlp({2, 3, 2}, Activation::ReLU, Activation::Softmax, 6), x, y, mb);
        const auto p2 = predict_classes(r2.model, x);
        std::size_t ok = 0;
        for (std::size_t i = 0; i < y.size(); ++i) ok += p2[i] == y[i];
        CHECK(static_cast<double>(ok) / y.size() >= 0.99);
    }
}

TEST_CASE("training is deterministic in the seed") {
    Eigen::MatrixXd x;
    std::vector<int> y;
    blobs(60, 3, x, y);
    TrainingConfig cfg;
    cfg.epochs = 20;
    cfg.batch_size = 8;
    cfg.seed = 77;
    const MlpModel m0 = make_mlp({2, 4, 2}, Activation::Tanh, Activation::Softmax, 1);
    const auto a = train_classifier(m0, x, y, cfg);
    const auto b = train_classifier(m0, x, y, cfg);
    CHECK(a.loss_history == b.loss_history);
    CHECK(a.model == b.model);
}

TEST_CASE("divergence raises TrainingError with the epoch") {
    Eigen::MatrixXd x(2, 1);
    x << 1e3, -1e3;
    Eigen::MatrixXd y(2, 1);
    y << 1e3, -1e3;
    TrainingConfig cfg;
    cfg.loss = Loss::MSE;
    cfg.learning_rate = 1e3;
    cfg.epochs = 100;
    const MlpModel m = make_mlp({1, 1}, Activation::ReLU, Activation::Identity, 0);
    try {
        train(m, x, y, cfg);
        FAIL("expected TrainingError");
    } catch (const TrainingError& e) {
        CHECK(e.epoch() >= 0);
        CHECK(e.epoch() < 100);
    }
}

TEST_CASE("training config validation") {
    TrainingConfig cfg;
    cfg.learning_rate = -1;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
    cfg.learning_rate = 0.1;
    cfg.epochs = 0;
    CHECK_THROWS_AS(cfg.validate(), ValidationError);
}

TEST_CASE("argmax and ties") {
    const double a[] = {0.1, 0.7, 0.2};
    CHECK(argmax(a) == 1);
    const double b[] = {0.5, 0.5};
    CHECK(argmax(b) == 0);
}

TEST_CASE("reconstruction error") {
    SUBCASE("identity autoencoder reconstructs exactly") {
        MlpModel m = make_mlp({3, 3}, Activation::ReLU, Activation::Identity, 0);
        m.weights[0].setIdentity();
        m.biases[0].setZero();
        const double x[] = {0.3, -1.0, 7.0};
        CHECK(reconstruction_error(m, x) == 0.0);
    }
    SUBCASE("zero output gives the mean square") {
        MlpModel m = make_mlp({4, 4}, Activation::ReLU, Activation::Identity, 0);
        m.weights[0].setZero();
        const double x[] = {0.5, -0.5, 0.5, 0.5};
        CHECK(reconstruction_error(m, x) == doctest::Approx(0.25));
        Eigen::MatrixXd batch(2, 4);
        batch << 0.5, -0.5, 0.5, 0.5, 1, 1, 1, 1;
        const auto errs = reconstruction_errors(m, batch);
        CHECK(errs[0] == doctest::Approx(0.25));
        CHECK(errs[1] == doctest::Approx(1.0));
    }
    SUBCASE("shape mismatch") {
        const MlpModel m = make_mlp({3, 2}, Activation::ReLU, Activation::Identity, 0);
        const double x[] = {1, 2, 3};
        CHECK_THROWS_AS(reconstruction_error(m, x), ValidationError);
    }
}

TEST_CASE("min-max scaler") {
    Eigen::MatrixXd d(3, 3);
    d << 1, 5, 7, 3, 5, 8, 2, 5, 9;
    const auto s = MinMaxScaler::fit(d);
    const auto t = s.transform(d);
    CHECK(t(0, 0) == 0.0);
    CHECK(t(1, 0) == 1.0);
    CHECK(t(2, 0) == 0.5);
    CHECK(t.col(1).isZero());
    CHECK(s.constant_column(1));
    CHECK_FALSE(s.constant_column(0));
    Eigen::MatrixXd outside(1, 3);
    outside << 5, 6, 6;
    const auto o = s.transform(outside);
    CHECK(o(0, 0) == 2.0);
    CHECK(o(0, 2) == -0.5);
    CHECK(o(0, 1) == 0.0);
}

TEST_CASE("model and scaler JSON round trip") {
    const MlpModel m = make_mlp({4, 3, 2}, Activation::Sigmoid, Activation::Softmax, 12);
    const auto back = mlp_from_json(nlohmann::json::parse(to_json(m).dump()));
    CHECK(back == m);
    CHECK(to_json(m)["version"] == kModelFormatVersion);
    Eigen::MatrixXd d(2, 2);
    d << 0, 1, 2, 3;
    const auto s = MinMaxScaler::fit(d);
    const auto s2 = scaler_from_json(to_json(s));
    CHECK(s2.min == s.min);
    CHECK(s2.max == s.max);

    auto broken = to_json(m);
    broken["version"] = 99;
    CHECK_THROWS_AS(mlp_from_json(broken), ValidationError);
    auto bad_shape = to_json(m);
    bad_shape["layer_sizes"] = {4, 5, 2};
    CHECK_THROWS_AS(mlp_from_json(bad_shape), ValidationError);
}
