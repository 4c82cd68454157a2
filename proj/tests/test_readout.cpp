#include <catch_amalgamated.hpp>
#include <cmath>
#include <sstream>

#include "bdesn/mlp.hpp"
#include "bdesn/readout.hpp"
#include "oracles.hpp"

using namespace bdesn;

namespace {

struct Blobs {
    Matrix x;
    std::vector<std::string> labels;
    std::vector<std::size_t> label_idx;
};

// Gaussian blobs around well-separated centers, one class per center.
Blobs make_blobs(const std::vector<std::pair<double, double>>& centers,
                 std::size_t per_class, double sigma, std::uint64_t seed) {
    Blobs b;
    b.x = Matrix(centers.size() * per_class, 2);
    SeededRng rng(seed, 31);
    std::size_t row = 0;
    for (std::size_t c = 0; c < centers.size(); ++c)
        for (std::size_t i = 0; i < per_class; ++i, ++row) {
            b.x(row, 0) = centers[c].first + sigma * rng.gaussian();
            b.x(row, 1) = centers[c].second + sigma * rng.gaussian();
            b.labels.push_back(std::to_string(c));
            b.label_idx.push_back(c);
        }
    return b;
}

// flat parameter view: weights then biases, layer by layer
double& param_at(MlpModel& m, std::size_t flat) {
    for (std::size_t l = 0; l < m.n_layers(); ++l) {
        if (flat < m.weights[l].size()) return m.weights[l].data()[flat];
        flat -= m.weights[l].size();
        if (flat < m.biases[l].size()) return m.biases[l][flat];
        flat -= m.biases[l].size();
    }
    throw std::out_of_range("param index");
}

std::size_t param_count(const MlpModel& m) {
    std::size_t n = 0;
    for (std::size_t l = 0; l < m.n_layers(); ++l)
        n += m.weights[l].size() + m.biases[l].size();
    return n;
}

double grad_at(const MlpGradients& g, std::size_t flat) {
    for (std::size_t l = 0; l < g.d_weights.size(); ++l) {
        if (flat < g.d_weights[l].size()) return g.d_weights[l].data()[flat];
        flat -= g.d_weights[l].size();
        if (flat < g.d_biases[l].size()) return g.d_biases[l][flat];
        flat -= g.d_biases[l].size();
    }
    throw std::out_of_range("grad index");
}

double eval_objective(const MlpModel& m, const Matrix& x,
                      const std::vector<std::size_t>& y) {
    return loss(mlp_forward(m, x, MlpMode::Eval).logits, y, m);
}

}  // namespace

// ---------------------------------------------------------------------------
// ridge head
// ---------------------------------------------------------------------------

TEST_CASE("one-hot embeddings are fit exactly") {
    Matrix h(6, 3);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < 6; ++i) {
        h(i, i % 3) = 1.0;
        labels.push_back("c" + std::to_string(i % 3));
    }
    // the class indicators sum to the bias feature, so lambda = 0 is singular
    REQUIRE_THROWS_AS(ridge_fit(h, labels, 0.0), SingularityError);
    const RidgeReadout r = ridge_fit(h, labels, 1e-8);
    const auto predicted = predict_linear(r, h);
    REQUIRE(predicted == labels);
}

TEST_CASE("huge lambda shrinks the weights") {
    SeededRng rng(3);
    const Matrix h = random_dense(rng, 40, 6, 1.0);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < 40; ++i) labels.push_back(i % 2 ? "a" : "b");
    const RidgeReadout small_lambda = ridge_fit(h, labels, 1e-3);
    const RidgeReadout big_lambda = ridge_fit(h, labels, 1e6);
    REQUIRE(frobenius_norm(big_lambda.weights) <
            1e-3 * frobenius_norm(small_lambda.weights));
}

TEST_CASE("ridge head predictions match the dense-inverse oracle") {
    const Blobs b = make_blobs({{0, 0}, {4, 0}, {0, 4}}, 20, 0.5, 11);
    const double lambda = 0.1;
    const RidgeReadout r = ridge_fit(b.x, b.labels, lambda);

    Matrix augmented(b.x.rows(), 3);
    for (std::size_t i = 0; i < b.x.rows(); ++i) {
        augmented(i, 0) = b.x(i, 0);
        augmented(i, 1) = b.x(i, 1);
        augmented(i, 2) = 1.0;
    }
    Matrix one_hot(b.x.rows(), 3);
    for (std::size_t i = 0; i < b.x.rows(); ++i) one_hot(i, b.label_idx[i]) = 1.0;
    const Matrix w_ref = oracle::ridge_by_dense_inverse(augmented, one_hot, lambda);
    const Matrix scores = matmul(augmented, w_ref);

    const auto predicted = predict_linear(r, b.x);
    for (std::size_t i = 0; i < b.x.rows(); ++i) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < 3; ++c)
            if (scores(i, c) > scores(i, best)) best = c;
        REQUIRE(predicted[i] == std::to_string(best));
    }
}

TEST_CASE("argmax decode breaks ties toward the lowest class index") {
    RidgeReadout r;
    r.classes = {"first", "second"};
    r.weights = Matrix(2, 2, {1.0, 1.0, 0.0, 0.0});  // scores equal for any input
    const auto out = predict_linear(r, Matrix(1, 1, {0.7}));
    REQUIRE(out[0] == "first");
}

TEST_CASE("batch decode equals per-row decode") {
    SeededRng rng(7);
    const Matrix h = random_dense(rng, 10, 4, 1.0);
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < 10; ++i) labels.push_back(std::to_string(i % 3));
    const RidgeReadout r = ridge_fit(h, labels, 0.5);
    const auto batch = predict_linear(r, h);
    for (std::size_t i = 0; i < 10; ++i) {
        Matrix row(1, 4);
        for (std::size_t j = 0; j < 4; ++j) row(0, j) = h(i, j);
        REQUIRE(predict_linear(r, row)[0] == batch[i]);
    }
}

TEST_CASE("predict_linear rejects mismatched width") {
    SeededRng rng(9);
    const Matrix h = random_dense(rng, 8, 4, 1.0);
    std::vector<std::string> labels(8, "a");
    labels[0] = "b";
    const RidgeReadout r = ridge_fit(h, labels, 0.1);
    REQUIRE_THROWS_AS(predict_linear(r, Matrix(2, 3)), ShapeError);
}

// ---------------------------------------------------------------------------
// MLP forward / loss
// ---------------------------------------------------------------------------

TEST_CASE("all-zero network produces uniform class probabilities") {
    MlpModel m = mlp_init({4, 8, 5}, 0.0, 0.0, 1);
    for (auto& w : m.weights)
        for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = 0.0;
    SeededRng rng(2);
    const Matrix x = random_dense(rng, 3, 4, 1.0);
    const Matrix p = softmax(mlp_forward(m, x, MlpMode::Eval).logits);
    for (std::size_t i = 0; i < p.size(); ++i)
        REQUIRE(p.data()[i] == Catch::Approx(0.2).margin(1e-12));
}

TEST_CASE("zero dropout makes train mode equal eval mode exactly") {
    MlpModel m = mlp_init({3, 10, 2}, 0.0, 0.0, 5);
    SeededRng rng_data(6), rng_drop(7);
    const Matrix x = random_dense(rng_data, 4, 3, 1.0);
    const MlpForward train_pass = mlp_forward(m, x, MlpMode::Train, &rng_drop);
    const MlpForward eval_pass = mlp_forward(m, x, MlpMode::Eval);
    REQUIRE(train_pass.logits == eval_pass.logits);
}

TEST_CASE("averaged train-mode activations approximate the eval activation") {
    // Monte-Carlo check of the inverted-dropout expectation at the first
    // hidden layer.
    MlpModel m = mlp_init({3, 10, 2}, 0.4, 0.0, 8);
    SeededRng rng_data(9);
    const Matrix x = random_dense(rng_data, 1, 3, 1.0);
    const Matrix reference = mlp_forward(m, x, MlpMode::Eval).activations[0];

    SeededRng rng_drop(10);
    std::vector<double> mean(reference.size(), 0.0);
    const int passes = 10000;
    for (int p = 0; p < passes; ++p) {
        const MlpForward fwd = mlp_forward(m, x, MlpMode::Train, &rng_drop);
        for (std::size_t i = 0; i < mean.size(); ++i)
            mean[i] += fwd.activations[0].data()[i];
    }
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < mean.size(); ++i) {
        mean[i] /= passes;
        num += (mean[i] - reference.data()[i]) * (mean[i] - reference.data()[i]);
        den += reference.data()[i] * reference.data()[i];
    }
    REQUIRE(std::sqrt(num) < 0.02 * std::sqrt(den));
}

TEST_CASE("train-mode dropout requires an rng") {
    MlpModel m = mlp_init({3, 10, 2}, 0.4, 0.0, 8);
    REQUIRE_THROWS_AS(mlp_forward(m, Matrix(1, 3), MlpMode::Train), ParameterError);
}

TEST_CASE("uniform logits over 9 classes cost ln 9") {
    MlpModel m = mlp_init({2, 9}, 0.0, 0.0, 1);
    const Matrix logits(4, 9, std::vector<double>(36, 0.25));
    REQUIRE(loss(logits, {0, 3, 8, 5}, m) == Catch::Approx(std::log(9.0)).margin(1e-12));
}

TEST_CASE("zero l2 coefficient leaves the loss as plain cross-entropy") {
    MlpModel m = mlp_init({2, 4, 3}, 0.0, 0.0, 2);
    SeededRng rng(3);
    const Matrix logits = random_dense(rng, 5, 3, 2.0);
    const std::vector<std::size_t> y{0, 1, 2, 1, 0};
    REQUIRE(loss(logits, y, m) == cross_entropy(logits, y));
}

TEST_CASE("cross-entropy matches the naive formula oracle") {
    SeededRng rng(13);
    const Matrix logits = random_dense(rng, 7, 4, 3.0);
    const std::vector<std::size_t> y{0, 1, 2, 3, 2, 1, 0};
    REQUIRE(cross_entropy(logits, y) ==
            Catch::Approx(oracle::naive_cross_entropy(logits, y)).margin(1e-10));
}

TEST_CASE("softmax rows sum to one") {
    SeededRng rng(17);
    const Matrix p = softmax(random_dense(rng, 20, 6, 30.0));
    for (std::size_t i = 0; i < p.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < p.cols(); ++j) {
            REQUIRE(p(i, j) >= 0.0);
            REQUIRE(p(i, j) <= 1.0);
            sum += p(i, j);
        }
        REQUIRE(sum == Catch::Approx(1.0).margin(1e-12));
    }
}

// ---------------------------------------------------------------------------
// gradients
// ---------------------------------------------------------------------------

TEST_CASE("zero input and zero weights give zero hidden weight gradients") {
    MlpModel m = mlp_init({3, 6, 2}, 0.0, 0.0, 4);
    for (auto& w : m.weights)
        for (std::size_t i = 0; i < w.size(); ++i) w.data()[i] = 0.0;
    const Matrix x(5, 3);
    const MlpGradients g = gradients(m, x, {0, 1, 0, 1, 0}, MlpMode::Eval);
    for (std::size_t i = 0; i < g.d_weights[0].size(); ++i)
        REQUIRE(g.d_weights[0].data()[i] == 0.0);
}

TEST_CASE("backprop matches central finite differences") {
    const std::vector<std::vector<std::size_t>> architectures{
        {4, 8, 3}, {5, 16, 8, 4}, {3, 32, 2}, {6, 12, 10, 5}, {2, 64, 3}};
    std::uint64_t seed = 100;
    for (const auto& sizes : architectures) {
        ++seed;
        MlpModel m = mlp_init(sizes, 0.0, 1e-3, seed);
        SeededRng rng(seed, 55);
        const Matrix x = random_dense(rng, 7, sizes.front(), 1.0);
        std::vector<std::size_t> y(7);
        for (auto& v : y) v = rng.below(sizes.back());

        const MlpGradients g = gradients(m, x, y, MlpMode::Eval);
        const double h = 1e-5;
        for (std::size_t k = 0; k < param_count(m); ++k) {
            const double saved = param_at(m, k);
            param_at(m, k) = saved + h;
            const double up = eval_objective(m, x, y);
            param_at(m, k) = saved - h;
            const double down = eval_objective(m, x, y);
            param_at(m, k) = saved;
            const double fd = (up - down) / (2.0 * h);
            const double bp = grad_at(g, k);
            const double rel =
                std::abs(bp - fd) / std::max({std::abs(bp), std::abs(fd), 1e-6});
            REQUIRE(rel < 1e-4);
        }
    }
}

TEST_CASE("doubling l2 doubles the weight-decay gradient component") {
    SeededRng rng(19);
    const Matrix x = random_dense(rng, 6, 4, 1.0);
    const std::vector<std::size_t> y{0, 1, 2, 0, 1, 2};
    MlpModel base = mlp_init({4, 10, 3}, 0.0, 1e-3, 21);
    MlpModel doubled = base;
    doubled.l2_coeff = 2e-3;
    MlpModel plain = base;
    plain.l2_coeff = 0.0;

    const MlpGradients g1 = gradients(base, x, y, MlpMode::Eval);
    const MlpGradients g2 = gradients(doubled, x, y, MlpMode::Eval);
    const MlpGradients g0 = gradients(plain, x, y, MlpMode::Eval);
    for (std::size_t l = 0; l < base.n_layers(); ++l)
        for (std::size_t i = 0; i < base.weights[l].size(); ++i) {
            const double decay1 = g1.d_weights[l].data()[i] - g0.d_weights[l].data()[i];
            const double decay2 = g2.d_weights[l].data()[i] - g0.d_weights[l].data()[i];
            REQUIRE(decay2 == Catch::Approx(2.0 * decay1).margin(1e-12));
        }
}

TEST_CASE("a small full-batch step does not increase the loss") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        MlpModel m = mlp_init({4, 16, 3}, 0.0, 0.0, seed);
        SeededRng rng(seed, 66);
        const Matrix x = random_dense(rng, 8, 4, 1.0);
        std::vector<std::size_t> y(8);
        for (auto& v : y) v = rng.below(3);
        const double before = eval_objective(m, x, y);
        const MlpGradients g = gradients(m, x, y, MlpMode::Eval);
        for (std::size_t l = 0; l < m.n_layers(); ++l) {
            for (std::size_t i = 0; i < m.weights[l].size(); ++i)
                m.weights[l].data()[i] -= 1e-4 * g.d_weights[l].data()[i];
            for (std::size_t i = 0; i < m.biases[l].size(); ++i)
                m.biases[l][i] -= 1e-4 * g.d_biases[l][i];
        }
        REQUIRE(eval_objective(m, x, y) <= before + 1e-12);
    }
}

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------

TEST_CASE("zero learning rate leaves parameters untouched") {
    const Blobs b = make_blobs({{-2, 0}, {2, 0}}, 10, 0.5, 23);
    MlpModel m = mlp_init({2, 8, 2}, 0.1, 1e-4, 31);
    const MlpModel original = m;
    MlpTrainConfig cfg;
    cfg.epochs = 5;
    cfg.batch_size = 4;
    cfg.learning_rate = 0.0;
    cfg.seed = 3;
    auto [trained, log] = train_mlp(std::move(m), b.x, b.label_idx, cfg);
    for (std::size_t l = 0; l < trained.n_layers(); ++l) {
        REQUIRE(trained.weights[l] == original.weights[l]);
        REQUIRE(trained.biases[l] == original.biases[l]);
    }
    REQUIRE(log.entries.size() == 5);
}

TEST_CASE("separable blobs are learned within 200 epochs") {
    const Blobs b = make_blobs({{-2, 0}, {2, 0}}, 20, 0.5, 29);
    MlpModel m = mlp_init({2, 16, 2}, 0.0, 0.0, 37);
    MlpTrainConfig cfg;
    cfg.epochs = 200;
    cfg.batch_size = 10;
    cfg.learning_rate = 1e-2;
    cfg.seed = 41;
    auto [trained, log] = train_mlp(std::move(m), b.x, b.label_idx, cfg);
    const Matrix logits = mlp_forward(trained, b.x, MlpMode::Eval).logits;
    std::size_t correct = 0;
    for (std::size_t i = 0; i < logits.rows(); ++i) {
        const std::size_t pred = logits(i, 1) > logits(i, 0) ? 1 : 0;
        if (pred == b.label_idx[i]) ++correct;
    }
    REQUIRE(correct == b.x.rows());
    // loss curve recorded every epoch, strictly increasing epoch index
    REQUIRE(log.entries.size() == 200);
    for (std::size_t i = 0; i < log.entries.size(); ++i)
        REQUIRE(log.entries[i].epoch == i + 1);
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
    const Blobs b = make_blobs({{-2, 0}, {2, 0}, {0, 3}}, 8, 0.6, 43);
    MlpTrainConfig cfg;
    cfg.epochs = 30;
    cfg.batch_size = 6;
    cfg.learning_rate = 5e-3;
    cfg.seed = 47;
    auto [m1, log1] = train_mlp(mlp_init({2, 12, 3}, 0.2, 1e-4, 53), b.x, b.label_idx, cfg);
    auto [m2, log2] = train_mlp(mlp_init({2, 12, 3}, 0.2, 1e-4, 53), b.x, b.label_idx, cfg);
    for (std::size_t l = 0; l < m1.n_layers(); ++l) {
        REQUIRE(m1.weights[l] == m2.weights[l]);
        REQUIRE(m1.biases[l] == m2.biases[l]);
    }
    REQUIRE(log1.entries.size() == log2.entries.size());
    for (std::size_t i = 0; i < log1.entries.size(); ++i)
        REQUIRE(log1.entries[i].train_loss == log2.entries[i].train_loss);
}

TEST_CASE("an absurd learning rate raises a divergence error") {
    const Blobs b = make_blobs({{-2, 0}, {2, 0}}, 8, 0.5, 59);
    MlpTrainConfig cfg;
    cfg.epochs = 10;
    cfg.batch_size = 8;
    cfg.learning_rate = 1e200;
    cfg.seed = 61;
    try {
        train_mlp(mlp_init({2, 8, 2}, 0.0, 1e-4, 67), b.x, b.label_idx, cfg);
        FAIL("expected DivergenceError");
    } catch (const DivergenceError& e) {
        REQUIRE(e.epoch >= 1);
        REQUIRE(e.learning_rate == 1e200);
    }
}

TEST_CASE("validation losses are recorded and early stopping can cut training") {
    const Blobs b = make_blobs({{-2, 0}, {2, 0}}, 15, 0.5, 71);
    Blobs v = make_blobs({{-2, 0}, {2, 0}}, 5, 0.5, 73);
    // flipped validation labels: fitting the training set degrades val loss,
    // so patience must trigger well before the epoch budget
    for (auto& label : v.label_idx) label = 1 - label;
    MlpTrainConfig cfg;
    cfg.epochs = 400;
    cfg.batch_size = 10;
    cfg.learning_rate = 1e-2;
    cfg.seed = 79;
    cfg.val_x = &v.x;
    cfg.val_labels = &v.label_idx;
    cfg.patience = 10;
    auto [trained, log] = train_mlp(mlp_init({2, 16, 2}, 0.0, 0.0, 83), b.x,
                                    b.label_idx, cfg);
    REQUIRE(!log.entries.empty());
    REQUIRE(log.entries.front().val_loss.has_value());
    REQUIRE(log.entries.size() < 400);  // stopped early on this easy task

    std::ostringstream csv;
    write_train_log(csv, log);
    REQUIRE(csv.str().rfind("epoch,train_loss,val_loss\n", 0) == 0);
}
