#include <catch_amalgamated.hpp>
#include <cmath>
#include <sstream>

#include "bdesn/reservoir.hpp"
#include "oracles.hpp"

using namespace bdesn;

namespace {

Matrix seeded_series(std::uint64_t seed, std::size_t length, std::size_t n_vars,
                     double scale = 1.0) {
    SeededRng rng(seed, 777);
    return random_dense(rng, length, n_vars, scale);
}

// Single-unit reservoir with hand-picked weights.
Reservoir scalar_reservoir(double w_rec, double w_in) {
    Reservoir res;
    res.n_units = 1;
    res.input_dim = 1;
    std::vector<SparseEntry> entries;
    if (w_rec != 0.0) entries.push_back({0, 0, w_rec});
    res.w_rec = SparseMatrix(1, entries, 1.0);
    res.w_in = Matrix(1, 1, {w_in});
    res.spectral_radius = std::abs(w_rec);
    res.input_scale = std::abs(w_in);
    res.density = 1.0;
    return res;
}

}  // namespace

TEST_CASE("1x1 reservoir at density 1 has the requested radius as its entry") {
    const Reservoir res = build_reservoir(1, 0.7, 0.5, 1.0, 1, 5);
    REQUIRE(res.w_rec.nnz() == 1);
    REQUIRE(std::abs(res.w_rec.entries()[0].value) == Catch::Approx(0.7).margin(1e-12));
}

TEST_CASE("rho 0 zeroes the recurrent matrix") {
    const Reservoir res = build_reservoir(10, 0.0, 0.5, 0.3, 2, 5);
    for (const auto& e : res.w_rec.entries()) REQUIRE(e.value == 0.0);
}

TEST_CASE("built reservoir hits the requested spectral radius per dense oracle") {
    const Reservoir res = build_reservoir(100, 0.9, 0.5, 0.1, 3, 42);
    const double measured = oracle::dense_spectral_radius(res.w_rec.to_dense());
    REQUIRE(std::abs(measured - 0.9) < 1e-6);
}

TEST_CASE("build_reservoir validates parameters") {
    REQUIRE_THROWS_AS(build_reservoir(0, 0.9, 0.5, 0.1, 1, 0), ParameterError);
    REQUIRE_THROWS_AS(build_reservoir(10, -0.1, 0.5, 0.1, 1, 0), ParameterError);
    REQUIRE_THROWS_AS(build_reservoir(10, 0.9, 0.0, 0.1, 1, 0), ParameterError);
    REQUIRE_THROWS_AS(build_reservoir(10, 0.9, 0.5, 0.0, 1, 0), ParameterError);
    REQUIRE_THROWS_AS(build_reservoir(10, 0.9, 0.5, 1.1, 1, 0), ParameterError);
}

TEST_CASE("step from the origin with zero input stays at the origin") {
    const Reservoir res = build_reservoir(20, 0.8, 0.4, 0.2, 2, 7);
    const auto h = step(res, std::vector<double>(20, 0.0), {0.0, 0.0});
    for (double v : h) REQUIRE(v == 0.0);
}

TEST_CASE("scalar step is tanh of the driven input") {
    const Reservoir res = scalar_reservoir(0.0, 1.0);
    const auto h = step(res, {0.0}, {0.5});
    REQUIRE(h[0] == Catch::Approx(0.4621171572600098).margin(1e-12));
}

TEST_CASE("two hand-unrolled scalar steps") {
    const Reservoir res = scalar_reservoir(0.5, 1.0);
    auto h = step(res, {0.0}, {0.5});
    h = step(res, h, {0.2});
    REQUIRE(h[0] ==
            Catch::Approx(std::tanh(0.5 * std::tanh(0.5) + 0.2)).margin(1e-14));
}

TEST_CASE("step rejects mismatched dimensions") {
    const Reservoir res = build_reservoir(5, 0.8, 0.4, 0.5, 2, 3);
    REQUIRE_THROWS_AS(step(res, std::vector<double>(4, 0.0), {0.0, 0.0}), ShapeError);
    REQUIRE_THROWS_AS(step(res, std::vector<double>(5, 0.0), {0.0}), ShapeError);
}

TEST_CASE("length-1 run equals a single step") {
    const Reservoir res = build_reservoir(12, 0.9, 0.4, 0.5, 2, 9);
    Matrix series(1, 2, {0.3, -0.7});
    const StateTrajectory traj = run(res, series);
    REQUIRE(traj.states.rows() == 1);
    const auto one = step(res, std::vector<double>(12, 0.0), {0.3, -0.7});
    for (std::size_t i = 0; i < 12; ++i) REQUIRE(traj.states(0, i) == one[i]);
}

TEST_CASE("all-zero series from the origin stays at the origin") {
    const Reservoir res = build_reservoir(8, 0.9, 0.4, 0.5, 1, 2);
    const StateTrajectory traj = run(res, Matrix(5, 1));
    for (std::size_t i = 0; i < traj.states.size(); ++i)
        REQUIRE(traj.states.data()[i] == 0.0);
}

TEST_CASE("run rejects an empty series") {
    const Reservoir res = build_reservoir(8, 0.9, 0.4, 0.5, 1, 2);
    REQUIRE_THROWS_AS(run(res, Matrix(0, 1)), InputError);
}

TEST_CASE("run equals a fold of step calls") {
    const Reservoir res = build_reservoir(30, 0.85, 0.6, 0.2, 3, 13);
    const Matrix series = seeded_series(4, 40, 3);
    const StateTrajectory traj = run(res, series);
    std::vector<double> h(30, 0.0);
    for (std::size_t t = 0; t < series.rows(); ++t) {
        std::vector<double> x(3);
        for (std::size_t v = 0; v < 3; ++v) x[v] = series(t, v);
        h = step(res, h, x);
    }
    const auto last = traj.last();
    for (std::size_t i = 0; i < 30; ++i) REQUIRE(last[i] == h[i]);
}

TEST_CASE("palindromic series gives identical forward and backward embeddings") {
    const Reservoir res = build_reservoir(16, 0.9, 0.5, 0.3, 2, 21);
    const Matrix half = seeded_series(9, 10, 2);
    Matrix pal(19, 2);
    for (std::size_t t = 0; t < 10; ++t)
        for (std::size_t v = 0; v < 2; ++v) {
            pal(t, v) = half(t, v);
            pal(18 - t, v) = half(t, v);
        }
    const BiEmbedding e = embed_bidirectional(res, pal);
    REQUIRE(e.forward == e.backward);
}

TEST_CASE("length-1 series has equal forward and backward embeddings") {
    const Reservoir res = build_reservoir(16, 0.9, 0.5, 0.3, 2, 21);
    const BiEmbedding e = embed_bidirectional(res, Matrix(1, 2, {0.4, -0.2}));
    REQUIRE(e.forward == e.backward);
    REQUIRE(e.concatenated.size() == 32);
}

TEST_CASE("backward embedding equals a run on the explicitly reversed series") {
    const Reservoir res = build_reservoir(24, 0.9, 0.5, 0.2, 2, 30);
    const Matrix series = seeded_series(17, 33, 2);
    const BiEmbedding e = embed_bidirectional(res, series);
    const auto manual = run(res, reversed(series)).last();
    REQUIRE(e.backward == manual);
    for (std::size_t i = 0; i < 24; ++i) {
        REQUIRE(e.concatenated[i] == e.forward[i]);
        REQUIRE(e.concatenated[24 + i] == e.backward[i]);
    }
}

TEST_CASE("bidirectional symmetry under series reversal") {
    const Reservoir res = build_reservoir(18, 0.88, 0.4, 0.25, 2, 34);
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const Matrix series = seeded_series(seed, 27, 2);
        const BiEmbedding fwd = embed_bidirectional(res, series);
        const BiEmbedding rev = embed_bidirectional(res, reversed(series));
        REQUIRE(rev.forward == fwd.backward);
        REQUIRE(rev.backward == fwd.forward);
    }
}

TEST_CASE("trajectory entries stay inside (-1, 1) under tanh") {
    const Reservoir res = build_reservoir(40, 0.95, 1.0, 0.2, 2, 55);
    const Matrix series = seeded_series(3, 60, 2, 2.0);
    const StateTrajectory traj = run(res, series);
    for (std::size_t i = 0; i < traj.states.size(); ++i)
        REQUIRE(std::abs(traj.states.data()[i]) < 1.0);
}

TEST_CASE("echo state check: trajectories forget their initial state") {
    // Empirical contraction proxy on a fixed seed set.
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const Reservoir res = build_reservoir(30, 0.9, 0.5, 0.2, 2, seed);
        const Matrix series = seeded_series(seed + 100, 100, 2);
        SeededRng rng(seed, 4242);
        std::vector<double> h0(30);
        for (auto& v : h0) v = rng.uniform(-1.0, 1.0);
        const auto from_zero = final_state(res, series);
        const auto from_random = final_state(res, series, h0);
        double diff = 0.0;
        for (std::size_t i = 0; i < 30; ++i)
            diff = std::max(diff, std::abs(from_zero[i] - from_random[i]));
        REQUIRE(diff < 1e-3);
    }
}

TEST_CASE("same build parameters reproduce bit-identical weights") {
    const Reservoir a = build_reservoir(50, 0.9, 0.3, 0.1, 4, 77);
    const Reservoir b = build_reservoir(50, 0.9, 0.3, 0.1, 4, 77);
    REQUIRE(a.w_rec == b.w_rec);
    REQUIRE(a.w_in == b.w_in);
    for (std::size_t i = 0; i < a.w_in.size(); ++i)
        REQUIRE(std::abs(a.w_in.data()[i]) <= 0.3);
}

TEST_CASE("a draw that cannot carry any weight is a degenerate draw") {
    // density 0.3 on a 1x1 matrix rounds to zero entries, so rho > 0 is
    // unreachable on every substream
    REQUIRE_THROWS_AS(build_reservoir(1, 0.7, 0.5, 0.3, 1, 3), DegenerateDrawError);
    REQUIRE_NOTHROW(build_reservoir(1, 0.0, 0.5, 0.3, 1, 3));  // rho 0 is fine
}

TEST_CASE("reservoir serialization round-trips through the seed") {
    const Reservoir original = build_reservoir(25, 1.1, 0.7, 0.15, 3, 91);
    std::stringstream buffer;
    save_reservoir(buffer, original);
    const Reservoir restored = load_reservoir(buffer);
    REQUIRE(restored.w_rec == original.w_rec);
    REQUIRE(restored.w_in == original.w_in);
    REQUIRE(restored.spectral_radius == original.spectral_radius);
    REQUIRE(restored.input_scale == original.input_scale);
    REQUIRE(restored.seed == original.seed);
}
