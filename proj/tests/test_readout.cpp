#include "photorc/readout.hpp"

#include <doctest.h>

#include <cmath>

using namespace prc;

namespace {

StateMatrix random_states(std::uint64_t seed, long rows, long cols) {
    RandomSource rng(seed);
    return StateMatrix(draw_uniform_matrix(rng, -1.0, 1.0, rows, cols));
}

TimeSeries random_targets(std::uint64_t seed, long rows, long width = 1) {
    RandomSource rng(seed);
    return TimeSeries(draw_uniform_matrix(rng, -1.0, 1.0, rows, width));
}

/// (A^T A + lambda D) W = A^T Y with A the bias-augmented states and D the
/// identity with a zero in the bias slot.
Matrix normal_equation(const StateMatrix& s, const TimeSeries& y, double lambda) {
    const long n = s.nodes();
    Matrix a(s.rows(), n + 1);
    a << s.values(), Vector::Ones(s.rows());
    Matrix g = a.transpose() * a;
    g.diagonal().head(n).array() += lambda;
    return g.ldlt().solve(a.transpose() * y.values()).transpose();
}

double brute_force_boolean(const StateMatrix& s, const Vector& y) {
    const long n = s.nodes();
    double best = INFINITY;
    for (long mask = 0; mask < (1L << n); ++mask) {
        Vector w(n);
        for (long i = 0; i < n; ++i) w[i] = (mask >> i) & 1;
        const Vector r = y - s.values() * w;
        best = std::min(best, (r.array() - r.mean()).square().mean());
    }
    return best;
}

}  // namespace

TEST_CASE("ridge interpolates a square invertible system at lambda 0") {
    const StateMatrix s = random_states(1, 8, 7);
    const TimeSeries y = random_targets(2, 8);
    const ReadoutWeights w = train_ridge(s, y, {0.0, true});
    CHECK((predict(w, s).values() - y.values()).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(w.kind == WeightKind::real);
    CHECK(w.nodes() == 7);
}

TEST_CASE("heavy regularisation leaves only the bias") {
    const StateMatrix s = random_states(3, 60, 5);
    const TimeSeries y = random_targets(4, 60);
    const ReadoutWeights w = train_ridge(s, y, {1e9, true});
    CHECK(w.w_out.leftCols(5).cwiseAbs().maxCoeff() < 1e-6);
    CHECK(w.w_out(0, 5) == doctest::Approx(y.values().mean()).epsilon(1e-6));
}

TEST_CASE("ridge matches the normal equations") {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const StateMatrix s = random_states(10 + seed, 50, 10);
        const TimeSeries y = random_targets(20 + seed, 50, 2);
        for (double lambda : {0.0, 0.01, 0.1, 1.0}) {
            const Matrix oracle = normal_equation(s, y, lambda);
            const Matrix w = train_ridge(s, y, {lambda, true}).w_out;
            CHECK((w - oracle).norm() / oracle.norm() < 1e-8);
        }
    }
}

TEST_CASE("ridge without bias") {
    const StateMatrix s = random_states(5, 40, 6);
    const TimeSeries y = random_targets(6, 40);
    const ReadoutWeights w = train_ridge(s, y, {0.1, false});
    CHECK(w.w_out(0, 6) == 0.0);
    Matrix g = s.values().transpose() * s.values();
    g.diagonal().array() += 0.1;
    const Vector oracle = g.ldlt().solve(s.values().transpose() * y.values().col(0));
    CHECK((w.w_out.row(0).head(6).transpose() - oracle).norm() < 1e-10);
}

TEST_CASE("ridge errors") {
    const StateMatrix s = random_states(7, 10, 3);
    CHECK_THROWS_AS(train_ridge(s, random_targets(1, 9)), ShapeError);
    CHECK_THROWS_AS(train_ridge(s, random_targets(1, 10), {-1.0, true}), ParameterError);
    Matrix dup = s.values();
    dup.col(2) = dup.col(1);
    CHECK_THROWS_AS(train_ridge(StateMatrix(dup), random_targets(1, 10), {0.0, true}),
                    ConditioningError);
    CHECK_NOTHROW(train_ridge(StateMatrix(dup), random_targets(1, 10), {1e-3, true}));
}

TEST_CASE("training error does not increase as lambda decreases") {
    const StateMatrix s = random_states(8, 80, 20);
    const TimeSeries y = random_targets(9, 80);
    double previous = INFINITY;
    for (int i = 0; i < 10; ++i) {
        const double lambda = std::pow(10.0, 2.0 - i);
        const double e = mse(predict(train_ridge(s, y, {lambda, true}), s), y);
        CHECK(e <= previous * (1.0 + 1e-12));
        previous = e;
    }
}

TEST_CASE("predict") {
    const StateMatrix s = random_states(11, 12, 4);
    ReadoutWeights zero{Matrix::Zero(1, 5)};
    CHECK(predict(zero, s).values().isZero(0.0));

    ReadoutWeights onehot{Matrix::Zero(1, 5)};
    onehot.w_out(0, 2) = 1.0;
    CHECK(predict(onehot, s).values().col(0) == s.values().col(2));

    CHECK_THROWS_AS(predict(ReadoutWeights{Matrix::Zero(1, 4)}, s), ShapeError);

    RandomSource rng(12);
    const ReadoutWeights w1{draw_uniform_matrix(rng, -1, 1, 2, 5)};
    const ReadoutWeights w2{draw_uniform_matrix(rng, -1, 1, 2, 5)};
    const double a = 1.7, b = -0.4;
    const ReadoutWeights mix{a * w1.w_out + b * w2.w_out};
    const Matrix lhs = predict(mix, s).values();
    const Matrix rhs = a * predict(w1, s).values() + b * predict(w2, s).values();
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("LMS with zero targets keeps zero weights") {
    const StateMatrix s = random_states(13, 30, 4);
    const ReadoutWeights w = train_online_lms(s, TimeSeries(Matrix::Zero(30, 1)), {0.1, 3});
    CHECK(w.w_out.isZero(0.0));
}

TEST_CASE("LMS converges on a constant one-node instance") {
    const StateMatrix s(Matrix::Ones(2000, 1));
    const double c = 0.37;
    const ReadoutWeights w = train_online_lms(s, TimeSeries(Matrix::Constant(2000, 1, c)), {0.01, 1});
    CHECK(std::abs(w.w_out(0, 0) + w.w_out(0, 1) - c) < 1e-3);
}

TEST_CASE("LMS diverges above the stability bound") {
    // Rows [x; 1] have squared norm 2 for x = +-1, so any rate above 1 makes
    // the per-sample update expansive.
    Matrix m(200, 1);
    for (long k = 0; k < 200; ++k) m(k, 0) = k % 2 == 0 ? 1.0 : -1.0;
    const TimeSeries y(Matrix::Constant(200, 1, 1.0));
    CHECK_THROWS_AS(train_online_lms(StateMatrix(m), y, {1.5, 1}), DivergenceError);
    CHECK_NOTHROW(train_online_lms(StateMatrix(m), y, {0.1, 1}));
    CHECK_THROWS_AS(train_online_lms(StateMatrix(m), y, {0.0, 1}), ParameterError);
}

TEST_CASE("LMS approaches the least-squares training error") {
    const StateMatrix s = random_states(14, 400, 5);
    RandomSource rng(15);
    const Vector true_w = draw_uniform(rng, -1.0, 1.0, 5);
    const Vector noise = draw_uniform(rng, -0.1, 0.1, 400);
    const TimeSeries y = TimeSeries::scalar(s.values() * true_w + noise + Vector::Constant(400, 0.3));
    const double ls = mse(predict(train_ridge(s, y, {0.0, true}), s), y);
    const double lms = mse(predict(train_online_lms(s, y, {0.002, 200}), s), y);
    CHECK(lms <= 1.05 * ls);
}

TEST_CASE("Boolean search on a one-hot target") {
    const long n = 10;
    int successes = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const StateMatrix s = random_states(100 + seed, 80, n);
        const TimeSeries y = TimeSeries::scalar(s.values().col(3));
        RandomSource rng(seed);
        const BooleanFit fit = train_boolean_reinforce(s, y, {50 * n, 1}, rng);
        if (fit.errors[0] <= 1e-12) ++successes;
    }
    CHECK(successes >= 18);
}

TEST_CASE("Boolean search contract") {
    const StateMatrix s = random_states(30, 50, 8);
    const TimeSeries y = random_targets(31, 50);
    RandomSource rng(32);
    const BooleanFit one = train_boolean_reinforce(s, y, {1, 1}, rng);
    CHECK(one.weights.kind == WeightKind::boolean);
    for (long i = 0; i < 8; ++i) CHECK((one.weights.w_out(0, i) == 0.0 || one.weights.w_out(0, i) == 1.0));
    CHECK(one.trace.size() == 2);

    RandomSource rng2(33);
    const BooleanFit fit = train_boolean_reinforce(s, y, {300, 1}, rng2);
    for (std::size_t i = 1; i < fit.trace.size(); ++i) CHECK(fit.trace[i] <= fit.trace[i - 1]);
    CHECK(fit.errors[0] <= fit.trace.front());
    CHECK(fit.errors[0] == fit.trace.back());
    // Reported error equals the MSE of the refitted-bias prediction.
    CHECK(mse(predict(fit.weights, s), y) == doctest::Approx(fit.errors[0]).epsilon(1e-12));
    CHECK(fit.errors[0] >= brute_force_boolean(s, y.values().col(0)) - 1e-15);

    BooleanSearchConfig pm{200, 2, BooleanAlphabet::plus_minus};
    RandomSource rng3(34);
    const BooleanFit signed_fit = train_boolean_reinforce(s, y, pm, rng3);
    for (long i = 0; i < 8; ++i) CHECK(std::abs(signed_fit.weights.w_out(0, i)) == 1.0);
}

TEST_CASE("nmse") {
    Vector t(2), p(2);
    t << 0.0, 2.0;
    p << 1.0, 1.0;
    CHECK(nmse(TimeSeries::scalar(p), TimeSeries::scalar(t)) == doctest::Approx(1.0));
    CHECK(nmse(TimeSeries::scalar(t), TimeSeries::scalar(t)) == 0.0);

    const TimeSeries y = random_targets(40, 30);
    const TimeSeries mean(Matrix::Constant(30, 1, y.values().mean()));
    CHECK(nmse(mean, y) == doctest::Approx(1.0).epsilon(1e-12));

    CHECK_THROWS_AS(nmse(y, TimeSeries(Matrix::Constant(30, 1, 2.0))), MetricError);
    CHECK_THROWS_AS(nmse(y, random_targets(41, 29)), ShapeError);
}
