#include "tagseek/linucb.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace tagseek {
namespace {

// Direct route used as the oracle: build A explicitly and invert it.
Eigen::MatrixXd direct_inverse(double lambda, const std::vector<Eigen::VectorXd>& vs, Eigen::Index d) {
    Eigen::MatrixXd a = lambda * Eigen::MatrixXd::Identity(d, d);
    for (const auto& v : vs) a += v * v.transpose();
    return a.fullPivLu().inverse();
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, Eigen::Index d, double scale = 1.0) {
    std::normal_distribution<double> normal(0.0, scale / std::sqrt(static_cast<double>(d)));
    Eigen::VectorXd v(d);
    for (auto& x : v) x = normal(rng);
    return v;
}

double rel_frobenius(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a - b).norm() / b.norm(); }

TEST(ShermanMorrison, AxisVectorClosedForm) {
    Eigen::Matrix2d updated = sherman_morrison_update(Eigen::Matrix2d::Identity(), Eigen::Vector2d(1, 0));
    EXPECT_EQ(updated, Eigen::Vector2d(0.5, 1.0).asDiagonal().toDenseMatrix());
}

TEST(ShermanMorrison, ZeroVectorIsNoOp) {
    std::mt19937_64 rng(1);
    Eigen::MatrixXd a_inv = Eigen::MatrixXd::Identity(4, 4);
    for (int i = 0; i < 5; ++i) sherman_morrison_update_inplace(a_inv, random_vector(rng, 4));
    EXPECT_EQ(sherman_morrison_update(a_inv, Eigen::VectorXd::Zero(4)), a_inv);
}

TEST(ShermanMorrison, FiftyUpdatesMatchDirectInverse) {
    std::mt19937_64 rng(2);
    const Eigen::Index d = 20;
    const double lambda = 1.0;
    Eigen::MatrixXd a_inv = Eigen::MatrixXd::Identity(d, d) / lambda;
    std::vector<Eigen::VectorXd> vs;
    for (int i = 0; i < 50; ++i) {
        vs.push_back(random_vector(rng, d));
        sherman_morrison_update_inplace(a_inv, vs.back());
    }
    EXPECT_LT(rel_frobenius(a_inv, direct_inverse(lambda, vs, d)), 1e-8);
}

TEST(ShermanMorrison, StaysSymmetricAndConsistent) {
    std::mt19937_64 rng(3);
    for (Eigen::Index d : {2, 16, 64}) {
        const double lambda = 0.5;
        Eigen::MatrixXd a_inv = Eigen::MatrixXd::Identity(d, d) / lambda;
        Eigen::MatrixXd a = lambda * Eigen::MatrixXd::Identity(d, d);
        // 10 * B * T_max with B = 20, T_max = 10
        for (int i = 0; i < 2000; ++i) {
            const auto v = random_vector(rng, d);
            a += v * v.transpose();
            sherman_morrison_update_inplace(a_inv, v);
            ASSERT_LT((a_inv - a_inv.transpose()).cwiseAbs().maxCoeff(), 1e-9);
        }
        const Eigen::MatrixXd residual = a_inv * a - Eigen::MatrixXd::Identity(d, d);
        EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-6) << "d=" << d;
    }
}

TEST(ShermanMorrison, Errors) {
    Eigen::MatrixXd a_inv = Eigen::MatrixXd::Identity(3, 3);
    EXPECT_THROW(sherman_morrison_update(a_inv, Eigen::Vector2d(1, 1)), NumericError);
    Eigen::MatrixXd negative = -Eigen::MatrixXd::Identity(2, 2);
    EXPECT_THROW(sherman_morrison_update(negative, Eigen::Vector2d(1, 0)), NumericError);
    Eigen::Vector2d nan_v(std::nan(""), 0);
    EXPECT_THROW(sherman_morrison_update(Eigen::MatrixXd::Identity(2, 2), nan_v), NumericError);
}

TEST(LinUcbScore, FreshStateIsPureExploration) {
    LinUcbState<double> state(2, 1.0, 0.01);
    EXPECT_NEAR(state.score(Eigen::Vector2d(3, 4)), 0.05, 1e-15);
    EXPECT_NEAR(linucb_score(state.a_inv(), state.b(), Eigen::Vector2d(3, 4), 0.01), 0.05, 1e-15);
}

TEST(LinUcbScore, ZeroAlphaIsRidgePrediction) {
    std::mt19937_64 rng(4);
    LinUcbState<double> state(3, 2.0, 0.0);
    for (int i = 0; i < 7; ++i) state.update(random_vector(rng, 3), static_cast<double>(i) - 2.5);
    const auto v = random_vector(rng, 3);
    EXPECT_NEAR(state.score(v), v.dot(state.a_inv() * state.b()), 1e-14);
}

TEST(LinUcbScore, MatchesDirectInverseAfterUpdates) {
    std::mt19937_64 rng(5);
    const Eigen::Index d = 4;
    const double lambda = 1.0, alpha = 0.01;
    LinUcbState<double> state(d, lambda, alpha);
    std::vector<Eigen::VectorXd> vs;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(d);
    std::uniform_real_distribution<double> reward(-1.0, 3.0);
    for (int i = 0; i < 5; ++i) {
        vs.push_back(random_vector(rng, d));
        const double r = reward(rng);
        b += r * vs.back();
        state.update(vs.back(), r);
    }
    const Eigen::MatrixXd inv = direct_inverse(lambda, vs, d);
    for (int k = 0; k < 20; ++k) {
        const auto v = random_vector(rng, d);
        const double expected = v.dot(inv * b) + alpha * std::sqrt(v.dot(inv * v));
        EXPECT_NEAR(state.score(v), expected, 1e-8 * std::abs(expected));
    }
}

TEST(LinUcbScore, DimensionMismatch) {
    LinUcbState<double> state(3, 1.0, 0.1);
    EXPECT_THROW(state.score(Eigen::Vector2d(1, 1)), NumericError);
    EXPECT_THROW(linucb_score(state.a_inv(), state.b(), Eigen::Vector2d(1, 1), 0.1), NumericError);
    EXPECT_THROW(state.update(Eigen::Vector2d(1, 1), 1.0), NumericError);
}

TEST(LinUcbScore, ClampsTinyNegativeVariance) {
    Eigen::Matrix2d a_inv;
    a_inv << 1e-12, 0, 0, -1e-11;
    EXPECT_EQ(predictive_variance(a_inv, Eigen::Vector2d(0, 1)), 0.0);
    a_inv(1, 1) = -1.0;
    EXPECT_THROW(predictive_variance(a_inv, Eigen::Vector2d(0, 1)), NumericError);
}

TEST(LinUcbState, RejectsBadHyperparameters) {
    EXPECT_THROW(LinUcbState<double>(2, 0.0, 0.1), NumericError);
    EXPECT_THROW(LinUcbState<double>(2, 1.0, -0.1), NumericError);
    EXPECT_THROW(LinUcbState<double>(0, 1.0, 0.1), NumericError);
}

TEST(LinUcbState, FloatInstantiation) {
    LinUcbState<float> state(2, 1.0f, 0.01f);
    state.update(Eigen::Vector2f(1, 0), 1.0f);
    EXPECT_NEAR(state.a_inv()(0, 0), 0.5f, 1e-7f);
    EXPECT_NEAR(state.score(Eigen::Vector2f(1, 0)), 0.5f + 0.01f * std::sqrt(0.5f), 1e-6f);
}

} // namespace
} // namespace tagseek
