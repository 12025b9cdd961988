#pragma once

// Ridge-regression / LinUCB core. Header-only and templated on the scalar type;
// the rest of the library instantiates it with double.

#include "tagseek/error.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <string>

namespace tagseek {

template <typename Derived>
void symmetrize(Eigen::MatrixBase<Derived>& m) {
    m = (typename Derived::Scalar(0.5) * (m + m.transpose())).eval();
}

/// In place: a_inv <- (A + v v^T)^{-1} given a_inv = A^{-1} symmetric positive
/// definite. O(d^2). The result is symmetrized.
template <typename MatDerived, typename VecDerived>
void sherman_morrison_update_inplace(Eigen::MatrixBase<MatDerived>& a_inv,
                                     const Eigen::MatrixBase<VecDerived>& v) {
    using Scalar = typename MatDerived::Scalar;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    if (a_inv.rows() != a_inv.cols() || a_inv.rows() != v.size())
        throw NumericError("sherman_morrison_update: dimension mismatch (matrix " + std::to_string(a_inv.rows()) +
                           "x" + std::to_string(a_inv.cols()) + ", vector " + std::to_string(v.size()) + ")");
    const Vec u = a_inv * v;
    const Scalar denom = Scalar(1) + v.dot(u);
    if (!std::isfinite(static_cast<double>(denom)) || !(denom > Scalar(1e-12)))
        throw NumericError("sherman_morrison_update: degenerate denominator");
    a_inv.noalias() -= (u / denom) * u.transpose();
    if (!a_inv.allFinite()) throw NumericError("sherman_morrison_update: non-finite result");
    symmetrize(a_inv);
}

template <typename MatDerived, typename VecDerived>
typename MatDerived::PlainObject sherman_morrison_update(const Eigen::MatrixBase<MatDerived>& a_inv,
                                                         const Eigen::MatrixBase<VecDerived>& v) {
    typename MatDerived::PlainObject out = a_inv;
    sherman_morrison_update_inplace(out, v);
    return out;
}

/// v^T A^{-1} v clamped at zero. Round-off below -1e-9 is treated as a broken
/// inverse rather than noise.
template <typename MatDerived, typename VecDerived>
typename MatDerived::Scalar predictive_variance(const Eigen::MatrixBase<MatDerived>& a_inv,
                                                const Eigen::MatrixBase<VecDerived>& v) {
    using Scalar = typename MatDerived::Scalar;
    const Scalar q = v.dot(a_inv * v);
    if (q < Scalar(-1e-9)) throw NumericError("negative predictive variance: inverse is not positive definite");
    return q < Scalar(0) ? Scalar(0) : q;
}

/// v^T A^{-1} b + alpha * sqrt(v^T A^{-1} v)
template <typename MatDerived, typename BDerived, typename VecDerived>
typename MatDerived::Scalar linucb_score(const Eigen::MatrixBase<MatDerived>& a_inv,
                                         const Eigen::MatrixBase<BDerived>& b,
                                         const Eigen::MatrixBase<VecDerived>& v,
                                         typename MatDerived::Scalar alpha) {
    using Scalar = typename MatDerived::Scalar;
    using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
    if (v.size() != a_inv.rows() || b.size() != a_inv.rows())
        throw NumericError("linucb_score: dimension mismatch (expected " + std::to_string(a_inv.rows()) +
                           ", got " + std::to_string(v.size()) + ")");
    const Vec theta = a_inv * b;
    return v.dot(theta) + alpha * std::sqrt(predictive_variance(a_inv, v));
}

/// Running ridge-regression state for LinUCB: A^{-1} maintained by rank-1
/// updates, and b = sum of reward-weighted feature vectors.
template <typename Scalar>
class LinUcbState {
public:
    using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    LinUcbState(Eigen::Index dim, Scalar lambda, Scalar alpha) : lambda_(lambda), alpha_(alpha) {
        if (dim <= 0) throw NumericError("LinUcbState: dimension must be positive");
        if (!(lambda > Scalar(0))) throw NumericError("LinUcbState: lambda must be positive");
        if (!(alpha >= Scalar(0))) throw NumericError("LinUcbState: alpha must be non-negative");
        a_inv_ = Matrix::Identity(dim, dim) / lambda;
        b_ = Vector::Zero(dim);
        theta_ = Vector::Zero(dim);
    }

    /// A += v v^T, b += reward * v.
    template <typename VecDerived>
    void update(const Eigen::MatrixBase<VecDerived>& v, Scalar reward) {
        sherman_morrison_update_inplace(a_inv_, v);
        b_.noalias() += reward * v;
        theta_.noalias() = a_inv_ * b_;
        ++updates_;
    }

    template <typename VecDerived>
    Scalar score(const Eigen::MatrixBase<VecDerived>& v) const {
        if (v.size() != dimension()) throw NumericError("LinUcbState::score: dimension mismatch");
        return v.dot(theta_) + alpha_ * std::sqrt(predictive_variance(a_inv_, v));
    }

    Eigen::Index dimension() const { return b_.size(); }
    const Matrix& a_inv() const { return a_inv_; }
    const Vector& b() const { return b_; }
    /// Ridge estimate A^{-1} b.
    const Vector& theta() const { return theta_; }
    Scalar lambda() const { return lambda_; }
    Scalar alpha() const { return alpha_; }
    std::size_t update_count() const { return updates_; }

private:
    Matrix a_inv_;
    Vector b_;
    Vector theta_;
    Scalar lambda_;
    Scalar alpha_;
    std::size_t updates_ = 0;
};

} // namespace tagseek
