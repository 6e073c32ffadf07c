#pragma once

#include <Eigen/Dense>

#include <vector>

namespace tpmoe
{

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Row-major view of inputs: one row per observation, one column per
/// input dimension.
using InputMatrix = Matrix;

/// RBF kernel hyperparameter: theta is the inverse squared length-scale.
/// There is no amplitude; the overall scale lives in the student-t mixing.
struct KernelParams
{
    double theta = 1.0;
};

/// k(x, x') = exp(-theta/2 * |x - x'|^2). Throws InputError on a dimension
/// mismatch.
double rbf_kernel(const Eigen::Ref<const Vector>& x,
                  const Eigen::Ref<const Vector>& x_prime,
                  const KernelParams& params);

/// Cross-covariance block k(a_i, b_j).
Matrix cross_kernel(const InputMatrix& a, const InputMatrix& b,
                    const KernelParams& params);

struct SolveResult
{
    double quad = 0.0;    ///< y' C^{-1} y
    double logdet = 0.0;  ///< log |C|
    Vector solved;        ///< C^{-1} y
};

/// Symmetric positive-definite covariance K + noise*I with its Cholesky
/// factor. Immutable once built.
///
/// Factorization is first tried without jitter. On failure, jitter of
/// 1e-8 * mean(diag) is added and escalated by x10 up to 1e-2 * mean(diag);
/// if that still fails a NumericalError listing every attempted level is
/// thrown.
class CovMatrix
{
public:
    /// Factorize an explicit symmetric matrix.
    explicit CovMatrix(Matrix matrix);

    const Matrix& matrix() const noexcept { return matrix_; }
    Eigen::Index size() const noexcept { return matrix_.rows(); }
    double logdet() const noexcept { return logdet_; }
    double jitter() const noexcept { return jitter_; }
    const Eigen::LLT<Matrix>& cholesky() const noexcept { return llt_; }

    /// C^{-1} b using the factorization.
    Matrix solve(const Matrix& b) const;

    /// L^{-1} b, where C = L L'.
    Matrix solve_lower(const Matrix& b) const;

private:
    Matrix matrix_;
    Eigen::LLT<Matrix> llt_;
    double logdet_ = 0.0;
    double jitter_ = 0.0;
};

/// Gram matrix of the RBF kernel over the rows of X plus noise on the
/// diagonal. Requires at least one row.
CovMatrix build_cov(const InputMatrix& X, const KernelParams& params,
                    double noise);

SolveResult solve_and_logdet(const CovMatrix& cov,
                             const Eigen::Ref<const Vector>& y);

}  // namespace tpmoe
