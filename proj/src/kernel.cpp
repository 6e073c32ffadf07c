#include "tpmoe/kernel.hpp"

#include "tpmoe/errors.hpp"

#include <cmath>
#include <sstream>

namespace tpmoe
{

namespace
{

constexpr double kFirstJitter = 1e-8;
constexpr double kLastJitter = 1e-2;

}  // namespace

double rbf_kernel(const Eigen::Ref<const Vector>& x,
                  const Eigen::Ref<const Vector>& x_prime,
                  const KernelParams& params)
{
    if (x.size() != x_prime.size() || x.size() == 0)
    {
        std::ostringstream msg;
        msg << "rbf_kernel: dimension mismatch (" << x.size() << " vs "
            << x_prime.size() << ")";
        throw InputError(msg.str());
    }
    return std::exp(-0.5 * params.theta * (x - x_prime).squaredNorm());
}

Matrix cross_kernel(const InputMatrix& a, const InputMatrix& b,
                    const KernelParams& params)
{
    if (a.cols() != b.cols())
        throw InputError("cross_kernel: input dimension mismatch");
    Matrix out(a.rows(), b.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = 0; j < b.rows(); ++j)
            out(i, j) = std::exp(
                -0.5 * params.theta * (a.row(i) - b.row(j)).squaredNorm());
    return out;
}

CovMatrix::CovMatrix(Matrix matrix) : matrix_(std::move(matrix))
{
    if (matrix_.rows() != matrix_.cols() || matrix_.rows() == 0)
        throw InputError("CovMatrix: expected a nonempty square matrix");

    llt_.compute(matrix_);
    if (llt_.info() != Eigen::Success)
    {
        const double mean_diag = matrix_.diagonal().mean();
        const double base = mean_diag > 0.0 ? mean_diag : 1.0;
        std::vector<double> attempted;
        bool ok = false;
        for (double level = kFirstJitter; level <= kLastJitter * 1.0001;
             level *= 10.0)
        {
            const double jitter = level * base;
            attempted.push_back(jitter);
            Matrix jittered = matrix_;
            jittered.diagonal().array() += jitter;
            llt_.compute(jittered);
            if (llt_.info() == Eigen::Success)
            {
                matrix_ = std::move(jittered);
                jitter_ = jitter;
                ok = true;
                break;
            }
        }
        if (!ok)
        {
            std::ostringstream msg;
            msg << "Cholesky factorization failed after jitter levels";
            for (double j : attempted) msg << ' ' << j;
            throw NumericalError(msg.str(), std::move(attempted));
        }
    }

    const auto& lower = llt_.matrixLLT();
    logdet_ = 2.0 * lower.diagonal().array().log().sum();
    if (!std::isfinite(logdet_))
        throw NumericalError("CovMatrix: non-finite log-determinant");
}

Matrix CovMatrix::solve(const Matrix& b) const
{
    return llt_.solve(b);
}

Matrix CovMatrix::solve_lower(const Matrix& b) const
{
    return llt_.matrixL().solve(b);
}

CovMatrix build_cov(const InputMatrix& X, const KernelParams& params,
                    double noise)
{
    if (X.rows() == 0)
        throw InputError("build_cov: need at least one input row");
    const Eigen::Index n = X.rows();
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        k(i, i) = 1.0 + noise;
        for (Eigen::Index j = 0; j < i; ++j)
        {
            const double v = std::exp(
                -0.5 * params.theta * (X.row(i) - X.row(j)).squaredNorm());
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return CovMatrix(std::move(k));
}

SolveResult solve_and_logdet(const CovMatrix& cov,
                             const Eigen::Ref<const Vector>& y)
{
    if (y.size() != cov.size())
        throw InputError("solve_and_logdet: vector length mismatch");
    SolveResult out;
    const Vector half = cov.cholesky().matrixL().solve(Vector(y));
    out.quad = half.squaredNorm();
    out.solved = cov.cholesky().matrixU().solve(half);
    out.logdet = cov.logdet();
    return out;
}

}  // namespace tpmoe
