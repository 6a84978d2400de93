#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <vector>

#include "linkcorr/rng.hpp"

namespace linkcorr {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

/// Mean (seconds) and covariance (seconds²) of the latent link travel-time vector.
struct GaussianParams {
    Vector mean;
    Matrix cov;

    Index dim() const { return mean.size(); }

    /// Throws DimensionMismatch, std::domain_error (asymmetry) or
    /// NotPositiveDefinite when an invariant is broken.
    void validate() const;
};

/// Correlation matrix: unit diagonal, symmetric, entries in [-1, 1].
class CorrelationMatrix {
public:
    CorrelationMatrix() = default;
    /// Validates; throws std::domain_error on a broken invariant.
    explicit CorrelationMatrix(Matrix values);

    const Matrix& matrix() const { return values_; }
    double operator()(Index i, Index j) const { return values_(i, j); }
    Index dim() const { return values_.rows(); }

    static CorrelationMatrix identity(Index n) { return CorrelationMatrix(Matrix::Identity(n, n)); }

private:
    Matrix values_;
};

struct JitterPolicy {
    bool enabled = true;
    double relative = 1e-8;  // ε = relative · trace/n on the first retry
    int max_attempts = 3;    // ε grows ×10 on each retry
};

/// Lower Cholesky factor plus the diagonal jitter it took to get it.
struct CholeskyFactor {
    Matrix lower;
    double jitter = 0.0;

    double log_det() const;
    /// max/min diagonal ratio squared; a cheap condition-number estimate.
    double condition_estimate() const;
};

/// Cholesky of a symmetric matrix (lower triangle read). Throws NotPositiveDefinite.
CholeskyFactor cholesky(const Matrix& m);

/// Cholesky with ε·I repair on failure, ε = relative·trace/n, ×10 per retry.
CholeskyFactor cholesky(const Matrix& m, const JitterPolicy& policy);

/// corr[i][j] = cov[i][j] / sqrt(cov[i][i]·cov[j][j]); diagonal set to exactly 1.
/// Throws std::domain_error naming the first non-positive diagonal index.
CorrelationMatrix cov_to_corr(const Matrix& cov);

/// μ + L·z with z standard normal, drawn in coordinate order.
Vector sample_gaussian(const GaussianParams& params, Rng& rng);
Vector sample_gaussian(const Vector& mean, const CholeskyFactor& factor, Rng& rng);

/// Gaussian over the complementary (free) coordinates given observed ones.
struct ConditionalGaussian {
    std::vector<Index> free_idx;  // ascending
    GaussianParams params;
};

/// Conditions on x[observed_idx] = observed_vals. observed_idx must be a
/// non-empty strict subset of 0..n-1 without duplicates.
/// Throws ConditioningError if the observed block is singular.
ConditionalGaussian condition(const GaussianParams& params, const std::vector<Index>& observed_idx,
                              const Vector& observed_vals);

/// Log density, evaluated through the Cholesky factor.
double log_density(const GaussianParams& params, const Vector& x);

/// (m + mᵀ)/2
Matrix symmetrized(const Matrix& m);

}  // namespace linkcorr
