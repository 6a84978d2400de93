#include "linkcorr/gaussian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "linkcorr/errors.hpp"

namespace linkcorr {

namespace {

bool try_cholesky(const Matrix& m, Matrix& lower) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) return false;
    lower = llt.matrixL();
    for (Index i = 0; i < lower.rows(); ++i) {
        const double d = lower(i, i);
        if (!std::isfinite(d) || d <= 0.0) return false;
    }
    return true;
}

}  // namespace

void GaussianParams::validate() const {
    if (cov.rows() != cov.cols() || cov.rows() != mean.size())
        throw DimensionMismatch("mean has length " + std::to_string(mean.size()) + " but covariance is " +
                                std::to_string(cov.rows()) + "x" + std::to_string(cov.cols()));
    const double scale = cov.cwiseAbs().maxCoeff();
    if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw std::domain_error("covariance is not symmetric");
    cholesky(cov);
}

CorrelationMatrix::CorrelationMatrix(Matrix values) : values_(std::move(values)) {
    if (values_.rows() != values_.cols()) throw DimensionMismatch("correlation matrix must be square");
    for (Index i = 0; i < values_.rows(); ++i) {
        if (std::abs(values_(i, i) - 1.0) > 1e-12)
            throw std::domain_error("correlation diagonal entry " + std::to_string(i) + " is not 1");
        for (Index j = 0; j < i; ++j) {
            if (values_(i, j) != values_(j, i)) throw std::domain_error("correlation matrix is not symmetric");
            if (!(std::abs(values_(i, j)) <= 1.0)) throw std::domain_error("correlation entry outside [-1, 1]");
        }
    }
}

double CholeskyFactor::log_det() const { return 2.0 * lower.diagonal().array().log().sum(); }

double CholeskyFactor::condition_estimate() const {
    const double ratio = lower.diagonal().maxCoeff() / lower.diagonal().minCoeff();
    return ratio * ratio;
}

CholeskyFactor cholesky(const Matrix& m) {
    CholeskyFactor f;
    if (m.rows() != m.cols()) throw DimensionMismatch("cholesky of a non-square matrix");
    if (!try_cholesky(m, f.lower)) throw NotPositiveDefinite("matrix is not positive definite");
    return f;
}

CholeskyFactor cholesky(const Matrix& m, const JitterPolicy& policy) {
    CholeskyFactor f;
    if (m.rows() != m.cols()) throw DimensionMismatch("cholesky of a non-square matrix");
    if (try_cholesky(m, f.lower)) return f;
    if (!policy.enabled) throw NotPositiveDefinite("matrix is not positive definite");
    const double n = static_cast<double>(m.rows());
    double eps = policy.relative * std::abs(m.trace()) / n;
    if (!(eps > 0.0)) eps = policy.relative;
    for (int attempt = 0; attempt < policy.max_attempts; ++attempt, eps *= 10.0) {
        Matrix repaired = m;
        repaired.diagonal().array() += eps;
        if (try_cholesky(repaired, f.lower)) {
            f.jitter = eps;
            return f;
        }
    }
    throw NotPositiveDefinite("matrix is not positive definite after " + std::to_string(policy.max_attempts) +
                              " jitter attempts");
}

CorrelationMatrix cov_to_corr(const Matrix& cov) {
    if (cov.rows() != cov.cols()) throw DimensionMismatch("covariance must be square");
    const Index n = cov.rows();
    Vector inv_sd(n);
    for (Index i = 0; i < n; ++i) {
        if (!(cov(i, i) > 0.0))
            throw std::domain_error("non-positive variance at index " + std::to_string(i));
        inv_sd(i) = 1.0 / std::sqrt(cov(i, i));
    }
    Matrix corr(n, n);
    for (Index i = 0; i < n; ++i) {
        corr(i, i) = 1.0;
        for (Index j = 0; j < i; ++j) {
            // Average the two triangles so slightly asymmetric input still yields a symmetric result.
            double c = 0.5 * (cov(i, j) + cov(j, i)) * inv_sd(i) * inv_sd(j);
            c = std::clamp(c, -1.0, 1.0);
            corr(i, j) = c;
            corr(j, i) = c;
        }
    }
    return CorrelationMatrix(std::move(corr));
}

Vector sample_gaussian(const Vector& mean, const CholeskyFactor& factor, Rng& rng) {
    const Index n = mean.size();
    Vector z(n);
    for (Index i = 0; i < n; ++i) z(i) = rng.normal();
    return mean + factor.lower.triangularView<Eigen::Lower>() * z;
}

Vector sample_gaussian(const GaussianParams& params, Rng& rng) {
    return sample_gaussian(params.mean, cholesky(params.cov), rng);
}

ConditionalGaussian condition(const GaussianParams& params, const std::vector<Index>& observed_idx,
                              const Vector& observed_vals) {
    const Index n = params.dim();
    if (observed_idx.empty()) throw std::invalid_argument("condition: observed index set is empty");
    if (static_cast<Index>(observed_idx.size()) >= n)
        throw std::invalid_argument("condition: observed set must be a strict subset");
    if (observed_vals.size() != static_cast<Index>(observed_idx.size()))
        throw DimensionMismatch("condition: observed values and indices differ in length");

    std::vector<char> is_observed(n, 0);
    for (Index k : observed_idx) {
        if (k < 0 || k >= n) throw std::out_of_range("condition: observed index out of range");
        if (is_observed[k]) throw std::invalid_argument("condition: duplicate observed index");
        is_observed[k] = 1;
    }
    ConditionalGaussian out;
    for (Index k = 0; k < n; ++k)
        if (!is_observed[k]) out.free_idx.push_back(k);

    const Index no = static_cast<Index>(observed_idx.size());
    const Index nf = static_cast<Index>(out.free_idx.size());
    Matrix s_oo(no, no), s_fo(nf, no), s_ff(nf, nf);
    Vector d(no), mu_f(nf);
    for (Index a = 0; a < no; ++a) {
        d(a) = observed_vals(a) - params.mean(observed_idx[a]);
        for (Index b = 0; b < no; ++b) s_oo(a, b) = params.cov(observed_idx[a], observed_idx[b]);
    }
    for (Index a = 0; a < nf; ++a) {
        mu_f(a) = params.mean(out.free_idx[a]);
        for (Index b = 0; b < no; ++b) s_fo(a, b) = params.cov(out.free_idx[a], observed_idx[b]);
        for (Index b = 0; b < nf; ++b) s_ff(a, b) = params.cov(out.free_idx[a], out.free_idx[b]);
    }

    Eigen::LLT<Matrix> llt(s_oo);
    if (llt.info() != Eigen::Success) throw ConditioningError("observed covariance block is singular");
    // W = L⁻¹ Σ_of, so Σ_fo Σ_oo⁻¹ Σ_of = WᵀW and Σ_fo Σ_oo⁻¹ d = Wᵀ L⁻¹ d.
    const Matrix w = llt.matrixL().solve(s_fo.transpose());
    const Vector u = llt.matrixL().solve(d);
    out.params.mean = mu_f + w.transpose() * u;
    out.params.cov = symmetrized(s_ff - w.transpose() * w);
    return out;
}

double log_density(const GaussianParams& params, const Vector& x) {
    if (x.size() != params.dim() || params.cov.rows() != params.dim())
        throw DimensionMismatch("log_density: dimension mismatch");
    const CholeskyFactor f = cholesky(params.cov);
    const Vector z = f.lower.triangularView<Eigen::Lower>().solve(x - params.mean);
    const double n = static_cast<double>(params.dim());
    return -0.5 * n * std::log(2.0 * std::numbers::pi) - 0.5 * f.log_det() - 0.5 * z.squaredNorm();
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

}  // namespace linkcorr
