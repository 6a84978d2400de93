#include "linkcorr/niw.hpp"

#include <cmath>
#include <stdexcept>

#include "linkcorr/errors.hpp"
#include "linkcorr/matrix_io.hpp"

namespace linkcorr {

void NIWParams::validate() const {
    const Index n = dim();
    if (psi0.rows() != n || psi0.cols() != n) throw DimensionMismatch("NIW: psi0 does not match mu0");
    if (!(lambda0 > 0.0)) throw std::domain_error("NIW: lambda0 must be positive");
    if (!(nu0 >= static_cast<double>(n))) throw std::domain_error("NIW: nu0 must be at least n");
    cholesky(psi0);
}

NIWParams default_prior(Index n) {
    if (n < 1) throw std::invalid_argument("default_prior: n must be positive");
    return NIWParams{Vector::Zero(n), 10.0, Matrix::Identity(n, n), static_cast<double>(n) + 2.0};
}

NIWParams posterior_update(const NIWParams& prior, const Matrix& samples) {
    const Index n = prior.dim();
    const Index m = samples.cols();
    if (m == 0) return prior;
    if (samples.rows() != n) throw DimensionMismatch("posterior_update: sample length differs from prior dimension");

    const double md = static_cast<double>(m);
    const Vector xbar = samples.rowwise().sum() / md;
    const Matrix centered = samples.colwise() - xbar;
    const Matrix scatter = centered * centered.transpose();
    const Vector shift = xbar - prior.mu0;

    NIWParams post;
    post.lambda0 = prior.lambda0 + md;
    post.nu0 = prior.nu0 + md;
    post.mu0 = (prior.lambda0 * prior.mu0 + md * xbar) / post.lambda0;
    post.psi0 = symmetrized(prior.psi0 + scatter + (prior.lambda0 * md / post.lambda0) * (shift * shift.transpose()));
    return post;
}

NIWParams posterior_update(const NIWParams& prior, const std::vector<Vector>& samples) {
    Matrix x(prior.dim(), static_cast<Index>(samples.size()));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].size() != prior.dim())
            throw DimensionMismatch("posterior_update: sample " + std::to_string(i) + " has the wrong length");
        x.col(static_cast<Index>(i)) = samples[i];
    }
    return posterior_update(prior, x);
}

namespace {

// B with Σ = BᵀB ~ IW(psi, nu).
Matrix inverse_wishart_factor(const Matrix& psi, double nu, Rng& rng) {
    const Index n = psi.rows();
    // Wishart(psi⁻¹, nu) = (L⁻ᵀA)(L⁻ᵀA)ᵀ with psi = L·Lᵀ and A the Bartlett factor,
    // so its inverse is BᵀB with B = A⁻¹·Lᵀ.
    const CholeskyFactor psi_factor = cholesky(psi);
    Matrix a = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        a(i, i) = std::sqrt(rng.chi_squared(nu - static_cast<double>(i)));
        for (Index j = 0; j < i; ++j) a(i, j) = rng.normal();
    }
    return a.triangularView<Eigen::Lower>().solve(Matrix(psi_factor.lower.transpose()));
}

}  // namespace

Matrix sample_inverse_wishart(const Matrix& psi, double nu, Rng& rng) {
    const Matrix b = inverse_wishart_factor(psi, nu, rng);
    return symmetrized(b.transpose() * b);
}

GaussianParams sample_niw(const NIWParams& params, Rng& rng) {
    if (params.psi0.rows() != params.dim()) throw DimensionMismatch("sample_niw: psi0 does not match mu0");
    const Matrix b = inverse_wishart_factor(params.psi0, params.nu0, rng);
    GaussianParams out;
    out.cov = symmetrized(b.transpose() * b);
    // Bᵀz ~ N(0, BᵀB) = N(0, Σ).
    const Index n = params.dim();
    Vector z(n);
    for (Index i = 0; i < n; ++i) z(i) = rng.normal();
    out.mean = params.mu0 + b.transpose() * z / std::sqrt(params.lambda0);
    return out;
}

nlohmann::json niw_to_json(const NIWParams& p) {
    return {{"mu0", vector_to_json(p.mu0)}, {"lambda0", p.lambda0}, {"psi0", matrix_to_json(p.psi0)}, {"nu0", p.nu0}};
}

NIWParams niw_from_json(const nlohmann::json& j) {
    NIWParams p{vector_from_json(j.at("mu0")), j.at("lambda0").get<double>(), matrix_from_json(j.at("psi0")),
                j.at("nu0").get<double>()};
    p.validate();
    return p;
}

}  // namespace linkcorr
