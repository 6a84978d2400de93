#pragma once

#include <vector>

#include <json.hpp>

#include "linkcorr/gaussian.hpp"

namespace linkcorr {

/// Gaussian-inverse-Wishart hyperparameters:
///   Σ ~ IW(psi0, nu0),  μ | Σ ~ N(mu0, Σ / lambda0).
struct NIWParams {
    Vector mu0;
    double lambda0 = 1.0;
    Matrix psi0;
    double nu0 = 1.0;

    Index dim() const { return mu0.size(); }
    /// Throws std::domain_error / DimensionMismatch / NotPositiveDefinite.
    void validate() const;
};

/// mu0 = 0, lambda0 = 10, psi0 = I, nu0 = n + 2.
NIWParams default_prior(Index n);

/// Conjugate update given m complete vectors (the columns of samples).
NIWParams posterior_update(const NIWParams& prior, const Matrix& samples);
NIWParams posterior_update(const NIWParams& prior, const std::vector<Vector>& samples);

/// Σ ~ IW(psi, nu) by the Bartlett construction; only triangular solves, no explicit inverse.
Matrix sample_inverse_wishart(const Matrix& psi, double nu, Rng& rng);

/// Joint (μ, Σ) draw.
GaussianParams sample_niw(const NIWParams& params, Rng& rng);

nlohmann::json niw_to_json(const NIWParams& p);
NIWParams niw_from_json(const nlohmann::json& j);

}  // namespace linkcorr
