#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "linkcorr/gaussian.hpp"
#include "linkcorr/niw.hpp"
#include "linkcorr/observation.hpp"

namespace linkcorr {

struct GibbsConfig {
    std::size_t burn_in = 10000;  // k1
    std::size_t retained = 5000;  // k2
    std::uint64_t seed = 0;
    std::size_t thin = 1;
    bool jitter = true;
    /// Subtract per-link reference means before sampling and add them back to
    /// every μ draw, so the prior mean acts on deviations from the data's
    /// level rather than on raw travel times.
    bool center = true;
    unsigned threads = 1;

    /// Throws std::invalid_argument when k2 or thin is zero.
    void validate() const;
    std::size_t chain_length() const { return (retained + thin - 1) / thin; }
};

nlohmann::json gibbs_config_to_json(const GibbsConfig& c);
GibbsConfig gibbs_config_from_json(const nlohmann::json& j, GibbsConfig defaults = {});

struct PosteriorChain {
    std::vector<CorrelationMatrix> corr_samples;
    std::vector<Matrix> cov_samples;
    std::vector<Vector> mean_samples;
    GibbsConfig config;
    NIWParams prior;
    /// Reference means subtracted before sampling (zero when centering is off).
    Vector offset;

    std::size_t size() const { return cov_samples.size(); }
    Index dim() const { return prior.dim(); }
};

/// Per-link reference level: mean of the singleton recordings of that link,
/// else the mean equal share of the ragged sums covering it, else fallback.
Vector reference_means(std::span<const Observation> observations, const Vector& fallback);

/// Alternates (μ, Σ) ~ NIW posterior given the latent complete vectors and
/// latent vectors ~ hyperplane-truncated Gaussians given (μ, Σ); keeps every
/// thin-th draw after k1 burn-in iterations. Bit-reproducible for a fixed seed
/// regardless of config.threads.
PosteriorChain run_gibbs(std::span<const Observation> observations, const NIWParams& prior,
                         const GibbsConfig& config);

/// Entrywise mean of the correlation draws, diagonal reset to 1.
CorrelationMatrix posterior_mean_corr(const PosteriorChain& chain);

/// Posterior means of μ and Σ.
GaussianParams posterior_mean_params(const PosteriorChain& chain);

// Directory layout: config.json, prior.json, manifest.json and samples.bin.
// samples.bin holds, for each draw in order, μ (n doubles), Σ (n*n, row
// major) and C (n*n, row major) as little-endian IEEE-754 doubles.
void save_chain(const PosteriorChain& chain, const std::filesystem::path& dir);
PosteriorChain load_chain(const std::filesystem::path& dir);

}  // namespace linkcorr
