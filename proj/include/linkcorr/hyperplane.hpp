#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "linkcorr/gaussian.hpp"
#include "linkcorr/observation.hpp"

namespace linkcorr {

struct TruncationOptions {
    JitterPolicy jitter{};
    double max_condition = 1e12;  // Gram condition estimate above this counts as singular
    unsigned threads = 1;
};

/// Validated observations with their alignment patterns deduplicated.
class AlignmentPlan {
public:
    /// Throws std::invalid_argument naming the first invalid observation, or
    /// DimensionMismatch if the observations disagree on n.
    explicit AlignmentPlan(std::span<const Observation> observations);

    int n_links() const { return n_links_; }
    std::size_t size() const { return pattern_of_.size(); }
    std::size_t pattern_of(std::size_t obs) const { return pattern_of_[obs]; }
    const std::vector<Alignment>& patterns() const { return patterns_; }

private:
    int n_links_ = 0;
    std::vector<Alignment> patterns_;
    std::vector<std::size_t> pattern_of_;
};

/// Draws from N(μ, Σ) restricted to {x : G·x = r}:
///   y ~ N(μ, Σ);  solve (GΣGᵀ)·α = r − G·y;  x = y + ΣGᵀ·α.
/// The Cholesky factors of Σ and of each distinct GΣGᵀ are computed once at
/// construction and shared by every draw.
class TruncatedSampler {
public:
    /// Throws SingularConstraint when some GΣGᵀ stays singular (or its
    /// condition estimate exceeds max_condition) after one jitter repair of Σ.
    TruncatedSampler(const GaussianParams& params, const AlignmentPlan& plan, const TruncationOptions& options = {});

    /// obs must be the plan's observation with index obs_index.
    Vector sample(const Observation& obs, std::size_t obs_index, Rng& rng) const;

    /// Diagonal jitter added to Σ (0 when none was needed).
    double jitter() const { return jitter_; }

private:
    struct PatternFactor {
        Matrix sigma_gt;  // Σ·Gᵀ
        Matrix gram_lower;
    };

    bool factor_patterns(double& worst_condition, std::size_t& worst_pattern);

    const AlignmentPlan& plan_;
    TruncationOptions options_;
    Vector mean_;
    Matrix cov_;
    CholeskyFactor cov_factor_;
    double jitter_ = 0.0;
    std::vector<PatternFactor> factors_;
};

/// One draw for a single observation.
Vector sample_truncated(const GaussianParams& params, const Observation& observation, Rng& rng,
                        const TruncationOptions& options = {});

/// Independent draws for every observation, in input order. One 64-bit key is
/// taken from rng and observation i draws from the substream (key, i), so the
/// result does not depend on options.threads.
std::vector<Vector> sample_truncated_batch(const GaussianParams& params, std::span<const Observation> observations,
                                           Rng& rng, const TruncationOptions& options = {});

/// Runs body(i) for i in [0, count) on up to `threads` workers. The first
/// exception by index order is rethrown after all workers finish.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

}  // namespace linkcorr
