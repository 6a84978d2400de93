#pragma once

#include <iosfwd>
#include <span>
#include <utility>
#include <vector>

#include "linkcorr/gaussian.hpp"
#include "linkcorr/gibbs.hpp"

namespace linkcorr {

/// Empirical quantile with linear interpolation between order statistics at
/// plotting positions (k−1)/(N−1), k = 1..N.
double quantile(std::span<const double> samples, double p);

struct Interval {
    double low = 0.0;
    double high = 0.0;
};

/// Equal-tailed interval: quantiles (1−level)/2 and 1−(1−level)/2.
/// Needs at least 2 samples and level in (0, 1).
Interval credible_interval(std::span<const double> samples, double level);

struct RopeSettings {
    double low = -0.05;
    double high = 0.05;
    double reject_threshold = 0.05;
    double accept_threshold = 0.95;
    double level = 0.95;
};

enum class RopeVerdict { reject_null, accept_null, undecided };
const char* to_string(RopeVerdict v);

struct RopeDecision {
    int i = 0;  // 0-based entry
    int j = 0;
    double posterior_mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double fraction_in_rope = 0.0;
    RopeVerdict verdict = RopeVerdict::undecided;
};

/// Share of samples strictly inside (low, high); reject_null below the reject
/// threshold, accept_null above the accept threshold, undecided otherwise.
/// Fills every field except the entry indices.
RopeDecision rope_test(std::span<const double> samples, const RopeSettings& rope = {});

/// One decision per off-diagonal entry i < j of the chain's correlation draws.
std::vector<RopeDecision> rope_decisions(const PosteriorChain& chain, const RopeSettings& rope = {});

/// Samples of correlation entry (i, j) across the chain.
std::vector<double> corr_entry_samples(const PosteriorChain& chain, Index i, Index j);

/// D(p ‖ q) with p the reference and q the estimate.
double kl_gaussian(const GaussianParams& p, const GaussianParams& q);

/// Zeroes every off-diagonal entry whose verdict is not reject_null.
/// Throws std::invalid_argument if some entry i < j has no decision.
CorrelationMatrix threshold_display(const CorrelationMatrix& corr, const std::vector<RopeDecision>& decisions);

/// Columns: i, j, mean, ci_low, ci_high, fraction_in_rope, verdict (1-based link numbers).
void write_decisions_csv(std::ostream& out, const std::vector<RopeDecision>& decisions);

/// Split-chain potential scale reduction (Gelman et al.) of one scalar over
/// several chains of equal length; each chain is split in half.
double split_rhat(const std::vector<std::vector<double>>& chains);

}  // namespace linkcorr
