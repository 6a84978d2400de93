#pragma once

#include <iosfwd>
#include <utility>
#include <vector>

#include "linkcorr/gaussian.hpp"
#include "linkcorr/gibbs.hpp"
#include "linkcorr/rng.hpp"

namespace linkcorr {

enum class PredictiveMode {
    mixture,  // mix the conditional Gaussians of every retained (μ, Σ) draw
    plugin,   // condition the single posterior-mean (μ, Σ)
};

/// Mixture of Gaussians over a set of links; row k of the component
/// matrices belongs to posterior draw k.
struct LinkForecast {
    std::vector<Index> links;  // 0-based
    Vector mean;               // mixture mean per link
    Vector variance;           // mean of conditional variances + variance of conditional means
    Vector model_mean;         // average unconditional μ per link
    Matrix component_means;
    Matrix component_vars;
    Matrix samples;  // one conditional draw per component

    /// Conditional mean minus model mean per link.
    Vector mean_correction() const { return mean - model_mean; }
    /// Quantile of the predictive mixture of link column `k` (bisection on its CDF).
    double quantile(Index k, double p) const;
};

struct TripForecast {
    double mean = 0.0;
    double variance = 0.0;
    Vector component_means;
    Vector component_vars;
    Vector samples;

    double quantile(double p) const;
};

/// Precomputes, per posterior draw, the gain Σ_fo·Σ_oo⁻¹ and the conditional
/// covariance of the forecast links, so repeated forecasts with the same index
/// sets only cost a matrix-vector product per draw.
class Forecaster {
public:
    /// Index sets must be disjoint and within 0..n-1; observed must be non-empty.
    /// Throws ConditioningError when an observed block is singular.
    Forecaster(const PosteriorChain& chain, std::vector<Index> observed_idx, std::vector<Index> forecast_idx,
               PredictiveMode mode = PredictiveMode::mixture);

    const std::vector<Index>& observed() const { return observed_; }
    const std::vector<Index>& forecast() const { return forecast_; }
    std::size_t components() const { return draws_.size(); }

    LinkForecast forecast_links(const Vector& observed_vals, Rng& rng) const;

    /// Sum over trip_links; observed links contribute their observed values.
    /// trip_links must be drawn from observed ∪ forecast links.
    TripForecast forecast_trip(const Vector& observed_vals, const std::vector<Index>& trip_links, Rng& rng) const;

    /// Mixture-mean point forecast of the forecast links (no sampling).
    Vector point_forecast(const Vector& observed_vals) const;

private:
    struct Component {
        Vector mean_forecast;
        Vector mean_observed;
        Matrix gain;
        Matrix cond_cov;
        Matrix cond_lower;
    };
    std::vector<Index> observed_;
    std::vector<Index> forecast_;
    std::vector<Component> draws_;
};

LinkForecast forecast_links(const PosteriorChain& chain, const std::vector<Index>& observed_idx,
                            const Vector& observed_vals, const std::vector<Index>& forecast_idx, Rng& rng,
                            PredictiveMode mode = PredictiveMode::mixture);

TripForecast forecast_trip(const PosteriorChain& chain, const std::vector<Index>& observed_idx,
                           const Vector& observed_vals, const std::vector<Index>& trip_links, Rng& rng,
                           PredictiveMode mode = PredictiveMode::mixture);

/// Entrywise training mean restricted to forecast_idx; columns of train are complete vectors.
Vector historical_average(const Matrix& train, const std::vector<Index>& forecast_idx);
Vector historical_average(const std::vector<Vector>& train, const std::vector<Index>& forecast_idx);

struct Score {
    double rmse = 0.0;
    double mape = 0.0;
    std::vector<std::pair<Index, Index>> excluded;  // entries left out of MAPE (lenient mode)
};

/// RMSE and MAPE over all entries. A true value with |y| < 1e-9 throws
/// std::domain_error listing the entries, unless lenient, which excludes them from MAPE.
Score score(const Matrix& y_true, const Matrix& y_pred, bool lenient = false);

/// Columns: link, mean, std, q025, q975 (1-based link numbers). `case_id` >= 0 prepends a case column.
void write_forecast_header(std::ostream& out, bool with_case);
void write_forecast_rows(std::ostream& out, const LinkForecast& f, long case_id = -1);

/// Normal CDF mixture quantile used by the forecast summaries.
double mixture_quantile(const Eigen::Ref<const Vector>& means, const Eigen::Ref<const Vector>& vars, double p);

}  // namespace linkcorr
