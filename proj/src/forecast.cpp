#include "linkcorr/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>

#include "linkcorr/errors.hpp"
#include "linkcorr/matrix_io.hpp"

namespace linkcorr {

namespace {

void check_indices(const std::vector<Index>& idx, Index n, const char* what) {
    std::set<Index> seen;
    for (Index k : idx) {
        if (k < 0 || k >= n) throw std::out_of_range(std::string(what) + " link outside the chain's links");
        if (!seen.insert(k).second) throw std::invalid_argument(std::string(what) + " links contain duplicates");
    }
}

double mixture_cdf(const Eigen::Ref<const Vector>& means, const Eigen::Ref<const Vector>& vars, double x) {
    double total = 0.0;
    for (Index k = 0; k < means.size(); ++k) {
        if (vars(k) > 0.0)
            total += 0.5 * std::erfc(-(x - means(k)) / std::sqrt(2.0 * vars(k)));
        else
            total += x >= means(k) ? 1.0 : 0.0;
    }
    return total / static_cast<double>(means.size());
}

}  // namespace

double mixture_quantile(const Eigen::Ref<const Vector>& means, const Eigen::Ref<const Vector>& vars, double p) {
    if (means.size() == 0 || means.size() != vars.size()) throw std::invalid_argument("mixture_quantile: bad mixture");
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("mixture_quantile: p must lie in (0, 1)");
    const Vector sd = vars.cwiseMax(0.0).cwiseSqrt();
    double lo = (means - 10.0 * sd).minCoeff();
    double hi = (means + 10.0 * sd).maxCoeff();
    if (lo == hi) return lo;
    for (int iter = 0; iter < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi)); ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (mixture_cdf(means, vars, mid) < p)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double LinkForecast::quantile(Index k, double p) const {
    return mixture_quantile(component_means.col(k), component_vars.col(k), p);
}

double TripForecast::quantile(double p) const { return mixture_quantile(component_means, component_vars, p); }

Forecaster::Forecaster(const PosteriorChain& chain, std::vector<Index> observed_idx, std::vector<Index> forecast_idx,
                       PredictiveMode mode)
    : observed_(std::move(observed_idx)), forecast_(std::move(forecast_idx)) {
    const Index n = chain.dim();
    if (chain.size() == 0) throw std::invalid_argument("forecast: empty posterior chain");
    if (observed_.empty()) throw std::invalid_argument("forecast: no observed links");
    check_indices(observed_, n, "observed");
    check_indices(forecast_, n, "forecast");
    for (Index k : forecast_)
        if (std::find(observed_.begin(), observed_.end(), k) != observed_.end())
            throw std::invalid_argument("forecast: observed and forecast links overlap");

    std::vector<GaussianParams> params;
    if (mode == PredictiveMode::plugin) {
        params.push_back(posterior_mean_params(chain));
    } else {
        params.reserve(chain.size());
        for (std::size_t k = 0; k < chain.size(); ++k) params.push_back({chain.mean_samples[k], chain.cov_samples[k]});
    }

    const Index no = static_cast<Index>(observed_.size());
    const Index nf = static_cast<Index>(forecast_.size());
    draws_.reserve(params.size());
    for (std::size_t k = 0; k < params.size(); ++k) {
        const GaussianParams& p = params[k];
        Component c;
        c.mean_forecast.resize(nf);
        c.mean_observed.resize(no);
        Matrix s_oo(no, no), s_of(no, nf), s_ff(nf, nf);
        for (Index a = 0; a < no; ++a) {
            c.mean_observed(a) = p.mean(observed_[a]);
            for (Index b = 0; b < no; ++b) s_oo(a, b) = p.cov(observed_[a], observed_[b]);
            for (Index b = 0; b < nf; ++b) s_of(a, b) = p.cov(observed_[a], forecast_[b]);
        }
        for (Index a = 0; a < nf; ++a) {
            c.mean_forecast(a) = p.mean(forecast_[a]);
            for (Index b = 0; b < nf; ++b) s_ff(a, b) = p.cov(forecast_[a], forecast_[b]);
        }
        Eigen::LLT<Matrix> llt(s_oo);
        if (llt.info() != Eigen::Success)
            throw ConditioningError("forecast: observed covariance block of draw " + std::to_string(k) + " is singular");
        const Matrix w = llt.matrixL().solve(s_of);
        c.gain = llt.matrixU().solve(w).transpose();
        c.cond_cov = symmetrized(s_ff - w.transpose() * w);
        if (nf > 0) c.cond_lower = cholesky(c.cond_cov, JitterPolicy{}).lower;
        draws_.push_back(std::move(c));
    }
}

Vector Forecaster::point_forecast(const Vector& observed_vals) const {
    if (observed_vals.size() != static_cast<Index>(observed_.size()))
        throw DimensionMismatch("forecast: observed values and observed links differ in length");
    Vector sum = Vector::Zero(static_cast<Index>(forecast_.size()));
    for (const auto& c : draws_) sum += c.mean_forecast + c.gain * (observed_vals - c.mean_observed);
    return sum / static_cast<double>(draws_.size());
}

LinkForecast Forecaster::forecast_links(const Vector& observed_vals, Rng& rng) const {
    if (observed_vals.size() != static_cast<Index>(observed_.size()))
        throw DimensionMismatch("forecast: observed values and observed links differ in length");
    if (forecast_.empty()) throw std::invalid_argument("forecast: no forecast links");
    const Index nf = static_cast<Index>(forecast_.size());
    const Index k = static_cast<Index>(draws_.size());
    const std::uint64_t key = rng();

    LinkForecast out;
    out.links = forecast_;
    out.component_means.resize(k, nf);
    out.component_vars.resize(k, nf);
    out.samples.resize(k, nf);
    out.model_mean = Vector::Zero(nf);
    for (Index d = 0; d < k; ++d) {
        const Component& c = draws_[static_cast<std::size_t>(d)];
        const Vector m = c.mean_forecast + c.gain * (observed_vals - c.mean_observed);
        out.component_means.row(d) = m.transpose();
        out.component_vars.row(d) = c.cond_cov.diagonal().cwiseMax(0.0).transpose();
        Rng stream = Rng::substream(key, {static_cast<std::uint64_t>(d)});
        Vector z(nf);
        for (Index a = 0; a < nf; ++a) z(a) = stream.normal();
        out.samples.row(d) = (m + c.cond_lower.triangularView<Eigen::Lower>() * z).transpose();
        out.model_mean += c.mean_forecast;
    }
    const double kd = static_cast<double>(k);
    out.model_mean /= kd;
    out.mean = out.component_means.colwise().mean().transpose();
    const Vector mean_var = out.component_vars.colwise().mean().transpose();
    const Matrix centered = out.component_means.rowwise() - out.mean.transpose();
    out.variance = mean_var + (centered.array().square().colwise().sum() / kd).matrix().transpose();
    return out;
}

TripForecast Forecaster::forecast_trip(const Vector& observed_vals, const std::vector<Index>& trip_links,
                                       Rng& rng) const {
    if (observed_vals.size() != static_cast<Index>(observed_.size()))
        throw DimensionMismatch("forecast: observed values and observed links differ in length");
    double observed_sum = 0.0;
    Vector weights = Vector::Zero(static_cast<Index>(forecast_.size()));
    std::set<Index> seen;
    for (Index link : trip_links) {
        if (!seen.insert(link).second) throw std::invalid_argument("trip links contain duplicates");
        const auto o = std::find(observed_.begin(), observed_.end(), link);
        if (o != observed_.end()) {
            observed_sum += observed_vals(o - observed_.begin());
            continue;
        }
        const auto f = std::find(forecast_.begin(), forecast_.end(), link);
        if (f == forecast_.end())
            throw std::invalid_argument("trip link " + std::to_string(link + 1) + " is neither observed nor forecast");
        weights(f - forecast_.begin()) = 1.0;
    }

    const Index k = static_cast<Index>(draws_.size());
    const std::uint64_t key = rng();
    TripForecast out;
    out.component_means.resize(k);
    out.component_vars.resize(k);
    out.samples.resize(k);
    for (Index d = 0; d < k; ++d) {
        const Component& c = draws_[static_cast<std::size_t>(d)];
        const double m =
            observed_sum + weights.dot(c.mean_forecast + c.gain * (observed_vals - c.mean_observed));
        const double v = std::max(weights.dot(c.cond_cov * weights), 0.0);
        out.component_means(d) = m;
        out.component_vars(d) = v;
        Rng stream = Rng::substream(key, {static_cast<std::uint64_t>(d)});
        out.samples(d) = m + std::sqrt(v) * stream.normal();
    }
    const double kd = static_cast<double>(k);
    out.mean = out.component_means.mean();
    out.variance = out.component_vars.mean() + (out.component_means.array() - out.mean).square().sum() / kd;
    return out;
}

LinkForecast forecast_links(const PosteriorChain& chain, const std::vector<Index>& observed_idx,
                            const Vector& observed_vals, const std::vector<Index>& forecast_idx, Rng& rng,
                            PredictiveMode mode) {
    if (forecast_idx.empty()) throw std::invalid_argument("forecast: no forecast links");
    return Forecaster(chain, observed_idx, forecast_idx, mode).forecast_links(observed_vals, rng);
}

TripForecast forecast_trip(const PosteriorChain& chain, const std::vector<Index>& observed_idx,
                           const Vector& observed_vals, const std::vector<Index>& trip_links, Rng& rng,
                           PredictiveMode mode) {
    std::vector<Index> unobserved;
    for (Index link : trip_links)
        if (std::find(observed_idx.begin(), observed_idx.end(), link) == observed_idx.end()) unobserved.push_back(link);
    std::sort(unobserved.begin(), unobserved.end());
    return Forecaster(chain, observed_idx, unobserved, mode).forecast_trip(observed_vals, trip_links, rng);
}

Vector historical_average(const Matrix& train, const std::vector<Index>& forecast_idx) {
    if (train.cols() == 0) throw std::invalid_argument("historical_average: empty training set");
    check_indices(forecast_idx, train.rows(), "forecast");
    Vector out(static_cast<Index>(forecast_idx.size()));
    for (std::size_t a = 0; a < forecast_idx.size(); ++a)
        out(static_cast<Index>(a)) = train.row(forecast_idx[a]).mean();
    return out;
}

Vector historical_average(const std::vector<Vector>& train, const std::vector<Index>& forecast_idx) {
    if (train.empty()) throw std::invalid_argument("historical_average: empty training set");
    Matrix m(train.front().size(), static_cast<Index>(train.size()));
    for (std::size_t k = 0; k < train.size(); ++k) {
        if (train[k].size() != m.rows()) throw DimensionMismatch("historical_average: ragged training vectors");
        m.col(static_cast<Index>(k)) = train[k];
    }
    return historical_average(m, forecast_idx);
}

Score score(const Matrix& y_true, const Matrix& y_pred, bool lenient) {
    if (y_true.rows() != y_pred.rows() || y_true.cols() != y_pred.cols())
        throw DimensionMismatch("score: shapes differ");
    if (y_true.size() == 0) throw std::invalid_argument("score: nothing to score");
    Score s;
    std::string zero_list;
    double mape_sum = 0.0;
    Index mape_count = 0;
    for (Index i = 0; i < y_true.rows(); ++i) {
        for (Index j = 0; j < y_true.cols(); ++j) {
            const double y = y_true(i, j);
            if (std::abs(y) < 1e-9) {
                s.excluded.emplace_back(i, j);
                zero_list += (zero_list.empty() ? "" : ", ") + ("(" + std::to_string(i) + ", " + std::to_string(j) + ")");
                continue;
            }
            mape_sum += std::abs((y - y_pred(i, j)) / y);
            ++mape_count;
        }
    }
    if (!s.excluded.empty() && !lenient) throw std::domain_error("MAPE undefined for zero true values at " + zero_list);
    s.rmse = std::sqrt((y_true - y_pred).squaredNorm() / static_cast<double>(y_true.size()));
    s.mape = mape_count > 0 ? mape_sum / static_cast<double>(mape_count) : 0.0;
    return s;
}

void write_forecast_header(std::ostream& out, bool with_case) {
    if (with_case) out << "case,";
    out << "link,mean,std,q025,q975\n";
}

void write_forecast_rows(std::ostream& out, const LinkForecast& f, long case_id) {
    for (std::size_t a = 0; a < f.links.size(); ++a) {
        const Index k = static_cast<Index>(a);
        if (case_id >= 0) out << case_id << ',';
        out << f.links[a] + 1 << ',' << format_double(f.mean(k)) << ',' << format_double(std::sqrt(f.variance(k)))
            << ',' << format_double(f.quantile(k, 0.025)) << ',' << format_double(f.quantile(k, 0.975)) << '\n';
    }
}

}  // namespace linkcorr
