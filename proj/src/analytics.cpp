#include "linkcorr/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "linkcorr/errors.hpp"
#include "linkcorr/matrix_io.hpp"

namespace linkcorr {

namespace {

double sorted_quantile(const std::vector<double>& sorted, double p) {
    const double h = p * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double quantile(std::span<const double> samples, double p) {
    if (samples.empty()) throw std::invalid_argument("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0)) throw std::domain_error("quantile level outside [0, 1]");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    return sorted_quantile(sorted, p);
}

Interval credible_interval(std::span<const double> samples, double level) {
    if (samples.size() < 2) throw std::invalid_argument("credible_interval needs at least 2 samples");
    if (!(level > 0.0 && level < 1.0)) throw std::domain_error("credible level must lie in (0, 1)");
    const double tail = 0.5 * (1.0 - level);
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    return {sorted_quantile(sorted, tail), sorted_quantile(sorted, 1.0 - tail)};
}

const char* to_string(RopeVerdict v) {
    switch (v) {
        case RopeVerdict::reject_null: return "reject_null";
        case RopeVerdict::accept_null: return "accept_null";
        case RopeVerdict::undecided: return "undecided";
    }
    return "?";
}

RopeDecision rope_test(std::span<const double> samples, const RopeSettings& rope) {
    if (!(rope.low < rope.high)) throw std::invalid_argument("ROPE low bound must be below its high bound");
    if (samples.empty()) throw std::invalid_argument("rope_test of an empty sample");
    RopeDecision d;
    std::size_t inside = 0;
    double sum = 0.0;
    for (double s : samples) {
        sum += s;
        if (s > rope.low && s < rope.high) ++inside;
    }
    d.posterior_mean = sum / static_cast<double>(samples.size());
    d.fraction_in_rope = static_cast<double>(inside) / static_cast<double>(samples.size());
    if (samples.size() >= 2) {
        const Interval ci = credible_interval(samples, rope.level);
        d.ci_low = ci.low;
        d.ci_high = ci.high;
    } else {
        d.ci_low = d.ci_high = samples.front();
    }
    if (d.fraction_in_rope < rope.reject_threshold)
        d.verdict = RopeVerdict::reject_null;
    else if (d.fraction_in_rope > rope.accept_threshold)
        d.verdict = RopeVerdict::accept_null;
    else
        d.verdict = RopeVerdict::undecided;
    return d;
}

std::vector<double> corr_entry_samples(const PosteriorChain& chain, Index i, Index j) {
    std::vector<double> out;
    out.reserve(chain.corr_samples.size());
    for (const auto& c : chain.corr_samples) out.push_back(c(i, j));
    return out;
}

std::vector<RopeDecision> rope_decisions(const PosteriorChain& chain, const RopeSettings& rope) {
    std::vector<RopeDecision> out;
    const Index n = chain.dim();
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const auto samples = corr_entry_samples(chain, i, j);
            RopeDecision d = rope_test(samples, rope);
            d.i = static_cast<int>(i);
            d.j = static_cast<int>(j);
            out.push_back(d);
        }
    }
    return out;
}

double kl_gaussian(const GaussianParams& p, const GaussianParams& q) {
    const Index n = p.dim();
    if (q.dim() != n || p.cov.rows() != n || q.cov.rows() != n)
        throw DimensionMismatch("kl_gaussian: dimension mismatch");
    const CholeskyFactor lp = cholesky(p.cov);
    const CholeskyFactor lq = cholesky(q.cov);
    const auto lower_q = lq.lower.triangularView<Eigen::Lower>();
    // tr(Σq⁻¹Σp) = ‖Lq⁻¹Lp‖_F²
    const Matrix m = lower_q.solve(lp.lower);
    const Vector diff = lower_q.solve(Vector(q.mean - p.mean));
    const double kl =
        0.5 * (lq.log_det() - lp.log_det() - static_cast<double>(n) + m.squaredNorm() + diff.squaredNorm());
    return std::max(kl, 0.0);
}

CorrelationMatrix threshold_display(const CorrelationMatrix& corr, const std::vector<RopeDecision>& decisions) {
    const Index n = corr.dim();
    std::vector<int> verdict(static_cast<std::size_t>(n * n), -1);
    for (const auto& d : decisions) {
        if (d.i < 0 || d.j < 0 || d.i >= n || d.j >= n) throw std::out_of_range("decision entry outside the matrix");
        const int keep = d.verdict == RopeVerdict::reject_null ? 1 : 0;
        verdict[static_cast<std::size_t>(d.i * n + d.j)] = keep;
        verdict[static_cast<std::size_t>(d.j * n + d.i)] = keep;
    }
    Matrix out = corr.matrix();
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const int keep = verdict[static_cast<std::size_t>(i * n + j)];
            if (keep < 0)
                throw std::invalid_argument("threshold_display: no decision for entry (" + std::to_string(i + 1) + ", " +
                                            std::to_string(j + 1) + ")");
            if (!keep) out(i, j) = out(j, i) = 0.0;
        }
    }
    return CorrelationMatrix(std::move(out));
}

void write_decisions_csv(std::ostream& out, const std::vector<RopeDecision>& decisions) {
    out << "i,j,mean,ci_low,ci_high,fraction_in_rope,verdict\n";
    for (const auto& d : decisions) {
        out << d.i + 1 << ',' << d.j + 1 << ',' << format_double(d.posterior_mean) << ',' << format_double(d.ci_low)
            << ',' << format_double(d.ci_high) << ',' << format_double(d.fraction_in_rope) << ','
            << to_string(d.verdict) << '\n';
    }
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
    if (chains.empty()) throw std::invalid_argument("split_rhat: no chains");
    const std::size_t len = chains.front().size();
    const std::size_t half = len / 2;
    if (half < 2) throw std::invalid_argument("split_rhat: chains too short");
    std::vector<std::span<const double>> parts;
    for (const auto& c : chains) {
        if (c.size() != len) throw std::invalid_argument("split_rhat: chains differ in length");
        parts.emplace_back(c.data(), half);
        parts.emplace_back(c.data() + (len - half), half);
    }
    const double n = static_cast<double>(half);
    const double m = static_cast<double>(parts.size());
    std::vector<double> means;
    double within = 0.0;
    for (const auto& part : parts) {
        double mean = 0.0;
        for (double v : part) mean += v;
        mean /= n;
        double var = 0.0;
        for (double v : part) var += (v - mean) * (v - mean);
        within += var / (n - 1.0);
        means.push_back(mean);
    }
    within /= m;
    double grand = 0.0;
    for (double v : means) grand += v;
    grand /= m;
    double between = 0.0;
    for (double v : means) between += (v - grand) * (v - grand);
    between *= n / (m - 1.0);
    if (within <= 0.0) return between <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    const double pooled = (n - 1.0) / n * within + between / n;
    return std::sqrt(pooled / within);
}

}  // namespace linkcorr
