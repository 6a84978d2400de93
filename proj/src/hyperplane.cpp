#include "linkcorr/hyperplane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <exception>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "linkcorr/errors.hpp"

namespace linkcorr {

AlignmentPlan::AlignmentPlan(std::span<const Observation> observations) {
    if (observations.empty()) return;
    n_links_ = observations.front().n_links();
    std::map<Alignment, std::size_t> index;
    pattern_of_.reserve(observations.size());
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const Observation& obs = observations[i];
        if (obs.n_links() != n_links_)
            throw DimensionMismatch("observation " + std::to_string(i + 1) + " has " + std::to_string(obs.n_links()) +
                                    " links, expected " + std::to_string(n_links_));
        const auto violations = validate(obs);
        if (!violations.empty())
            throw std::invalid_argument("observation " + std::to_string(i + 1) + ": " + violations.front().message);
        auto [it, inserted] = index.try_emplace(obs.alignment, patterns_.size());
        if (inserted) patterns_.push_back(obs.alignment);
        pattern_of_.push_back(it->second);
    }
}

TruncatedSampler::TruncatedSampler(const GaussianParams& params, const AlignmentPlan& plan,
                                   const TruncationOptions& options)
    : plan_(plan), options_(options), mean_(params.mean), cov_(params.cov) {
    if (params.dim() != plan.n_links() && plan.size() > 0)
        throw DimensionMismatch("sampler: Gaussian dimension differs from the observations' link count");
    cov_factor_ = cholesky(cov_, options_.jitter);
    if (cov_factor_.jitter > 0.0) {
        jitter_ = cov_factor_.jitter;
        cov_.diagonal().array() += jitter_;
    }

    double condition = 0.0;
    std::size_t bad = 0;
    if (factor_patterns(condition, bad)) return;
    if (options_.jitter.enabled) {
        const double eps = std::max(options_.jitter.relative * cov_.trace() / static_cast<double>(cov_.rows()),
                                    options_.jitter.relative);
        cov_.diagonal().array() += eps;
        jitter_ += eps;
        cov_factor_ = cholesky(cov_);
        if (factor_patterns(condition, bad)) return;
    }
    throw SingularConstraint("G*Sigma*G^T is singular for alignment pattern " + std::to_string(bad) +
                                 " (condition estimate " + std::to_string(condition) + ")",
                             condition);
}

bool TruncatedSampler::factor_patterns(double& worst_condition, std::size_t& worst_pattern) {
    factors_.clear();
    factors_.reserve(plan_.patterns().size());
    for (std::size_t p = 0; p < plan_.patterns().size(); ++p) {
        const Alignment& a = plan_.patterns()[p];
        const Index k = a.row_count();
        PatternFactor f;
        f.sigma_gt.resize(cov_.rows(), k);
        for (Index r = 0; r < k; ++r) {
            auto col = f.sigma_gt.col(r);
            col.setZero();
            for (int c : a.rows[static_cast<std::size_t>(r)]) col += cov_.col(c);
        }
        Matrix gram(k, k);
        for (Index r = 0; r < k; ++r) {
            for (Index s = 0; s < k; ++s) {
                double v = 0.0;
                for (int c : a.rows[static_cast<std::size_t>(r)]) v += f.sigma_gt(c, s);
                gram(r, s) = v;
            }
        }
        Eigen::LLT<Matrix> llt(symmetrized(gram));
        double condition = std::numeric_limits<double>::infinity();
        if (llt.info() == Eigen::Success) {
            const Vector d = Matrix(llt.matrixL()).diagonal();
            if (d.allFinite() && d.minCoeff() > 0.0) condition = std::pow(d.maxCoeff() / d.minCoeff(), 2);
        }
        if (!(condition <= options_.max_condition)) {
            worst_condition = condition;
            worst_pattern = p;
            return false;
        }
        f.gram_lower = llt.matrixL();
        factors_.push_back(std::move(f));
    }
    return true;
}

Vector TruncatedSampler::sample(const Observation& obs, std::size_t obs_index, Rng& rng) const {
    const PatternFactor& f = factors_[plan_.pattern_of(obs_index)];
    const auto& rows = obs.alignment.rows;
    const Vector y = sample_gaussian(mean_, cov_factor_, rng);

    Vector residual(static_cast<Index>(rows.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double gy = 0.0;
        for (int c : rows[r]) gy += y(c);
        residual(static_cast<Index>(r)) = obs.recording(static_cast<Index>(r)) - gy;
    }
    const auto lower = f.gram_lower.triangularView<Eigen::Lower>();
    Vector alpha = lower.solve(residual);
    lower.transpose().solveInPlace(alpha);
    Vector x = y + f.sigma_gt * alpha;

    // Singleton rows pin a coordinate; store the recorded value itself rather than y plus a rounded correction.
    for (std::size_t r = 0; r < rows.size(); ++r)
        if (rows[r].size() == 1) x(rows[r].front()) = obs.recording(static_cast<Index>(r));
    return x;
}

Vector sample_truncated(const GaussianParams& params, const Observation& observation, Rng& rng,
                        const TruncationOptions& options) {
    const AlignmentPlan plan(std::span<const Observation>(&observation, 1));
    const TruncatedSampler sampler(params, plan, options);
    return sampler.sample(observation, 0, rng);
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::mutex mutex;
    std::size_t failed_index = count;
    std::exception_ptr failure;
    {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&, w] {
                for (std::size_t i = w; i < count; i += workers) {
                    try {
                        body(i);
                    } catch (...) {
                        std::lock_guard lock(mutex);
                        if (i < failed_index) {
                            failed_index = i;
                            failure = std::current_exception();
                        }
                        return;
                    }
                }
            });
        }
    }
    if (failure) std::rethrow_exception(failure);
}

std::vector<Vector> sample_truncated_batch(const GaussianParams& params, std::span<const Observation> observations,
                                           Rng& rng, const TruncationOptions& options) {
    const std::uint64_t key = rng();
    const AlignmentPlan plan(observations);
    const TruncatedSampler sampler(params, plan, options);
    std::vector<Vector> out(observations.size());
    parallel_for(observations.size(), options.threads, [&](std::size_t i) {
        Rng stream = Rng::substream(key, {i});
        out[i] = sampler.sample(observations[i], i, stream);
    });
    return out;
}

}  // namespace linkcorr
