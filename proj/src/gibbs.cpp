#include "linkcorr/gibbs.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <string>

#include "linkcorr/errors.hpp"
#include "linkcorr/hyperplane.hpp"
#include "linkcorr/matrix_io.hpp"

namespace linkcorr {

namespace {

constexpr std::uint64_t kNiwStream = 0;  // latent draw for observation i uses stream i + 1

std::uint64_t byteswap64(std::uint64_t v) { return __builtin_bswap64(v); }

std::string with_iteration(std::size_t iter, const char* what) {
    return "Gibbs iteration " + std::to_string(iter + 1) + ": " + what;
}

void check_constraints(const Matrix& latent, std::span<const Observation> observations, std::size_t iter) {
    for (std::size_t i = 0; i < observations.size(); ++i) {
        const Observation& obs = observations[i];
        const Vector gx = obs.alignment.apply(latent.col(static_cast<Index>(i)));
        const double scale = std::max(1.0, obs.recording.cwiseAbs().maxCoeff());
        if ((gx - obs.recording).cwiseAbs().maxCoeff() > 1e-8 * scale)
            throw std::logic_error(with_iteration(iter, "latent vector violates its observation constraint"));
    }
}

void write_doubles(std::ofstream& out, const double* data, std::size_t count) {
    if constexpr (std::endian::native == std::endian::little) {
        out.write(reinterpret_cast<const char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const auto bits = byteswap64(std::bit_cast<std::uint64_t>(data[i]));
            out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
        }
    }
}

void read_doubles(std::ifstream& in, double* data, std::size_t count) {
    in.read(reinterpret_cast<char*>(data), static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw FormatError("samples.bin is truncated");
    if constexpr (std::endian::native != std::endian::little) {
        for (std::size_t i = 0; i < count; ++i)
            data[i] = std::bit_cast<double>(byteswap64(std::bit_cast<std::uint64_t>(data[i])));
    }
}

// Row-major copy of a matrix.
std::vector<double> row_major(const Matrix& m) {
    std::vector<double> out(static_cast<std::size_t>(m.size()));
    std::size_t k = 0;
    for (Index i = 0; i < m.rows(); ++i)
        for (Index j = 0; j < m.cols(); ++j) out[k++] = m(i, j);
    return out;
}

}  // namespace

void GibbsConfig::validate() const {
    if (retained < 1) throw std::invalid_argument("GibbsConfig: k2 must be at least 1");
    if (thin < 1) throw std::invalid_argument("GibbsConfig: thin must be at least 1");
}

nlohmann::json gibbs_config_to_json(const GibbsConfig& c) {
    return {{"k1", c.burn_in}, {"k2", c.retained}, {"seed", c.seed},     {"thin", c.thin},
            {"jitter", c.jitter}, {"center", c.center}, {"threads", c.threads}};
}

GibbsConfig gibbs_config_from_json(const nlohmann::json& j, GibbsConfig c) {
    c.burn_in = j.value("k1", c.burn_in);
    c.retained = j.value("k2", c.retained);
    c.seed = j.value("seed", c.seed);
    c.thin = j.value("thin", c.thin);
    c.jitter = j.value("jitter", c.jitter);
    c.center = j.value("center", c.center);
    c.threads = j.value("threads", c.threads);
    c.validate();
    return c;
}

Vector reference_means(std::span<const Observation> observations, const Vector& fallback) {
    const Index n = fallback.size();
    Vector single_sum = Vector::Zero(n), share_sum = Vector::Zero(n);
    Eigen::VectorXi single_count = Eigen::VectorXi::Zero(n), share_count = Eigen::VectorXi::Zero(n);
    for (const Observation& obs : observations) {
        if (obs.n_links() != n) throw DimensionMismatch("reference_means: observation has the wrong link count");
        for (std::size_t r = 0; r < obs.alignment.rows.size(); ++r) {
            const auto& row = obs.alignment.rows[r];
            const double v = obs.recording(static_cast<Index>(r));
            for (int c : row) {
                if (row.size() == 1) {
                    single_sum(c) += v;
                    ++single_count(c);
                } else {
                    share_sum(c) += v / static_cast<double>(row.size());
                    ++share_count(c);
                }
            }
        }
    }
    Vector out = fallback;
    for (Index c = 0; c < n; ++c) {
        if (single_count(c) > 0)
            out(c) = single_sum(c) / single_count(c);
        else if (share_count(c) > 0)
            out(c) = share_sum(c) / share_count(c);
    }
    return out;
}

PosteriorChain run_gibbs(std::span<const Observation> observations, const NIWParams& prior,
                         const GibbsConfig& config) {
    config.validate();
    if (observations.empty()) throw std::invalid_argument("run_gibbs: no observations");
    prior.validate();
    const AlignmentPlan plan(observations);
    const Index n = plan.n_links();
    if (prior.dim() != n) throw DimensionMismatch("run_gibbs: prior dimension differs from the link count");

    const std::size_t m = observations.size();
    const Vector reference = reference_means(observations, prior.mu0);
    const Vector offset = config.center ? reference : Vector::Zero(n);

    // Work in deviations from offset: r' = r − G·offset.
    std::vector<Observation> shifted(observations.begin(), observations.end());
    Matrix latent(n, static_cast<Index>(m));
    for (std::size_t i = 0; i < m; ++i) {
        const Vector x0 = least_norm_fill(observations[i], reference);
        shifted[i].recording -= observations[i].alignment.apply(offset);
        latent.col(static_cast<Index>(i)) = x0 - offset;
    }

    PosteriorChain chain;
    chain.config = config;
    chain.prior = prior;
    chain.offset = offset;
    chain.cov_samples.reserve(config.chain_length());
    chain.corr_samples.reserve(config.chain_length());
    chain.mean_samples.reserve(config.chain_length());

    TruncationOptions options;
    options.jitter.enabled = config.jitter;
    options.threads = config.threads;

    const std::size_t total = config.burn_in + config.retained;
    for (std::size_t iter = 0; iter < total; ++iter) {
        GaussianParams draw;
        try {
            const NIWParams posterior = posterior_update(prior, latent);
            Rng rng = Rng::substream(config.seed, {iter, kNiwStream});
            draw = sample_niw(posterior, rng);
        } catch (const NotPositiveDefinite& e) {
            throw NotPositiveDefinite(with_iteration(iter, e.what()));
        }

        if (iter >= config.burn_in && (iter - config.burn_in) % config.thin == 0) {
            chain.mean_samples.push_back(draw.mean + offset);
            chain.corr_samples.push_back(cov_to_corr(draw.cov));
            chain.cov_samples.push_back(draw.cov);
        }
        if (iter + 1 == total) break;

        try {
            const TruncatedSampler sampler(draw, plan, options);
            parallel_for(m, config.threads, [&](std::size_t i) {
                Rng rng = Rng::substream(config.seed, {iter, i + 1});
                latent.col(static_cast<Index>(i)) = sampler.sample(shifted[i], i, rng);
            });
        } catch (const SingularConstraint& e) {
            throw SingularConstraint(with_iteration(iter, e.what()), e.condition_estimate());
        } catch (const NotPositiveDefinite& e) {
            throw NotPositiveDefinite(with_iteration(iter, e.what()));
        }
        if (iter % 100 == 0) check_constraints(latent, shifted, iter);
    }
    return chain;
}

CorrelationMatrix posterior_mean_corr(const PosteriorChain& chain) {
    if (chain.corr_samples.empty()) throw std::invalid_argument("posterior_mean_corr: empty chain");
    Matrix sum = Matrix::Zero(chain.dim(), chain.dim());
    for (const auto& c : chain.corr_samples) sum += c.matrix();
    Matrix mean = symmetrized(sum / static_cast<double>(chain.corr_samples.size()));
    mean.diagonal().setOnes();
    return CorrelationMatrix(std::move(mean));
}

GaussianParams posterior_mean_params(const PosteriorChain& chain) {
    if (chain.size() == 0) throw std::invalid_argument("posterior_mean_params: empty chain");
    const Index n = chain.dim();
    GaussianParams p{Vector::Zero(n), Matrix::Zero(n, n)};
    for (std::size_t k = 0; k < chain.size(); ++k) {
        p.mean += chain.mean_samples[k];
        p.cov += chain.cov_samples[k];
    }
    const double count = static_cast<double>(chain.size());
    p.mean /= count;
    p.cov = symmetrized(p.cov / count);
    return p;
}

void save_chain(const PosteriorChain& chain, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const Index n = chain.dim();
    write_json_file(dir / "config.json", gibbs_config_to_json(chain.config));
    write_json_file(dir / "prior.json", niw_to_json(chain.prior));
    write_json_file(dir / "manifest.json",
                    {{"format", "linkcorr-chain-v1"},
                     {"n", n},
                     {"draws", chain.size()},
                     {"file", "samples.bin"},
                     {"dtype", "float64-le"},
                     {"layout", {"mean[n]", "cov[n*n] row-major", "corr[n*n] row-major"}},
                     {"offset", vector_to_json(chain.offset.size() == n ? chain.offset : Vector::Zero(n))}});
    std::ofstream out(dir / "samples.bin", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + (dir / "samples.bin").string());
    for (std::size_t k = 0; k < chain.size(); ++k) {
        write_doubles(out, chain.mean_samples[k].data(), static_cast<std::size_t>(n));
        const auto cov = row_major(chain.cov_samples[k]);
        const auto corr = row_major(chain.corr_samples[k].matrix());
        write_doubles(out, cov.data(), cov.size());
        write_doubles(out, corr.data(), corr.size());
    }
}

PosteriorChain load_chain(const std::filesystem::path& dir) {
    const auto manifest = read_json_file(dir / "manifest.json");
    if (manifest.value("format", "") != "linkcorr-chain-v1") throw FormatError("unknown chain format");
    PosteriorChain chain;
    chain.config = gibbs_config_from_json(read_json_file(dir / "config.json"));
    chain.prior = niw_from_json(read_json_file(dir / "prior.json"));
    const Index n = manifest.at("n").get<Index>();
    const auto draws = manifest.at("draws").get<std::size_t>();
    if (chain.prior.dim() != n) throw FormatError("prior dimension differs from the chain manifest");
    chain.offset = vector_from_json(manifest.at("offset"));

    std::ifstream in(dir / manifest.at("file").get<std::string>(), std::ios::binary);
    if (!in) throw std::runtime_error("cannot read chain samples in " + dir.string());
    std::vector<double> buf(static_cast<std::size_t>(n * n));
    for (std::size_t k = 0; k < draws; ++k) {
        Vector mu(n);
        read_doubles(in, mu.data(), static_cast<std::size_t>(n));
        Matrix cov(n, n), corr(n, n);
        read_doubles(in, buf.data(), buf.size());
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) cov(i, j) = buf[static_cast<std::size_t>(i * n + j)];
        read_doubles(in, buf.data(), buf.size());
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < n; ++j) corr(i, j) = buf[static_cast<std::size_t>(i * n + j)];
        chain.mean_samples.push_back(std::move(mu));
        chain.cov_samples.push_back(std::move(cov));
        chain.corr_samples.emplace_back(std::move(corr));
    }
    return chain;
}

}  // namespace linkcorr
