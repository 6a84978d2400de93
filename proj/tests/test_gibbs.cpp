#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "linkcorr/gibbs.hpp"
#include "oracles.hpp"

using namespace linkcorr;

namespace {

std::vector<Observation> partial_data(int n, int count, Rng& rng, GaussianParams* truth_out = nullptr) {
    const GaussianParams truth{oracle::random_vector(n, rng, 2.0) + Vector::Constant(n, 10.0),
                               oracle::random_spd(n, rng)};
    if (truth_out) *truth_out = truth;
    std::vector<Observation> obs;
    for (int i = 0; i < count; ++i) {
        Observation o;
        o.alignment = i % 3 == 0 ? Alignment::identity(n) : oracle::random_alignment(n, rng);
        o.recording = o.alignment.apply(sample_gaussian(truth, rng));
        obs.push_back(o);
    }
    return obs;
}

GibbsConfig small(std::uint64_t seed) {
    GibbsConfig c;
    c.burn_in = 50;
    c.retained = 40;
    c.seed = seed;
    return c;
}

}  // namespace

TEST(GibbsConfig, ValidateAndLength) {
    GibbsConfig c;
    EXPECT_NO_THROW(c.validate());
    EXPECT_EQ(c.chain_length(), 5000u);
    c.thin = 3;
    EXPECT_EQ(c.chain_length(), 1667u);
    c.retained = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c.retained = 10;
    c.thin = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    const GibbsConfig d = gibbs_config_from_json(gibbs_config_to_json(small(4)));
    EXPECT_EQ(d.burn_in, 50u);
    EXPECT_EQ(d.seed, 4u);
}

TEST(Gibbs, ChainShapeAndInvariants) {
    Rng rng(1);
    const auto obs = partial_data(5, 60, rng);
    GibbsConfig c = small(3);
    c.thin = 3;
    const PosteriorChain chain = run_gibbs(obs, default_prior(5), c);
    EXPECT_EQ(chain.size(), 14u);
    EXPECT_EQ(chain.corr_samples.size(), 14u);
    EXPECT_EQ(chain.mean_samples.size(), 14u);
    for (std::size_t k = 0; k < chain.size(); ++k) {
        EXPECT_NO_THROW(cholesky(chain.cov_samples[k]));
        EXPECT_EQ(chain.corr_samples[k].matrix().diagonal(), Vector::Ones(5));
        EXPECT_LE(chain.corr_samples[k].matrix().cwiseAbs().maxCoeff(), 1.0);
    }
    EXPECT_EQ(chain.prior.mu0, default_prior(5).mu0);
    EXPECT_EQ(chain.prior.psi0, default_prior(5).psi0);
}

TEST(Gibbs, BitReproducibleAcrossRunsAndThreads) {
    Rng rng(2);
    const auto obs = partial_data(6, 40, rng);
    GibbsConfig c = small(11);
    const PosteriorChain a = run_gibbs(obs, default_prior(6), c);
    c.threads = 3;
    const PosteriorChain b = run_gibbs(obs, default_prior(6), c);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
        EXPECT_EQ(a.cov_samples[k], b.cov_samples[k]);
        EXPECT_EQ(a.mean_samples[k], b.mean_samples[k]);
    }
    c.seed = 12;
    const PosteriorChain d = run_gibbs(obs, default_prior(6), c);
    EXPECT_NE(a.mean_samples.back(), d.mean_samples.back());
}

TEST(Gibbs, CompleteDataMatchesClosedFormPosterior) {
    // Identity alignments leave nothing to impute, so the draws come straight
    // from the conjugate posterior. Without centering its mean is μ*.
    Rng rng(3);
    const int n = 3;
    std::vector<Observation> obs;
    std::vector<Vector> xs;
    const GaussianParams truth{Vector::Constant(n, 4.0), oracle::random_spd(n, rng)};
    for (int i = 0; i < 40; ++i) {
        Observation o;
        o.alignment = Alignment::identity(n);
        o.recording = sample_gaussian(truth, rng);
        xs.push_back(o.recording);
        obs.push_back(o);
    }
    GibbsConfig c = small(5);
    c.retained = 4000;
    c.burn_in = 10;
    c.center = false;
    const PosteriorChain chain = run_gibbs(obs, default_prior(n), c);
    const NIWParams post = oracle::brute_force_update(default_prior(n), xs);
    const GaussianParams est = posterior_mean_params(chain);
    const Matrix expected_cov = post.psi0 / (post.nu0 - n - 1);
    for (Index i = 0; i < n; ++i) {
        const double se = std::sqrt(expected_cov(i, i) / post.lambda0 / static_cast<double>(c.retained));
        EXPECT_LT(std::abs(est.mean(i) - post.mu0(i)), 5 * se);
        EXPECT_NEAR(est.cov(i, i), expected_cov(i, i), 0.05 * expected_cov(i, i));
    }
}

TEST(Gibbs, RecoversMeanFromPartialData) {
    Rng rng(4);
    GaussianParams truth;
    const auto obs = partial_data(4, 400, rng, &truth);
    GibbsConfig c = small(6);
    c.burn_in = 200;
    c.retained = 400;
    const GaussianParams est = posterior_mean_params(run_gibbs(obs, default_prior(4), c));
    for (Index i = 0; i < 4; ++i) EXPECT_NEAR(est.mean(i), truth.mean(i), 5 * std::sqrt(truth.cov(i, i) / 150.0));
}

TEST(Gibbs, RejectsInvalidObservation) {
    Observation o;
    o.alignment = Alignment{3, {{0, 2}}};
    o.recording = Vector::Ones(1);
    const std::vector<Observation> obs{o};
    EXPECT_THROW(run_gibbs(obs, default_prior(3), small(1)), std::invalid_argument);
}

TEST(ReferenceMeans, SingletonsThenSharesThenFallback) {
    std::vector<Observation> obs(3);
    obs[0].alignment = Alignment{4, {{0}, {1, 2}}};
    obs[0].recording = Vector(2);
    obs[0].recording << 2, 10;
    obs[1].alignment = Alignment{4, {{0}}};
    obs[1].recording = Vector::Constant(1, 4);
    obs[2].alignment = Alignment{4, {{1, 2}}};
    obs[2].recording = Vector::Constant(1, 6);
    const Vector ref = reference_means(obs, Vector::Constant(4, -1.0));
    EXPECT_DOUBLE_EQ(ref(0), 3.0);
    EXPECT_DOUBLE_EQ(ref(1), 4.0);  // (10/2 + 6/2) / 2
    EXPECT_DOUBLE_EQ(ref(2), 4.0);
    EXPECT_DOUBLE_EQ(ref(3), -1.0);
}

TEST(ChainIO, RoundTripIsBitExact) {
    Rng rng(5);
    const auto obs = partial_data(4, 30, rng);
    const PosteriorChain chain = run_gibbs(obs, default_prior(4), small(8));
    const auto dir = std::filesystem::temp_directory_path() / "linkcorr_chain_io_test";
    std::filesystem::remove_all(dir);
    save_chain(chain, dir);
    const PosteriorChain back = load_chain(dir);
    ASSERT_EQ(back.size(), chain.size());
    for (std::size_t k = 0; k < chain.size(); ++k) {
        EXPECT_EQ(back.mean_samples[k], chain.mean_samples[k]);
        EXPECT_EQ(back.cov_samples[k], chain.cov_samples[k]);
        EXPECT_EQ(back.corr_samples[k].matrix(), chain.corr_samples[k].matrix());
    }
    EXPECT_EQ(back.offset, chain.offset);
    EXPECT_EQ(back.config.seed, chain.config.seed);
    // Truncated payload is rejected.
    std::filesystem::resize_file(dir / "samples.bin", 100);
    EXPECT_ANY_THROW(load_chain(dir));
    std::filesystem::remove_all(dir);
}
