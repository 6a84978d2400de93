#include <gtest/gtest.h>

#include <numeric>
#include <sstream>

#include "linkcorr/analytics.hpp"
#include "oracles.hpp"

using namespace linkcorr;

TEST(Quantile, OneToHundred) {
    std::vector<double> s(100);
    std::iota(s.begin(), s.end(), 1.0);
    std::reverse(s.begin(), s.end());  // input order must not matter
    // position p·(N−1): 0.025·99 = 2.475 → 3 + 0.475; 0.975·99 = 96.525 → 97 + 0.525
    EXPECT_NEAR(quantile(s, 0.025), 3.475, 1e-12);
    EXPECT_NEAR(quantile(s, 0.975), 97.525, 1e-12);
    EXPECT_EQ(quantile(s, 0.0), 1.0);
    EXPECT_EQ(quantile(s, 1.0), 100.0);
    const Interval ci = credible_interval(s, 0.95);
    EXPECT_NEAR(ci.low, 3.475, 1e-12);
    EXPECT_NEAR(ci.high, 97.525, 1e-12);
}

TEST(Quantile, RejectsBadInput) {
    const std::vector<double> one{1.0}, two{1.0, 2.0};
    EXPECT_ANY_THROW(credible_interval(one, 0.95));
    EXPECT_ANY_THROW(credible_interval(two, 1.0));
    EXPECT_ANY_THROW(credible_interval(two, 0.0));
    EXPECT_ANY_THROW(quantile(std::vector<double>{}, 0.5));
}

TEST(Rope, Verdicts) {
    std::vector<double> far(1000, 0.5), zero(1000, 0.0), half(1000, 0.5);
    for (std::size_t i = 0; i < 500; ++i) half[i] = 0.0;
    EXPECT_EQ(rope_test(far).verdict, RopeVerdict::reject_null);
    EXPECT_EQ(rope_test(zero).verdict, RopeVerdict::accept_null);
    EXPECT_EQ(rope_test(half).verdict, RopeVerdict::undecided);
    EXPECT_DOUBLE_EQ(rope_test(half).fraction_in_rope, 0.5);
    // Interval is open: ±0.05 itself is outside.
    std::vector<double> edge(100, 0.05);
    EXPECT_EQ(rope_test(edge).fraction_in_rope, 0.0);
    EXPECT_EQ(rope_test(edge).verdict, RopeVerdict::reject_null);
}

TEST(Rope, ThresholdsAreStrict) {
    // Exactly 5% inside: not below the reject threshold.
    std::vector<double> s(100, 0.5);
    for (int i = 0; i < 5; ++i) s[static_cast<std::size_t>(i)] = 0.0;
    EXPECT_EQ(rope_test(s).verdict, RopeVerdict::undecided);
    s[5] = 0.5;
    s[4] = 0.5;
    EXPECT_EQ(rope_test(s).verdict, RopeVerdict::reject_null);
}

TEST(KL, SelfIsZeroAndShiftedUnit) {
    Rng rng(1);
    for (int t = 0; t < 10; ++t) {
        const Index n = 1 + t % 5;
        const GaussianParams p{oracle::random_vector(n, rng), oracle::random_spd(n, rng)};
        EXPECT_LE(std::abs(kl_gaussian(p, p)), 1e-12);
    }
    const GaussianParams a{Vector::Zero(1), Matrix::Identity(1, 1)}, b{Vector::Ones(1), Matrix::Identity(1, 1)};
    EXPECT_NEAR(kl_gaussian(a, b), 0.5, 1e-12);
}

TEST(KL, MatchesNaiveFormula) {
    Rng rng(2);
    for (int t = 0; t < 30; ++t) {
        const Index n = 1 + t % 6;
        const GaussianParams p{oracle::random_vector(n, rng), oracle::random_spd(n, rng)};
        const GaussianParams q{oracle::random_vector(n, rng), oracle::random_spd(n, rng)};
        EXPECT_NEAR(kl_gaussian(p, q), oracle::naive_kl(p.mean, p.cov, q.mean, q.cov), 1e-9);
        EXPECT_GE(kl_gaussian(p, q), 0.0);
    }
}

TEST(KL, DimensionMismatchThrows) {
    const GaussianParams a{Vector::Zero(2), Matrix::Identity(2, 2)}, b{Vector::Zero(3), Matrix::Identity(3, 3)};
    EXPECT_ANY_THROW(kl_gaussian(a, b));
}

TEST(Threshold, ZeroesAllButRejected) {
    Matrix m(3, 3);
    m << 1, 0.5, 0.02, 0.5, 1, -0.3, 0.02, -0.3, 1;
    const CorrelationMatrix c(m);
    std::vector<RopeDecision> d(3);
    d[0] = {0, 1, 0.5, 0, 0, 0.0, RopeVerdict::reject_null};
    d[1] = {0, 2, 0.02, 0, 0, 0.99, RopeVerdict::accept_null};
    d[2] = {1, 2, -0.3, 0, 0, 0.5, RopeVerdict::undecided};
    const CorrelationMatrix t = threshold_display(c, d);
    EXPECT_EQ(t(0, 1), 0.5);
    EXPECT_EQ(t(1, 0), 0.5);
    EXPECT_EQ(t(0, 2), 0.0);
    EXPECT_EQ(t(1, 2), 0.0);
    EXPECT_EQ(t(2, 2), 1.0);
    d.pop_back();
    EXPECT_THROW(threshold_display(c, d), std::invalid_argument);
}

TEST(Decisions, CsvUsesOneBasedLinks) {
    std::vector<RopeDecision> d{{0, 1, 0.5, 0.4, 0.6, 0.0, RopeVerdict::reject_null}};
    std::ostringstream out;
    write_decisions_csv(out, d);
    const std::string s = out.str();
    EXPECT_EQ(s.substr(0, s.find('\n')), "i,j,mean,ci_low,ci_high,fraction_in_rope,verdict");
    EXPECT_EQ(s.substr(s.find('\n') + 1, 4), "1,2,");
}

TEST(Decisions, OnePerUpperTriangleEntry) {
    PosteriorChain chain;
    chain.prior = default_prior(4);
    Rng rng(3);
    for (int k = 0; k < 50; ++k) {
        const Matrix s = oracle::random_spd(4, rng);
        chain.cov_samples.push_back(s);
        chain.corr_samples.push_back(cov_to_corr(s));
        chain.mean_samples.push_back(Vector::Zero(4));
    }
    const auto d = rope_decisions(chain);
    ASSERT_EQ(d.size(), 6u);
    EXPECT_EQ(d[0].i, 0);
    EXPECT_EQ(d[0].j, 1);
    EXPECT_EQ(d[5].i, 2);
    EXPECT_EQ(d[5].j, 3);
    const auto s = corr_entry_samples(chain, 1, 3);
    EXPECT_EQ(s[7], chain.corr_samples[7](1, 3));
}

TEST(SplitRhat, NearOneForIidAndLargeForShiftedChains) {
    Rng rng(4);
    std::vector<std::vector<double>> iid(4, std::vector<double>(1000));
    for (auto& c : iid)
        for (auto& v : c) v = rng.normal();
    EXPECT_LT(split_rhat(iid), 1.01);
    auto shifted = iid;
    for (auto& v : shifted[0]) v += 3.0;
    EXPECT_GT(split_rhat(shifted), 1.1);
    // Drift inside one chain is caught by the split.
    std::vector<std::vector<double>> drift(1, std::vector<double>(1000));
    for (std::size_t i = 0; i < 1000; ++i) drift[0][i] = rng.normal() + (i < 500 ? 0.0 : 3.0);
    EXPECT_GT(split_rhat(drift), 1.1);
}
