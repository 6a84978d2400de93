#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "linkcorr/rng.hpp"

using linkcorr::Rng;

TEST(Rng, SameSeedSameStream) {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
}

TEST(Rng, SubstreamsAreDistinctAndReproducible) {
    std::set<std::uint64_t> firsts;
    for (std::uint64_t i = 0; i < 200; ++i) {
        auto s = Rng::substream(7, {3, i});
        auto t = Rng::substream(7, {3, i});
        const auto v = s();
        EXPECT_EQ(v, t());
        firsts.insert(v);
    }
    EXPECT_EQ(firsts.size(), 200u);
    EXPECT_NE(Rng::substream(7, {1, 2})(), Rng::substream(7, {2, 1})());
}

TEST(Rng, NormalMoments) {
    Rng rng(1);
    const int n = 200000;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double z = rng.normal();
        s += z;
        s2 += z * z;
    }
    EXPECT_NEAR(s / n, 0.0, 5.0 / std::sqrt(n));
    EXPECT_NEAR(s2 / n, 1.0, 5.0 * std::sqrt(2.0 / n));
}

TEST(Rng, ChiSquaredMeanAndVariance) {
    Rng rng(2);
    const int n = 200000;
    const double k = 5.5;
    double s = 0, s2 = 0;
    for (int i = 0; i < n; ++i) {
        const double c = rng.chi_squared(k);
        s += c;
        s2 += c * c;
    }
    const double mean = s / n, var = s2 / n - mean * mean;
    EXPECT_NEAR(mean, k, 5.0 * std::sqrt(2 * k / n));
    EXPECT_NEAR(var, 2 * k, 0.1 * 2 * k);
}

TEST(Rng, UniformInUnitInterval) {
    Rng rng(3);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}
