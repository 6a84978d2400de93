#include <gtest/gtest.h>

#include "linkcorr/synthetic.hpp"
#include "oracles.hpp"

using namespace linkcorr;

namespace {

Matrix oracle_laplacian(const KernelSpec& s) {
    Matrix a = Matrix::Zero(s.n_links, s.n_links);
    for (int i = 0; i + 1 < s.n_links; ++i) a(i, i + 1) = a(i + 1, i) = 1;
    for (auto [u, v] : s.extra_edges) a(u, v) = a(v, u) = 1;
    const Vector deg = a.rowwise().sum();
    Matrix l(s.n_links, s.n_links);
    for (int i = 0; i < s.n_links; ++i)
        for (int j = 0; j < s.n_links; ++j)
            l(i, j) = ((i == j ? deg(i) : 0.0) - a(i, j)) / std::sqrt(deg(i) * deg(j));
    return l;
}

}  // namespace

TEST(Kernel, BetaZeroIsExactIdentity) {
    KernelSpec s = KernelSpec::benchmark_default();
    s.beta = 0.0;
    const GraphKernel k = graph_kernel_covariance(s);
    EXPECT_EQ(k.corr.matrix(), Matrix::Identity(18, 18));
    EXPECT_EQ(k.cov, 10.0 * Matrix::Identity(18, 18));
    s.beta = 1e-15;
    const Matrix off = graph_kernel_covariance(s).corr.matrix() - Matrix::Identity(18, 18);
    EXPECT_LE(off.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Kernel, EigenMatchesTaylorOnSmallGraphs) {
    Rng rng(1);
    for (int t = 0; t < 40; ++t) {
        KernelSpec s;
        s.n_links = 2 + t % 4;
        for (int u = 0; u < s.n_links; ++u)
            for (int v = u + 2; v < s.n_links; ++v)
                if (rng.uniform() < 0.4) s.extra_edges.emplace_back(u, v);
        s.beta = (rng.uniform() - 0.5) * 6.0;
        s.sigma = 1.0 + rng.uniform();
        const GraphKernel k = graph_kernel_covariance(s);
        const Matrix l = oracle_laplacian(s);
        EXPECT_LT((k.laplacian - l).cwiseAbs().maxCoeff(), 1e-14);
        const Matrix e = oracle::taylor_expm(s.beta * l);
        EXPECT_LT((k.kernel - e).cwiseAbs().maxCoeff(), 1e-10 * std::max(1.0, e.cwiseAbs().maxCoeff()));
    }
}

TEST(Kernel, PaperDefaultShape) {
    const KernelSpec s = KernelSpec::benchmark_default();
    EXPECT_EQ(s.n_links, 18);
    ASSERT_EQ(s.extra_edges.size(), 3u);
    EXPECT_EQ(s.extra_edges[0], (std::pair<int, int>{3, 12}));  // links 4 and 13
    const GraphKernel k = graph_kernel_covariance(s);
    EXPECT_EQ(k.cov.diagonal(), Vector::Constant(18, 10.0));
    EXPECT_NO_THROW(cholesky(k.cov));
    Eigen::SelfAdjointEigenSolver<Matrix> eig(k.laplacian);
    EXPECT_GT(eig.eigenvalues().minCoeff(), -1e-12);
    EXPECT_LT(eig.eigenvalues().maxCoeff(), 2.0 + 1e-12);
}

TEST(Kernel, RejectsBadSpecs) {
    KernelSpec s{1, {}, 1.0, 1.0};
    EXPECT_THROW(graph_kernel_covariance(s), std::domain_error);
    s = KernelSpec{4, {{1, 1}}, 1.0, 1.0};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = KernelSpec{4, {{0, 7}}, 1.0, 1.0};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s = KernelSpec{4, {}, 1.0, 0.0};
    EXPECT_THROW(s.validate(), std::invalid_argument);
}

TEST(Kernel, JsonUsesOneBasedEdges) {
    const auto j = KernelSpec::benchmark_default().to_json();
    EXPECT_EQ(j.at("extra_edges")[0][0].get<int>(), 4);
    EXPECT_EQ(j.at("extra_edges")[0][1].get<int>(), 13);
    const KernelSpec back = KernelSpec::from_json(j);
    EXPECT_EQ(back.extra_edges, KernelSpec::benchmark_default().extra_edges);
}

TEST(Dataset, PaperPlanComposition) {
    Rng rng(7);
    const SyntheticDataset d =
        generate_dataset(KernelSpec::benchmark_default(), benchmark_mean(), DatasetPlan::benchmark_default(), rng);
    ASSERT_EQ(d.observations.size(), 320u);
    EXPECT_EQ(d.complete.cols(), 320);
    int full = 0, ragged = 0, missing = 0;
    for (std::size_t k = 0; k < d.observations.size(); ++k) {
        const Observation& o = d.observations[k];
        ASSERT_TRUE(validate(o).empty());
        EXPECT_LT((o.alignment.apply(d.complete.col(static_cast<Index>(k))) - o.recording).cwiseAbs().maxCoeff(),
                  1e-12);
        switch (classify(o)) {
            case ObservationKind::full: ++full; break;
            case ObservationKind::ragged: ++ragged; break;
            case ObservationKind::missing: ++missing; break;
        }
    }
    EXPECT_EQ(full, 80);
    EXPECT_EQ(ragged, 80);
    EXPECT_EQ(missing, 160);
    // Ragged rows sum links 5 and 6; route 2 covers 1–12; route 3 covers 5–18.
    EXPECT_EQ(d.observations[80].alignment.rows[4], (std::vector<int>{4, 5}));
    EXPECT_EQ(d.observations[160].alignment.row_count(), 12);
    EXPECT_EQ(d.observations[240].alignment.row_count(), 14);
    EXPECT_EQ(d.observations[240].alignment.rows.front(), std::vector<int>{4});
}

TEST(Dataset, SameSeedSameData) {
    Rng a(3), b(3);
    const auto x = generate_dataset(KernelSpec::benchmark_default(), benchmark_mean(), DatasetPlan::benchmark_default(), a);
    const auto y = generate_dataset(KernelSpec::benchmark_default(), benchmark_mean(), DatasetPlan::benchmark_default(), b);
    EXPECT_EQ(x.complete, y.complete);
}

TEST(Dataset, EmpiricalMomentsMatchTruth) {
    DatasetPlan plan;
    plan.full = 40000;
    Rng rng(9);
    KernelSpec s = KernelSpec::benchmark_default();
    const auto d = generate_dataset(s, benchmark_mean(), plan, rng);
    std::vector<Vector> xs;
    for (Index k = 0; k < d.complete.cols(); ++k) xs.push_back(d.complete.col(k));
    const auto m = oracle::moments(xs);
    const Vector mse = oracle::mean_se(d.truth.cov, xs.size());
    for (Index i = 0; i < 18; ++i) EXPECT_LT(std::abs(m.mean(i) - benchmark_mean()(i)), 5 * mse(i));
}

TEST(Dataset, PlanValidation) {
    DatasetPlan plan = DatasetPlan::benchmark_default();
    plan.total = 10;
    Rng rng(1);
    EXPECT_THROW(generate_dataset(KernelSpec::benchmark_default(), benchmark_mean(), plan, rng), std::invalid_argument);
    const DatasetPlan back = DatasetPlan::from_json(DatasetPlan::benchmark_default().to_json());
    EXPECT_EQ(back.assigned(), 320u);
    EXPECT_EQ(back.routes.size(), 2u);
    EXPECT_EQ(back.routes[1].coverage, (LinkRange{4, 17}));
}
