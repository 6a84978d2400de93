#include "linkcorr/synthetic.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <stdexcept>

#include "linkcorr/matrix_io.hpp"

namespace linkcorr {

void KernelSpec::validate() const {
    if (n_links < 1) throw std::invalid_argument("kernel: n_links must be positive");
    for (const auto& [i, j] : extra_edges) {
        if (i < 0 || j < 0 || i >= n_links || j >= n_links)
            throw std::invalid_argument("kernel: extra edge outside 1..n_links");
        if (i == j) throw std::invalid_argument("kernel: extra edge is a self loop");
    }
    if (!(sigma > 0.0)) throw std::invalid_argument("kernel: sigma must be positive");
    if (!std::isfinite(beta)) throw std::invalid_argument("kernel: beta must be finite");
}

KernelSpec KernelSpec::benchmark_default() { return KernelSpec{18, {{3, 12}, {4, 11}, {6, 14}}, 3.0, 10.0}; }

KernelSpec KernelSpec::from_json(const nlohmann::json& j) {
    KernelSpec s;
    s.n_links = j.at("n_links").get<int>();
    for (const auto& e : j.value("extra_edges", nlohmann::json::array()))
        s.extra_edges.emplace_back(e.at(0).get<int>() - 1, e.at(1).get<int>() - 1);
    s.beta = j.at("beta").get<double>();
    s.sigma = j.at("sigma").get<double>();
    s.validate();
    return s;
}

nlohmann::json KernelSpec::to_json() const {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& [i, j] : extra_edges) edges.push_back({i + 1, j + 1});
    return {{"n_links", n_links}, {"extra_edges", edges}, {"beta", beta}, {"sigma", sigma}};
}

GraphKernel graph_kernel_covariance(const KernelSpec& spec) {
    spec.validate();
    const Index n = spec.n_links;
    GraphKernel g;
    g.adjacency = Matrix::Zero(n, n);
    for (Index i = 0; i + 1 < n; ++i) g.adjacency(i, i + 1) = g.adjacency(i + 1, i) = 1.0;
    for (const auto& [i, j] : spec.extra_edges) g.adjacency(i, j) = g.adjacency(j, i) = 1.0;

    const Vector degree = g.adjacency.rowwise().sum();
    for (Index i = 0; i < n; ++i)
        if (degree(i) <= 0.0) throw std::domain_error("graph kernel: link " + std::to_string(i + 1) + " is isolated");
    const Vector inv_sqrt = degree.array().rsqrt();
    Matrix laplacian = -g.adjacency;
    laplacian.diagonal() += degree;
    g.laplacian = inv_sqrt.asDiagonal() * laplacian * inv_sqrt.asDiagonal();

    if (spec.beta == 0.0) {
        g.kernel = Matrix::Identity(n, n);
    } else {
        const Eigen::SelfAdjointEigenSolver<Matrix> eig(g.laplacian);
        const Vector scaled = (spec.beta * eig.eigenvalues()).array().exp();
        g.kernel = symmetrized(eig.eigenvectors() * scaled.asDiagonal() * eig.eigenvectors().transpose());
    }
    g.corr = cov_to_corr(g.kernel);
    g.cov = spec.sigma * g.corr.matrix();
    return g;
}

std::size_t DatasetPlan::assigned() const {
    std::size_t sum = full + ragged;
    for (const auto& r : routes) sum += r.count;
    return sum;
}

DatasetPlan DatasetPlan::benchmark_default() {
    DatasetPlan p;
    p.target_route = "1";
    p.full = 80;
    p.ragged = 80;
    p.ragged_merges = {{4, 5}};
    p.routes = {{"2", {0, 11}, 80, {}}, {"3", {4, 17}, 80, {}}};
    return p;
}

namespace {

LinkRange range_from_json(const nlohmann::json& j) {
    return {j.at(0).get<int>() - 1, j.at(1).get<int>() - 1};
}

nlohmann::json range_to_json(const LinkRange& r) { return {r.first + 1, r.last + 1}; }

}  // namespace

DatasetPlan DatasetPlan::from_json(const nlohmann::json& j) {
    DatasetPlan p;
    p.target_route = j.value("target_route", "1");
    p.full = j.value("full", std::size_t{0});
    p.ragged = j.value("ragged", std::size_t{0});
    for (const auto& m : j.value("ragged_merges", nlohmann::json::array())) p.ragged_merges.push_back(range_from_json(m));
    for (const auto& r : j.value("routes", nlohmann::json::array())) {
        RouteAssignment a;
        a.route_id = r.at("route").get<std::string>();
        a.coverage = range_from_json(r.at("coverage"));
        a.count = r.at("count").get<std::size_t>();
        for (const auto& m : r.value("merges", nlohmann::json::array())) a.merges.push_back(range_from_json(m));
        p.routes.push_back(std::move(a));
    }
    if (j.contains("total")) p.total = j.at("total").get<std::size_t>();
    return p;
}

nlohmann::json DatasetPlan::to_json() const {
    nlohmann::json merges = nlohmann::json::array();
    for (const auto& m : ragged_merges) merges.push_back(range_to_json(m));
    nlohmann::json route_list = nlohmann::json::array();
    for (const auto& r : routes) {
        nlohmann::json rm = nlohmann::json::array();
        for (const auto& m : r.merges) rm.push_back(range_to_json(m));
        route_list.push_back(
            {{"route", r.route_id}, {"coverage", range_to_json(r.coverage)}, {"count", r.count}, {"merges", rm}});
    }
    nlohmann::json out = {{"target_route", target_route}, {"full", full},         {"ragged", ragged},
                          {"ragged_merges", merges},      {"routes", route_list}};
    if (total) out["total"] = *total;
    return out;
}

Alignment coverage_alignment(int n_links, const LinkRange& coverage, const std::vector<LinkRange>& merges) {
    if (coverage.first < 0 || coverage.last >= n_links || coverage.first > coverage.last)
        throw std::invalid_argument("coverage outside the target route");
    std::vector<LinkRange> spans = merges;
    std::sort(spans.begin(), spans.end(), [](const LinkRange& a, const LinkRange& b) { return a.first < b.first; });
    Alignment a;
    a.n_links = n_links;
    int link = coverage.first;
    for (const auto& span : spans) {
        if (span.first < link || span.last > coverage.last || span.first >= span.last)
            throw std::invalid_argument("merge spans must be disjoint, multi-link and inside the coverage");
        for (; link < span.first; ++link) a.rows.push_back({link});
        std::vector<int> row;
        for (; link <= span.last; ++link) row.push_back(link);
        a.rows.push_back(std::move(row));
    }
    for (; link <= coverage.last; ++link) a.rows.push_back({link});
    return a;
}

SyntheticDataset generate_dataset(const KernelSpec& spec, const Vector& mean, const DatasetPlan& plan, Rng& rng) {
    if (mean.size() != spec.n_links) throw std::invalid_argument("generate_dataset: mean length differs from n_links");
    const std::size_t total = plan.total.value_or(plan.assigned());
    if (plan.assigned() > total)
        throw std::invalid_argument("generate_dataset: plan assigns " + std::to_string(plan.assigned()) +
                                    " observations but only " + std::to_string(total) + " draws");

    const GraphKernel kernel = graph_kernel_covariance(spec);
    SyntheticDataset data;
    data.truth = GaussianParams{mean, kernel.cov};
    data.truth_corr = kernel.corr;

    const CholeskyFactor factor = cholesky(kernel.cov);
    data.complete.resize(spec.n_links, static_cast<Index>(total));
    for (std::size_t k = 0; k < total; ++k) data.complete.col(static_cast<Index>(k)) = sample_gaussian(mean, factor, rng);

    const int n = spec.n_links;
    const LinkRange whole{0, n - 1};
    std::size_t next = 0;
    const Timestamp base = *parse_timestamp("2016-12-08T07:00:00");
    auto emit = [&](const std::string& route, const Alignment& alignment, std::size_t count) {
        for (std::size_t c = 0; c < count; ++c, ++next) {
            Observation obs;
            obs.alignment = alignment;
            obs.recording = alignment.apply(data.complete.col(static_cast<Index>(next)));
            obs.route_id = route;
            obs.bus_id = "bus-" + std::to_string(next + 1);
            obs.start_time = base + static_cast<Timestamp>(next) * 60;
            data.observations.push_back(std::move(obs));
        }
    };
    emit(plan.target_route, Alignment::identity(n), plan.full);
    emit(plan.target_route, coverage_alignment(n, whole, plan.ragged_merges), plan.ragged);
    for (const auto& route : plan.routes) emit(route.route_id, coverage_alignment(n, route.coverage, route.merges), route.count);
    return data;
}

Vector benchmark_mean() {
    Vector mu(18);
    mu << 14, 15, 18, 13, 17, 15, 10, 24, 15, 11, 12, 15, 9, 13, 17, 15, 19, 21;
    return mu;
}

void write_dataset(const std::filesystem::path& dir, const SyntheticDataset& data) {
    std::filesystem::create_directories(dir);
    write_observations(dir / "observations.jsonl", data.observations);
    write_json_file(dir / "truth.json", {{"mean", vector_to_json(data.truth.mean)},
                                         {"cov", matrix_to_json(data.truth.cov)},
                                         {"corr", matrix_to_json(data.truth_corr.matrix())}});
}

}  // namespace linkcorr
