#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "linkcorr/gaussian.hpp"
#include "linkcorr/observation.hpp"
#include "linkcorr/rng.hpp"

namespace linkcorr {

/// Chain graph 1–2–…–n plus extra "virtual adjacency" edges.
struct KernelSpec {
    int n_links = 0;
    std::vector<std::pair<int, int>> extra_edges;  // 0-based link pairs
    double beta = 1.0;
    double sigma = 1.0;  // variance scale: every diagonal entry of Σ equals sigma

    /// Throws std::invalid_argument on out-of-range or self-loop edges or sigma <= 0.
    void validate() const;

    /// 18 links, extra edges (4,13), (5,12), (7,15), beta 3, sigma 10.
    static KernelSpec benchmark_default();

    /// Edges are 1-based in JSON.
    static KernelSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct GraphKernel {
    Matrix adjacency;
    Matrix laplacian;  // D^{-1/2}(D − A)D^{-1/2}
    Matrix kernel;     // exp(beta·L)
    CorrelationMatrix corr;
    Matrix cov;  // sigma·corr
};

/// K = exp(beta·L) through the eigendecomposition of the symmetric L, then
/// Corr = diag(K)^{-1/2} K diag(K)^{-1/2} and Σ = sigma·Corr. beta is used
/// with the sign given; beta < 0 yields the usual diffusion kernel.
/// Throws std::domain_error for an isolated vertex.
GraphKernel graph_kernel_covariance(const KernelSpec& spec);

/// Link spans that a route assignment or the ragged share sums into one value.
struct RouteAssignment {
    std::string route_id;
    LinkRange coverage;
    std::size_t count = 0;
    std::vector<LinkRange> merges;
};

struct DatasetPlan {
    std::string target_route = "1";
    std::size_t full = 0;
    std::size_t ragged = 0;
    std::vector<LinkRange> ragged_merges;
    std::vector<RouteAssignment> routes;
    std::optional<std::size_t> total;  // complete draws; defaults to the sum of all counts

    std::size_t assigned() const;

    /// 80 full + 80 ragged (links 5 and 6 summed) on route 1, 80 on route 2
    /// (links 1–12), 80 on route 3 (links 5–18): 320 draws.
    static DatasetPlan benchmark_default();

    static DatasetPlan from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

struct SyntheticDataset {
    std::vector<Observation> observations;
    GaussianParams truth;
    CorrelationMatrix truth_corr;
    Matrix complete;  // n × total: every draw before corruption, column k is draw k
};

/// Rows for coverage first..last with each merge span summed into one row.
Alignment coverage_alignment(int n_links, const LinkRange& coverage, const std::vector<LinkRange>& merges);

/// Draws `total` complete vectors from N(mean, Σ) and corrupts them per the plan,
/// in order: full, ragged, then each route. Throws std::invalid_argument when the
/// plan assigns more observations than draws.
SyntheticDataset generate_dataset(const KernelSpec& spec, const Vector& mean, const DatasetPlan& plan, Rng& rng);

/// [14,15,18,13,17,15,10,24,15,11,12,15,9,13,17,15,19,21]
Vector benchmark_mean();

/// observations.jsonl and truth.json ({"mean", "cov", "corr"}).
void write_dataset(const std::filesystem::path& dir, const SyntheticDataset& data);

}  // namespace linkcorr
