#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "linkcorr/gaussian.hpp"
#include "linkcorr/timeutil.hpp"

namespace linkcorr {

/// Binary alignment matrix G stored row by row as the link indices
/// (0-based) holding a one. A valid alignment has non-empty rows of
/// consecutive links with pairwise disjoint supports.
struct Alignment {
    int n_links = 0;
    std::vector<std::vector<int>> rows;

    Index row_count() const { return static_cast<Index>(rows.size()); }
    Matrix dense() const;
    /// G·x
    Vector apply(const Vector& x) const;

    static Alignment identity(int n);
    static Alignment from_dense(const Matrix& g);

    friend bool operator==(const Alignment&, const Alignment&) = default;
    friend auto operator<=>(const Alignment&, const Alignment&) = default;
};

/// One bus run: recording vector r = G·x.
struct Observation {
    Vector recording;
    Alignment alignment;
    std::string route_id;
    std::string bus_id;
    Timestamp start_time = 0;

    int n_links() const { return alignment.n_links; }
};

enum class ObservationKind { full, missing, ragged };

/// full: identity alignment; ragged: at least one multi-link row; missing otherwise.
ObservationKind classify(const Observation& obs);
const char* to_string(ObservationKind kind);

struct Violation {
    std::string kind;  // "empty row", "overlapping support", "non-consecutive", ...
    int row = -1;      // 0-based, -1 when not row specific
    int col = -1;
    std::string message;
};

/// Checks every Observation invariant; an empty result means valid.
/// Messages use 1-based row and link numbers.
std::vector<Violation> validate(const Observation& obs);

/// Throws std::invalid_argument with the first violation.
void require_valid(const Observation& obs);

/// An x with G·x = r: singleton rows copy r, ragged sums are split in
/// proportion to fallback_mean over the span (uniformly if that sums to
/// <= 0), links in no row take fallback_mean.
Vector least_norm_fill(const Observation& obs, const Vector& fallback_mean);

/// Target links first..last (0-based, inclusive).
struct LinkRange {
    int first = 0;
    int last = 0;
    int length() const { return last - first + 1; }
    friend bool operator==(const LinkRange&, const LinkRange&) = default;
};

/// A contributing route: its ordered stops and, for each consecutive stop
/// pair, the target links it traverses (nullopt when off the target route).
struct RoutePattern {
    std::vector<std::string> stops;
    std::vector<std::optional<LinkRange>> segments;  // stops.size() - 1 entries

    /// A route whose stops bound each of target links first..last.
    static RoutePattern covering(int first, int last);
};

struct RouteGeometry {
    std::vector<std::string> target_links;
    std::map<std::string, RoutePattern> routes;

    int n_links() const { return static_cast<int>(target_links.size()); }

    /// Throws InconsistentGeometry when a covered range leaves 0..n-1 or
    /// ranges along a route overlap or run backwards.
    void validate() const;

    static RouteGeometry from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

/// Alignment for a run of route_id that skipped the given stops (indices
/// into the route's stop list). A skipped stop merges the covered links on
/// both sides into one row. Throws InconsistentGeometry when a skipped stop
/// touches an uncovered segment or the route covers nothing.
Alignment build_alignment(const RouteGeometry& geometry, const std::string& route_id,
                          const std::set<int>& skipped_stops);

/// Rows implied by which stops of a pattern were recorded; a pair of
/// consecutive recorded stops yields a row only when every segment between
/// them is covered and the links are contiguous. Each row is paired with the
/// stop indices (from, to) it spans.
struct AlignedRow {
    std::vector<int> links;
    int from_stop = 0;
    int to_stop = 0;
};
std::vector<AlignedRow> rows_from_recorded_stops(const RoutePattern& pattern, const std::vector<bool>& recorded);

// JSON lines, one observation per line:
// {"route": str, "bus": str, "t0": ISO-8601, "r": [..], "rows": [[link, ...], ...], "n": n_links}
// Link numbers in "rows" are 1-based. "n" may be omitted when the reader is given n_links.
nlohmann::json observation_to_json(const Observation& obs);
Observation observation_from_json(const nlohmann::json& j, std::optional<int> n_links = std::nullopt);
void write_observations(std::ostream& out, const std::vector<Observation>& obs);
std::vector<Observation> read_observations(std::istream& in, std::optional<int> n_links = std::nullopt);
void write_observations(const std::filesystem::path& path, const std::vector<Observation>& obs);
std::vector<Observation> read_observations(const std::filesystem::path& path,
                                           std::optional<int> n_links = std::nullopt);

}  // namespace linkcorr
