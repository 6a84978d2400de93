#include "linkcorr/observation.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "linkcorr/errors.hpp"
#include "linkcorr/matrix_io.hpp"

namespace linkcorr {

Matrix Alignment::dense() const {
    Matrix g = Matrix::Zero(row_count(), n_links);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int c : rows[r]) g(static_cast<Index>(r), c) = 1.0;
    return g;
}

Vector Alignment::apply(const Vector& x) const {
    if (x.size() != n_links) throw DimensionMismatch("alignment applied to a vector of the wrong length");
    Vector out(row_count());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        double s = 0.0;
        for (int c : rows[r]) s += x(c);
        out(static_cast<Index>(r)) = s;
    }
    return out;
}

Alignment Alignment::identity(int n) {
    Alignment a;
    a.n_links = n;
    for (int i = 0; i < n; ++i) a.rows.push_back({i});
    return a;
}

Alignment Alignment::from_dense(const Matrix& g) {
    Alignment a;
    a.n_links = static_cast<int>(g.cols());
    for (Index r = 0; r < g.rows(); ++r) {
        std::vector<int> row;
        for (Index c = 0; c < g.cols(); ++c) {
            if (g(r, c) == 1.0)
                row.push_back(static_cast<int>(c));
            else if (g(r, c) != 0.0)
                throw std::invalid_argument("alignment matrices are binary");
        }
        a.rows.push_back(std::move(row));
    }
    return a;
}

ObservationKind classify(const Observation& obs) {
    bool ragged = false;
    for (const auto& row : obs.alignment.rows) ragged = ragged || row.size() > 1;
    if (ragged) return ObservationKind::ragged;
    return obs.alignment.row_count() == obs.n_links() ? ObservationKind::full : ObservationKind::missing;
}

const char* to_string(ObservationKind kind) {
    switch (kind) {
        case ObservationKind::full: return "full";
        case ObservationKind::missing: return "missing";
        case ObservationKind::ragged: return "ragged";
    }
    return "?";
}

std::vector<Violation> validate(const Observation& obs) {
    std::vector<Violation> out;
    const auto& a = obs.alignment;
    const int n = a.n_links;
    if (a.row_count() > n)
        out.push_back({"too many rows", -1, -1,
                       "alignment has " + std::to_string(a.row_count()) + " rows but only " + std::to_string(n) +
                           " links"});
    if (obs.recording.size() != a.row_count())
        out.push_back({"dimension mismatch", -1, -1,
                       "recording has " + std::to_string(obs.recording.size()) + " values for " +
                           std::to_string(a.row_count()) + " rows"});

    std::vector<int> owner(static_cast<std::size_t>(std::max(n, 0)), -1);
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
        const int row = static_cast<int>(r);
        const auto& cols = a.rows[r];
        if (cols.empty()) {
            out.push_back({"empty row", row, -1, "empty row " + std::to_string(row + 1)});
            continue;
        }
        std::vector<int> sorted = cols;
        std::sort(sorted.begin(), sorted.end());
        for (std::size_t k = 0; k < sorted.size(); ++k) {
            const int c = sorted[k];
            if (c < 0 || c >= n) {
                out.push_back({"index out of range", row, c,
                               "row " + std::to_string(row + 1) + " references link " + std::to_string(c + 1) +
                                   " outside 1.." + std::to_string(n)});
                continue;
            }
            if (k > 0 && sorted[k - 1] == c) {
                out.push_back({"duplicate index", row, c,
                               "row " + std::to_string(row + 1) + " lists link " + std::to_string(c + 1) + " twice"});
                continue;
            }
            if (k > 0 && sorted[k - 1] != c - 1)
                out.push_back({"non-consecutive", row, c,
                               "row " + std::to_string(row + 1) + " is not a run of adjacent links (gap before link " +
                                   std::to_string(c + 1) + ")"});
            if (owner[c] >= 0)
                out.push_back({"overlapping support", row, c,
                               "overlapping support: rows " + std::to_string(owner[c] + 1) + " and " +
                                   std::to_string(row + 1) + " share link " + std::to_string(c + 1)});
            else
                owner[c] = row;
        }
    }
    for (Index i = 0; i < obs.recording.size(); ++i)
        if (!std::isfinite(obs.recording(i)))
            out.push_back({"non-finite value", static_cast<int>(i), -1,
                           "recorded value " + std::to_string(i + 1) + " is not finite"});
    return out;
}

void require_valid(const Observation& obs) {
    const auto v = validate(obs);
    if (!v.empty()) throw std::invalid_argument("invalid observation: " + v.front().message);
}

Vector least_norm_fill(const Observation& obs, const Vector& fallback_mean) {
    const int n = obs.n_links();
    if (fallback_mean.size() != n) throw DimensionMismatch("least_norm_fill: fallback mean has the wrong length");
    if (obs.recording.size() != obs.alignment.row_count())
        throw DimensionMismatch("least_norm_fill: recording does not match the alignment");
    Vector x = fallback_mean;
    for (std::size_t r = 0; r < obs.alignment.rows.size(); ++r) {
        const auto& cols = obs.alignment.rows[r];
        const double total = obs.recording(static_cast<Index>(r));
        if (cols.size() == 1) {
            x(cols.front()) = total;
            continue;
        }
        double weight = 0.0;
        for (int c : cols) weight += fallback_mean(c);
        if (weight > 0.0 && std::all_of(cols.begin(), cols.end(), [&](int c) { return fallback_mean(c) >= 0.0; })) {
            for (int c : cols) x(c) = total * fallback_mean(c) / weight;
        } else {
            for (int c : cols) x(c) = total / static_cast<double>(cols.size());
        }
        // Put the rounding residue on the last link so the row sums exactly.
        double partial = 0.0;
        for (std::size_t k = 0; k + 1 < cols.size(); ++k) partial += x(cols[k]);
        x(cols.back()) = total - partial;
    }
    return x;
}

RoutePattern RoutePattern::covering(int first, int last) {
    RoutePattern p;
    for (int link = first; link <= last + 1; ++link) p.stops.push_back("stop-" + std::to_string(link + 1));
    for (int link = first; link <= last; ++link) p.segments.push_back(LinkRange{link, link});
    return p;
}

void RouteGeometry::validate() const {
    const int n = n_links();
    for (const auto& [id, pattern] : routes) {
        if (pattern.stops.size() < 2) throw InconsistentGeometry("route " + id + " needs at least two stops");
        if (pattern.segments.size() + 1 != pattern.stops.size())
            throw InconsistentGeometry("route " + id + " must map every consecutive stop pair");
        int previous_last = -1;
        for (const auto& seg : pattern.segments) {
            if (!seg) continue;
            if (seg->first < 0 || seg->last >= n || seg->first > seg->last)
                throw InconsistentGeometry("route " + id + " covers links outside the target route");
            if (seg->first <= previous_last)
                throw InconsistentGeometry("route " + id + " covers target links out of order");
            previous_last = seg->last;
        }
    }
}

RouteGeometry RouteGeometry::from_json(const nlohmann::json& j) {
    RouteGeometry g;
    if (j.contains("target_links")) {
        for (const auto& name : j.at("target_links")) g.target_links.push_back(name.get<std::string>());
    } else {
        const int n = j.at("n_links").get<int>();
        for (int i = 0; i < n; ++i) g.target_links.push_back("link-" + std::to_string(i + 1));
    }
    for (const auto& [id, route] : j.at("routes").items()) {
        RoutePattern p;
        for (const auto& s : route.at("stops")) p.stops.push_back(s.get<std::string>());
        for (const auto& seg : route.at("links")) {
            if (seg.is_null()) {
                p.segments.emplace_back(std::nullopt);
            } else if (seg.is_number_integer()) {
                const int link = seg.get<int>() - 1;
                p.segments.emplace_back(LinkRange{link, link});
            } else if (seg.is_array() && seg.size() == 2) {
                p.segments.emplace_back(LinkRange{seg[0].get<int>() - 1, seg[1].get<int>() - 1});
            } else {
                throw FormatError("geometry: route " + id + " has a malformed link entry");
            }
        }
        g.routes.emplace(id, std::move(p));
    }
    g.validate();
    return g;
}

nlohmann::json RouteGeometry::to_json() const {
    nlohmann::json routes_json = nlohmann::json::object();
    for (const auto& [id, p] : routes) {
        nlohmann::json links = nlohmann::json::array();
        for (const auto& seg : p.segments) {
            if (!seg)
                links.push_back(nullptr);
            else if (seg->first == seg->last)
                links.push_back(seg->first + 1);
            else
                links.push_back({seg->first + 1, seg->last + 1});
        }
        routes_json[id] = {{"stops", p.stops}, {"links", links}};
    }
    return {{"target_links", target_links}, {"routes", routes_json}};
}

std::vector<AlignedRow> rows_from_recorded_stops(const RoutePattern& pattern, const std::vector<bool>& recorded) {
    if (recorded.size() != pattern.stops.size())
        throw DimensionMismatch("recorded-stop mask does not match the route's stop list");
    std::vector<AlignedRow> rows;
    int prev = -1;
    for (int s = 0; s < static_cast<int>(recorded.size()); ++s) {
        if (!recorded[s]) continue;
        if (prev >= 0) {
            bool usable = true;
            for (int k = prev; k < s && usable; ++k) {
                const auto& seg = pattern.segments[k];
                usable = seg.has_value() && (k == prev || seg->first == pattern.segments[k - 1]->last + 1);
            }
            if (usable) {
                AlignedRow row{{}, prev, s};
                for (int link = pattern.segments[prev]->first; link <= pattern.segments[s - 1]->last; ++link)
                    row.links.push_back(link);
                rows.push_back(std::move(row));
            }
        }
        prev = s;
    }
    std::sort(rows.begin(), rows.end(),
              [](const AlignedRow& a, const AlignedRow& b) { return a.links.front() < b.links.front(); });
    return rows;
}

Alignment build_alignment(const RouteGeometry& geometry, const std::string& route_id,
                          const std::set<int>& skipped_stops) {
    const auto it = geometry.routes.find(route_id);
    if (it == geometry.routes.end()) throw InconsistentGeometry("unknown route " + route_id);
    const RoutePattern& pattern = it->second;
    const int n_stops = static_cast<int>(pattern.stops.size());
    if (std::none_of(pattern.segments.begin(), pattern.segments.end(), [](const auto& s) { return s.has_value(); }))
        throw InconsistentGeometry("route " + route_id + " covers no target link");

    std::vector<bool> recorded(pattern.stops.size(), true);
    for (int s : skipped_stops) {
        if (s <= 0 || s >= n_stops - 1)
            throw InconsistentGeometry("skipped stop " + std::to_string(s) + " is not an interior stop of route " +
                                       route_id);
        if (!pattern.segments[s - 1] || !pattern.segments[s])
            throw InconsistentGeometry("skipped stop " + std::to_string(s) + " of route " + route_id +
                                       " touches an uncovered link");
        recorded[s] = false;
    }
    Alignment a;
    a.n_links = geometry.n_links();
    for (auto& row : rows_from_recorded_stops(pattern, recorded)) a.rows.push_back(std::move(row.links));
    return a;
}

nlohmann::json observation_to_json(const Observation& obs) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : obs.alignment.rows) {
        nlohmann::json r = nlohmann::json::array();
        for (int c : row) r.push_back(c + 1);
        rows.push_back(std::move(r));
    }
    return {{"route", obs.route_id}, {"bus", obs.bus_id},       {"t0", format_iso8601(obs.start_time)},
            {"r", vector_to_json(obs.recording)}, {"rows", rows}, {"n", obs.n_links()}};
}

Observation observation_from_json(const nlohmann::json& j, std::optional<int> n_links) {
    Observation obs;
    obs.route_id = j.value("route", "");
    obs.bus_id = j.value("bus", "");
    if (j.contains("t0")) {
        const auto t = parse_timestamp(j.at("t0").get<std::string>());
        if (!t) throw FormatError("observation: unparseable t0");
        obs.start_time = *t;
    }
    obs.recording = vector_from_json(j.at("r"));
    int n = n_links.value_or(-1);
    if (j.contains("n")) {
        const int declared = j.at("n").get<int>();
        if (n_links && *n_links != declared) throw DimensionMismatch("observation: n disagrees with the caller");
        n = declared;
    }
    for (const auto& row : j.at("rows")) {
        std::vector<int> cols;
        for (const auto& c : row) cols.push_back(c.get<int>() - 1);
        obs.alignment.rows.push_back(std::move(cols));
    }
    if (n < 0) throw FormatError("observation: link count unknown (no \"n\" field)");
    obs.alignment.n_links = n;
    return obs;
}

void write_observations(std::ostream& out, const std::vector<Observation>& obs) {
    for (const auto& o : obs) out << observation_to_json(o).dump() << '\n';
}

std::vector<Observation> read_observations(std::istream& in, std::optional<int> n_links) {
    std::vector<Observation> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(observation_from_json(nlohmann::json::parse(line), n_links));
            if (const auto bad = validate(out.back()); !bad.empty())
                throw FormatError(bad.front().message);
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("observations line " + std::to_string(line_no) + ": " + e.what());
        } catch (const FormatError& e) {
            throw FormatError("observations line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

void write_observations(const std::filesystem::path& path, const std::vector<Observation>& obs) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    write_observations(out, obs);
}

std::vector<Observation> read_observations(const std::filesystem::path& path, std::optional<int> n_links) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return read_observations(in, n_links);
}

}  // namespace linkcorr
