#include "linkcorr/ingest.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <optional>
#include <span>
#include <stdexcept>

#include "linkcorr/errors.hpp"

namespace linkcorr {

namespace {

constexpr int kDay = 86400;

std::string upper(std::string s) {
    for (auto& ch : s) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    return s;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

enum Column { kId, kObu, kTrip, kRoute, kDirection, kStop, kFlag, kTime, kColumns };
constexpr std::array<const char*, kColumns> kColumnNames = {"ID",          "OBUID",        "TRIP_ID", "ROUTE_ID",
                                                            "ROUTESUB_ID", "ROUTE_STA_ID", "AD_FLAG", "AD_TIME"};

}  // namespace

bool Period::contains(int s) const {
    if (start < end) return s >= start && s < end;
    return s >= start || s < end;
}

PeriodSpec PeriodSpec::defaults() {
    return PeriodSpec{{{"morning", 7 * 3600, 10 * 3600},
                       {"normal", 10 * 3600, 17 * 3600},
                       {"afternoon", 17 * 3600, 20 * 3600},
                       {"night", 20 * 3600, 7 * 3600}}};
}

void PeriodSpec::validate() const {
    if (periods.empty()) throw std::invalid_argument("period spec is empty");
    std::vector<std::pair<int, int>> pieces;
    for (const auto& p : periods) {
        if (p.name.empty()) throw std::invalid_argument("period without a name");
        if (p.start < 0 || p.start >= kDay || p.end < 0 || p.end > kDay)
            throw std::invalid_argument("period " + p.name + " has bounds outside the day");
        if (p.start < p.end) {
            pieces.emplace_back(p.start, p.end);
        } else {
            pieces.emplace_back(p.start, kDay);
            if (p.end > 0) pieces.emplace_back(0, p.end);
        }
    }
    std::sort(pieces.begin(), pieces.end());
    int cursor = 0;
    for (const auto& [a, b] : pieces) {
        if (a != cursor) throw std::invalid_argument("periods do not partition the day (gap or overlap)");
        cursor = b;
    }
    if (cursor != kDay) throw std::invalid_argument("periods do not cover the whole day");
}

const Period& PeriodSpec::period_of(Timestamp t) const {
    const int s = seconds_of_day(t);
    for (const auto& p : periods)
        if (p.contains(s)) return p;
    throw std::invalid_argument("time of day not covered by any period");
}

PeriodSpec PeriodSpec::from_json(const nlohmann::json& j) {
    PeriodSpec spec;
    for (const auto& p : j) {
        const auto start = parse_clock(p.at("start").get<std::string>());
        auto end = parse_clock(p.at("end").get<std::string>());
        if (!start || !end) throw FormatError("period clock must be HH:MM or HH:MM:SS");
        spec.periods.push_back({p.at("name").get<std::string>(), *start, *end == kDay ? 0 : *end});
        if (*end == kDay && *start == 0) spec.periods.back().end = kDay;
    }
    spec.validate();
    return spec;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                field += '"';
                ++i;
            } else if (ch == '"') {
                quoted = false;
            } else {
                field += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(trim(field));
            field.clear();
        } else if (ch != '\r') {
            field += ch;
        }
    }
    out.push_back(trim(field));
    return out;
}

EventTable parse_events(std::istream& in) {
    EventTable table;
    std::string line;
    if (!std::getline(in, line)) throw FormatError("event file is empty (no header)");
    const auto header = split_csv_line(line);
    std::array<std::optional<std::size_t>, kColumns> where;
    for (std::size_t i = 0; i < header.size(); ++i) {
        std::string name = upper(header[i]);
        if (i == 0 && name.size() >= 3 && static_cast<unsigned char>(name[0]) == 0xEF) name = name.substr(3);
        for (int c = 0; c < kColumns; ++c)
            if (name == kColumnNames[c]) where[c] = i;
    }
    std::string missing;
    for (int c = 0; c < kColumns; ++c)
        if (!where[c]) missing += (missing.empty() ? "" : ", ") + std::string(kColumnNames[c]);
    if (!missing.empty()) throw FormatError("event file lacks mandatory columns: " + missing);

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        // An unquoted `YYYYMMDD, HH:MM:SS` splits AD_TIME in two; glue it back.
        if (fields.size() == header.size() + 1) {
            const std::size_t t = *where[kTime];
            fields[t] += ", " + fields[t + 1];
            fields.erase(fields.begin() + static_cast<std::ptrdiff_t>(t + 1));
        }
        if (fields.size() != header.size()) {
            table.rejects.push_back({line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                                  std::to_string(fields.size())});
            continue;
        }
        auto get = [&](Column c) { return fields[*where[c]]; };
        StopEvent ev{get(kId), get(kObu), get(kTrip), get(kRoute), get(kDirection), get(kStop), 0, 0};
        std::string reason;
        for (int c : {kId, kObu, kTrip, kRoute, kDirection, kStop})
            if (reason.empty() && get(static_cast<Column>(c)).empty())
                reason = "empty " + std::string(kColumnNames[c]);
        const std::string flag = get(kFlag);
        if (reason.empty()) {
            if (flag == "0" || flag == "1")
                ev.ad_flag = flag[0] - '0';
            else
                reason = "invalid ad_flag";
        }
        if (reason.empty()) {
            const auto t = parse_timestamp(get(kTime));
            if (t)
                ev.ad_time = *t;
            else
                reason = "invalid ad_time";
        }
        if (!reason.empty()) {
            table.rejects.push_back({line_no, reason});
            continue;
        }
        table.events.push_back(std::move(ev));
    }
    std::stable_sort(table.events.begin(), table.events.end(), [](const StopEvent& a, const StopEvent& b) {
        if (a.trip_id != b.trip_id) return a.trip_id < b.trip_id;
        return a.ad_time < b.ad_time;
    });
    return table;
}

EventTable parse_events(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read " + path.string());
    return parse_events(in);
}

IngestResult events_to_observations(const std::vector<StopEvent>& events, const RouteGeometry& geometry,
                                    const PeriodSpec& periods, const IngestOptions& options) {
    periods.validate();
    IngestResult result;
    for (const auto& p : periods.periods) result.by_period[p.name];

    std::size_t begin = 0;
    while (begin < events.size()) {
        std::size_t end = begin;
        while (end < events.size() && events[end].trip_id == events[begin].trip_id) ++end;
        const std::span<const StopEvent> trip(events.data() + begin, end - begin);
        begin = end;
        ++result.trips;

        const StopEvent& head = trip.front();
        auto route = geometry.routes.find(head.route_id + ":" + head.direction_id);
        if (route == geometry.routes.end()) route = geometry.routes.find(head.route_id);
        if (route == geometry.routes.end()) {
            ++result.dropped["unknown_route"];
            continue;
        }
        const RoutePattern& pattern = route->second;

        std::vector<std::optional<Timestamp>> arrival(pattern.stops.size());
        Timestamp trip_start = head.ad_time;
        for (const StopEvent& ev : trip) {
            trip_start = std::min(trip_start, ev.ad_time);
            const auto it = std::find(pattern.stops.begin(), pattern.stops.end(), ev.stop_id);
            if (it == pattern.stops.end())
                throw InconsistentGeometry("trip " + ev.trip_id + " visits stop " + ev.stop_id + " not listed for route " +
                                           route->first);
            auto& slot = arrival[static_cast<std::size_t>(it - pattern.stops.begin())];
            if (ev.ad_flag == 1 && !slot) slot = ev.ad_time;
        }

        std::vector<bool> recorded(arrival.size());
        for (std::size_t s = 0; s < arrival.size(); ++s) recorded[s] = arrival[s].has_value();
        const auto rows = rows_from_recorded_stops(pattern, recorded);

        bool monotone = true;
        std::optional<Timestamp> previous;
        for (const auto& t : arrival) {
            if (!t) continue;
            if (previous && *t < *previous) monotone = false;
            previous = t;
        }
        if (!monotone) {
            ++result.dropped["non_monotone"];
            continue;
        }
        if (rows.empty()) {
            ++result.dropped["no_target_coverage"];
            continue;
        }
        if (std::any_of(rows.begin(), rows.end(), [&](const AlignedRow& r) {
                return static_cast<int>(r.links.size()) > options.max_ragged_span;
            })) {
            ++result.dropped["long_ragged"];
            continue;
        }

        Observation obs;
        obs.alignment.n_links = geometry.n_links();
        obs.recording.resize(static_cast<Index>(rows.size()));
        Timestamp entry = *arrival[static_cast<std::size_t>(rows.front().from_stop)];
        for (std::size_t r = 0; r < rows.size(); ++r) {
            const Timestamp from = *arrival[static_cast<std::size_t>(rows[r].from_stop)];
            const Timestamp to = *arrival[static_cast<std::size_t>(rows[r].to_stop)];
            obs.recording(static_cast<Index>(r)) = static_cast<double>(to - from);
            obs.alignment.rows.push_back(rows[r].links);
            entry = std::min(entry, from);
        }
        obs.route_id = head.route_id;
        obs.bus_id = head.bus_id;
        obs.start_time = options.period_key == PeriodKey::first_link_entry ? entry : trip_start;
        result.by_period[periods.period_of(obs.start_time).name].push_back(std::move(obs));
    }
    return result;
}

}  // namespace linkcorr
