#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "linkcorr/observation.hpp"
#include "linkcorr/timeutil.hpp"

namespace linkcorr {

/// One in-out-stop record.
struct StopEvent {
    std::string record_id;     // ID
    std::string bus_id;        // OBUID
    std::string trip_id;       // TRIP_ID
    std::string route_id;      // ROUTE_ID
    std::string direction_id;  // ROUTESUB_ID
    std::string stop_id;       // ROUTE_STA_ID
    int ad_flag = 1;           // 1 arrival, 0 departure
    Timestamp ad_time = 0;
};

struct Period {
    std::string name;
    int start = 0;  // seconds after midnight
    int end = 0;    // exclusive; end <= start wraps past midnight

    bool contains(int second_of_day) const;
};

struct PeriodSpec {
    std::vector<Period> periods;

    /// morning 07–10, normal 10–17, afternoon 17–20, night 20–07.
    static PeriodSpec defaults();
    /// Throws std::invalid_argument unless the periods partition the day.
    void validate() const;
    const Period& period_of(Timestamp t) const;

    /// [{"name": "morning", "start": "07:00", "end": "10:00"}, ...]
    static PeriodSpec from_json(const nlohmann::json& j);
};

struct RejectedRow {
    std::size_t line = 0;  // 1-based line in the file
    std::string reason;
};

struct EventTable {
    std::vector<StopEvent> events;  // sorted by (trip_id, ad_time)
    std::vector<RejectedRow> rejects;
};

/// Reads a CSV whose header names the columns ID, OBUID, TRIP_ID, ROUTE_ID,
/// ROUTESUB_ID, ROUTE_STA_ID, AD_FLAG, AD_TIME (any case, any order; ROUTE_NAME
/// and STOP_NAME are optional). Bad rows land in `rejects`; a missing column or
/// unreadable file throws.
EventTable parse_events(std::istream& in);
EventTable parse_events(const std::filesystem::path& path);

enum class PeriodKey {
    first_link_entry,  // arrival at the stop opening the trip's first covered target link
    trip_start,        // the trip's earliest event
};

struct IngestOptions {
    int max_ragged_span = 3;
    PeriodKey period_key = PeriodKey::first_link_entry;
};

struct IngestResult {
    std::map<std::string, std::vector<Observation>> by_period;  // each list ordered by trip_id
    std::map<std::string, std::size_t> dropped;                 // reason -> trips
    std::size_t trips = 0;
};

/// Link travel times are arrival-to-arrival differences (upstream dwell
/// included); departure events are ignored. A stop without an arrival merges
/// its two links into a ragged sum; uncovered links are missing. Trips with a
/// negative link time ("non_monotone"), a ragged span longer than
/// max_ragged_span ("long_ragged"), no covered link ("no_target_coverage") or a
/// route absent from the geometry ("unknown_route") are dropped and counted.
/// Geometry is looked up as "route_id:direction_id", then "route_id".
/// Throws InconsistentGeometry when a trip visits a stop its route does not list.
IngestResult events_to_observations(const std::vector<StopEvent>& events, const RouteGeometry& geometry,
                                    const PeriodSpec& periods, const IngestOptions& options = {});

/// Splits one CSV line, honouring double quotes.
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace linkcorr
