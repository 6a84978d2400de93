#include <gtest/gtest.h>

#include <sstream>

#include "linkcorr/errors.hpp"
#include "linkcorr/observation.hpp"
#include "oracles.hpp"

using namespace linkcorr;

namespace {

Observation make(int n, std::vector<std::vector<int>> rows, std::vector<double> r) {
    Observation o;
    o.alignment.n_links = n;
    o.alignment.rows = std::move(rows);
    o.recording = Eigen::Map<Vector>(r.data(), static_cast<Index>(r.size()));
    return o;
}

bool has_kind(const std::vector<Violation>& v, const std::string& kind) {
    for (const auto& x : v)
        if (x.kind == kind) return true;
    return false;
}

}  // namespace

TEST(Alignment, DenseAndApply) {
    Alignment g{4, {{0}, {1, 2}}};
    Matrix expect(2, 4);
    expect << 1, 0, 0, 0, 0, 1, 1, 0;
    EXPECT_EQ(g.dense(), expect);
    Vector x(4);
    x << 1, 2, 3, 4;
    Vector gx(2);
    gx << 1, 5;
    EXPECT_EQ(g.apply(x), gx);
    EXPECT_EQ(Alignment::from_dense(expect), g);
    EXPECT_EQ(Alignment::identity(3).dense(), Matrix::Identity(3, 3));
}

TEST(Validate, AcceptsValidObservation) {
    EXPECT_TRUE(validate(make(5, {{0}, {1, 2}, {4}}, {1, 2, 3})).empty());
}

TEST(Validate, ReportsEachViolation) {
    EXPECT_TRUE(has_kind(validate(make(3, {{0}, {}}, {1, 2})), "empty row"));
    EXPECT_TRUE(has_kind(validate(make(3, {{0, 1}, {1, 2}}, {1, 2})), "overlapping support"));
    EXPECT_TRUE(has_kind(validate(make(3, {{0, 2}}, {1})), "non-consecutive"));
    EXPECT_TRUE(has_kind(validate(make(3, {{0}}, {1, 2})), "dimension mismatch"));
    EXPECT_TRUE(has_kind(validate(make(3, {{3}}, {1})), "index out of range"));
    EXPECT_TRUE(has_kind(validate(make(2, {{0}, {1}, {1}}, {1, 2, 3})), "too many rows"));
    EXPECT_TRUE(has_kind(validate(make(3, {{0}}, {std::nan("")})), "non-finite value"));
}

TEST(Validate, MessagesUseOneBasedNumbers) {
    const auto v = validate(make(4, {{0}, {}}, {1, 2}));
    ASSERT_FALSE(v.empty());
    EXPECT_NE(v.front().message.find("empty row 2"), std::string::npos);
    const auto w = validate(make(4, {{0, 1}, {1, 2}}, {1, 2}));
    ASSERT_FALSE(w.empty());
    EXPECT_NE(w.front().message.find("rows 1 and 2 share link 2"), std::string::npos);
    EXPECT_THROW(require_valid(make(4, {{0}, {}}, {1, 2})), std::invalid_argument);
}

TEST(Classify, Kinds) {
    EXPECT_EQ(classify(make(2, {{0}, {1}}, {1, 2})), ObservationKind::full);
    EXPECT_EQ(classify(make(3, {{0}, {1}}, {1, 2})), ObservationKind::missing);
    EXPECT_EQ(classify(make(3, {{0}, {1, 2}}, {1, 2})), ObservationKind::ragged);
}

TEST(LeastNormFill, SatisfiesConstraintProperty) {
    Rng rng(4);
    for (int t = 0; t < 500; ++t) {
        const int n = 1 + static_cast<int>(rng() % 20);
        Observation o;
        o.alignment = oracle::random_alignment(n, rng);
        o.recording = oracle::random_vector(o.alignment.row_count(), rng, 10.0);
        const Vector fallback = oracle::random_vector(n, rng, 5.0);
        ASSERT_TRUE(validate(o).empty());
        const Vector x = least_norm_fill(o, fallback);
        EXPECT_LT((o.alignment.apply(x) - o.recording).cwiseAbs().maxCoeff(), 1e-9);
    }
}

TEST(LeastNormFill, ProportionalSplit) {
    Vector fallback(3);
    fallback << 1, 3, 7;
    const Vector x = least_norm_fill(make(3, {{0, 1}}, {8}), fallback);
    EXPECT_DOUBLE_EQ(x(0), 2.0);
    EXPECT_DOUBLE_EQ(x(1), 6.0);
    EXPECT_DOUBLE_EQ(x(2), 7.0);
}

TEST(Geometry, BuildAlignmentWithSkippedStop) {
    RouteGeometry geo;
    geo.target_links.resize(6);
    geo.routes["A"] = RoutePattern::covering(0, 5);
    geo.routes["B"] = RoutePattern::covering(2, 4);
    EXPECT_EQ(build_alignment(geo, "A", {}), Alignment::identity(6));
    // Skipping interior stop 2 (between links 2 and 3, 1-based) merges them.
    const Alignment g = build_alignment(geo, "A", {2});
    EXPECT_EQ(g.rows, (std::vector<std::vector<int>>{{0}, {1, 2}, {3}, {4}, {5}}));
    const Alignment h = build_alignment(geo, "B", {});
    EXPECT_EQ(h.rows, (std::vector<std::vector<int>>{{2}, {3}, {4}}));
    EXPECT_THROW(build_alignment(geo, "C", {}), InconsistentGeometry);
    EXPECT_THROW(build_alignment(geo, "A", {0}), InconsistentGeometry);
}

TEST(Geometry, RowsFromRecordedStopsSkipsUncovered) {
    RoutePattern p;
    p.stops = {"s0", "s1", "s2", "s3", "s4"};
    p.segments = {std::nullopt, LinkRange{0, 0}, LinkRange{1, 1}, LinkRange{2, 2}};
    const auto rows = rows_from_recorded_stops(p, {true, true, true, false, true});
    ASSERT_EQ(rows.size(), 2u);
    EXPECT_EQ(rows[0].links, std::vector<int>{0});
    EXPECT_EQ(rows[1].links, (std::vector<int>{1, 2}));
    EXPECT_EQ(rows[1].from_stop, 2);
    EXPECT_EQ(rows[1].to_stop, 4);
}

TEST(Geometry, JsonRoundTrip) {
    const auto j = nlohmann::json::parse(R"({
        "target_links": ["a", "b", "c", "d"],
        "routes": {"201": {"stops": ["x", "p", "q", "r"], "links": [null, 2, [3, 4]]}}
    })");
    const RouteGeometry g = RouteGeometry::from_json(j);
    EXPECT_EQ(g.n_links(), 4);
    const auto& p = g.routes.at("201");
    ASSERT_EQ(p.segments.size(), 3u);
    EXPECT_FALSE(p.segments[0]);
    EXPECT_EQ(*p.segments[1], (LinkRange{1, 1}));
    EXPECT_EQ(*p.segments[2], (LinkRange{2, 3}));
    const RouteGeometry back = RouteGeometry::from_json(g.to_json());
    EXPECT_EQ(back.routes.at("201").segments, p.segments);
}

TEST(Geometry, RejectsOverlappingRanges) {
    const auto j = nlohmann::json::parse(R"({"n_links": 4,
        "routes": {"r": {"stops": ["a", "b", "c"], "links": [[1, 2], 2]}}})");
    EXPECT_THROW(RouteGeometry::from_json(j), InconsistentGeometry);
}

TEST(ObservationJson, RoundTripIsExact) {
    Rng rng(8);
    std::vector<Observation> obs;
    for (int t = 0; t < 20; ++t) {
        Observation o;
        o.alignment = oracle::random_alignment(9, rng);
        o.recording = oracle::random_vector(o.alignment.row_count(), rng, 7.0);
        o.route_id = "r" + std::to_string(t);
        o.bus_id = "b";
        o.start_time = 1480000000 + t;
        obs.push_back(o);
    }
    std::stringstream ss;
    write_observations(ss, obs);
    const auto back = read_observations(ss);
    ASSERT_EQ(back.size(), obs.size());
    for (std::size_t i = 0; i < obs.size(); ++i) {
        EXPECT_EQ(back[i].alignment, obs[i].alignment);
        EXPECT_EQ(back[i].recording, obs[i].recording);
        EXPECT_EQ(back[i].route_id, obs[i].route_id);
        EXPECT_EQ(back[i].start_time, obs[i].start_time);
    }
}

TEST(ObservationJson, RejectsInvalidRecord) {
    std::stringstream ss(R"({"r": [1, 2], "rows": [[1, 2], [2, 3]], "n": 3})");
    EXPECT_ANY_THROW(read_observations(ss));
}
