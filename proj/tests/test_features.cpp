#include <gtest/gtest.h>

#include "hrvbench/features.hpp"
#include "test_util.hpp"

using namespace hrvbench;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error";
    return ErrorCode::Io;
}

std::optional<double> value(const FeatureTable& t, std::size_t row, std::string_view col) {
    return t.rows[row].values[*t.column(col)];
}

}  // namespace

TEST(FeaturesCsv, HeaderIsFixed) {
    EXPECT_EQ(features_csv_header(),
              "recording_id,label,segment,mean_rr,mean_hr,pcnn20,pcnn30,pcnn50,sdnn,rmssd,sdann,sdnnidx,total_power,"
              "vlf,lf,hf,lf_nu,hf_nu,lf_hf,centroid,sd1,sd2,sd1_sd2,sd1_nu,sd2_nu,lle,vpc_count,to,ts,ac,dc");
}

TEST(Extract, ThreeRowsPerRecording) {
    auto p = GeneratorParams::mi_defaults();
    const auto rows = extract_recording(generate_recording(p, 4, "mi_x"), CohortLabel::MI);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[0].segment, Segment::Full24h);
    EXPECT_EQ(rows[1].segment, Segment::Day);
    EXPECT_EQ(rows[2].segment, Segment::Night);
    for (const auto& r : rows) {
        EXPECT_EQ(r.recording_id, "mi_x");
        ASSERT_EQ(r.values.size(), kIndexColumns.size());
        for (std::size_t j = 0; j < 23; ++j) EXPECT_TRUE(r.values[j]) << kIndexColumns[j];  // through lle
    }
    // the 24h VPC count is the sum over day and night
    const std::size_t vc = 23;
    EXPECT_EQ(*rows[0].values[vc], *rows[1].values[vc] + *rows[2].values[vc]);
}

TEST(Extract, ConstantRecording) {
    const auto rr = testutil::make_rr(std::vector<double>(6000, 800), 9 * 3600.0);
    const auto rows = extract_recording(rr, std::nullopt);
    FeatureTable t{index_column_names(), rows};
    EXPECT_EQ(value(t, 0, "sdnn"), 0.0);
    EXPECT_EQ(value(t, 0, "rmssd"), 0.0);
    EXPECT_FALSE(value(t, 0, "to"));
    EXPECT_FALSE(value(t, 0, "ts"));
    EXPECT_EQ(value(t, 0, "vpc_count"), 0.0);
    EXPECT_FALSE(value(t, 0, "sd1_sd2"));
    EXPECT_FALSE(value(t, 0, "lle"));  // no neighbour with nonzero distance
    // the whole 80 minutes fall in the day window
    EXPECT_FALSE(value(t, 2, "mean_rr"));
    EXPECT_EQ(value(t, 1, "mean_rr"), 800.0);
}

TEST(FeaturesCsv, RoundTrip) {
    const auto rows = extract_recording(generate_recording(GeneratorParams::healthy_defaults(), 5, "h1"),
                                        CohortLabel::Healthy);
    FeatureTable t{index_column_names(), rows};
    const auto text = serialize_features_csv(t);
    EXPECT_EQ(text.substr(0, text.find('\n')), features_csv_header());
    const auto back = parse_features_csv(text);
    EXPECT_EQ(back.columns, t.columns);
    ASSERT_EQ(back.rows.size(), 3u);
    EXPECT_EQ(serialize_features_csv(back), text);
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
        ASSERT_EQ(back.rows[0].values[j].has_value(), t.rows[0].values[j].has_value());
        if (t.rows[0].values[j]) {
            EXPECT_NEAR(*back.rows[0].values[j], *t.rows[0].values[j], 1e-5 * std::abs(*t.rows[0].values[j]));
        }
    }
}

TEST(FeaturesCsv, Errors) {
    EXPECT_EQ(code_of([] { parse_features_csv("recording_id,label,sdnn\na,MI,3\n"); }), ErrorCode::Schema);
    EXPECT_EQ(code_of([] { parse_features_csv("recording_id,label,segment\n", {"sdnn"}); }), ErrorCode::Schema);
    EXPECT_EQ(code_of([] { parse_features_csv("recording_id,label,segment,sdnn\na,MI,24h\n"); }), ErrorCode::MalformedLine);
    EXPECT_EQ(code_of([] { parse_features_csv("recording_id,label,segment,sdnn\na,Sick,24h,1\n"); }), ErrorCode::MalformedLine);
    EXPECT_EQ(code_of([] { parse_features_csv("recording_id,label,segment,sdnn\na,MI,noon,1\n"); }), ErrorCode::MalformedLine);
    EXPECT_EQ(code_of([] { parse_features_csv("recording_id,label,segment,sdnn\na,MI,24h,x\n"); }), ErrorCode::MalformedLine);
    EXPECT_EQ(code_of([] { parse_features_csv(""); }), ErrorCode::Schema);
}

TEST(FeaturesCsv, EmptyCellsAreAbsentAndLabelsOptional) {
    const auto t = parse_features_csv("recording_id,label,segment,a,b\nr1,,day,,2\nr2,Healthy,24h,1,\n");
    EXPECT_FALSE(t.rows[0].label);
    EXPECT_FALSE(t.rows[0].values[0]);
    EXPECT_EQ(t.rows[0].values[1], 2.0);
    EXPECT_EQ(t.rows[1].label, CohortLabel::Healthy);
}

TEST(FeatureMatrixFromTable, MedianImputationAndFiltering) {
    const auto t = parse_features_csv(
        "recording_id,label,segment,a,b\n"
        "r1,Healthy,24h,1,10\n"
        "r2,MI,24h,,20\n"
        "r3,MI,24h,5,30\n"
        "r4,Healthy,24h,4,\n"
        "r5,,24h,100,100\n"
        "r1,Healthy,day,7,7\n");
    const auto x = to_feature_matrix(t, Segment::Full24h, {"a", "b"});
    ASSERT_EQ(x.rows(), 4u);  // unlabelled and day rows left out
    EXPECT_EQ(x.at(1, 0), 4.0);   // median of {1, 5, 4}
    EXPECT_EQ(x.at(3, 1), 20.0);  // median of {10, 20, 30}
    EXPECT_EQ(x.label(1), 1);
    EXPECT_EQ(code_of([&] { to_feature_matrix(t, Segment::Full24h, {"c"}); }), ErrorCode::Schema);
}

TEST(FeaturesCsv, RejectsSeparatorInId) {
    FeatureRow r{"a,b", CohortLabel::MI, Segment::Day, {}};
    std::string out;
    EXPECT_EQ(code_of([&] { append_feature_rows(out, {r}); }), ErrorCode::InvalidParams);
}
