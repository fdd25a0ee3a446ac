#include <gtest/gtest.h>

#include "hrvbench/signal_ingest.hpp"
#include "hrvbench/synth_cohort.hpp"

using namespace hrvbench;

namespace {

RRSeries steady(std::size_t beats, double rr, double start_clock = 0.0) {
    RRSeries s;
    s.recording_id = "steady";
    s.start_clock_s = start_clock;
    double t = 0;
    for (std::size_t i = 0; i < beats; ++i) {
        s.beats.push_back({t, rr, BeatLabel::Normal});
        t += rr;
    }
    return s;
}

ErrorCode code_of(std::string_view text) {
    try {
        parse_rr_csv(text);
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error";
    return ErrorCode::Io;
}

}  // namespace

TEST(ParseRrCsv, MinimalFile) {
    const auto s = parse_rr_csv("onset_ms,rr_ms,label\n0,800,N\n800,810,N\n");
    ASSERT_EQ(s.beats.size(), 2u);
    EXPECT_EQ(s.beats[0].rr_ms, 800);
    EXPECT_EQ(s.beats[1].rr_ms, 810);
    EXPECT_EQ(s.beats[1].label, BeatLabel::Normal);
}

TEST(ParseRrCsv, CommentsCarryClockAndId) {
    const auto s = parse_rr_csv("# recording_id=abc\n# start_clock=19:59:59\nonset_ms,rr_ms,label\n0,800,V\n800,700,X\n");
    EXPECT_EQ(s.recording_id, "abc");
    EXPECT_EQ(s.start_clock_s, 19 * 3600 + 59 * 60 + 59);
    EXPECT_EQ(s.beats[0].label, BeatLabel::Ventricular);
    EXPECT_EQ(s.beats[1].label, BeatLabel::Unknown);  // unknown code
}

TEST(ParseRrCsv, Errors) {
    EXPECT_EQ(code_of("onset_ms,rr_ms,label\n800,-5,N\n"), ErrorCode::MalformedLine);
    EXPECT_EQ(code_of("onset_ms,rr_ms,label\n0,abc,N\n"), ErrorCode::MalformedLine);
    EXPECT_EQ(code_of("onset_ms,rr_ms,label\n800,800,N\n0,800,N\n"), ErrorCode::NonMonotonicTime);
    EXPECT_EQ(code_of("onset_ms,rr_ms,label\n"), ErrorCode::EmptyRecording);
    EXPECT_EQ(code_of("onset,rr\n0,800,N\n"), ErrorCode::MalformedLine);
}

TEST(ParseRrCsv, ErrorCarriesLineNumber) {
    try {
        parse_rr_csv("onset_ms,rr_ms,label\n0,800,N\n800,oops,N\n");
        FAIL();
    } catch (const Error& e) {
        ASSERT_TRUE(e.line());
        EXPECT_EQ(*e.line(), 3u);
    }
}

TEST(ParseRrCsv, RoundTripLargeGeneratedFile) {
    auto p = GeneratorParams::healthy_defaults();
    p.duration_h = 24.0;
    const auto rr = generate_recording(p, 99, "big");
    ASSERT_GE(rr.beats.size(), 100000u);
    const auto text = serialize_rr_csv(rr);
    const auto back = parse_rr_csv(text);
    std::string a, b;
    append_rr_rows(a, rr);
    append_rr_rows(b, back);
    EXPECT_EQ(a, b);
    EXPECT_EQ(serialize_rr_csv(back), text);
}

TEST(FilterToNn, SteadySeriesKeepsAll) {
    const auto nn = filter_to_nn(steady(10, 800));
    EXPECT_EQ(nn.size(), 9u);
}

TEST(FilterToNn, VentricularBeatDropsBothAdjacentIntervals) {
    auto s = steady(10, 800);
    s.beats[5].label = BeatLabel::Ventricular;
    const auto nn = filter_to_nn(s);
    EXPECT_EQ(nn.size(), 7u);
    for (double on : nn.onset_ms) {
        EXPECT_NE(on, s.beats[5].onset_ms);  // interval 4->5 gone
        EXPECT_NE(on, s.beats[6].onset_ms);  // interval 5->6 gone
    }
}

TEST(FilterToNn, RangeRuleDropsLongInterval) {
    // 800 x 10 intervals with one 2500 ms interval: 11 intervals, 12 beats
    RRSeries s;
    double t = 0;
    for (int i = 0; i < 12; ++i) {
        const double rr = i == 5 ? 2500 : 800;
        s.beats.push_back({t, rr, BeatLabel::Normal});
        t += rr;
    }
    const auto nn = filter_to_nn(s);
    EXPECT_EQ(nn.size(), 10u);
    for (double x : nn.intervals_ms) EXPECT_EQ(x, 800);
}

TEST(FilterToNn, JumpRuleAgainstRunningMedian) {
    RRSeries s;
    double t = 0;
    for (int i = 0; i < 20; ++i) {
        const double rr = i == 10 ? 1000 : 800;  // 25% above median
        s.beats.push_back({t, rr, BeatLabel::Normal});
        t += rr;
    }
    const auto nn = filter_to_nn(s);
    EXPECT_EQ(nn.size(), 18u);
}

TEST(FilterToNn, TooFewBeats) {
    EXPECT_THROW(filter_to_nn(steady(2, 800)), Error);
    try {
        filter_to_nn(steady(2, 800));
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::TooFewBeats);
    }
}

TEST(FilterToNn, OutputIsSubsequenceAndRefilterIsNoOp) {
    auto p = GeneratorParams::mi_defaults();
    p.duration_h = 2.0;
    p.vpc_rate_per_hour = 30;
    const auto rr = generate_recording(p, 5, "x");
    const auto nn = filter_to_nn(rr);
    // subsequence: each NN interval is an input interval ending at the same beat
    std::size_t j = 0;
    for (std::size_t k = 0; k < nn.size(); ++k) {
        while (j < rr.beats.size() && rr.beats[j].onset_ms != nn.onset_ms[k]) ++j;
        ASSERT_LT(j, rr.beats.size());
        EXPECT_EQ(rr.beats[j - 1].rr_ms, nn.intervals_ms[k]);
    }
    const auto again = filter_to_nn(nn_to_rr(nn));
    EXPECT_EQ(again.intervals_ms, nn.intervals_ms);
    EXPECT_EQ(again.onset_ms, nn.onset_ms);
}

TEST(FilterToNn, BoundsHold) {
    auto p = GeneratorParams::healthy_defaults();
    p.duration_h = 3.0;
    const auto nn = filter_to_nn(generate_recording(p, 11, "b"));
    for (double x : nn.intervals_ms) {
        EXPECT_GE(x, 300);
        EXPECT_LE(x, 2000);
    }
}

TEST(FilterConfig, Validation) {
    FilterConfig c;
    c.median_window_beats = 10;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.min_nn_ms = 2500;
    EXPECT_THROW(c.validate(), Error);
    c = {};
    c.relative_jump_fraction = 1.0;
    EXPECT_THROW(c.validate(), Error);
}

TEST(Segment, MorningHourIsAllDay) {
    const auto parts = segment(filter_to_nn(steady(4501, 800, 8 * 3600.0)));
    EXPECT_EQ(parts.day.size(), parts.full.size());
    EXPECT_EQ(parts.night.size(), 0u);
}

TEST(Segment, BoundaryStraddlingSplits) {
    const auto nn = filter_to_nn(steady(10, 800, 19 * 3600 + 59 * 60 + 59));
    const auto parts = segment(nn);
    EXPECT_GT(parts.day.size(), 0u);
    EXPECT_GT(parts.night.size(), 0u);
    EXPECT_EQ(parts.day.size() + parts.night.size(), parts.full.size());
    // terminating beat at 19:59:59.8 -> day; at 20:00:00.6 -> night
    EXPECT_EQ(parts.day.size(), 1u);
}

TEST(Segment, FullDayConstantRateSplitsInHalf) {
    const std::size_t beats = 24 * 3600 * 1000 / 800 + 1;
    const auto parts = segment(filter_to_nn(steady(beats, 800, 0.0)));
    const double half = static_cast<double>(parts.full.size()) / 2.0;
    EXPECT_NEAR(static_cast<double>(parts.day.size()), half, 1.0);
    EXPECT_NEAR(static_cast<double>(parts.night.size()), half, 1.0);
}

TEST(Segment, PartitionByIntervalIdentity) {
    auto p = GeneratorParams::healthy_defaults();
    const auto nn = filter_to_nn(generate_recording(p, 3, "p"));
    const auto parts = segment(nn);
    std::vector<double> merged = parts.day.onset_ms;
    merged.insert(merged.end(), parts.night.onset_ms.begin(), parts.night.onset_ms.end());
    std::sort(merged.begin(), merged.end());
    EXPECT_EQ(merged, nn.onset_ms);
}

TEST(Segment, WrappingDayWindow) {
    SegmentSpec spec{20 * 3600.0, 8 * 3600.0};
    EXPECT_TRUE(spec.is_day(23 * 3600.0));
    EXPECT_TRUE(spec.is_day(3 * 3600.0));
    EXPECT_FALSE(spec.is_day(12 * 3600.0));
    EXPECT_THROW((SegmentSpec{3600, 3600}.validate()), Error);
}

TEST(RRSeries, FullDayFlag) {
    EXPECT_FALSE(steady(100, 800).is_full_day());
    EXPECT_TRUE(steady(20 * 4500 + 2, 800).is_full_day());
}
