#include <gtest/gtest.h>

#include "ctxsense/ingest.hpp"

using namespace ctxsense;

namespace {

SensorStream constant_stream(SensorKind kind, double start, double seconds, double value = 1.0) {
  SensorStream s;
  s.kind = kind;
  s.start_time = start;
  s.rate = nominal_rate(kind);
  s.values.assign(static_cast<std::size_t>(seconds * s.rate) * s.dim(), value);
  return s;
}

SessionStreams streams_covering(double start, double seconds) {
  SessionStreams s;
  for (auto kind : kAllSensors) s.get(kind) = constant_stream(kind, start, seconds);
  return s;
}

std::string timeline_csv(std::initializer_list<std::string> rows) {
  std::string out(kTimelineHeader);
  out += '\n';
  for (const auto& r : rows) out += r + '\n';
  return out;
}

}  // namespace

TEST(ParseStream, EdaHeaderAndSamples) {
  const auto s = parse_stream("1600000000.0\n4.0\n0.1\n0.2\n", SensorKind::EDA);
  EXPECT_DOUBLE_EQ(s.start_time, 1600000000.0);
  EXPECT_DOUBLE_EQ(s.rate, 4.0);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s.values[0], 0.1);
  EXPECT_DOUBLE_EQ(s.values[1], 0.2);
}

TEST(ParseStream, AccCountsAreSixtyFourthsOfG) {
  const auto s = parse_stream("1600000000,1600000000,1600000000\n32,32,32\n64,0,0\n-32,16,64\n", SensorKind::ACC);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_DOUBLE_EQ(s.sample(0)[0], 1.0);
  EXPECT_DOUBLE_EQ(s.sample(0)[1], 0.0);
  EXPECT_DOUBLE_EQ(s.sample(1)[0], -0.5);
  EXPECT_DOUBLE_EQ(s.sample(1)[1], 0.25);
}

TEST(ParseStream, RateMismatchIsSchemaError) {
  EXPECT_THROW(parse_stream("1600000000.0\n32.0\n1.0\n", SensorKind::PPG), SchemaError);
}

TEST(ParseStream, NonNumericRowReportsLine) {
  try {
    parse_stream("1600000000.0\n4.0\n0.1\nabc\n", SensorKind::EDA);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(ParseStream, MalformedHeaders) {
  EXPECT_THROW(parse_stream("", SensorKind::EDA), ParseError);
  EXPECT_THROW(parse_stream("x\n4.0\n1\n", SensorKind::EDA), ParseError);
  EXPECT_THROW(parse_stream("1,2,3\n32,32,32\n1,1,1\n", SensorKind::ACC), ParseError);
  EXPECT_THROW(parse_stream("1,1,1\n32,32,32\n1,1\n", SensorKind::ACC), ParseError);
  EXPECT_THROW(parse_stream("1,1,1\n32,32,32\n1.5,1,1\n", SensorKind::ACC), ParseError);
}

TEST(ParseStream, RoundTripIsExact) {
  SensorStream s;
  s.kind = SensorKind::PPG;
  s.start_time = 1600000000.125;
  s.rate = 64.0;
  for (int i = 0; i < 500; ++i) s.values.push_back(std::sin(0.37 * i) * 123.456789 + 1e-9 * i);
  const auto back = parse_stream(serialize_stream(s), SensorKind::PPG);
  EXPECT_EQ(back.start_time, s.start_time);
  EXPECT_EQ(back.values, s.values);

  SensorStream acc;
  acc.kind = SensorKind::ACC;
  acc.start_time = 1600000000.0;
  acc.rate = 32.0;
  for (int i = 0; i < 90; ++i) acc.values.push_back((i % 7 - 3) / 64.0);
  EXPECT_EQ(parse_stream(serialize_stream(acc), SensorKind::ACC).values, acc.values);
}

TEST(ParseTimeline, FullSession) {
  std::string csv(kTimelineHeader);
  csv += '\n';
  double t = 1000;
  for (auto e : kAllEvents)
    for (auto p : kAllPhases) {
      csv += "P01," + std::string(to_token(e)) + "," + std::string(to_token(p)) + "," + std::to_string(t) + "," +
             std::to_string(t + 100) + "\n";
      t += 110;
    }
  const auto tl = parse_timeline(csv);
  EXPECT_EQ(tl.participant_id, "P01");
  EXPECT_EQ(tl.entries.size(), 15u);
}

TEST(ParseTimeline, StudyDurationsAccepted) {
  std::string csv(kTimelineHeader);
  csv += '\n';
  double t = 0;
  for (auto e : kAllEvents) {
    for (auto p : kAllPhases) {
      const double d = p == Phase::During ? during_duration(e) : kPrePostDuration;
      csv += "P02," + std::string(to_token(e)) + "," + std::string(to_token(p)) + "," + std::to_string(t) + "," +
             std::to_string(t + d) + "\n";
      t += d + 10;
    }
  }
  const auto tl = parse_timeline(csv);
  EXPECT_DOUBLE_EQ(tl.entries[1].duration(), 120.0);
  EXPECT_DOUBLE_EQ(tl.entries[4].duration(), 240.0);
  EXPECT_DOUBLE_EQ(tl.entries[13].duration(), 360.0);
}

TEST(ParseTimeline, Errors) {
  EXPECT_THROW(parse_timeline(timeline_csv({"P1,dyad_implicit,pre,0,10", "P1,dyad_implicit,pre,20,30"})),
               ParseError);
  EXPECT_THROW(parse_timeline(timeline_csv({"P1,alone,pre,0,10", "P1,alone,during,5,30"})), TimelineError);
  EXPECT_THROW(parse_timeline(timeline_csv({"P1,picnic,pre,0,10"})), ParseError);
  EXPECT_THROW(parse_timeline(timeline_csv({"P1,alone,lunch,0,10"})), ParseError);
  EXPECT_THROW(parse_timeline(timeline_csv({"P1,alone,pre,10,10"})), TimelineError);
  EXPECT_THROW(parse_timeline(timeline_csv({"P1,dyad_implicit,pre,0,10", "P1,alone,pre,20,30"})), TimelineError);
  EXPECT_THROW(parse_timeline("id,event\nP1,alone\n"), ParseError);
  EXPECT_THROW(parse_timeline(timeline_csv({})), ParseError);
}

TEST(SliceIntervals, SampleCountsFollowRates) {
  const auto streams = streams_covering(1000.0, 3 * 3600.0);
  SessionTimeline tl;
  tl.participant_id = "P03";
  double t = 1010.0;
  for (auto e : kAllEvents)
    for (auto p : kAllPhases) {
      tl.entries.push_back({e, p, t, t + 120.0});
      t += 130.0;
    }
  const auto slices = slice_intervals(streams, tl);
  ASSERT_EQ(slices.size(), 15u);
  std::size_t total_ppg = 0;
  for (const auto& s : slices) {
    EXPECT_EQ(s.streams.ppg.size(), 7680u);
    EXPECT_EQ(s.streams.eda.size(), 480u);
    EXPECT_EQ(s.streams.acc.size(), 3840u);
    EXPECT_GE(s.streams.ppg.start_time, s.start);
    EXPECT_LT(s.streams.ppg.end_time() - 1.0 / 64.0, s.end);
    total_ppg += s.streams.ppg.size();
  }
  EXPECT_LE(total_ppg, streams.ppg.size());
}

TEST(SliceIntervals, HalfOpenBoundsShareNoSample) {
  const auto streams = streams_covering(0.0, 100.0);
  SessionTimeline tl{"P", {{EventKind::Alone, Phase::Pre, 10.0, 20.0}, {EventKind::Alone, Phase::During, 20.0, 30.0}}};
  const auto slices = slice_intervals(streams, tl);
  EXPECT_EQ(slices[0].streams.eda.size(), 40u);
  EXPECT_DOUBLE_EQ(slices[1].streams.eda.start_time, 20.0);
  EXPECT_LT(slices[0].streams.eda.time_of(slices[0].streams.eda.size() - 1), slices[1].streams.eda.start_time);
}

TEST(SliceIntervals, MissingCoverageNamesEntry) {
  const auto streams = streams_covering(0.0, 100.0);
  SessionTimeline tl{"P9", {{EventKind::Alone, Phase::Pre, 50.0, 150.0}}};
  try {
    slice_intervals(streams, tl);
    FAIL() << "expected CoverageError";
  } catch (const CoverageError& e) {
    EXPECT_NE(std::string(e.what()).find("alone/pre"), std::string::npos);
  }
}

TEST(Labels, DerivedLabelsAreTotal) {
  for (auto e : kAllEvents) {
    const bool social = context_of(e) == Context::Social;
    EXPECT_EQ(size_of(e).has_value(), social);
    EXPECT_EQ(threat_of(e).has_value(), social);
  }
  EXPECT_EQ(phase_class_of(Phase::During), PhaseClass::During);
  EXPECT_EQ(phase_class_of(Phase::Post), PhaseClass::PrePost);
}
