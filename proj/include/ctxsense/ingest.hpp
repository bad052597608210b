#pragma once

// Wristband export parsing, session timelines and event-phase slicing.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ctxsense/error.hpp"
#include "ctxsense/types.hpp"

namespace ctxsense {

/// One channel of fixed-rate samples. Samples are stored flat, `dim` values
/// per sample (3 for ACC, in g; 1 otherwise).
struct SensorStream {
  SensorKind kind = SensorKind::PPG;
  double start_time = 0.0;
  double rate = 0.0;
  std::vector<double> values;

  std::size_t dim() const { return sample_dimension(kind); }
  std::size_t size() const { return values.size() / dim(); }
  double duration() const { return static_cast<double>(size()) / rate; }
  double end_time() const { return start_time + duration(); }
  double time_of(std::size_t i) const { return start_time + static_cast<double>(i) / rate; }
  std::span<const double> sample(std::size_t i) const { return {values.data() + i * dim(), dim()}; }
};

struct SessionEvent {
  EventKind event = EventKind::Alone;
  Phase phase = Phase::Pre;
  double start = 0.0;
  double end = 0.0;

  double duration() const { return end - start; }
};

struct SessionTimeline {
  std::string participant_id;
  std::vector<SessionEvent> entries;  // sorted by start
};

struct SessionStreams {
  SensorStream ppg;
  SensorStream acc;
  SensorStream eda;
  SensorStream tmp;

  const SensorStream& get(SensorKind kind) const {
    switch (kind) {
      case SensorKind::PPG: return ppg;
      case SensorKind::ACC: return acc;
      case SensorKind::EDA: return eda;
      case SensorKind::TMP: return tmp;
    }
    return ppg;
  }
  SensorStream& get(SensorKind kind) { return const_cast<SensorStream&>(std::as_const(*this).get(kind)); }
};

struct IntervalSlice {
  std::string participant_id;
  EventKind event = EventKind::Alone;
  Phase phase = Phase::Pre;
  double start = 0.0;
  double end = 0.0;
  SessionStreams streams;

  double duration() const { return end - start; }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (true) {
    const auto next = s.find(sep, pos);
    out.push_back(trim(s.substr(pos, next == std::string_view::npos ? std::string_view::npos : next - pos)));
    if (next == std::string_view::npos) break;
    pos = next + 1;
  }
  return out;
}

inline std::optional<double> to_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::optional<long long> to_integer(std::string_view s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end) return std::nullopt;
  return v;
}

/// Splits bytes into lines, dropping trailing blank lines.
inline std::vector<std::string_view> lines(std::string_view bytes) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < bytes.size()) {
    auto next = bytes.find('\n', pos);
    if (next == std::string_view::npos) next = bytes.size();
    out.push_back(trim(bytes.substr(pos, next - pos)));
    pos = next + 1;
  }
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

inline void append_number(std::string& out, double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

inline void append_number(std::string& out, long long v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  out.append(buf, ptr);
}

inline double header_value(std::string_view line, SensorKind kind, std::size_t line_no, const char* what) {
  const auto fields = split(line, ',');
  const std::size_t expected = sample_dimension(kind);
  if (fields.size() != expected) throw ParseError(std::string("malformed ") + what + " header", line_no);
  std::optional<double> first;
  for (auto f : fields) {
    const auto v = to_double(f);
    if (!v) throw ParseError(std::string("malformed ") + what + " header", line_no);
    if (first && *first != *v) throw ParseError(std::string("inconsistent ") + what + " header", line_no);
    first = v;
  }
  return *first;
}

}  // namespace detail

/// ACC exports carry raw counts in 1/64 g.
inline constexpr double kAccCountsPerG = 64.0;

/// Parses one channel export. Line 1 holds the start epoch, line 2 the rate
/// (both repeated three times for ACC), then one sample per line.
inline SensorStream parse_stream(std::string_view bytes, SensorKind kind) {
  const auto rows = detail::lines(bytes);
  if (rows.size() < 2) throw ParseError("missing stream header", rows.size() + 1);

  SensorStream s;
  s.kind = kind;
  s.start_time = detail::header_value(rows[0], kind, 1, "start time");
  s.rate = detail::header_value(rows[1], kind, 2, "sample rate");
  if (std::abs(s.rate - nominal_rate(kind)) > 1e-9)
    throw SchemaError("sample rate " + std::to_string(s.rate) + " does not match " + std::string(file_name(kind)) +
                      " (expected " + std::to_string(nominal_rate(kind)) + ")");

  const std::size_t dim = sample_dimension(kind);
  s.values.reserve((rows.size() - 2) * dim);
  for (std::size_t r = 2; r < rows.size(); ++r) {
    const std::size_t line_no = r + 1;
    if (dim == 1) {
      const auto v = detail::to_double(rows[r]);
      if (!v) throw ParseError("non-numeric sample '" + std::string(rows[r]) + "'", line_no);
      s.values.push_back(*v);
    } else {
      const auto fields = detail::split(rows[r], ',');
      if (fields.size() != 3) throw ParseError("expected 3 accelerometer axes", line_no);
      for (auto f : fields) {
        const auto v = detail::to_integer(f);
        if (!v) throw ParseError("non-integer accelerometer count '" + std::string(f) + "'", line_no);
        s.values.push_back(static_cast<double>(*v) / kAccCountsPerG);
      }
    }
  }
  if (s.values.empty()) throw SchemaError(std::string(file_name(kind)) + " has no samples");
  return s;
}

/// Inverse of parse_stream. ACC values are written back as integer counts.
inline std::string serialize_stream(const SensorStream& s) {
  std::string out;
  out.reserve(s.values.size() * 12 + 64);
  const std::size_t dim = s.dim();
  for (double header : {s.start_time, s.rate}) {
    for (std::size_t d = 0; d < dim; ++d) {
      if (d) out += ',';
      detail::append_number(out, header);
    }
    out += '\n';
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (dim == 1) {
      detail::append_number(out, s.values[i]);
    } else {
      for (std::size_t d = 0; d < dim; ++d) {
        if (d) out += ',';
        detail::append_number(out, static_cast<long long>(std::llround(s.values[i * dim + d] * kAccCountsPerG)));
      }
    }
    out += '\n';
  }
  return out;
}

inline constexpr std::string_view kTimelineHeader = "participant_id,event,phase,start_unix,end_unix";

/// Checks ordering, overlap, uniqueness and the alone-first rule.
inline void validate_timeline(SessionTimeline& t) {
  std::sort(t.entries.begin(), t.entries.end(),
            [](const SessionEvent& a, const SessionEvent& b) { return a.start < b.start; });
  for (std::size_t i = 0; i < t.entries.size(); ++i) {
    const auto& e = t.entries[i];
    if (!(e.end > e.start))
      throw TimelineError(std::string(to_token(e.event)) + "/" + std::string(to_token(e.phase)) +
                          " has end <= start");
    if (i > 0 && t.entries[i - 1].end > e.start)
      throw TimelineError(std::string(to_token(e.event)) + "/" + std::string(to_token(e.phase)) +
                          " overlaps the preceding entry");
  }
  double last_alone_end = -INFINITY;
  double first_social_start = INFINITY;
  for (const auto& e : t.entries) {
    if (e.event == EventKind::Alone)
      last_alone_end = std::max(last_alone_end, e.end);
    else
      first_social_start = std::min(first_social_start, e.start);
  }
  if (last_alone_end > first_social_start) throw TimelineError("alone event must precede all social events");
}

inline SessionTimeline parse_timeline(std::string_view bytes) {
  const auto rows = detail::lines(bytes);
  if (rows.empty() || rows[0] != kTimelineHeader)
    throw ParseError("timeline header must be '" + std::string(kTimelineHeader) + "'", 1);

  SessionTimeline t;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const std::size_t line_no = r + 1;
    if (rows[r].empty()) continue;
    const auto f = detail::split(rows[r], ',');
    if (f.size() != 5) throw ParseError("expected 5 timeline fields", line_no);
    if (f[0].empty()) throw ParseError("empty participant_id", line_no);
    if (t.participant_id.empty())
      t.participant_id = std::string(f[0]);
    else if (t.participant_id != f[0])
      throw ParseError("timeline mixes participants", line_no);

    SessionEvent e;
    try {
      e.event = parse_event(f[1]);
      e.phase = parse_phase(f[2]);
    } catch (const ParseError& err) {
      throw ParseError(err.what(), line_no);
    }
    const auto start = detail::to_double(f[3]);
    const auto end = detail::to_double(f[4]);
    if (!start || !end) throw ParseError("non-numeric timestamp", line_no);
    e.start = *start;
    e.end = *end;
    for (const auto& prev : t.entries)
      if (prev.event == e.event && prev.phase == e.phase)
        throw ParseError("duplicate entry " + std::string(f[1]) + "/" + std::string(f[2]), line_no);
    t.entries.push_back(e);
  }
  if (t.entries.empty()) throw ParseError("timeline has no entries");
  validate_timeline(t);
  return t;
}

inline std::string serialize_timeline(const SessionTimeline& t) {
  std::string out(kTimelineHeader);
  out += '\n';
  for (const auto& e : t.entries) {
    out += t.participant_id;
    out += ',';
    out += to_token(e.event);
    out += ',';
    out += to_token(e.phase);
    out += ',';
    detail::append_number(out, e.start);
    out += ',';
    detail::append_number(out, e.end);
    out += '\n';
  }
  return out;
}

namespace detail {

// Index of the first sample at or after time t; a small tolerance absorbs
// floating error in epoch arithmetic.
inline std::size_t first_index_at_or_after(const SensorStream& s, double t) {
  const double pos = (t - s.start_time) * s.rate;
  return static_cast<std::size_t>(std::max(0.0, std::ceil(pos - 1e-6)));
}

}  // namespace detail

/// Restricts a stream to the half-open window [start, end).
inline SensorStream restrict_stream(const SensorStream& s, double start, double end) {
  const std::size_t lo = std::min(detail::first_index_at_or_after(s, start), s.size());
  const std::size_t hi = std::min(detail::first_index_at_or_after(s, end), s.size());
  SensorStream out;
  out.kind = s.kind;
  out.rate = s.rate;
  out.start_time = s.time_of(lo);
  const std::size_t dim = s.dim();
  if (hi > lo) out.values.assign(s.values.begin() + lo * dim, s.values.begin() + hi * dim);
  return out;
}

/// One slice per timeline entry; samples outside every entry are discarded.
inline std::vector<IntervalSlice> slice_intervals(const SessionStreams& streams, const SessionTimeline& timeline) {
  std::vector<IntervalSlice> out;
  out.reserve(timeline.entries.size());
  for (const auto& e : timeline.entries) {
    IntervalSlice slice;
    slice.participant_id = timeline.participant_id;
    slice.event = e.event;
    slice.phase = e.phase;
    slice.start = e.start;
    slice.end = e.end;
    for (auto kind : kAllSensors) {
      const auto& s = streams.get(kind);
      const double tol = 1e-6 / s.rate;
      if (s.values.empty() || s.start_time > e.start + tol || s.end_time() < e.end - tol)
        throw CoverageError(std::string(file_name(kind)) + " does not cover " + timeline.participant_id + " " +
                            std::string(to_token(e.event)) + "/" + std::string(to_token(e.phase)));
      slice.streams.get(kind) = restrict_stream(s, e.start, e.end);
    }
    out.push_back(std::move(slice));
  }
  return out;
}

}  // namespace ctxsense
