#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

#include "ctxsense/error.hpp"

namespace ctxsense {

enum class SensorKind { PPG, ACC, EDA, TMP };

inline constexpr std::array<SensorKind, 4> kAllSensors{SensorKind::PPG, SensorKind::ACC,
                                                       SensorKind::EDA, SensorKind::TMP};

/// Nominal sample rate of each wristband channel.
constexpr double nominal_rate(SensorKind kind) {
  switch (kind) {
    case SensorKind::PPG: return 64.0;
    case SensorKind::ACC: return 32.0;
    case SensorKind::EDA: return 4.0;
    case SensorKind::TMP: return 4.0;
  }
  return 0.0;
}

constexpr std::size_t sample_dimension(SensorKind kind) { return kind == SensorKind::ACC ? 3 : 1; }

/// Export file name for each channel.
constexpr std::string_view file_name(SensorKind kind) {
  switch (kind) {
    case SensorKind::PPG: return "BVP.csv";
    case SensorKind::ACC: return "ACC.csv";
    case SensorKind::EDA: return "EDA.csv";
    case SensorKind::TMP: return "TEMP.csv";
  }
  return "";
}

enum class EventKind { Alone, DyadImplicit, DyadExplicit, GroupImplicit, GroupExplicit };
enum class Phase { Pre, During, Post };

inline constexpr std::array<EventKind, 5> kAllEvents{EventKind::Alone, EventKind::DyadImplicit,
                                                     EventKind::DyadExplicit, EventKind::GroupImplicit,
                                                     EventKind::GroupExplicit};
inline constexpr std::array<Phase, 3> kAllPhases{Phase::Pre, Phase::During, Phase::Post};

constexpr std::string_view to_token(EventKind e) {
  switch (e) {
    case EventKind::Alone: return "alone";
    case EventKind::DyadImplicit: return "dyad_implicit";
    case EventKind::DyadExplicit: return "dyad_explicit";
    case EventKind::GroupImplicit: return "group_implicit";
    case EventKind::GroupExplicit: return "group_explicit";
  }
  return "";
}

constexpr std::string_view to_token(Phase p) {
  switch (p) {
    case Phase::Pre: return "pre";
    case Phase::During: return "during";
    case Phase::Post: return "post";
  }
  return "";
}

inline EventKind parse_event(std::string_view token) {
  for (auto e : kAllEvents)
    if (to_token(e) == token) return e;
  throw ParseError("unknown event token '" + std::string(token) + "'");
}

inline Phase parse_phase(std::string_view token) {
  for (auto p : kAllPhases)
    if (to_token(p) == token) return p;
  throw ParseError("unknown phase token '" + std::string(token) + "'");
}

// Derived labels. Size and threat do not exist for the Alone event, which is
// represented by an empty optional rather than a default value.
enum class Context { Alone, Social };
enum class PhaseClass { During, PrePost };
enum class GroupSize { Dyad, Group };
enum class Threat { Implicit, Explicit };

constexpr Context context_of(EventKind e) { return e == EventKind::Alone ? Context::Alone : Context::Social; }

constexpr PhaseClass phase_class_of(Phase p) { return p == Phase::During ? PhaseClass::During : PhaseClass::PrePost; }

constexpr std::optional<GroupSize> size_of(EventKind e) {
  switch (e) {
    case EventKind::Alone: return std::nullopt;
    case EventKind::DyadImplicit:
    case EventKind::DyadExplicit: return GroupSize::Dyad;
    case EventKind::GroupImplicit:
    case EventKind::GroupExplicit: return GroupSize::Group;
  }
  return std::nullopt;
}

constexpr std::optional<Threat> threat_of(EventKind e) {
  switch (e) {
    case EventKind::Alone: return std::nullopt;
    case EventKind::DyadImplicit:
    case EventKind::GroupImplicit: return Threat::Implicit;
    case EventKind::DyadExplicit:
    case EventKind::GroupExplicit: return Threat::Explicit;
  }
  return std::nullopt;
}

/// Scheduled length of the concurrent phase, seconds.
constexpr double during_duration(EventKind e) {
  switch (e) {
    case EventKind::Alone: return 120.0;
    case EventKind::DyadImplicit:
    case EventKind::DyadExplicit: return 240.0;
    case EventKind::GroupImplicit:
    case EventKind::GroupExplicit: return 360.0;
  }
  return 0.0;
}

inline constexpr double kPrePostDuration = 120.0;

}  // namespace ctxsense
