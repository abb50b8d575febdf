#pragma once

#include <string>

#include <tcinf/activity_log.hpp>

namespace fixtures {

inline tcinf::Timestamp hours(std::int64_t h) { return tcinf::from_unix(h * 3600); }

// <A,B,#x,10> <B,C,#y,12> <A,C,#x,20> <A,C,#z,25> <C,D,#y,40> <A,C,#y,44>, hours.
inline tcinf::ActivityLog log_a(std::size_t lines = 6) {
  struct Row {
    const char *adopter, *source, *topic;
    int hour;
  };
  constexpr Row rows[] = {{"A", "B", "#x", 10}, {"B", "C", "#y", 12}, {"A", "C", "#x", 20},
                          {"A", "C", "#z", 25}, {"C", "D", "#y", 40}, {"A", "C", "#y", 44}};
  tcinf::ActivityLog log;
  for (std::size_t i = 0; i < lines && i < 6; ++i) log.append(rows[i].adopter, rows[i].source, rows[i].topic, hours(rows[i].hour));
  return log;
}

// LOG-S: the first five LOG-A lines.
inline tcinf::ActivityLog log_s() { return log_a(5); }

inline std::string fixture_path(const std::string& name) { return std::string(TCINF_FIXTURE_DIR) + "/" + name; }

} // namespace fixtures
