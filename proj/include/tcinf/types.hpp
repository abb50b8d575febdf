#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace tcinf {

using Seconds = std::chrono::seconds;
using Hours = std::chrono::hours;
// Integer seconds since the Unix epoch.
using Timestamp = std::chrono::sys_seconds;

enum class UserId : std::uint32_t {};
enum class TopicId : std::uint32_t {};
enum class RecordId : std::uint32_t {};

constexpr std::size_t index_of(UserId id) noexcept { return static_cast<std::size_t>(id); }
constexpr std::size_t index_of(TopicId id) noexcept { return static_cast<std::size_t>(id); }
constexpr std::size_t index_of(RecordId id) noexcept { return static_cast<std::size_t>(id); }

inline Timestamp from_unix(std::int64_t seconds) { return Timestamp{Seconds{seconds}}; }
inline std::int64_t to_unix(Timestamp t) { return t.time_since_epoch().count(); }

inline double to_hours(Seconds s) { return static_cast<double>(s.count()) / 3600.0; }

/// Stand-in for an unbounded window. Small enough that t ± span never overflows.
inline constexpr Seconds kUnbounded{std::numeric_limits<std::int64_t>::max() / 4};

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class ConfigError : public Error {
public:
  using Error::Error;
};

/// Data that cannot support the requested computation (empty split, one class, ...).
class DegenerateDataError : public Error {
public:
  using Error::Error;
};

/// Pearson correlation on a constant input.
class UndefinedCorrelation : public Error {
public:
  using Error::Error;
};

} // namespace tcinf

template <>
struct std::hash<tcinf::UserId> {
  std::size_t operator()(tcinf::UserId id) const noexcept {
    return std::hash<std::uint32_t>{}(static_cast<std::uint32_t>(id));
  }
};
