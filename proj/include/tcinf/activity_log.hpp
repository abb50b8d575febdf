#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "types.hpp"

namespace tcinf {

/// One retweet: `adopter` adopted `topic` by retweeting `source` at `time`.
/// The record also creates the directed edge adopter -> source.
struct ActivityRecord {
  UserId adopter;
  UserId source;
  TopicId topic;
  Timestamp time;

  bool is_self_retweet() const noexcept { return adopter == source; }
  friend bool operator==(const ActivityRecord&, const ActivityRecord&) = default;
};

/// An immutable, interned activity log. Users and topics are exactly the ones
/// mentioned by the records; ids are assigned in first-appearance order.
class ActivityLog {
public:
  ActivityLog() = default;

  std::span<const ActivityRecord> records() const noexcept { return records_; }
  const ActivityRecord& record(RecordId id) const { return records_.at(index_of(id)); }
  std::size_t size() const noexcept { return records_.size(); }
  bool empty() const noexcept { return records_.empty(); }

  std::size_t user_count() const noexcept { return user_names_.size(); }
  std::size_t topic_count() const noexcept { return topic_names_.size(); }
  const std::string& user_name(UserId id) const { return user_names_.at(index_of(id)); }
  const std::string& topic_name(TopicId id) const { return topic_names_.at(index_of(id)); }

  std::optional<UserId> find_user(std::string_view name) const {
    auto it = user_ids_.find(std::string(name));
    if (it == user_ids_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<TopicId> find_topic(std::string_view name) const {
    auto it = topic_ids_.find(std::string(name));
    if (it == topic_ids_.end()) return std::nullopt;
    return it->second;
  }

  /// (min_time, max_time); nullopt for an empty log.
  std::optional<std::pair<Timestamp, Timestamp>> time_span() const {
    if (records_.empty()) return std::nullopt;
    return std::pair{min_time_, max_time_};
  }

  /// Appends a record, interning names. Used by parsers and generators.
  void append(std::string_view adopter, std::string_view source, std::string_view topic, Timestamp time) {
    if (time.time_since_epoch().count() < 0) throw Error("negative timestamp");
    ActivityRecord r{intern_user(adopter), intern_user(source), intern_topic(topic), time};
    if (records_.empty()) {
      min_time_ = max_time_ = time;
    } else {
      min_time_ = std::min(min_time_, time);
      max_time_ = std::max(max_time_, time);
    }
    records_.push_back(r);
  }

  /// Copy holding only the records accepted by `keep`, re-interned.
  template <typename Pred>
  ActivityLog filtered(Pred&& keep) const {
    ActivityLog out;
    for (const auto& r : records_)
      if (keep(r)) out.append(user_name(r.adopter), user_name(r.source), topic_name(r.topic), r.time);
    return out;
  }

private:
  UserId intern_user(std::string_view name) {
    auto [it, inserted] = user_ids_.try_emplace(std::string(name), UserId{static_cast<std::uint32_t>(user_names_.size())});
    if (inserted) user_names_.emplace_back(name);
    return it->second;
  }
  TopicId intern_topic(std::string_view name) {
    auto [it, inserted] = topic_ids_.try_emplace(std::string(name), TopicId{static_cast<std::uint32_t>(topic_names_.size())});
    if (inserted) topic_names_.emplace_back(name);
    return it->second;
  }

  std::vector<ActivityRecord> records_;
  std::vector<std::string> user_names_;
  std::vector<std::string> topic_names_;
  std::unordered_map<std::string, UserId> user_ids_;
  std::unordered_map<std::string, TopicId> topic_ids_;
  Timestamp min_time_{};
  Timestamp max_time_{};
};

// ---------------------------------------------------------------------------
// Parsing

enum class LogFormat { Tsv, JsonLines };
enum class ParseMode { FailFast, SkipMalformed };
enum class Field { Adopter = 0, Source = 1, Topic = 2, Time = 3 };

struct FormatSpec {
  LogFormat format = LogFormat::Tsv;
  ParseMode mode = ParseMode::FailFast;
  char delimiter = '\t';
  // columns[i] is the field stored in the i-th column; lets foreign dumps
  // with a different column order be read without rewriting them.
  std::array<Field, 4> columns{Field::Adopter, Field::Source, Field::Topic, Field::Time};
};

/// Parses a column-order string such as "source,adopter,topic,time".
inline std::array<Field, 4> parse_column_order(std::string_view text) {
  std::array<Field, 4> out{};
  std::array<bool, 4> seen{};
  std::size_t n = 0;
  while (!text.empty()) {
    const auto comma = text.find(',');
    const auto name = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{} : text.substr(comma + 1);
    Field f;
    if (name == "adopter") f = Field::Adopter;
    else if (name == "source") f = Field::Source;
    else if (name == "topic") f = Field::Topic;
    else if (name == "time") f = Field::Time;
    else throw ConfigError("unknown column '" + std::string(name) + "'");
    if (n >= 4 || seen[static_cast<int>(f)]) throw ConfigError("column order must name each field exactly once");
    seen[static_cast<int>(f)] = true;
    out[n++] = f;
  }
  if (n != 4) throw ConfigError("column order must name each field exactly once");
  return out;
}

struct ParseReport {
  std::size_t records = 0;
  std::size_t skipped = 0;
  std::vector<std::size_t> skipped_lines;
};

namespace detail {

inline std::optional<std::int64_t> parse_seconds(std::string_view s) {
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v < 0) return std::nullopt;
  return v;
}

struct RawRecord {
  std::string adopter, source, topic;
  std::int64_t time = 0;
};

inline std::optional<std::string> split_delimited(std::string_view line, const FormatSpec& spec, RawRecord& out) {
  std::array<std::string_view, 4> cols;
  std::size_t n = 0;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(spec.delimiter, start);
    if (n == 4) return "more than 4 fields";
    cols[n++] = line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start);
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  if (n != 4) return "expected 4 fields, got " + std::to_string(n);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto v = cols[i];
    switch (spec.columns[i]) {
      case Field::Adopter: out.adopter = v; break;
      case Field::Source: out.source = v; break;
      case Field::Topic: out.topic = v; break;
      case Field::Time: {
        auto t = parse_seconds(v);
        if (!t) return "bad timestamp '" + std::string(v) + "'";
        out.time = *t;
        break;
      }
    }
  }
  if (out.adopter.empty() || out.source.empty() || out.topic.empty()) return "empty field";
  return std::nullopt;
}

inline std::optional<std::string> split_json(std::string_view line, RawRecord& out) {
  auto j = nlohmann::json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return "not a JSON object";
  for (const char* key : {"adopter", "source", "topic"})
    if (!j.contains(key) || !j[key].is_string() || j[key].get<std::string>().empty())
      return std::string("missing or empty '") + key + "'";
  if (!j.contains("time") || !j["time"].is_number_integer() || j["time"].get<std::int64_t>() < 0)
    return "missing or invalid 'time'";
  out.adopter = j["adopter"].get<std::string>();
  out.source = j["source"].get<std::string>();
  out.topic = j["topic"].get<std::string>();
  out.time = j["time"].get<std::int64_t>();
  return std::nullopt;
}

} // namespace detail

/// Reads one record per line. Blank lines are ignored. In FailFast mode the
/// first malformed line throws ParseError; otherwise it is counted and skipped.
inline ActivityLog parse_log(std::istream& in, const FormatSpec& spec = {}, ParseReport* report = nullptr) {
  ActivityLog log;
  ParseReport local;
  std::string line;
  std::size_t line_no = 0;
  detail::RawRecord raw;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto err = spec.format == LogFormat::Tsv ? detail::split_delimited(line, spec, raw) : detail::split_json(line, raw);
    if (err) {
      if (spec.mode == ParseMode::FailFast) throw ParseError(line_no, *err);
      ++local.skipped;
      local.skipped_lines.push_back(line_no);
      continue;
    }
    log.append(raw.adopter, raw.source, raw.topic, from_unix(raw.time));
    ++local.records;
  }
  if (report) *report = std::move(local);
  return log;
}

/// Writes the canonical tab-separated form: adopter, source, topic, unix seconds.
inline void write_log(std::ostream& out, const ActivityLog& log) {
  for (const auto& r : log.records()) {
    for (const std::string* s : {&log.user_name(r.adopter), &log.user_name(r.source), &log.topic_name(r.topic)})
      if (s->find_first_of("\t\n\r") != std::string::npos) throw Error("identifier contains a tab or newline: " + *s);
    out << log.user_name(r.adopter) << '\t' << log.user_name(r.source) << '\t' << log.topic_name(r.topic) << '\t'
        << to_unix(r.time) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Filters and statistics

struct FilterSpec {
  enum class Kind { Retweets, Hashtags };
  Kind kind = Kind::Retweets;
  std::uint32_t threshold = 1;

  static FilterSpec retweets(std::uint32_t n) { return make(Kind::Retweets, n); }
  static FilterSpec hashtags(std::uint32_t n) { return make(Kind::Hashtags, n); }

  /// "R60", "H40", ...
  static FilterSpec parse(std::string_view label) {
    if (label.size() < 2 || (label[0] != 'R' && label[0] != 'H')) throw ConfigError("bad filter '" + std::string(label) + "'");
    auto n = detail::parse_seconds(label.substr(1));
    if (!n || *n < 1 || *n > std::numeric_limits<std::uint32_t>::max())
      throw ConfigError("bad filter threshold in '" + std::string(label) + "'");
    return make(label[0] == 'R' ? Kind::Retweets : Kind::Hashtags, static_cast<std::uint32_t>(*n));
  }

  std::string label() const { return (kind == Kind::Retweets ? "R" : "H") + std::to_string(threshold); }

private:
  static FilterSpec make(Kind k, std::uint32_t n) {
    if (n < 1) throw ConfigError("filter threshold must be >= 1");
    return FilterSpec{k, n};
  }
};

/// Users with at least `threshold` adopter-side records (R) or distinct
/// adopted topics (H).
inline std::set<UserId> eligible_users(const ActivityLog& log, const FilterSpec& filter) {
  std::vector<std::uint32_t> count(log.user_count(), 0);
  if (filter.kind == FilterSpec::Kind::Retweets) {
    for (const auto& r : log.records()) ++count[index_of(r.adopter)];
  } else {
    std::unordered_set<std::uint64_t> seen;
    for (const auto& r : log.records()) {
      const std::uint64_t key = (std::uint64_t{static_cast<std::uint32_t>(r.adopter)} << 32) | static_cast<std::uint32_t>(r.topic);
      if (seen.insert(key).second) ++count[index_of(r.adopter)];
    }
  }
  std::set<UserId> out;
  for (std::size_t u = 0; u < count.size(); ++u)
    if (count[u] >= filter.threshold) out.insert(UserId{static_cast<std::uint32_t>(u)});
  return out;
}

struct DatasetStats {
  std::size_t retweet_count = 0;
  std::size_t user_count = 0;
  std::size_t hashtag_count = 0;
  // Users with at least one adopter-side record; the histogram's mass.
  std::size_t adopter_count = 0;
  std::size_t self_retweets = 0;
  // k (retweets made) -> number of users with exactly k; k >= 1 only.
  std::map<std::size_t, std::size_t> activity_histogram;
};

inline DatasetStats compute_stats(const ActivityLog& log) {
  DatasetStats s;
  s.retweet_count = log.size();
  s.user_count = log.user_count();
  s.hashtag_count = log.topic_count();
  std::vector<std::size_t> made(log.user_count(), 0);
  for (const auto& r : log.records()) {
    ++made[index_of(r.adopter)];
    if (r.is_self_retweet()) ++s.self_retweets;
  }
  for (std::size_t k : made)
    if (k > 0) {
      ++s.activity_histogram[k];
      ++s.adopter_count;
    }
  return s;
}

inline nlohmann::json to_json(const DatasetStats& s) {
  nlohmann::json hist = nlohmann::json::object();
  for (auto [k, n] : s.activity_histogram) hist[std::to_string(k)] = n;
  return {{"retweet_count", s.retweet_count}, {"user_count", s.user_count},   {"hashtag_count", s.hashtag_count},
          {"adopter_count", s.adopter_count}, {"self_retweets", s.self_retweets}, {"activity_histogram", hist}};
}

} // namespace tcinf
