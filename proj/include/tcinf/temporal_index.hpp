#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include "activity_log.hpp"
#include "types.hpp"

namespace tcinf {

/// The (susceptible span, forgettable span) pair.
///
/// The susceptible span bounds how long after the ego retweets someone that
/// person's adoptions remain visible to the ego; the forgettable span bounds how
/// long a visible adoption is remembered. Both windows are closed intervals.
class TimeConstraints {
public:
  TimeConstraints(Seconds susceptible, Seconds forgettable) : sus_(susceptible), fos_(forgettable) {
    if (sus_ <= Seconds::zero() || fos_ <= Seconds::zero()) throw ConfigError("time constraints must be positive");
  }

  static TimeConstraints hours(std::int64_t susceptible, std::int64_t forgettable) {
    return {Hours{susceptible}, Hours{forgettable}};
  }
  /// Windows wide enough to never exclude anything.
  static TimeConstraints unconstrained() { return {kUnbounded, kUnbounded}; }

  Seconds susceptible() const noexcept { return sus_; }
  Seconds forgettable() const noexcept { return fos_; }
  bool is_unconstrained() const noexcept { return sus_ == kUnbounded && fos_ == kUnbounded; }

  friend bool operator==(const TimeConstraints&, const TimeConstraints&) = default;

private:
  Seconds sus_;
  Seconds fos_;
};

struct TimedRecord {
  Timestamp time;
  RecordId record;
};

struct EdgeEvent {
  UserId peer;
  Timestamp time;
  RecordId record;
};

/// A neighbor who can influence the ego on a topic, with the earliest
/// qualifying (edge time, adoption time) pair.
struct ActiveNeighbor {
  UserId user;
  Timestamp edge_time;
  Timestamp adopt_time;
  friend bool operator==(const ActiveNeighbor&, const ActiveNeighbor&) = default;
};

/// Immutable time index over an activity log. All lists are sorted by
/// (time, record id).
class TemporalIndex {
public:
  explicit TemporalIndex(ActivityLog log) : log_(std::move(log)) {
    const std::size_t n_users = log_.user_count();
    out_.resize(n_users);
    in_.resize(n_users);
    retweeted_.resize(n_users);
    const auto records = log_.records();
    std::vector<RecordId> order(records.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = RecordId{static_cast<std::uint32_t>(i)};
    std::stable_sort(order.begin(), order.end(),
                     [&](RecordId a, RecordId b) { return records[index_of(a)].time < records[index_of(b)].time; });
    for (RecordId id : order) {
      const auto& r = records[index_of(id)];
      out_[index_of(r.adopter)].push_back({r.source, r.time, id});
      in_[index_of(r.source)].push_back({r.adopter, r.time, id});
      retweeted_[index_of(r.source)].push_back({r.time, id});
      adoptions_[key(r.adopter, r.topic)].push_back({r.time, id});
      pairs_[key(r.adopter, r.source)].push_back({r.time, id});
    }
  }

  const ActivityLog& log() const noexcept { return log_; }
  std::size_t user_count() const noexcept { return out_.size(); }

  /// Edges created by `adopter` retweeting someone.
  std::span<const EdgeEvent> out_edges(UserId adopter) const { return at(out_, adopter); }
  /// Retweets of `source`'s content, peer = the retweeter.
  std::span<const EdgeEvent> in_edges(UserId source) const { return at(in_, source); }
  /// Every time `source` was retweeted, by anyone, on any topic.
  std::span<const TimedRecord> retweeted(UserId source) const { return at(retweeted_, source); }
  /// Adoption times of `topic` by `user`.
  std::span<const TimedRecord> adoptions(UserId user, TopicId topic) const { return find(adoptions_, key(user, topic)); }
  /// Retweets of `to` made by `from`, any topic.
  std::span<const TimedRecord> retweets_between(UserId from, UserId to) const { return find(pairs_, key(from, to)); }

  bool ever_adopted(UserId user, TopicId topic) const { return adoptions_.contains(key(user, topic)); }

private:
  static std::uint64_t key(UserId a, UserId b) {
    return (std::uint64_t{static_cast<std::uint32_t>(a)} << 32) | static_cast<std::uint32_t>(b);
  }
  static std::uint64_t key(UserId a, TopicId b) {
    return (std::uint64_t{static_cast<std::uint32_t>(a)} << 32) | static_cast<std::uint32_t>(b);
  }
  template <typename T>
  static std::span<const T> at(const std::vector<std::vector<T>>& v, UserId u) {
    return index_of(u) < v.size() ? std::span<const T>(v[index_of(u)]) : std::span<const T>{};
  }
  static std::span<const TimedRecord> find(const std::unordered_map<std::uint64_t, std::vector<TimedRecord>>& m,
                                           std::uint64_t k) {
    auto it = m.find(k);
    return it == m.end() ? std::span<const TimedRecord>{} : std::span<const TimedRecord>(it->second);
  }

  ActivityLog log_;
  std::vector<std::vector<EdgeEvent>> out_;
  std::vector<std::vector<EdgeEvent>> in_;
  std::vector<std::vector<TimedRecord>> retweeted_;
  std::unordered_map<std::uint64_t, std::vector<TimedRecord>> adoptions_;
  std::unordered_map<std::uint64_t, std::vector<TimedRecord>> pairs_;
};

inline TemporalIndex build_index(ActivityLog log) { return TemporalIndex(std::move(log)); }

namespace detail {

template <typename Event>
auto lower_by_time(std::span<const Event> events, Timestamp t) {
  return std::lower_bound(events.begin(), events.end(), t, [](const Event& e, Timestamp x) { return e.time < x; });
}
template <typename Event>
auto upper_by_time(std::span<const Event> events, Timestamp t) {
  return std::upper_bound(events.begin(), events.end(), t, [](Timestamp x, const Event& e) { return x < e.time; });
}

// Number of events with time <= t.
template <typename Event>
std::size_t count_until(std::span<const Event> events, Timestamp t) {
  return static_cast<std::size_t>(upper_by_time(events, t) - events.begin());
}

// Earliest event in [lo, hi] other than `exclude`.
inline std::optional<Timestamp> first_in(std::span<const TimedRecord> events, Timestamp lo, Timestamp hi,
                                         std::optional<RecordId> exclude) {
  for (auto it = lower_by_time(events, lo); it != events.end() && it->time <= hi; ++it)
    if (!exclude || it->record != *exclude) return it->time;
  return std::nullopt;
}

// Earliest (edge, adoption) pair with edge <= adoption <= edge + sus,
// adoption <= t and t - adoption <= fos.
inline std::optional<std::pair<Timestamp, Timestamp>> earliest_pair(std::span<const TimedRecord> edges,
                                                                     std::span<const TimedRecord> adoptions,
                                                                     Timestamp t, const TimeConstraints& tc,
                                                                     std::optional<RecordId> exclude) {
  if (edges.empty() || adoptions.empty()) return std::nullopt;
  const Seconds sus = tc.susceptible();
  const Timestamp oldest_adoption = t - tc.forgettable();
  std::optional<Timestamp> best;
  for (auto it = lower_by_time(edges, oldest_adoption - sus); it != edges.end() && it->time <= t; ++it) {
    if (exclude && it->record == *exclude) continue;
    if (best && it->time > *best) break;
    const Timestamp lo = std::max(it->time, oldest_adoption);
    const Timestamp hi = std::min(t, it->time + sus);
    if (lo > hi) continue;
    if (auto a = first_in(adoptions, lo, hi, exclude); a && (!best || *a < *best)) best = a;
  }
  if (!best) return std::nullopt;
  for (auto it = lower_by_time(edges, *best - sus); it != edges.end() && it->time <= *best; ++it)
    if (!exclude || it->record != *exclude) return std::pair{it->time, *best};
  return std::nullopt;
}

} // namespace detail

/// Users the ego retweeted at some t' with t' <= t and t - t' <= tau_sus.
/// Sorted by id. Unknown users have no neighbors.
inline std::vector<UserId> neighbors(const TemporalIndex& index, UserId ego, Timestamp t, Seconds tau_sus,
                                     std::optional<RecordId> exclude = std::nullopt) {
  const auto edges = index.out_edges(ego);
  std::vector<UserId> out;
  for (auto it = detail::lower_by_time(edges, t - tau_sus); it != edges.end() && it->time <= t; ++it)
    if (!exclude || it->record != *exclude) out.push_back(it->peer);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

/// Whether `influencer` belongs to the ego's active neighborhood for `topic`
/// at time t; returns the earliest qualifying pair if so.
inline std::optional<ActiveNeighbor> active_link(const TemporalIndex& index, UserId ego, UserId influencer,
                                                 TopicId topic, Timestamp t, const TimeConstraints& tc,
                                                 std::optional<RecordId> exclude = std::nullopt) {
  auto pair = detail::earliest_pair(index.retweets_between(ego, influencer), index.adoptions(influencer, topic), t, tc,
                                    exclude);
  if (!pair) return std::nullopt;
  return ActiveNeighbor{influencer, pair->first, pair->second};
}

/// Neighbors v' with an edge time t' and an adoption time t'' of `topic` such
/// that t' <= t'' <= t, t'' - t' <= tau_sus and t - t'' <= tau_fos. Sorted by
/// user id. `exclude` names a record (the sample's own activity) that is
/// ignored both as an edge and as an adoption.
inline std::vector<ActiveNeighbor> active_neighbors(const TemporalIndex& index, UserId ego, TopicId topic, Timestamp t,
                                                    const TimeConstraints& tc,
                                                    std::optional<RecordId> exclude = std::nullopt) {
  const auto edges = index.out_edges(ego);
  std::vector<UserId> peers;
  const Timestamp earliest_edge = t - tc.forgettable() - tc.susceptible();
  for (auto it = detail::lower_by_time(edges, earliest_edge); it != edges.end() && it->time <= t; ++it)
    peers.push_back(it->peer);
  std::sort(peers.begin(), peers.end());
  peers.erase(std::unique(peers.begin(), peers.end()), peers.end());
  std::vector<ActiveNeighbor> out;
  for (UserId peer : peers)
    if (auto link = active_link(index, ego, peer, topic, t, tc, exclude)) out.push_back(*link);
  return out;
}

} // namespace tcinf
