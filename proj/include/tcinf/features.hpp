#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "scc.hpp"
#include "temporal_index.hpp"
#include "types.hpp"

namespace tcinf {

enum class Feature : std::uint8_t { Nan, Pne, Cdi, Prr, Clt, Clc, Hub, Mur, Acc, Acr };

inline constexpr std::array<Feature, 10> kAllFeatures{Feature::Nan, Feature::Pne, Feature::Cdi, Feature::Prr,
                                                       Feature::Clt, Feature::Clc, Feature::Hub, Feature::Mur,
                                                       Feature::Acc, Feature::Acr};

inline constexpr std::string_view feature_name(Feature f) {
  constexpr std::array<std::string_view, 10> names{"NAN", "PNE", "CDI", "PRR", "CLT", "CLC", "HUB", "MUR", "ACC", "ACR"};
  return names[static_cast<std::size_t>(f)];
}

inline Feature parse_feature(std::string_view text) {
  std::string upper(text);
  for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  for (Feature f : kAllFeatures)
    if (feature_name(f) == upper) return f;
  throw ConfigError("unknown feature '" + std::string(text) + "'");
}

/// Counts (as opposed to ratios and decays).
inline constexpr bool is_integer_valued(Feature f) {
  switch (f) {
    case Feature::Nan:
    case Feature::Prr:
    case Feature::Clt:
    case Feature::Hub:
    case Feature::Mur:
    case Feature::Acc: return true;
    default: return false;
  }
}

enum class MurTarget { Source, Ego };
enum class CltPairMode { Ordered, Unordered };
enum class AccEdgeScope { AnyTopic, SameTopic };

struct FeatureConfig {
  Seconds sigma = Hours{1}; // CDI decay scale
  std::uint32_t gamma = 104; // HUB threshold
  MurTarget mur_target = MurTarget::Source;
  CltPairMode clt_pairs = CltPairMode::Ordered;
  AccEdgeScope acc_edges = AccEdgeScope::AnyTopic;

  void validate() const {
    if (sigma <= Seconds::zero()) throw ConfigError("sigma must be positive");
    if (gamma < 1) throw ConfigError("gamma must be >= 1");
  }
};

/// The activity a sample is built from: `ego` adopting `topic` from `source`
/// at `time`. `record` names the matching log entry when the activity really
/// happened; that entry is invisible to every lookup made for the sample.
struct SampleContext {
  UserId ego;
  UserId source;
  TopicId topic;
  Timestamp time;
  std::optional<RecordId> record;
};

/// Context for an arbitrary tuple, attaching the first matching log record.
inline SampleContext make_context(const TemporalIndex& index, UserId ego, UserId source, TopicId topic, Timestamp time) {
  SampleContext ctx{ego, source, topic, time, std::nullopt};
  const auto& log = index.log();
  for (const auto& e : index.retweets_between(ego, source))
    if (e.time == time && log.record(e.record).topic == topic) {
      ctx.record = e.record;
      break;
    }
  return ctx;
}

struct FeatureVector {
  double nan = 0, pne = 0, cdi = 0, prr = 0, clt = 0, clc = 0, hub = 0, mur = 0, acc = 0, acr = 0;

  double get(Feature f) const {
    switch (f) {
      case Feature::Nan: return nan;
      case Feature::Pne: return pne;
      case Feature::Cdi: return cdi;
      case Feature::Prr: return prr;
      case Feature::Clt: return clt;
      case Feature::Clc: return clc;
      case Feature::Hub: return hub;
      case Feature::Mur: return mur;
      case Feature::Acc: return acc;
      case Feature::Acr: return acr;
    }
    return 0;
  }
  std::array<double, 10> values() const { return {nan, pne, cdi, prr, clt, clc, hub, mur, acc, acr}; }
  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

struct Connectivity {
  double nan = 0;
  double pne = 0;
};
struct Transitivity {
  double clt = 0;
  double clc = 0;
};
struct StructuralDiversity {
  double acc = 0;
  double acr = 0;
};

namespace detail {

inline std::vector<ActiveNeighbor> active_for(const TemporalIndex& index, const SampleContext& ctx,
                                              const TimeConstraints& tc) {
  return active_neighbors(index, ctx.ego, ctx.topic, ctx.time, tc, ctx.record);
}

inline bool is_excluded(const SampleContext& ctx, RecordId r) {
  return ctx.record && *ctx.record == r;
}

// 1 if the excluded record lies among `from`->`to` retweets with time <= t.
inline std::size_t excluded_between(const TemporalIndex& index, const SampleContext& ctx, UserId from, UserId to) {
  if (!ctx.record) return 0;
  const auto& r = index.log().record(*ctx.record);
  return r.adopter == from && r.source == to && r.time <= ctx.time ? 1 : 0;
}

// A retweet from `from` to `to` at or before the context time, optionally on
// the context topic only.
inline bool has_retweet(const TemporalIndex& index, const SampleContext& ctx, UserId from, UserId to,
                        bool same_topic) {
  const auto& log = index.log();
  for (const auto& e : index.retweets_between(from, to)) {
    if (e.time > ctx.time) break;
    if (is_excluded(ctx, e.record)) continue;
    if (!same_topic || log.record(e.record).topic == ctx.topic) return true;
  }
  return false;
}

inline std::size_t component_count(const TemporalIndex& index, const SampleContext& ctx, std::span<const UserId> users,
                                   AccEdgeScope scope) {
  std::vector<std::vector<std::size_t>> adjacency(users.size());
  for (std::size_t i = 0; i < users.size(); ++i)
    for (std::size_t j = 0; j < users.size(); ++j)
      if (i != j && has_retweet(index, ctx, users[i], users[j], scope == AccEdgeScope::SameTopic))
        adjacency[i].push_back(j);
  return count_strongly_connected_components(adjacency);
}

inline std::vector<UserId> users_of(std::span<const ActiveNeighbor> active) {
  std::vector<UserId> out;
  out.reserve(active.size());
  for (const auto& a : active) out.push_back(a.user);
  return out;
}

inline Connectivity connectivity(const TemporalIndex& index, const SampleContext& ctx, const TimeConstraints& tc,
                                 std::span<const ActiveNeighbor> active) {
  const auto nbrs = neighbors(index, ctx.ego, ctx.time, tc.susceptible(), ctx.record);
  Connectivity c;
  c.nan = static_cast<double>(active.size());
  c.pne = nbrs.empty() ? 0.0 : c.nan / static_cast<double>(nbrs.size());
  return c;
}

inline double continuous_decay(std::span<const ActiveNeighbor> active, Seconds sigma) {
  if (active.empty()) return 0.0;
  Timestamp latest = active.front().adopt_time;
  for (const auto& a : active) latest = std::max(latest, a.adopt_time);
  const double scale = static_cast<double>(sigma.count());
  double sum = 0.0;
  for (const auto& a : active) sum += std::exp(-static_cast<double>((latest - a.adopt_time).count()) / scale);
  return sum;
}

inline double previous_reposts(const TemporalIndex& index, const SampleContext& ctx,
                               std::span<const ActiveNeighbor> active) {
  std::size_t total = 0;
  for (const auto& a : active)
    total += count_until(index.retweets_between(ctx.ego, a.user), ctx.time) - excluded_between(index, ctx, ctx.ego, a.user);
  return static_cast<double>(total);
}

inline Transitivity transitivity(const TemporalIndex& index, const SampleContext& ctx,
                                 std::span<const ActiveNeighbor> active, CltPairMode mode) {
  std::size_t closed = 0;
  for (std::size_t i = 0; i < active.size(); ++i)
    for (std::size_t j = 0; j < active.size(); ++j) {
      if (i == j) continue;
      const UserId u = active[i].user, z = active[j].user;
      if (mode == CltPairMode::Ordered) {
        closed += has_retweet(index, ctx, u, z, true) ? 1 : 0;
      } else if (i < j) {
        closed += has_retweet(index, ctx, u, z, true) || has_retweet(index, ctx, z, u, true) ? 1 : 0;
      }
    }
  Transitivity t;
  t.clt = static_cast<double>(closed);
  const double n = static_cast<double>(active.size());
  t.clc = active.empty() ? 0.0 : t.clt / (n * n);
  return t;
}

inline double hubs(const TemporalIndex& index, const SampleContext& ctx, std::span<const ActiveNeighbor> active,
                   std::uint32_t gamma) {
  std::size_t n = 0;
  std::optional<ActivityRecord> own;
  if (ctx.record) own = index.log().record(*ctx.record);
  for (const auto& a : active) {
    std::size_t times = count_until(index.retweeted(a.user), ctx.time);
    if (own && own->source == a.user && own->time <= ctx.time) --times;
    if (times >= gamma) ++n;
  }
  return static_cast<double>(n);
}

inline double mutual_reposts(const TemporalIndex& index, const SampleContext& ctx,
                             std::span<const ActiveNeighbor> active, MurTarget target) {
  const UserId to = target == MurTarget::Source ? ctx.source : ctx.ego;
  std::size_t n = 0;
  for (const auto& a : active) n += has_retweet(index, ctx, a.user, to, true) ? 1 : 0;
  return static_cast<double>(n);
}

inline StructuralDiversity structural_diversity(const TemporalIndex& index, const SampleContext& ctx,
                                                const TimeConstraints& tc, std::span<const ActiveNeighbor> active,
                                                AccEdgeScope scope) {
  StructuralDiversity s;
  if (active.empty()) return s;
  const auto active_users = users_of(active);
  s.acc = static_cast<double>(component_count(index, ctx, active_users, scope));
  const auto nbrs = neighbors(index, ctx.ego, ctx.time, tc.susceptible(), ctx.record);
  const std::size_t denom = component_count(index, ctx, nbrs, scope);
  s.acr = denom == 0 ? 0.0 : s.acc / static_cast<double>(denom);
  return s;
}

} // namespace detail

/// NAN = |active neighbors|, PNE = NAN / |neighbors| (0 with no neighbors).
inline Connectivity connectivity(const TemporalIndex& index, const SampleContext& ctx, const TimeConstraints& tc) {
  const auto active = detail::active_for(index, ctx, tc);
  return detail::connectivity(index, ctx, tc, active);
}

/// Sum over active neighbors of exp(-(t_latest - t_u) / sigma), where t_u is
/// each neighbor's earliest qualifying adoption.
inline double continuous_decay(const TemporalIndex& index, const SampleContext& ctx, const TimeConstraints& tc,
                               const FeatureConfig& config) {
  config.validate();
  return detail::continuous_decay(detail::active_for(index, ctx, tc), config.sigma);
}

/// Retweets (any topic, up to the context time) from the ego to its active
/// neighbors, the sample's own activity excluded.
inline double previous_reposts(const TemporalIndex& index, const SampleContext& ctx, const TimeConstraints& tc) {
  return detail::previous_reposts(index, ctx, detail::active_for(index, ctx, tc));
}

/// CLT counts pairs of distinct active neighbors (u, z) where u retweeted z
/// on the topic by the context time; CLC = CLT / NAN^2.
inline Transitivity transitivity(const TemporalIndex& index, const SampleContext& ctx, const TimeConstraints& tc,
                                 const FeatureConfig& config) {
  return detail::transitivity(index, ctx, detail::active_for(index, ctx, tc), config.clt_pairs);
}

/// Active neighbors retweeted at least gamma times (anyone, any topic) by the
/// context time.
inline double hubs(const TemporalIndex& index, const SampleContext& ctx, const TimeConstraints& tc,
                   const FeatureConfig& config) {
  config.validate();
  return detail::hubs(index, ctx, detail::active_for(index, ctx, tc), config.gamma);
}

/// Active neighbors who retweeted the target (the activity's source by
/// default) on the topic by the context time.
inline double mutual_reposts(const TemporalIndex& index, const SampleContext& ctx, const TimeConstraints& tc,
                             const FeatureConfig& config) {
  return detail::mutual_reposts(index, ctx, detail::active_for(index, ctx, tc), config.mur_target);
}

/// ACC = strongly connected components among active neighbors, ACR = ACC over
/// the component count of the whole neighborhood.
inline StructuralDiversity structural_diversity(const TemporalIndex& index, const SampleContext& ctx,
                                                const TimeConstraints& tc, const FeatureConfig& config) {
  return detail::structural_diversity(index, ctx, tc, detail::active_for(index, ctx, tc), config.acc_edges);
}

inline FeatureVector compute_all(const TemporalIndex& index, const SampleContext& ctx, const TimeConstraints& tc,
                                 const FeatureConfig& config) {
  config.validate();
  const auto active = detail::active_for(index, ctx, tc);
  FeatureVector v;
  const auto c = detail::connectivity(index, ctx, tc, active);
  v.nan = c.nan;
  v.pne = c.pne;
  v.cdi = detail::continuous_decay(active, config.sigma);
  v.prr = detail::previous_reposts(index, ctx, active);
  const auto t = detail::transitivity(index, ctx, active, config.clt_pairs);
  v.clt = t.clt;
  v.clc = t.clc;
  v.hub = detail::hubs(index, ctx, active, config.gamma);
  v.mur = detail::mutual_reposts(index, ctx, active, config.mur_target);
  const auto s = detail::structural_diversity(index, ctx, tc, active, config.acc_edges);
  v.acc = s.acc;
  v.acr = s.acr;
  return v;
}

/// Single feature, skipping the work the others need.
inline double compute_feature(const TemporalIndex& index, const SampleContext& ctx, const TimeConstraints& tc,
                              const FeatureConfig& config, Feature f) {
  const auto active = detail::active_for(index, ctx, tc);
  switch (f) {
    case Feature::Nan: return static_cast<double>(active.size());
    case Feature::Pne: return detail::connectivity(index, ctx, tc, active).pne;
    case Feature::Cdi: return detail::continuous_decay(active, config.sigma);
    case Feature::Prr: return detail::previous_reposts(index, ctx, active);
    case Feature::Clt: return detail::transitivity(index, ctx, active, config.clt_pairs).clt;
    case Feature::Clc: return detail::transitivity(index, ctx, active, config.clt_pairs).clc;
    case Feature::Hub: return detail::hubs(index, ctx, active, config.gamma);
    case Feature::Mur: return detail::mutual_reposts(index, ctx, active, config.mur_target);
    case Feature::Acc: return detail::structural_diversity(index, ctx, tc, active, config.acc_edges).acc;
    case Feature::Acr: return detail::structural_diversity(index, ctx, tc, active, config.acc_edges).acr;
  }
  return 0.0;
}

/// Longest delay between an adoption and the earliest adoption of the same
/// topic by one of the adopter's (unconstrained) active neighbors. Falls back
/// to `fallback` when no influencing pair has a positive delay.
inline Seconds estimate_sigma(const TemporalIndex& index, std::optional<Timestamp> until = std::nullopt,
                              Seconds fallback = Hours{1}) {
  if (index.log().empty()) throw DegenerateDataError("cannot estimate sigma on an empty log");
  const auto tc = TimeConstraints::unconstrained();
  Seconds longest = Seconds::zero();
  const auto records = index.log().records();
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    // lookups at r.time never see later records, so skipping is the same as truncating the log
    if (until && r.time > *until) continue;
    for (const auto& a : active_neighbors(index, r.adopter, r.topic, r.time, tc, RecordId{static_cast<std::uint32_t>(i)}))
      longest = std::max(longest, r.time - a.adopt_time);
  }
  return longest > Seconds::zero() ? longest : fallback;
}

} // namespace tcinf
