#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <vector>

#include "activity_log.hpp"
#include "features.hpp"
#include "parallel.hpp"
#include "rng.hpp"
#include "temporal_index.hpp"

namespace tcinf {

enum class Label : std::uint8_t { Negative = 0, Positive = 1 };

struct Sample {
  UserId ego;
  UserId source;
  TopicId topic;
  Timestamp time;
  Label label;
  std::size_t paired_with;
  // The log record behind a positive sample.
  std::optional<RecordId> record;

  friend bool operator==(const Sample&, const Sample&) = default;
};

inline SampleContext context_of(const Sample& s) { return {s.ego, s.source, s.topic, s.time, s.record}; }

/// Which influenced users count as non-adopters.
enum class CandidateRule {
  // Never adopted the topic anywhere in the log.
  NeverAdopted,
  // Never retweeted the topic from any of their own active neighbors.
  NoAdoptionFromActive,
};

struct SamplingOptions {
  CandidateRule rule = CandidateRule::NeverAdopted;
  unsigned workers = 1;
  // Apply the activity filter to negative users as well as positive egos.
  bool filter_negatives = false;
};

struct SampleSet {
  std::vector<Sample> samples;
  std::uint64_t seed = 0;
  std::optional<FilterSpec> filter;
  TimeConstraints tc = TimeConstraints::unconstrained();
  CandidateRule rule = CandidateRule::NeverAdopted;
  // Positives dropped because no negative could be drawn for them.
  std::size_t skipped_positives = 0;

  std::size_t positives() const {
    return static_cast<std::size_t>(std::count_if(samples.begin(), samples.end(),
                                                  [](const Sample& s) { return s.label == Label::Positive; }));
  }
};

namespace detail {

inline bool satisfies_rule(const TemporalIndex& index, UserId candidate, TopicId topic, Timestamp t,
                           const TimeConstraints& tc, CandidateRule rule) {
  if (rule == CandidateRule::NeverAdopted) return !index.ever_adopted(candidate, topic);
  const auto& log = index.log();
  for (const auto& a : active_neighbors(index, candidate, topic, t, tc))
    for (const auto& e : index.retweets_between(candidate, a.user))
      if (log.record(e.record).topic == topic) return false;
  return true;
}

} // namespace detail

/// Users under the positive ego's influence on the topic at the positive's
/// time (the ego is one of their active neighbors) who satisfy `rule`.
/// Sorted by id.
inline std::vector<UserId> negative_candidates(const TemporalIndex& index, const Sample& positive,
                                               const TimeConstraints& tc,
                                               CandidateRule rule = CandidateRule::NeverAdopted) {
  if (positive.label != Label::Positive) throw Error("negative_candidates needs a positive sample");
  const auto in = index.in_edges(positive.ego);
  std::vector<UserId> peers;
  for (auto it = detail::lower_by_time(in, positive.time - tc.forgettable() - tc.susceptible());
       it != in.end() && it->time <= positive.time; ++it)
    if (it->peer != positive.ego) peers.push_back(it->peer);
  std::sort(peers.begin(), peers.end());
  peers.erase(std::unique(peers.begin(), peers.end()), peers.end());

  std::vector<UserId> out;
  for (UserId peer : peers) {
    if (!active_link(index, peer, positive.ego, positive.topic, positive.time, tc)) continue;
    if (detail::satisfies_rule(index, peer, positive.topic, positive.time, tc, rule)) out.push_back(peer);
  }
  return out;
}

/// One positive per record whose adopter passes the filter, each paired with a
/// negative <v', ego, topic, time> drawn uniformly from its candidates. The
/// draw for a positive depends only on (seed, record index), so the set is the
/// same for any worker count. Positives without candidates are dropped.
inline SampleSet build_balanced_set(const TemporalIndex& index, const std::optional<FilterSpec>& filter,
                                    const TimeConstraints& tc, std::uint64_t seed, const SamplingOptions& options = {}) {
  SampleSet set;
  set.seed = seed;
  set.filter = filter;
  set.tc = tc;
  set.rule = options.rule;

  const auto& log = index.log();
  const auto records = log.records();
  std::vector<bool> eligible(log.user_count(), true);
  if (filter) {
    std::fill(eligible.begin(), eligible.end(), false);
    for (UserId u : eligible_users(log, *filter)) eligible[index_of(u)] = true;
  }
  std::vector<std::size_t> ordinals;
  for (std::size_t i = 0; i < records.size(); ++i)
    if (eligible[index_of(records[i].adopter)]) ordinals.push_back(i);

  std::vector<std::optional<UserId>> drawn(ordinals.size());
  parallel_for(ordinals.size(), options.workers, [&](std::size_t k) {
    const std::size_t i = ordinals[k];
    const auto& r = records[i];
    const Sample positive{r.adopter, r.source, r.topic, r.time, Label::Positive, 0, RecordId{static_cast<std::uint32_t>(i)}};
    auto candidates = negative_candidates(index, positive, tc, options.rule);
    if (options.filter_negatives)
      std::erase_if(candidates, [&](UserId c) { return !eligible[index_of(c)]; });
    if (candidates.empty()) return;
    Rng rng = make_rng(seed, {static_cast<std::uint64_t>(i)});
    drawn[k] = candidates[uniform_below(rng, candidates.size())];
  });

  for (std::size_t k = 0; k < ordinals.size(); ++k) {
    if (!drawn[k]) {
      ++set.skipped_positives;
      continue;
    }
    const std::size_t i = ordinals[k];
    const auto& r = records[i];
    const std::size_t pos = set.samples.size();
    set.samples.push_back({r.adopter, r.source, r.topic, r.time, Label::Positive, pos + 1, RecordId{static_cast<std::uint32_t>(i)}});
    set.samples.push_back({*drawn[k], r.adopter, r.topic, r.time, Label::Negative, pos, std::nullopt});
  }
  return set;
}

} // namespace tcinf
