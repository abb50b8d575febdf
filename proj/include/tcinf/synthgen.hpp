#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "activity_log.hpp"
#include "rng.hpp"
#include "types.hpp"

namespace tcinf {

struct GenParams {
  std::size_t n_users = 500;
  std::size_t n_topics = 20;
  Hours span = Hours{720};
  // p_k proportional to k^-exponent for k in [1, max_activity]
  double activity_exponent = 1.8;
  std::size_t max_activity = 720;
  // Users each user may retweet when no influence is at work.
  std::size_t followees = 10;
  // Followees picked uniformly instead of in proportion to their activity.
  bool uniform_followees = false;
  Hours planted_sus = Hours{168};
  Hours planted_fos = Hours{24};
  double adoption_boost = 8.0;
  double base_rate = 0.02;
  std::int64_t start_unix = 1'300'000'000;

  void validate() const {
    if (n_users < 2) throw ConfigError("synth: need at least two users");
    if (n_topics < 1) throw ConfigError("synth: need at least one topic");
    if (span <= Hours{0}) throw ConfigError("synth: span must be positive");
    if (!(activity_exponent > 1.0)) throw ConfigError("synth: activity exponent must exceed 1");
    if (max_activity < 1) throw ConfigError("synth: max activity must be at least 1");
    if (followees < 1) throw ConfigError("synth: need at least one followee");
    if (planted_sus <= Hours{0} || planted_fos <= Hours{0}) throw ConfigError("synth: planted spans must be positive");
    if (!(adoption_boost >= 1.0)) throw ConfigError("synth: adoption boost must be at least 1");
    if (!(base_rate > 0.0 && base_rate < 1.0)) throw ConfigError("synth: base rate must lie in (0, 1)");
    if (start_unix < 0) throw ConfigError("synth: start must not precede the epoch");
  }
};

inline nlohmann::json to_json(const GenParams& p) {
  return {{"n_users", p.n_users},
          {"n_topics", p.n_topics},
          {"span_hours", p.span.count()},
          {"activity_exponent", p.activity_exponent},
          {"max_activity", p.max_activity},
          {"followees", p.followees},
          {"uniform_followees", p.uniform_followees},
          {"planted_tau_sus_hours", p.planted_sus.count()},
          {"planted_tau_fos_hours", p.planted_fos.count()},
          {"adoption_boost", p.adoption_boost},
          {"base_rate", p.base_rate},
          {"start_unix", p.start_unix}};
}

inline GenParams gen_params_from_json(const nlohmann::json& j) {
  GenParams p;
  try {
    p.n_users = j.value("n_users", p.n_users);
    p.n_topics = j.value("n_topics", p.n_topics);
    p.span = Hours{j.value("span_hours", p.span.count())};
    p.activity_exponent = j.value("activity_exponent", p.activity_exponent);
    p.max_activity = j.value("max_activity", p.max_activity);
    p.followees = j.value("followees", p.followees);
    p.uniform_followees = j.value("uniform_followees", p.uniform_followees);
    p.planted_sus = Hours{j.value("planted_tau_sus_hours", p.planted_sus.count())};
    p.planted_fos = Hours{j.value("planted_tau_fos_hours", p.planted_fos.count())};
    p.adoption_boost = j.value("adoption_boost", p.adoption_boost);
    p.base_rate = j.value("base_rate", p.base_rate);
    p.start_unix = j.value("start_unix", p.start_unix);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("synth params: ") + e.what());
  }
  p.validate();
  return p;
}

namespace detail {

// Inverse-CDF draw from the truncated discrete power law.
class PowerLaw {
public:
  PowerLaw(double exponent, std::size_t max_k) : cdf_(max_k) {
    double acc = 0;
    for (std::size_t k = 1; k <= max_k; ++k) cdf_[k - 1] = acc += std::pow(static_cast<double>(k), -exponent);
    for (double& c : cdf_) c /= acc;
  }
  std::size_t operator()(Rng& rng) const {
    const double u = uniform_unit(rng);
    auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    return std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), cdf_.size() - 1) + 1;
  }

private:
  std::vector<double> cdf_;
};

inline std::string padded(const char* prefix, std::size_t i, std::size_t n) {
  const int width = static_cast<int>(std::to_string(n > 0 ? n - 1 : 0).size());
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s%0*zu", prefix, width, i);
  return buf;
}

} // namespace detail

/// Synthetic log with influence planted under (planted_sus, planted_fos).
///
/// Each user draws an activity count from the power law and spreads that many
/// events uniformly over the span. Events are replayed in time order. At each
/// event the topics for which the user has an active neighbor under the
/// planted windows get their adoption hazard multiplied by the boost; topics
/// are swept in random order with those hazards until one fires. The source
/// is an active neighbor for an influenced topic, otherwise a random followee.
inline ActivityLog generate(const GenParams& p, std::uint64_t seed) {
  p.validate();
  const std::size_t n = p.n_users;
  Rng counts_rng = make_rng(seed, {1});
  Rng graph_rng = make_rng(seed, {2});
  Rng time_rng = make_rng(seed, {3});
  Rng event_rng = make_rng(seed, {4});

  const detail::PowerLaw activity(p.activity_exponent, p.max_activity);
  std::vector<std::size_t> counts(n);
  for (auto& k : counts) k = activity(counts_rng);

  // Followees drawn without replacement with probability proportional to
  // their activity (Efraimidis-Spirakis keys).
  std::vector<std::vector<std::uint32_t>> follows(n);
  const std::size_t k_follow = std::min(p.followees, n - 1);
  std::vector<std::pair<double, std::uint32_t>> keys;
  for (std::size_t u = 0; u < n; ++u) {
    keys.clear();
    for (std::size_t w = 0; w < n; ++w) {
      const double r = uniform_unit(graph_rng);
      if (w == u) continue;
      const double weight = p.uniform_followees ? 1.0 : static_cast<double>(counts[w]);
      keys.emplace_back(std::log1p(-r) / weight, static_cast<std::uint32_t>(w));
    }
    std::partial_sort(keys.begin(), keys.begin() + static_cast<std::ptrdiff_t>(k_follow), keys.end(),
                      [](const auto& a, const auto& b) { return a.first > b.first || (a.first == b.first && a.second < b.second); });
    for (std::size_t i = 0; i < k_follow; ++i) follows[u].push_back(keys[i].second);
    std::sort(follows[u].begin(), follows[u].end());
  }

  const std::int64_t span_s = std::chrono::duration_cast<Seconds>(p.span).count();
  std::vector<std::pair<std::int64_t, std::uint32_t>> events;
  for (std::size_t u = 0; u < n; ++u)
    for (std::size_t i = 0; i < counts[u]; ++i)
      events.emplace_back(static_cast<std::int64_t>(uniform_below(time_rng, static_cast<std::uint64_t>(span_s) + 1)),
                          static_cast<std::uint32_t>(u));
  std::sort(events.begin(), events.end());

  std::vector<std::string> user_names(n), topic_names(p.n_topics);
  for (std::size_t u = 0; u < n; ++u) user_names[u] = detail::padded("u", u, n);
  for (std::size_t t = 0; t < p.n_topics; ++t) topic_names[t] = detail::padded("#t", t, p.n_topics);

  const std::int64_t sus = std::chrono::duration_cast<Seconds>(p.planted_sus).count();
  const std::int64_t fos = std::chrono::duration_cast<Seconds>(p.planted_fos).count();
  const double plain = p.base_rate;
  const double boosted = std::min(1.0, p.base_rate * p.adoption_boost);

  struct Edge {
    std::int64_t time;
    std::uint32_t peer;
  };
  struct Adoption {
    std::int64_t time;
    std::uint32_t topic;
  };
  std::vector<std::vector<Edge>> edges(n);
  std::vector<std::vector<Adoption>> adoptions(n);
  std::vector<std::vector<std::uint32_t>> active(p.n_topics);
  std::vector<std::uint32_t> order(p.n_topics);
  std::vector<std::int64_t> peer_edges;
  std::vector<std::uint32_t> peers;

  ActivityLog log;
  for (const auto& [t, u] : events) {
    for (auto& a : active) a.clear();
    peers.clear();
    for (auto it = edges[u].rbegin(); it != edges[u].rend() && it->time >= t - sus - fos; ++it) peers.push_back(it->peer);
    std::sort(peers.begin(), peers.end());
    peers.erase(std::unique(peers.begin(), peers.end()), peers.end());
    for (std::uint32_t w : peers) {
      peer_edges.clear();
      for (const auto& e : edges[u])
        if (e.peer == w) peer_edges.push_back(e.time);
      for (auto it = adoptions[w].rbegin(); it != adoptions[w].rend() && it->time >= t - fos; ++it) {
        const std::int64_t t2 = it->time;
        const bool linked = std::any_of(peer_edges.begin(), peer_edges.end(),
                                        [&](std::int64_t t1) { return t1 <= t2 && t2 - t1 <= sus; });
        if (linked && (active[it->topic].empty() || active[it->topic].back() != w)) active[it->topic].push_back(w);
      }
    }

    std::uint32_t topic = 0;
    for (bool fired = false; !fired;) {
      std::iota(order.begin(), order.end(), 0u);
      for (std::size_t i = 0; i + 1 < order.size(); ++i) std::swap(order[i], order[i + uniform_below(event_rng, order.size() - i)]);
      for (std::uint32_t theta : order) {
        if (uniform_unit(event_rng) < (active[theta].empty() ? plain : boosted)) {
          topic = theta;
          fired = true;
          break;
        }
      }
    }
    const auto& pool = active[topic].empty() ? follows[u] : active[topic];
    const std::uint32_t source = pool[uniform_below(event_rng, pool.size())];

    log.append(user_names[u], user_names[source], topic_names[topic], from_unix(p.start_unix + t));
    edges[u].push_back({t, source});
    adoptions[u].push_back({t, topic});
  }
  return log;
}

} // namespace tcinf
