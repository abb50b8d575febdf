#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "analysis.hpp"
#include "pipeline.hpp"
#include "sampling.hpp"

namespace tcinf {

/// Shortest text that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

inline std::string format_span(Seconds s) { return s == kUnbounded ? "none" : std::to_string(s.count()); }

inline Seconds parse_span(std::string_view text) {
  if (text == "none") return kUnbounded;
  std::int64_t v = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size() || v <= 0)
    throw ConfigError("bad time span '" + std::string(text) + "'");
  return Seconds{v};
}

inline std::string_view rule_name(CandidateRule r) {
  return r == CandidateRule::NeverAdopted ? "never_adopted" : "no_adoption_from_active";
}

inline CandidateRule parse_rule(std::string_view text) {
  if (text == "never_adopted") return CandidateRule::NeverAdopted;
  if (text == "no_adoption_from_active") return CandidateRule::NoAdoptionFromActive;
  throw ConfigError("unknown negative rule '" + std::string(text) + "'");
}

/// FNV-1a, used for content hashes in manifests.
inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream s;
  s << std::hex << std::setw(16) << std::setfill('0') << v;
  return s.str();
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read " + path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

namespace detail {

inline std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream s(line);
  while (std::getline(s, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

inline nlohmann::json opt_json(const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json(); }

} // namespace detail

// Sample sets ---------------------------------------------------------------

inline void write_samples_csv(std::ostream& out, const ActivityLog& log, const SampleSet& set) {
  out << "# seed=" << set.seed << '\n'
      << "# tau_sus=" << format_span(set.tc.susceptible()) << '\n'
      << "# tau_fos=" << format_span(set.tc.forgettable()) << '\n'
      << "# filter=" << (set.filter ? set.filter->label() : "none") << '\n'
      << "# rule=" << rule_name(set.rule) << '\n'
      << "# skipped_positives=" << set.skipped_positives << '\n'
      << "label,ego,source,topic,time,paired_with,record\n";
  for (const auto& s : set.samples) {
    out << (s.label == Label::Positive ? 1 : 0) << ',' << log.user_name(s.ego) << ',' << log.user_name(s.source)
        << ',' << log.topic_name(s.topic) << ',' << to_unix(s.time) << ',' << s.paired_with << ',';
    if (s.record) out << index_of(*s.record);
    out << '\n';
  }
}

/// Reads a sample CSV back against the log it was drawn from.
inline SampleSet read_samples_csv(std::istream& in, const ActivityLog& log) {
  SampleSet set;
  std::map<std::string, std::string> meta;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  auto user = [&](const std::string& name) {
    auto id = log.find_user(name);
    if (!id) throw ParseError(line_no, "unknown user '" + name + "'");
    return *id;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    if (line.starts_with("# ")) {
      auto eq = line.find('=');
      if (eq != std::string::npos) meta[line.substr(2, eq - 2)] = line.substr(eq + 1);
      continue;
    }
    if (!header) {
      header = true;
      continue;
    }
    const auto f = detail::split_csv(line);
    if (f.size() != 7) throw ParseError(line_no, "expected 7 fields");
    try {
      Sample s{user(f[1]), user(f[2]), TopicId{}, from_unix(std::stoll(f[4])),
               f[0] == "1" ? Label::Positive : Label::Negative, std::stoull(f[5]), std::nullopt};
      auto topic = log.find_topic(f[3]);
      if (!topic) throw ParseError(line_no, "unknown topic '" + f[3] + "'");
      s.topic = *topic;
      if (!f[6].empty()) s.record = RecordId{static_cast<std::uint32_t>(std::stoul(f[6]))};
      set.samples.push_back(s);
    } catch (const std::logic_error&) {
      throw ParseError(line_no, "bad number");
    }
  }
  try {
    set.seed = std::stoull(meta.at("seed"));
    set.tc = TimeConstraints(parse_span(meta.at("tau_sus")), parse_span(meta.at("tau_fos")));
    if (meta.at("filter") != "none") set.filter = FilterSpec::parse(meta.at("filter"));
    set.rule = parse_rule(meta.at("rule"));
    set.skipped_positives = std::stoull(meta.at("skipped_positives"));
  } catch (const std::out_of_range&) {
    throw ParseError(line_no, "sample file lacks its metadata header");
  }
  return set;
}

inline nlohmann::json samples_to_json(const ActivityLog& log, const SampleSet& set) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& s : set.samples) {
    rows.push_back({{"label", s.label == Label::Positive ? 1 : 0},
                    {"ego", log.user_name(s.ego)},
                    {"source", log.user_name(s.source)},
                    {"topic", log.topic_name(s.topic)},
                    {"time", to_unix(s.time)},
                    {"paired_with", s.paired_with},
                    {"record", s.record ? nlohmann::json(index_of(*s.record)) : nlohmann::json()}});
  }
  return {{"seed", set.seed},
          {"tau_sus", format_span(set.tc.susceptible())},
          {"tau_fos", format_span(set.tc.forgettable())},
          {"filter", set.filter ? set.filter->label() : "none"},
          {"rule", rule_name(set.rule)},
          {"skipped_positives", set.skipped_positives},
          {"samples", std::move(rows)}};
}

// Feature tables ------------------------------------------------------------

inline void write_features_csv(std::ostream& out, const ActivityLog& log, const FeatureTable& table) {
  out << "label";
  for (Feature f : kAllFeatures) out << ',' << feature_name(f);
  out << ",ego,source,topic,time,tau_sus,tau_fos\n";
  const auto sus = format_span(table.set.tc.susceptible()), fos = format_span(table.set.tc.forgettable());
  for (std::size_t i = 0; i < table.vectors.size(); ++i) {
    const auto& s = table.set.samples[i];
    out << (s.label == Label::Positive ? 1 : 0);
    for (Feature f : kAllFeatures) out << ',' << format_double(table.vectors[i].get(f));
    out << ',' << log.user_name(s.ego) << ',' << log.user_name(s.source) << ',' << log.topic_name(s.topic) << ','
        << to_unix(s.time) << ',' << sus << ',' << fos << '\n';
  }
}

inline nlohmann::json features_to_json(const ActivityLog& log, const FeatureTable& table) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < table.vectors.size(); ++i) {
    const auto& s = table.set.samples[i];
    nlohmann::json values;
    for (Feature f : kAllFeatures) values[std::string(feature_name(f))] = table.vectors[i].get(f);
    rows.push_back({{"label", s.label == Label::Positive ? 1 : 0},
                    {"features", std::move(values)},
                    {"ego", log.user_name(s.ego)},
                    {"source", log.user_name(s.source)},
                    {"topic", log.topic_name(s.topic)},
                    {"time", to_unix(s.time)}});
  }
  return {{"tau_sus", format_span(table.set.tc.susceptible())},
          {"tau_fos", format_span(table.set.tc.forgettable())},
          {"sigma_seconds", table.config.sigma.count()},
          {"gamma", table.config.gamma},
          {"rows", std::move(rows)}};
}

// Gain grids ----------------------------------------------------------------

/// Long form, spans in hours; `missing` is 1 when the gain is undefined.
inline void write_grid_csv(std::ostream& out, const GainGrid& g) {
  out << "tau_sus,tau_fos,rho,gain,missing\n";
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = 0; j < g.size(); ++j) {
      const std::size_t c = g.cell(i, j);
      out << format_double(to_hours(g.taus[i])) << ',' << format_double(to_hours(g.taus[j])) << ','
          << detail::opt(g.rho[c]) << ',' << detail::opt(g.gain[c]) << ',' << (g.gain[c] ? 0 : 1) << '\n';
    }
}

inline nlohmann::json grid_to_json(const GainGrid& g) {
  nlohmann::json taus = nlohmann::json::array(), rho = nlohmann::json::array(), gain = nlohmann::json::array(),
                 samples = nlohmann::json::array();
  for (Seconds t : g.taus) taus.push_back(to_hours(t));
  for (std::size_t i = 0; i < g.size(); ++i) {
    nlohmann::json r = nlohmann::json::array(), q = nlohmann::json::array(), n = nlohmann::json::array();
    for (std::size_t j = 0; j < g.size(); ++j) {
      r.push_back(detail::opt_json(g.rho[g.cell(i, j)]));
      q.push_back(detail::opt_json(g.gain[g.cell(i, j)]));
      n.push_back(g.samples[g.cell(i, j)]);
    }
    rho.push_back(std::move(r));
    gain.push_back(std::move(q));
    samples.push_back(std::move(n));
  }
  return {{"feature", feature_name(g.feature)},
          {"taus_hours", std::move(taus)},
          {"baseline_hours", {to_hours(g.baseline.susceptible()), to_hours(g.baseline.forgettable())}},
          {"baseline_rho", detail::opt_json(g.baseline_rho)},
          {"rho", std::move(rho)},
          {"gain", std::move(gain)},
          {"samples", std::move(samples)}};
}

// Comparisons ---------------------------------------------------------------

inline nlohmann::json comparison_to_json(const Comparison& c) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : c.rows) {
    nlohmann::json row{{"label", r.label}};
    row["with_constraints"] = r.with_constraints ? to_json(*r.with_constraints) : nlohmann::json();
    row["without_constraints"] = r.without_constraints ? to_json(*r.without_constraints) : nlohmann::json();
    row["improvement"] = detail::opt_json(r.improvement());
    if (r.error) row["error"] = *r.error;
    rows.push_back(std::move(row));
  }
  return {{"tau_sus_hours", to_hours(c.tc.susceptible())},
          {"tau_fos_hours", to_hours(c.tc.forgettable())},
          {"sigma_with_seconds", c.sigma_with.count()},
          {"sigma_without_seconds", c.sigma_without.count()},
          {"rows", std::move(rows)}};
}

/// One line per feature: spans, F1 with and without constraints, improvement.
inline void write_comparison_table(std::ostream& out, const Comparison& c) {
  const auto spans = "(" + format_double(to_hours(c.tc.susceptible())) + "h," +
                     format_double(to_hours(c.tc.forgettable())) + "h)";
  auto cell = [](const std::optional<Metrics>& m) {
    if (!m) return std::string("-");
    std::ostringstream s;
    s << std::fixed << std::setprecision(3) << m->f1;
    return s.str();
  };
  out << std::left << std::setw(8) << "feature" << std::setw(16) << "tc" << std::setw(12) << "F1 w/ tc"
      << std::setw(12) << "F1 w/o tc" << "improvement\n";
  for (const auto& r : c.rows) {
    out << std::setw(8) << r.label << std::setw(16) << spans << std::setw(12) << cell(r.with_constraints)
        << std::setw(12) << cell(r.without_constraints);
    if (auto g = r.improvement()) {
      std::ostringstream s;
      s << std::fixed << std::setprecision(2) << *g * 100 << '%';
      out << s.str();
    } else {
      out << (r.error ? "error: " + *r.error : std::string("-"));
    }
    out << '\n';
  }
}

// Manifests -----------------------------------------------------------------

struct ManifestInput {
  std::string path;
  std::string content_hash;
};

/// Everything needed to replay a run: command, inputs, seed and the hash of the
/// effective configuration. No wall-clock fields, so equal runs give equal bytes.
inline nlohmann::json make_manifest(std::string_view command, const std::vector<ManifestInput>& inputs,
                                    std::optional<std::uint64_t> seed, const nlohmann::json& config,
                                    const std::vector<std::string>& outputs) {
  nlohmann::json in = nlohmann::json::array();
  for (const auto& i : inputs) in.push_back({{"path", i.path}, {"fnv1a64", i.content_hash}});
  return {{"command", command},
          {"inputs", std::move(in)},
          {"seed", seed ? nlohmann::json(*seed) : nlohmann::json()},
          {"config", config},
          {"config_hash", hex64(fnv1a(config.dump()))},
          {"outputs", outputs}};
}

} // namespace tcinf
