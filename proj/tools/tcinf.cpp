// tcinf: command-line driver for the time-constrained influence pipeline.
//
// Every subcommand takes its options after the subcommand name. A config file
// (--config FILE) holds `key = value` lines whose keys are long option names
// without the dashes; flags given on the command line win over the file.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif
#include <nlohmann/json.hpp>

#include <tcinf/io.hpp>
#include <tcinf/pipeline.hpp>
#include <tcinf/synthgen.hpp>

namespace fs = std::filesystem;
using namespace tcinf;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kFailure = 1, kParse = 2, kConfig = 3, kDegenerate = 4 };

struct Options {
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  unsigned workers = 1;

  std::string input;
  std::string format = "tsv";
  std::string columns = "adopter,source,topic,time";
  std::string delimiter = "tab";
  bool skip_malformed = false;
  bool synth = false;
  std::string synth_params;
  GenParams gen;
  double gen_span_hours = 720, gen_sus_hours = 168, gen_fos_hours = 24;

  std::string filter = "none";
  std::string tau_sus = "720", tau_fos = "720";
  std::string rule = "never_adopted";
  bool filter_negatives = false;

  std::optional<double> sigma_hours;
  std::uint32_t gamma = 104;
  std::string mur_target = "source", clt_pairs = "ordered", acc_edges = "any_topic";
  std::string features = "all";

  std::string taus = "8,16,24,48,72,96,120,144,168,336,504,720";
  std::string baseline = "720,720";
  std::string level = "curve";
  std::size_t bins = 20, min_support = 5;

  std::string classifier = "forest";
  ForestParams forest;
  LogisticParams logistic;
  double split_ratio = 0.9;
  bool leakage_strict = true;

  std::string user, topic;
  std::int64_t time = 0;
};

// Inputs --------------------------------------------------------------------

Seconds hours_to_seconds(double h, const std::string& what) {
  if (!(h > 0)) throw ConfigError(what + " must be positive");
  return Seconds{static_cast<std::int64_t>(std::llround(h * 3600.0))};
}

Seconds parse_hours(const std::string& text, const std::string& what) {
  if (text == "none") return kUnbounded;
  try {
    std::size_t used = 0;
    const double h = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return hours_to_seconds(h, what);
  } catch (const std::logic_error&) {
    throw ConfigError("bad " + what + " '" + text + "'");
  }
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream s(text);
  std::string item;
  while (std::getline(s, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::vector<Feature> parse_features(const std::string& text) {
  if (text == "all") return {kAllFeatures.begin(), kAllFeatures.end()};
  std::vector<Feature> out;
  for (const auto& name : split_list(text)) out.push_back(parse_feature(name));
  if (out.empty()) throw ConfigError("no features selected");
  return out;
}

TimeConstraints single_tc(const Options& o) {
  return {parse_hours(o.tau_sus, "tau-sus"), parse_hours(o.tau_fos, "tau-fos")};
}

std::optional<FilterSpec> filter_of(const Options& o) {
  if (o.filter == "none") return std::nullopt;
  return FilterSpec::parse(o.filter);
}

std::uint64_t require_seed(const Options& o) {
  if (!o.seed) throw ConfigError("--seed is required for this command");
  return *o.seed;
}

GenParams gen_params(const Options& o) {
  GenParams p = o.gen;
  if (!o.synth_params.empty()) {
    json j;
    try {
      j = json::parse(read_file(o.synth_params));
    } catch (const json::exception& e) {
      throw ConfigError(o.synth_params + ": " + e.what());
    }
    // a sidecar written by `synth` nests the params
    p = gen_params_from_json(j.contains("params") ? j["params"] : j);
  } else {
    p.span = std::chrono::duration_cast<Hours>(hours_to_seconds(o.gen_span_hours, "synth-span"));
    p.planted_sus = std::chrono::duration_cast<Hours>(hours_to_seconds(o.gen_sus_hours, "synth-sus"));
    p.planted_fos = std::chrono::duration_cast<Hours>(hours_to_seconds(o.gen_fos_hours, "synth-fos"));
  }
  p.validate();
  return p;
}

FormatSpec format_of(const Options& o) {
  FormatSpec spec;
  if (o.format == "tsv") spec.format = LogFormat::Tsv;
  else if (o.format == "jsonl") spec.format = LogFormat::JsonLines;
  else throw ConfigError("unknown format '" + o.format + "'");
  spec.mode = o.skip_malformed ? ParseMode::SkipMalformed : ParseMode::FailFast;
  if (o.delimiter == "tab") spec.delimiter = '\t';
  else if (o.delimiter == "comma") spec.delimiter = ',';
  else if (o.delimiter.size() == 1) spec.delimiter = o.delimiter[0];
  else throw ConfigError("delimiter must be one character, 'tab' or 'comma'");
  spec.columns = parse_column_order(o.columns);
  return spec;
}

struct Loaded {
  ActivityLog log;
  ParseReport report;
  std::vector<ManifestInput> inputs;
};

Loaded load_input(const Options& o) {
  if (o.synth == !o.input.empty()) throw ConfigError("give exactly one of --input and --synth");
  Loaded out;
  if (o.synth) {
    const auto params = gen_params(o);
    out.log = generate(params, require_seed(o));
    out.report.records = out.log.size();
    out.inputs.push_back({"synth:" + to_json(params).dump(), hex64(fnv1a(to_json(params).dump()))});
    return out;
  }
  const std::string bytes = read_file(o.input);
  std::istringstream in(bytes);
  out.log = parse_log(in, format_of(o), &out.report);
  out.inputs.push_back({o.input, hex64(fnv1a(bytes))});
  return out;
}

FeatureConfig feature_config(const Options& o) {
  FeatureConfig c;
  if (o.sigma_hours) c.sigma = hours_to_seconds(*o.sigma_hours, "sigma-hours");
  c.gamma = o.gamma;
  if (o.mur_target == "source") c.mur_target = MurTarget::Source;
  else if (o.mur_target == "ego") c.mur_target = MurTarget::Ego;
  else throw ConfigError("mur-target must be source or ego");
  if (o.clt_pairs == "ordered") c.clt_pairs = CltPairMode::Ordered;
  else if (o.clt_pairs == "unordered") c.clt_pairs = CltPairMode::Unordered;
  else throw ConfigError("clt-pairs must be ordered or unordered");
  if (o.acc_edges == "any_topic") c.acc_edges = AccEdgeScope::AnyTopic;
  else if (o.acc_edges == "same_topic") c.acc_edges = AccEdgeScope::SameTopic;
  else throw ConfigError("acc-edges must be any_topic or same_topic");
  c.validate();
  return c;
}

SamplingOptions sampling_options(const Options& o) {
  SamplingOptions s;
  s.rule = parse_rule(o.rule);
  s.filter_negatives = o.filter_negatives;
  s.workers = o.workers;
  return s;
}

TrainEvalConfig train_eval_config(const Options& o) {
  TrainEvalConfig c;
  if (o.classifier == "forest") c.classifier = Classifier::Forest;
  else if (o.classifier == "logistic") c.classifier = Classifier::Logistic;
  else throw ConfigError("classifier must be forest or logistic");
  c.forest = o.forest;
  c.forest.seed = require_seed(o);
  c.forest.workers = o.workers;
  c.logistic = o.logistic;
  if (!(o.split_ratio > 0 && o.split_ratio < 1)) throw ConfigError("split-ratio must lie in (0, 1)");
  c.split_ratio = o.split_ratio;
  c.leakage_strict = o.leakage_strict;
  c.features = feature_config(o);
  if (o.sigma_hours) c.sigma = c.features.sigma;
  c.sampling = sampling_options(o);
  c.columns = parse_features(o.features);
  return c;
}

// Effective configuration as recorded in the manifest. Worker count and output
// directory are left out so they do not change the artifacts.
json config_json(const std::string& command, const Options& o) {
  json j{{"command", command},     {"seed", o.seed ? json(*o.seed) : json()},
         {"input", o.input},       {"format", o.format},
         {"columns", o.columns},   {"delimiter", o.delimiter},
         {"skip_malformed", o.skip_malformed}};
  if (o.synth) j["synth"] = to_json(gen_params(o));
  if (command == "ingest" || command == "synth") return j;
  if (command == "neighbors-debug") {
    j.update({{"user", o.user}, {"topic", o.topic}, {"time", o.time}, {"tau_sus", o.tau_sus}, {"tau_fos", o.tau_fos}});
    return j;
  }
  j.update({{"filter", o.filter}, {"rule", o.rule}, {"filter_negatives", o.filter_negatives}});
  if (command == "sample") {
    j.update({{"tau_sus", o.tau_sus}, {"tau_fos", o.tau_fos}});
    return j;
  }
  j.update({{"sigma_hours", o.sigma_hours ? json(*o.sigma_hours) : json()},
            {"gamma", o.gamma},
            {"mur_target", o.mur_target},
            {"clt_pairs", o.clt_pairs},
            {"acc_edges", o.acc_edges},
            {"features", o.features}});
  if (command == "sweep") {
    j.update({{"taus", o.taus}, {"baseline", o.baseline}, {"level", o.level}, {"bins", o.bins},
              {"min_support", o.min_support}});
    return j;
  }
  j.update({{"tau_sus", o.tau_sus}, {"tau_fos", o.tau_fos}});
  if (command == "train-eval") {
    j.update({{"classifier", o.classifier},
              {"forest", to_json(o.forest)},
              {"logistic",
               {{"learning_rate", o.logistic.learning_rate},
                {"epochs", o.logistic.epochs},
                {"l2", o.logistic.l2},
                {"standardize", o.logistic.standardize}}},
              {"split_ratio", o.split_ratio},
              {"leakage_strict", o.leakage_strict}});
  }
  return j;
}

// Outputs -------------------------------------------------------------------

class OutputDir {
public:
  explicit OutputDir(const std::string& path) : root_(path) { fs::create_directories(root_); }

  void write(const std::string& name, const std::string& content) {
    std::ofstream f(root_ / name, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + (root_ / name).string());
    f << content;
    names_.push_back(name);
  }
  void write(const std::string& name, const json& j) { write(name, j.dump(2) + "\n"); }

  void manifest(const std::string& command, const Options& o, const std::vector<ManifestInput>& inputs) {
    const auto m = make_manifest(command, inputs, o.seed, config_json(command, o), names_);
    std::ofstream f(root_ / "manifest.json", std::ios::binary);
    f << m.dump(2) << "\n";
  }

private:
  fs::path root_;
  std::vector<std::string> names_;
};

// Commands ------------------------------------------------------------------

int cmd_ingest(const Options& o) {
  auto in = load_input(o);
  json stats = to_json(compute_stats(in.log));
  stats["parse"] = {{"records", in.report.records},
                    {"skipped", in.report.skipped},
                    {"skipped_lines", in.report.skipped_lines}};
  OutputDir out(o.out);
  out.write("stats.json", stats);
  out.manifest("ingest", o, in.inputs);
  std::cout << "retweets " << stats["retweet_count"] << ", users " << stats["user_count"] << ", hashtags "
            << stats["hashtag_count"];
  if (in.report.skipped) std::cout << ", skipped lines " << in.report.skipped;
  std::cout << "\n";
  return kOk;
}

int cmd_synth(const Options& o) {
  if (!o.input.empty()) throw ConfigError("synth does not read --input");
  const auto params = gen_params(o);
  const auto seed = require_seed(o);
  const auto log = generate(params, seed);
  std::ostringstream text;
  write_log(text, log);
  OutputDir out(o.out);
  out.write("log.tsv", text.str());
  out.write("log.params.json", json{{"seed", seed}, {"params", to_json(params)}});
  Options recorded = o;
  recorded.synth = true;
  out.manifest("synth", recorded, {});
  std::cout << "generated " << log.size() << " records over " << log.user_count() << " users\n";
  return kOk;
}

int cmd_sample(const Options& o) {
  auto in = load_input(o);
  TemporalIndex index{in.log};
  const auto set = build_balanced_set(index, filter_of(o), single_tc(o), require_seed(o), sampling_options(o));
  std::ostringstream csv;
  write_samples_csv(csv, in.log, set);
  OutputDir out(o.out);
  out.write("samples.csv", csv.str());
  out.write("samples.json", samples_to_json(in.log, set));
  out.manifest("sample", o, in.inputs);
  std::cout << set.positives() << " pairs, " << set.skipped_positives << " positives without candidates\n";
  return kOk;
}

int cmd_features(const Options& o) {
  auto in = load_input(o);
  TemporalIndex index{in.log};
  const auto set = build_balanced_set(index, filter_of(o), single_tc(o), require_seed(o), sampling_options(o));
  auto config = feature_config(o);
  if (!o.sigma_hours) config.sigma = estimate_sigma(index);
  const auto table = build_feature_table(index, set, config, o.workers);
  std::ostringstream csv;
  write_features_csv(csv, in.log, table);
  OutputDir out(o.out);
  out.write("features.csv", csv.str());
  out.write("features.json", features_to_json(in.log, table));
  out.manifest("features", o, in.inputs);
  std::cout << table.vectors.size() << " rows, sigma " << to_hours(config.sigma) << "h\n";
  return kOk;
}

int cmd_sweep(const Options& o) {
  auto in = load_input(o);
  TemporalIndex index{in.log};
  SweepConfig config;
  config.taus.clear();
  for (const auto& t : split_list(o.taus)) {
    const Seconds s = parse_hours(t, "tau");
    if (s == kUnbounded) throw ConfigError("grid values must be finite");
    config.taus.push_back(s);
  }
  if (config.taus.empty()) throw ConfigError("empty tau grid");
  const auto base = split_list(o.baseline);
  if (base.size() != 2) throw ConfigError("baseline must be 'sus,fos' in hours");
  config.baseline = TimeConstraints(parse_hours(base[0], "baseline"), parse_hours(base[1], "baseline"));
  config.features = feature_config(o);
  if (!o.sigma_hours) config.features.sigma = estimate_sigma(index);
  if (o.level == "curve") config.level = CorrelationLevel::Curve;
  else if (o.level == "sample") config.level = CorrelationLevel::Sample;
  else throw ConfigError("level must be curve or sample");
  config.bins = o.bins;
  config.min_support = o.min_support;
  config.rule = parse_rule(o.rule);
  config.filter_negatives = o.filter_negatives;
  config.workers = o.workers;

  const auto features = parse_features(o.features);
  const auto grids = sweep_grid(index, features, filter_of(o), require_seed(o), config);
  OutputDir out(o.out);
  for (const auto& g : grids) {
    const std::string name(feature_name(g.feature));
    std::ostringstream csv;
    write_grid_csv(csv, g);
    out.write("grid_" + name + ".csv", csv.str());
    out.write("grid_" + name + ".json", grid_to_json(g));
    const auto missing = std::count_if(g.gain.begin(), g.gain.end(), [](const auto& v) { return !v; });
    std::cout << name << ": " << g.gain.size() << " cells, " << missing << " missing\n";
  }
  out.manifest("sweep", o, in.inputs);
  return kOk;
}

int cmd_train_eval(const Options& o) {
  auto in = load_input(o);
  TemporalIndex index{in.log};
  const auto config = train_eval_config(o);
  const auto tc = single_tc(o);
  const auto seed = require_seed(o);
  const auto cmp = compare_with_unconstrained(index, filter_of(o), tc, seed, config, o.workers);

  OutputDir out(o.out);
  out.write("metrics.json", comparison_to_json(cmp));
  std::ostringstream table;
  write_comparison_table(table, cmp);
  out.write("table.txt", table.str());

  // model over the selected features under the requested constraints
  auto sampling = config.sampling;
  const auto set = build_balanced_set(index, filter_of(o), tc, seed, sampling);
  auto features = config.features;
  features.sigma = resolve_sigma(index, set, config);
  const auto split = chronological_split(to_matrix(build_feature_table(index, set, features, o.workers), config.columns),
                                         config.split_ratio);
  const json model = config.classifier == Classifier::Forest ? to_json(train_forest(split.train, config.forest))
                                                             : to_json(train_logistic(split.train, config.logistic));
  out.write("model.json", model);
  out.manifest("train-eval", o, in.inputs);
  std::cout << table.str();
  return kOk;
}

int cmd_neighbors_debug(const Options& o) {
  auto in = load_input(o);
  TemporalIndex index{in.log};
  const auto user = in.log.find_user(o.user);
  if (!user) throw ConfigError("unknown user '" + o.user + "'");
  const auto topic = in.log.find_topic(o.topic);
  if (!topic) throw ConfigError("unknown topic '" + o.topic + "'");
  const auto tc = single_tc(o);
  const Timestamp t = from_unix(o.time);

  json plain = json::array(), active = json::array();
  for (UserId v : neighbors(index, *user, t, tc.susceptible())) plain.push_back(in.log.user_name(v));
  for (const auto& a : active_neighbors(index, *user, *topic, t, tc))
    active.push_back({{"user", in.log.user_name(a.user)},
                      {"edge_time", to_unix(a.edge_time)},
                      {"adopt_time", to_unix(a.adopt_time)}});
  const json report{{"user", o.user},
                    {"topic", o.topic},
                    {"time", o.time},
                    {"tau_sus", format_span(tc.susceptible())},
                    {"tau_fos", format_span(tc.forgettable())},
                    {"neighbors", std::move(plain)},
                    {"active_neighbors", std::move(active)}};
  OutputDir out(o.out);
  out.write("neighbors.json", report);
  out.manifest("neighbors-debug", o, in.inputs);
  std::cout << report.dump(2) << "\n";
  return kOk;
}

// Option wiring -------------------------------------------------------------

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--out", o.out, "output directory")->capture_default_str();
  sub->add_option("--seed", o.seed, "master seed");
  sub->add_option("--workers", o.workers, "worker threads")->check(CLI::Range(1u, 1024u));
}

void add_synth_params(CLI::App* sub, Options& o) {
  sub->add_option("--synth-params", o.synth_params, "JSON generator params (overrides the synth-* flags)");
  sub->add_option("--synth-users", o.gen.n_users)->capture_default_str();
  sub->add_option("--synth-topics", o.gen.n_topics)->capture_default_str();
  sub->add_option("--synth-span", o.gen_span_hours, "hours")->capture_default_str();
  sub->add_option("--synth-exponent", o.gen.activity_exponent)->capture_default_str();
  sub->add_option("--synth-max-activity", o.gen.max_activity)->capture_default_str();
  sub->add_option("--synth-followees", o.gen.followees)->capture_default_str();
  sub->add_flag("--synth-uniform-followees", o.gen.uniform_followees, "draw followees uniformly");
  sub->add_option("--synth-sus", o.gen_sus_hours, "planted susceptible span, hours")->capture_default_str();
  sub->add_option("--synth-fos", o.gen_fos_hours, "planted forgettable span, hours")->capture_default_str();
  sub->add_option("--synth-boost", o.gen.adoption_boost)->capture_default_str();
  sub->add_option("--synth-base-rate", o.gen.base_rate)->capture_default_str();
  sub->add_option("--synth-start", o.gen.start_unix, "unix seconds of the first instant")->capture_default_str();
}

void add_input(CLI::App* sub, Options& o) {
  sub->add_option("--input", o.input, "activity log file");
  sub->add_option("--format", o.format, "tsv or jsonl")->capture_default_str();
  sub->add_option("--columns", o.columns, "column order of a delimited log")->capture_default_str();
  sub->add_option("--delimiter", o.delimiter, "tab, comma or a single character")->capture_default_str();
  sub->add_flag("--skip-malformed", o.skip_malformed, "skip bad lines instead of failing");
  sub->add_flag("--synth", o.synth, "generate the input from the synth-* params and the seed");
  add_synth_params(sub, o);
}

void add_spans(CLI::App* sub, Options& o) {
  sub->add_option("--tau-sus", o.tau_sus, "susceptible span in hours, or none")->capture_default_str();
  sub->add_option("--tau-fos", o.tau_fos, "forgettable span in hours, or none")->capture_default_str();
}

void add_sampling(CLI::App* sub, Options& o) {
  sub->add_option("--filter", o.filter, "activity filter such as R60 or H40, or none")->capture_default_str();
  sub->add_option("--rule", o.rule, "never_adopted or no_adoption_from_active")->capture_default_str();
  sub->add_flag("--filter-negatives", o.filter_negatives, "apply the filter to negative users too");
}

void add_features(CLI::App* sub, Options& o) {
  sub->add_option("--features", o.features, "comma list of feature names, or all")->capture_default_str();
  sub->add_option("--sigma-hours", o.sigma_hours, "CDI decay scale; estimated from the log when unset");
  sub->add_option("--gamma", o.gamma, "HUB threshold")->capture_default_str();
  sub->add_option("--mur-target", o.mur_target, "source or ego")->capture_default_str();
  sub->add_option("--clt-pairs", o.clt_pairs, "ordered or unordered")->capture_default_str();
  sub->add_option("--acc-edges", o.acc_edges, "any_topic or same_topic")->capture_default_str();
}

void add_learning(CLI::App* sub, Options& o) {
  sub->add_option("--classifier", o.classifier, "forest or logistic")->capture_default_str();
  sub->add_option("--trees", o.forest.n_trees)->capture_default_str();
  sub->add_option("--max-depth", o.forest.max_depth)->capture_default_str();
  sub->add_option("--mtry", o.forest.features_per_split, "features per split, 0 for sqrt(d)")->capture_default_str();
  sub->add_option("--min-samples-split", o.forest.min_samples_split)->capture_default_str();
  sub->add_flag("--bootstrap,!--no-bootstrap", o.forest.bootstrap)->capture_default_str();
  sub->add_option("--learning-rate", o.logistic.learning_rate)->capture_default_str();
  sub->add_option("--epochs", o.logistic.epochs)->capture_default_str();
  sub->add_option("--l2", o.logistic.l2)->capture_default_str();
  sub->add_flag("--standardize,!--no-standardize", o.logistic.standardize)->capture_default_str();
  sub->add_option("--split-ratio", o.split_ratio)->capture_default_str();
  sub->add_flag("--leakage-strict,!--no-leakage-strict", o.leakage_strict,
                "estimate sigma from the training period only")
      ->capture_default_str();
}

// `key = value` lines become `--key=value` arguments placed before the real
// ones. Keys the chosen subcommand does not know are skipped, so one file can
// serve several commands; keys no subcommand knows are errors.
std::vector<std::string> config_arguments(const std::string& path, const CLI::App& app, const CLI::App& sub) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path);
  std::vector<std::string> out;
  std::string line;
  std::size_t line_no = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(path + ":" + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    const std::string flag = "--" + key;
    if (sub.get_option_no_throw(flag)) {
      out.push_back(flag + "=" + value);
      continue;
    }
    bool known = false;
    for (const auto* other : app.get_subcommands({})) known = known || other->get_option_no_throw(flag) != nullptr;
    if (!known) throw ConfigError(path + ":" + std::to_string(line_no) + ": unknown key '" + key + "'");
  }
  return out;
}

} // namespace

int main(int argc, char** argv) {
  Options o;
  CLI::App app{"Time-constrained social influence toolkit", "tcinf"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::string config_path;

  std::map<std::string, int (*)(const Options&)> handlers{
      {"ingest", cmd_ingest},     {"synth", cmd_synth},           {"sample", cmd_sample},
      {"features", cmd_features}, {"sweep", cmd_sweep},           {"train-eval", cmd_train_eval},
      {"neighbors-debug", cmd_neighbors_debug}};
  std::map<std::string, CLI::App*> subs;
  auto make = [&](const std::string& name, const std::string& help) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key = value file; command-line flags win");
    add_common(sub, o);
    subs[name] = sub;
    return sub;
  };

  auto* ingest = make("ingest", "parse a log and report dataset statistics");
  add_input(ingest, o);

  auto* synth = make("synth", "generate a synthetic log with planted influence");
  add_synth_params(synth, o);

  auto* sample = make("sample", "draw the balanced positive/negative sample set");
  add_input(sample, o);
  add_spans(sample, o);
  add_sampling(sample, o);

  auto* features = make("features", "compute the feature table for a sample set");
  add_input(features, o);
  add_spans(features, o);
  add_sampling(features, o);
  add_features(features, o);

  auto* sweep = make("sweep", "correlation gain over the grid of time constraints");
  add_input(sweep, o);
  add_sampling(sweep, o);
  add_features(sweep, o);
  sweep->add_option("--taus", o.taus, "comma list of spans in hours")->capture_default_str();
  sweep->add_option("--baseline", o.baseline, "baseline cell 'sus,fos' in hours")->capture_default_str();
  sweep->add_option("--level", o.level, "curve or sample")->capture_default_str();
  sweep->add_option("--bins", o.bins, "bins for real-valued features")->capture_default_str();
  sweep->add_option("--min-support", o.min_support, "smallest group kept on a curve")->capture_default_str();

  auto* train = make("train-eval", "train and score classifiers with and without time constraints");
  add_input(train, o);
  add_spans(train, o);
  add_sampling(train, o);
  add_features(train, o);
  add_learning(train, o);

  auto* debug = make("neighbors-debug", "list the (active) neighbors of one user at one instant");
  add_input(debug, o);
  add_spans(debug, o);
  debug->add_option("--user", o.user)->required();
  debug->add_option("--topic", o.topic)->required();
  debug->add_option("--time", o.time, "unix seconds")->required();

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    // splice config-file arguments in front of the command-line ones
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
      if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
      else if (args[i].starts_with("--config=")) path = args[i].substr(9);
    }
    if (!path.empty() && !args.empty() && subs.contains(args.front())) {
      auto extra = config_arguments(path, app, *subs[args.front()]);
      args.insert(args.begin() + 1, extra.begin(), extra.end());
    }
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  }

  for (auto& [name, sub] : subs) {
    if (!sub->parsed()) continue;
    try {
      return handlers.at(name)(o);
    } catch (const ParseError& e) {
      std::cerr << "parse error: " << e.what() << "\n";
      return kParse;
    } catch (const ConfigError& e) {
      std::cerr << "config error: " << e.what() << "\n";
      return kConfig;
    } catch (const DegenerateDataError& e) {
      std::cerr << "degenerate data: " << e.what() << "\n";
      return kDegenerate;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kFailure;
    }
  }
  return kFailure;
}
