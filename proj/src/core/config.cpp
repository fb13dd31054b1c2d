#include "config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "checkpoint.hpp"
#include "error.hpp"
#include "text.hpp"

namespace credanno {

const char* to_string(SeedingMode m) { return m == SeedingMode::Sparse ? "sparse" : "random"; }

const char* to_string(PseudoMode m) {
  switch (m) {
    case PseudoMode::Dynamic:
      return "dynamic";
    case PseudoMode::Static:
      return "static";
    case PseudoMode::Off:
      return "off";
  }
  return "dynamic";
}

const char* to_string(ScheduleMode m) { return m == ScheduleMode::Restart ? "restart" : "full_span"; }

void RunConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorKind::Config, what); };
  if (!(seed_fraction > 0.0 && seed_fraction <= 1.0)) bad("seed_fraction must lie in (0, 1]");
  if (!(request_fraction >= 0.0 && request_fraction < 1.0)) bad("request_fraction must lie in [0, 1)");
  if (seed_fraction + request_fraction > 1.0 + 1e-12) bad("seed_fraction + request_fraction must not exceed 1");
  if (seed_epochs < 1) bad("seed_epochs must be >= 1");
  if (resume_epochs < 0) bad("resume_epochs must be >= 0");
  if (quench_period < 1) bad("quench_period must be >= 1");
  if (!(confidence_threshold >= 0.5 && confidence_threshold <= 1.0)) bad("confidence_threshold must lie in [0.5, 1]");
  if (batch_size < 1) bad("batch_size must be >= 1");
  if (!(momentum >= 0.0 && momentum < 1.0)) bad("momentum must lie in [0, 1)");
  if (!(base_lr >= 0.0) || !std::isfinite(base_lr)) bad("base_lr must be finite and >= 0");
  if (kmeans.restarts < 1) bad("kmeans_restarts must be >= 1");
  if (kmeans.max_iterations < 1) bad("kmeans_max_iter must be >= 1");
  if (acquisition_rounds < 1) bad("acquisition_rounds must be >= 1");
}

void ExperimentConfig::validate() const {
  run.validate();
  if (n_repeats < 1) fail(ErrorKind::Config, "n_repeats must be >= 1");
  if (parallel_repeats < 1) fail(ErrorKind::Config, "parallel_repeats must be >= 1");
  if (ablation_budgets.empty()) fail(ErrorKind::Config, "ablation_budgets must list at least one fraction");
  for (double b : ablation_budgets)
    if (!(b > 0.0 && b <= 1.0)) fail(ErrorKind::Config, "ablation_budgets entries must lie in (0, 1]");
  if (data.synthetic()) {
    synth.validate();
  } else if (data.annotations.empty() || data.split.empty()) {
    fail(ErrorKind::Config, "features, annotations and split must be given together");
  }
}

namespace {

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  if (!text::parse_double(v, out) || !std::isfinite(out))
    fail(ErrorKind::Config, key + ": expected a number, got '" + v + "'");
  return out;
}

long long to_int(const std::string& key, const std::string& v, long long lo, long long hi) {
  long long out = 0;
  if (!text::parse_int(v, out)) fail(ErrorKind::Config, key + ": expected an integer, got '" + v + "'");
  if (out < lo || out > hi) fail(ErrorKind::Config, key + ": value " + v + " out of range");
  return out;
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
  std::uint64_t out = 0;
  auto t = text::trim(v);
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), out);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size())
    fail(ErrorKind::Config, key + ": expected a non-negative integer, got '" + v + "'");
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  fail(ErrorKind::Config, key + ": expected true or false, got '" + v + "'");
}

std::string fmt(double v) { return text::format_double(v); }
std::string fmt_bool(bool b) { return b ? "true" : "false"; }

struct Key {
  std::function<void(ExperimentConfig&, const std::string&)> set;
  std::function<std::string(const ExperimentConfig&)> get;
};

using KeyTable = std::vector<std::pair<std::string, Key>>;

const KeyTable& key_table() {
  static const KeyTable table = [] {
    KeyTable t;
    auto num = [&t](const std::string& name, auto member) {
      t.push_back({name,
                   {[name, member](ExperimentConfig& c, const std::string& v) { member(c) = to_double(name, v); },
                    [member](const ExperimentConfig& c) { return fmt(member(const_cast<ExperimentConfig&>(c))); }}});
    };
    auto integer = [&t](const std::string& name, auto member, long long lo, long long hi) {
      t.push_back({name,
                   {[=](ExperimentConfig& c, const std::string& v) {
                      member(c) = static_cast<std::remove_reference_t<decltype(member(c))>>(to_int(name, v, lo, hi));
                    },
                    [member](const ExperimentConfig& c) {
                      return std::to_string(member(const_cast<ExperimentConfig&>(c)));
                    }}});
    };
    auto path = [&t](const std::string& name, auto member) {
      t.push_back({name,
                   {[member](ExperimentConfig& c, const std::string& v) { member(c) = v; },
                    [member](const ExperimentConfig& c) { return member(const_cast<ExperimentConfig&>(c)).string(); }}});
    };
    constexpr long long big = 1'000'000'000;

    num("seed_fraction", [](ExperimentConfig& c) -> double& { return c.run.seed_fraction; });
    num("request_fraction", [](ExperimentConfig& c) -> double& { return c.run.request_fraction; });
    integer("seed_epochs", [](ExperimentConfig& c) -> int& { return c.run.seed_epochs; }, 0, big);
    integer("resume_epochs", [](ExperimentConfig& c) -> int& { return c.run.resume_epochs; }, 0, big);
    integer("quench_period", [](ExperimentConfig& c) -> int& { return c.run.quench_period; }, 0, big);
    num("confidence_threshold", [](ExperimentConfig& c) -> double& { return c.run.confidence_threshold; });
    t.push_back({"strategy",
                 {[](ExperimentConfig& c, const std::string& v) { c.run.strategy = parse_strategy(v); },
                  [](const ExperimentConfig& c) { return std::string(to_string(c.run.strategy)); }}});
    integer("batch_size", [](ExperimentConfig& c) -> int& { return c.run.batch_size; }, 0, big);
    num("momentum", [](ExperimentConfig& c) -> double& { return c.run.momentum; });
    num("base_lr", [](ExperimentConfig& c) -> double& { return c.run.base_lr; });
    t.push_back({"rng_seed",
                 {[](ExperimentConfig& c, const std::string& v) { c.run.rng_seed = to_u64("rng_seed", v); },
                  [](const ExperimentConfig& c) { return std::to_string(c.run.rng_seed); }}});
    t.push_back({"seeding",
                 {[](ExperimentConfig& c, const std::string& v) {
                    if (v == "sparse")
                      c.run.seeding = SeedingMode::Sparse;
                    else if (v == "random")
                      c.run.seeding = SeedingMode::Random;
                    else
                      fail(ErrorKind::Config, "seeding must be sparse or random (got '" + v + "')");
                  },
                  [](const ExperimentConfig& c) { return std::string(to_string(c.run.seeding)); }}});
    t.push_back({"pseudo_labels",
                 {[](ExperimentConfig& c, const std::string& v) {
                    if (v == "dynamic")
                      c.run.pseudo_labels = PseudoMode::Dynamic;
                    else if (v == "static")
                      c.run.pseudo_labels = PseudoMode::Static;
                    else if (v == "off")
                      c.run.pseudo_labels = PseudoMode::Off;
                    else
                      fail(ErrorKind::Config, "pseudo_labels must be dynamic, static or off (got '" + v + "')");
                  },
                  [](const ExperimentConfig& c) { return std::string(to_string(c.run.pseudo_labels)); }}});
    t.push_back({"quenching",
                 {[](ExperimentConfig& c, const std::string& v) { c.run.quenching = to_bool("quenching", v); },
                  [](const ExperimentConfig& c) { return fmt_bool(c.run.quenching); }}});
    t.push_back({"schedule",
                 {[](ExperimentConfig& c, const std::string& v) {
                    if (v == "restart")
                      c.run.schedule = ScheduleMode::Restart;
                    else if (v == "full_span")
                      c.run.schedule = ScheduleMode::FullSpan;
                    else
                      fail(ErrorKind::Config, "schedule must be restart or full_span (got '" + v + "')");
                  },
                  [](const ExperimentConfig& c) { return std::string(to_string(c.run.schedule)); }}});
    t.push_back({"attr_feed",
                 {[](ExperimentConfig& c, const std::string& v) { c.run.predictor.feed = parse_attr_feed(v); },
                  [](const ExperimentConfig& c) { return std::string(to_string(c.run.predictor.feed)); }}});
    t.push_back({"joint_backprop",
                 {[](ExperimentConfig& c, const std::string& v) {
                    c.run.predictor.joint_backprop = to_bool("joint_backprop", v);
                  },
                  [](const ExperimentConfig& c) { return fmt_bool(c.run.predictor.joint_backprop); }}});
    t.push_back({"seed_candidates",
                 {[](ExperimentConfig& c, const std::string& v) {
                    if (v == "cluster")
                      c.run.seed_within_cluster = true;
                    else if (v == "global")
                      c.run.seed_within_cluster = false;
                    else
                      fail(ErrorKind::Config, "seed_candidates must be cluster or global (got '" + v + "')");
                  },
                  [](const ExperimentConfig& c) { return std::string(c.run.seed_within_cluster ? "cluster" : "global"); }}});
    integer("kmeans_restarts", [](ExperimentConfig& c) -> int& { return c.run.kmeans.restarts; }, 0, big);
    integer("kmeans_max_iter", [](ExperimentConfig& c) -> int& { return c.run.kmeans.max_iterations; }, 0, big);
    integer("acquisition_rounds", [](ExperimentConfig& c) -> int& { return c.run.acquisition_rounds; }, 0, big);
    integer("n_repeats", [](ExperimentConfig& c) -> int& { return c.n_repeats; }, 0, big);
    integer("parallel_repeats", [](ExperimentConfig& c) -> int& { return c.parallel_repeats; }, 0, 1024);
    t.push_back({"ablation_budgets",
                 {[](ExperimentConfig& c, const std::string& v) {
                    c.ablation_budgets.clear();
                    for (auto part : text::split(v, ','))
                      c.ablation_budgets.push_back(to_double("ablation_budgets", std::string(text::trim(part))));
                  },
                  [](const ExperimentConfig& c) {
                    std::string out;
                    for (std::size_t i = 0; i < c.ablation_budgets.size(); ++i)
                      out += (i ? "," : "") + fmt(c.ablation_budgets[i]);
                    return out;
                  }}});
    path("features", [](ExperimentConfig& c) -> std::filesystem::path& { return c.data.features; });
    path("annotations", [](ExperimentConfig& c) -> std::filesystem::path& { return c.data.annotations; });
    path("split", [](ExperimentConfig& c) -> std::filesystem::path& { return c.data.split; });
    path("schema", [](ExperimentConfig& c) -> std::filesystem::path& { return c.data.schema; });
    path("checkpoint", [](ExperimentConfig& c) -> std::filesystem::path& { return c.checkpoint; });
    integer("synth_n_train", [](ExperimentConfig& c) -> int& { return c.synth.n_train; }, 0, big);
    integer("synth_n_test", [](ExperimentConfig& c) -> int& { return c.synth.n_test; }, 0, big);
    integer("synth_dim", [](ExperimentConfig& c) -> int& { return c.synth.dim; }, 0, 1'000'000);
    integer("synth_modes", [](ExperimentConfig& c) -> int& { return c.synth.n_modes; }, 0, 1'000'000);
    num("synth_separation", [](ExperimentConfig& c) -> double& { return c.synth.mode_separation; });
    num("synth_flip", [](ExperimentConfig& c) -> double& { return c.synth.attr_flip_prob; });
    t.push_back({"synth_seed",
                 {[](ExperimentConfig& c, const std::string& v) { c.synth.rng_seed = to_u64("synth_seed", v); },
                  [](const ExperimentConfig& c) { return std::to_string(c.synth.rng_seed); }}});
    return t;
  }();
  return table;
}

const Key& find_key(const std::string& key) {
  for (const auto& [name, k] : key_table())
    if (name == key) return k;
  fail(ErrorKind::Config, "unknown config key '" + key + "'");
}

}  // namespace

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  find_key(key).set(cfg, std::string(text::trim(value)));
}

std::string get_config_value(const ExperimentConfig& cfg, const std::string& key) { return find_key(key).get(cfg); }

const std::vector<std::string>& config_keys() {
  static const std::vector<std::string> keys = [] {
    std::vector<std::string> k;
    for (const auto& [name, _] : key_table()) k.push_back(name);
    return k;
  }();
  return keys;
}

ExperimentConfig parse_config(const std::string& content,
                              const std::vector<std::pair<std::string, std::string>>& overrides) {
  ExperimentConfig cfg;
  std::istringstream in(content);
  std::string raw;
  std::size_t number = 0;
  while (std::getline(in, raw)) {
    ++number;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = text::trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorKind::Config, "line " + std::to_string(number) + ": expected 'key = value'");
    set_config_value(cfg, std::string(text::trim(line.substr(0, eq))), std::string(text::trim(line.substr(eq + 1))));
  }
  for (const auto& [k, v] : overrides) set_config_value(cfg, k, v);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             const std::vector<std::pair<std::string, std::string>>& overrides) {
  std::string content;
  try {
    content = text::read_file(path);
  } catch (const Error& e) {
    fail(ErrorKind::Config, std::string("config: ") + e.what());
  }
  return parse_config(content, overrides);
}

std::string config_echo(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& [name, k] : key_table()) out += name + " = " + k.get(cfg) + "\n";
  return out;
}

Dataset load_configured_dataset(const ExperimentConfig& cfg) {
  cfg.validate();
  AttributeSchema schema = cfg.data.schema.empty() ? AttributeSchema::lidc_default() : load_schema(cfg.data.schema);
  if (cfg.data.synthetic()) {
    SynthConfig synth = cfg.synth;
    synth.schema = schema;
    return generate_synthetic(synth).dataset;
  }
  return load_dataset(cfg.data.features, cfg.data.annotations, cfg.data.split, schema);
}

std::size_t budget_count(double fraction, std::size_t n) {
  if (fraction <= 0.0) return 0;
  double x = fraction * static_cast<double>(n);
  auto c = static_cast<std::size_t>(std::ceil(x - 1e-9));
  return std::min(c, n);
}

}  // namespace credanno
