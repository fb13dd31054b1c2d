#include "report.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>

#include "checkpoint.hpp"
#include "text.hpp"

namespace credanno {

using nlohmann::json;

namespace {

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
  return buf;
}

std::string short_name(const std::string& name) {
  std::string s = name.substr(0, 3);
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

json summary_json(const Summary& s) { return json{{"mean", s.mean}, {"std", s.std}}; }

// Pads by displayed width; "±" is two bytes but one column.
std::string pad(const std::string& s, std::size_t width) {
  std::size_t shown = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++shown;
  return shown >= width ? s : std::string(width - shown, ' ') + s;
}

std::string table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> w(header.size(), 0);
  auto measure = [&](const std::vector<std::string>& r) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::size_t shown = 0;
      for (unsigned char c : r[i])
        if ((c & 0xC0) != 0x80) ++shown;
      w[i] = std::max(w[i], shown);
    }
  };
  measure(header);
  for (const auto& r : rows) measure(r);
  auto line = [&](const std::vector<std::string>& r) {
    std::string out;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) out += "  ";
      if (i == 0) {
        out += r[i] + std::string(w[i] - std::min(w[i], r[i].size()), ' ');
      } else {
        out += pad(r[i], w[i]);
      }
    }
    return out + "\n";
  };
  std::string out = line(header);
  for (const auto& r : rows) out += line(r);
  return out;
}

void write_seeds_csv(const std::filesystem::path& path, const RunResult& run, const Dataset& ds) {
  std::string out = "id,cluster,similarity\n";
  for (const auto& s : run.seeds) {
    out += ds.id(s.row) + ",";
    out += s.cluster ? std::to_string(*s.cluster) : "";
    out += ",";
    out += s.similarity ? text::format_double(*s.similarity) : "";
    out += "\n";
  }
  text::write_file(path, out);
}

void write_acquisition_csv(const std::filesystem::path& path, const StatusSnapshot& st, const Dataset& ds) {
  std::string out = "id,group,cls_confidence,integrated_entropy\n";
  for (const auto& a : st.acquisition)
    out += ds.id(a.row) + "," + to_string(a.group) + "," + text::format_double(a.cls_confidence) + "," +
           text::format_double(a.integrated_entropy) + "\n";
  text::write_file(path, out);
}

}  // namespace

std::string mean_std(const Summary& s, int decimals) { return fixed(s.mean, decimals) + "±" + fixed(s.std, decimals); }

json metrics_json(const MetricReport& m, const AttributeSchema& schema) {
  json attrs = json::object();
  json exact = json::object();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    attrs[schema[i].name] = m.per_attribute_accuracy[i];
    exact[schema[i].name] = m.per_attribute_exact_accuracy[i];
  }
  return json{{"samples", m.samples},
              {"malignancy_accuracy", m.malignancy_accuracy},
              {"attribute_accuracy_within_1", attrs},
              {"attribute_accuracy_exact", exact},
              {"k_correct_poisson_binomial", m.k_correct_probs},
              {"k_correct_empirical", m.k_correct_empirical}};
}

json run_report_json(const RunReport& r, const Dataset& dataset) {
  json statuses = json::array();
  for (const auto& s : r.statuses)
    statuses.push_back({{"status", "st" + std::to_string(s.status)},
                        {"resume_epoch", s.resume_epoch},
                        {"requested", s.n_requested},
                        {"pseudo", s.n_pseudo},
                        {"unused", s.n_unused},
                        {"test", metrics_json(s.test, dataset.schema())}});
  json quenches = json::array();
  for (const auto& q : r.quenches)
    quenches.push_back({{"index", q.index},
                        {"resume_epoch", q.resume_epoch},
                        {"weights_at_st0", q.weights_at_st0},
                        {"momentum_zero", q.momentum_zero},
                        {"pseudo_refreshed", q.pseudo_refreshed},
                        {"pseudo", q.n_pseudo}});
  return json{{"rng_seed", r.config.rng_seed},
              {"n_train", r.n_train},
              {"n_test", r.n_test},
              {"annotations", {{"seed", r.n_seed}, {"requested", r.n_requested}, {"oracle_reads", r.oracle_reads}}},
              {"final", metrics_json(r.final_metrics, dataset.schema())},
              {"statuses", statuses},
              {"quenches", quenches},
              {"notes", r.notes}};
}

json aggregate_json(const AggregateReport& a, const AttributeSchema& schema) {
  json attrs = json::object();
  for (std::size_t i = 0; i < a.attributes.size(); ++i) attrs[schema[i].name] = summary_json(a.attributes[i]);
  json k = json::array();
  for (const auto& s : a.k_correct) k.push_back(summary_json(s));
  return json{{"repeats", a.repeats},
              {"malignancy_accuracy", summary_json(a.malignancy)},
              {"attribute_accuracy_within_1", attrs},
              {"k_correct_poisson_binomial", k},
              {"seed_annotations", summary_json(a.n_seed)},
              {"requested_annotations", summary_json(a.n_requested)},
              {"oracle_reads", summary_json(a.oracle_reads)}};
}

json experiment_json(const ExperimentResult& e, const ExperimentConfig& cfg, const Dataset& dataset) {
  json runs = json::array();
  for (const auto& r : e.runs) runs.push_back(run_report_json(r.report, dataset));
  json config = json::object();
  for (const auto& key : config_keys()) config[key] = get_config_value(cfg, key);
  return json{{"kind", "experiment"},
              {"config", config},
              {"schema", dataset.schema().canonical()},
              {"aggregate", aggregate_json(e.aggregate, dataset.schema())},
              {"runs", runs}};
}

json ablation_json(const AblationTable& t) {
  json rows = json::array();
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    json cells = json::array();
    for (const auto& c : t.cells[r])
      cells.push_back({{"budget", c.budget},
                       {"malignancy_accuracy", summary_json(c.aggregate.malignancy)},
                       {"repeats", c.aggregate.repeats}});
    rows.push_back({{"seeding", to_string(row.seeding)},
                    {"strategy", row.strategy ? to_string(*row.strategy) : "none"},
                    {"pseudo_labels", to_string(row.pseudo)},
                    {"quenching", row.quenching},
                    {"cells", cells}});
  }
  return json{{"kind", "ablation"}, {"budgets", t.budgets}, {"rows", rows}};
}

std::string metrics_text(const MetricReport& m, const AttributeSchema& schema, const std::string& title) {
  std::vector<std::string> header{""};
  std::vector<std::string> row{title};
  for (std::size_t i = 0; i < schema.size(); ++i) {
    header.push_back(short_name(schema[i].name));
    row.push_back(fixed(m.per_attribute_accuracy[i], 2));
  }
  header.push_back("Malignancy");
  row.push_back(fixed(m.malignancy_accuracy, 2));
  std::string out = table(header, {row});
  out += "\nP(k attributes correct), Poisson-binomial | empirical\n";
  for (std::size_t k = 0; k < m.k_correct_probs.size(); ++k)
    out += "  k=" + std::to_string(k) + "  " + fixed(m.k_correct_probs[k], 4) + " | " +
           fixed(m.k_correct_empirical[k], 4) + "\n";
  return out;
}

std::string experiment_text(const ExperimentResult& e, const AttributeSchema& schema) {
  const auto& a = e.aggregate;
  std::vector<std::string> header{""};
  std::vector<std::string> row{"mean±std (" + std::to_string(a.repeats) + " repeats)"};
  for (std::size_t i = 0; i < schema.size(); ++i) {
    header.push_back(short_name(schema[i].name));
    row.push_back(mean_std(a.attributes[i]));
  }
  header.push_back("Malignancy");
  row.push_back(mean_std(a.malignancy));
  header.push_back("#seed");
  row.push_back(fixed(a.n_seed.mean, 1));
  header.push_back("#requested");
  row.push_back(fixed(a.n_requested.mean, 1));
  std::string out = "Prediction accuracy (%) on the test split; attributes within ±1 level\n\n";
  out += table(header, {row});
  out += "\nP(k attributes correct), Poisson-binomial over per-attribute accuracy\n";
  for (std::size_t k = 0; k < a.k_correct.size(); ++k)
    out += "  k=" + std::to_string(k) + "  " + mean_std(a.k_correct[k], 4) + "\n";
  return out;
}

std::string ablation_text(const AblationTable& t) {
  std::vector<std::string> header{"Seeding", "Acquisition", "Pseudo", "Quench"};
  for (double b : t.budgets) header.push_back("Malignancy (" + fixed(100.0 * b, 0) + "%)");
  std::vector<std::vector<std::string>> rows;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    std::vector<std::string> line{to_string(row.seeding), row.strategy ? to_string(*row.strategy) : "none",
                                  to_string(row.pseudo), row.quenching ? "yes" : "no"};
    for (const auto& c : t.cells[r]) line.push_back(mean_std(c.aggregate.malignancy));
    rows.push_back(std::move(line));
  }
  return "Ablation: malignancy accuracy (%) by annotation budget\n\n" + table(header, rows);
}

std::string experiment_csv(const ExperimentResult& e, const AttributeSchema& schema) {
  std::string out = "metric,mean,std\n";
  const auto& a = e.aggregate;
  out += "malignancy," + text::format_double(a.malignancy.mean) + "," + text::format_double(a.malignancy.std) + "\n";
  for (std::size_t i = 0; i < schema.size(); ++i)
    out += schema[i].name + "," + text::format_double(a.attributes[i].mean) + "," +
           text::format_double(a.attributes[i].std) + "\n";
  for (std::size_t k = 0; k < a.k_correct.size(); ++k)
    out += "p_k" + std::to_string(k) + "," + text::format_double(a.k_correct[k].mean) + "," +
           text::format_double(a.k_correct[k].std) + "\n";
  out += "seed_annotations," + text::format_double(a.n_seed.mean) + "," + text::format_double(a.n_seed.std) + "\n";
  out += "requested_annotations," + text::format_double(a.n_requested.mean) + "," +
         text::format_double(a.n_requested.std) + "\n";
  return out;
}

std::string ablation_csv(const AblationTable& t) {
  std::string out = "seeding,strategy,pseudo_labels,quenching,budget,malignancy_mean,malignancy_std,repeats\n";
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto& row = t.rows[r];
    for (const auto& c : t.cells[r])
      out += std::string(to_string(row.seeding)) + "," + (row.strategy ? to_string(*row.strategy) : "none") + "," +
             to_string(row.pseudo) + "," + (row.quenching ? "true" : "false") + "," + text::format_double(c.budget) +
             "," + text::format_double(c.aggregate.malignancy.mean) + "," +
             text::format_double(c.aggregate.malignancy.std) + "," + std::to_string(c.aggregate.repeats) + "\n";
  }
  return out;
}

void write_manifest(const std::filesystem::path& out_dir, const std::string& kind) {
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(out_dir)) {
    if (!entry.is_regular_file()) continue;
    auto rel = std::filesystem::relative(entry.path(), out_dir);
    if (rel == "run.log" || rel == "manifest.json") continue;
    files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  json list = json::array();
  for (const auto& f : files) {
    auto content = text::read_file(out_dir / f);
    list.push_back({{"path", f.generic_string()}, {"bytes", content.size()}, {"fnv1a64", text::hex64(text::fnv1a64(content))}});
  }
  text::write_file(out_dir / "manifest.json", json{{"kind", kind}, {"files", list}}.dump(2) + "\n");
}

void write_experiment(const std::filesystem::path& out_dir, const ExperimentConfig& cfg, const Dataset& dataset,
                      const ExperimentResult& result, double seconds) {
  std::filesystem::create_directories(out_dir);
  text::write_file(out_dir / "config.cfg", config_echo(cfg));
  text::write_file(out_dir / "report.json", experiment_json(result, cfg, dataset).dump(2) + "\n");
  text::write_file(out_dir / "report.csv", experiment_csv(result, dataset.schema()));
  text::write_file(out_dir / "report.txt", experiment_text(result, dataset.schema()));

  std::string log;
  for (std::size_t r = 0; r < result.runs.size(); ++r) {
    const auto& run = result.runs[r];
    char name[32];
    std::snprintf(name, sizeof(name), "repeat_%03zu", r);
    auto dir = out_dir / name;
    std::filesystem::create_directories(dir);
    write_seeds_csv(dir / "seeds.csv", run, dataset);
    for (const auto& st : run.report.statuses) {
      auto stem = "st" + std::to_string(st.status);
      if (!st.acquisition.empty()) write_acquisition_csv(dir / ("acquisition_" + stem + ".csv"), st, dataset);
      if (st.predictor) write_checkpoint(dir, stem, *st.predictor);
    }
    write_checkpoint(dir, "final", run.final_predictor);
    text::write_file(dir / "run.json", run_report_json(run.report, dataset).dump(2) + "\n");
    for (const auto& note : run.report.notes) log += std::string(name) + ": " + note + "\n";
  }
  log += "wall_seconds = " + fixed(seconds, 3) + "\n";
  text::write_file(out_dir / "run.log", log);
  write_manifest(out_dir, "experiment");
}

void write_ablation(const std::filesystem::path& out_dir, const ExperimentConfig& cfg, const AblationTable& table,
                    double seconds) {
  std::filesystem::create_directories(out_dir);
  text::write_file(out_dir / "config.cfg", config_echo(cfg));
  text::write_file(out_dir / "ablation.json", ablation_json(table).dump(2) + "\n");
  text::write_file(out_dir / "ablation.csv", ablation_csv(table));
  text::write_file(out_dir / "ablation.txt", ablation_text(table));
  text::write_file(out_dir / "run.log", "wall_seconds = " + fixed(seconds, 3) + "\n");
  write_manifest(out_dir, "ablation");
}

void write_evaluation(const std::filesystem::path& out_dir, const MetricReport& m, const AttributeSchema& schema,
                      const std::filesystem::path& checkpoint) {
  std::filesystem::create_directories(out_dir);
  json j = {{"kind", "evaluation"}, {"checkpoint", checkpoint.string()}, {"metrics", metrics_json(m, schema)}};
  text::write_file(out_dir / "eval.json", j.dump(2) + "\n");
  text::write_file(out_dir / "eval.txt", metrics_text(m, schema, "checkpoint"));
  write_manifest(out_dir, "evaluation");
}

}  // namespace credanno
