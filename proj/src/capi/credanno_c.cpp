#include "credanno/credanno.h"

#include <chrono>
#include <cstdlib>
#include <cstring>
#include <new>
#include <string>
#include <utility>
#include <vector>

#include "ablation.hpp"
#include "checkpoint.hpp"
#include "config.hpp"
#include "error.hpp"
#include "eval.hpp"
#include "report.hpp"
#include "text.hpp"
#include "trainer.hpp"

struct cra_config {
  credanno::ExperimentConfig cfg;
};

struct cra_dataset {
  credanno::Dataset ds;
};

struct cra_predictor {
  credanno::HierarchicalPredictor pred;
  std::string source;
};

struct cra_report {
  std::string json;
  std::string text;
  std::string csv;
  std::string notes;
  credanno::Summary malignancy;
};

namespace {

thread_local std::string last_error;

cra_status to_status(credanno::ErrorKind kind) {
  switch (kind) {
    case credanno::ErrorKind::InvalidArgument:
      return CRA_E_INVALID_ARGUMENT;
    case credanno::ErrorKind::Io:
      return CRA_E_IO;
    case credanno::ErrorKind::Format:
      return CRA_E_FORMAT;
    case credanno::ErrorKind::Config:
      return CRA_E_CONFIG;
    case credanno::ErrorKind::Runtime:
      return CRA_E_RUNTIME;
  }
  return CRA_E_RUNTIME;
}

cra_status set_error(cra_status status, const std::string& what) {
  last_error = what;
  return status;
}

// Runs `fn`, translating exceptions into status codes.
template <class Fn>
cra_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return CRA_OK;
  } catch (const credanno::Error& e) {
    return set_error(to_status(e.kind()), e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return set_error(CRA_E_IO, e.what());
  } catch (const std::bad_alloc&) {
    return set_error(CRA_E_RUNTIME, "out of memory");
  } catch (const std::exception& e) {
    return set_error(CRA_E_RUNTIME, e.what());
  } catch (...) {
    return set_error(CRA_E_RUNTIME, "unknown error");
  }
}

char* dup(const std::string& s) {
  auto* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

#define CRA_REQUIRE(cond, msg) \
  do {                         \
    if (!(cond)) return set_error(CRA_E_INVALID_ARGUMENT, msg); \
  } while (0)

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

extern "C" {

const char* cra_version(void) { return "1.0.0"; }

const char* cra_last_error(void) { return last_error.c_str(); }

const char* cra_status_name(cra_status status) {
  switch (status) {
    case CRA_OK:
      return "CRA_OK";
    case CRA_E_INVALID_ARGUMENT:
      return "CRA_E_INVALID_ARGUMENT";
    case CRA_E_IO:
      return "CRA_E_IO";
    case CRA_E_FORMAT:
      return "CRA_E_FORMAT";
    case CRA_E_CONFIG:
      return "CRA_E_CONFIG";
    case CRA_E_RUNTIME:
      return "CRA_E_RUNTIME";
  }
  return "unknown";
}

void cra_string_free(char* s) { std::free(s); }

cra_status cra_config_new(cra_config** out) {
  CRA_REQUIRE(out, "null output handle");
  return guarded([&] { *out = new cra_config{}; });
}

cra_status cra_config_load(const char* path, cra_config** out) {
  CRA_REQUIRE(path && out, "null argument");
  return guarded([&] { *out = new cra_config{credanno::load_config(path)}; });
}

cra_status cra_config_load_overrides(const char* path, const char* const* overrides, size_t n_overrides,
                                     cra_config** out) {
  CRA_REQUIRE(path && out, "null argument");
  CRA_REQUIRE(n_overrides == 0 || overrides, "null override list");
  return guarded([&] {
    std::vector<std::pair<std::string, std::string>> kv;
    for (size_t i = 0; i < n_overrides; ++i) {
      std::string s = overrides[i] ? overrides[i] : "";
      auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0)
        throw credanno::Error(credanno::ErrorKind::Config, "malformed override '" + s + "' (expected key=value)");
      kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    *out = new cra_config{credanno::load_config(path, kv)};
  });
}

cra_status cra_config_set(cra_config* cfg, const char* key, const char* value) {
  CRA_REQUIRE(cfg && key && value, "null argument");
  return guarded([&] { credanno::set_config_value(cfg->cfg, key, value); });
}

cra_status cra_config_get(const cra_config* cfg, const char* key, char** value) {
  CRA_REQUIRE(cfg && key && value, "null argument");
  return guarded([&] { *value = dup(credanno::get_config_value(cfg->cfg, key)); });
}

cra_status cra_config_validate(const cra_config* cfg) {
  CRA_REQUIRE(cfg, "null config");
  return guarded([&] { cfg->cfg.validate(); });
}

cra_status cra_config_echo(const cra_config* cfg, char** text) {
  CRA_REQUIRE(cfg && text, "null argument");
  return guarded([&] { *text = dup(credanno::config_echo(cfg->cfg)); });
}

void cra_config_free(cra_config* cfg) { delete cfg; }

cra_status cra_dataset_from_config(const cra_config* cfg, cra_dataset** out) {
  CRA_REQUIRE(cfg && out, "null argument");
  return guarded([&] { *out = new cra_dataset{credanno::load_configured_dataset(cfg->cfg)}; });
}

cra_status cra_dataset_write(const cra_dataset* ds, const char* dir) {
  CRA_REQUIRE(ds && dir, "null argument");
  return guarded([&] {
    credanno::write_dataset(dir, ds->ds);
    credanno::write_manifest(dir, "dataset");
  });
}

cra_status cra_dataset_shape(const cra_dataset* ds, size_t* n_train, size_t* n_test, size_t* dim,
                             size_t* n_attributes) {
  CRA_REQUIRE(ds, "null dataset");
  if (n_train) *n_train = ds->ds.train_rows().size();
  if (n_test) *n_test = ds->ds.test_rows().size();
  if (dim) *dim = ds->ds.dim();
  if (n_attributes) *n_attributes = ds->ds.schema().size();
  return CRA_OK;
}

void cra_dataset_free(cra_dataset* ds) { delete ds; }

cra_status cra_train(const cra_config* cfg, const cra_dataset* ds, const char* out_dir, cra_report** out) {
  CRA_REQUIRE(cfg && ds, "null argument");
  return guarded([&] {
    cfg->cfg.validate();
    auto t0 = std::chrono::steady_clock::now();
    credanno::TrainOptions opts;
    opts.keep_artifacts = out_dir != nullptr;
    auto result = credanno::run_experiment(ds->ds, cfg->cfg.run, cfg->cfg.n_repeats, cfg->cfg.parallel_repeats, opts);
    if (out_dir) credanno::write_experiment(out_dir, cfg->cfg, ds->ds, result, seconds_since(t0));
    if (out) {
      auto* r = new cra_report;
      r->json = credanno::experiment_json(result, cfg->cfg, ds->ds).dump(2);
      r->text = credanno::experiment_text(result, ds->ds.schema());
      r->csv = credanno::experiment_csv(result, ds->ds.schema());
      for (std::size_t i = 0; i < result.runs.size(); ++i)
        for (const auto& n : result.runs[i].report.notes) r->notes += "repeat " + std::to_string(i) + ": " + n + "\n";
      r->malignancy = result.aggregate.malignancy;
      *out = r;
    }
  });
}

cra_status cra_ablate(const cra_config* cfg, const cra_dataset* ds, const char* out_dir, cra_report** out) {
  CRA_REQUIRE(cfg && ds, "null argument");
  return guarded([&] {
    cfg->cfg.validate();
    auto t0 = std::chrono::steady_clock::now();
    auto table = credanno::run_ablation(ds->ds, cfg->cfg.run, credanno::default_ablation_grid(),
                                        cfg->cfg.ablation_budgets, cfg->cfg.n_repeats, cfg->cfg.parallel_repeats);
    if (out_dir) credanno::write_ablation(out_dir, cfg->cfg, table, seconds_since(t0));
    if (out) {
      auto* r = new cra_report;
      r->json = credanno::ablation_json(table).dump(2);
      r->text = credanno::ablation_text(table);
      r->csv = credanno::ablation_csv(table);
      // headline: the full mechanism at the first budget
      r->malignancy = table.cells.back().front().aggregate.malignancy;
      *out = r;
    }
  });
}

cra_status cra_predictor_load(const char* path, cra_predictor** out) {
  CRA_REQUIRE(path && out, "null argument");
  return guarded([&] { *out = new cra_predictor{credanno::load_checkpoint(path), path}; });
}

cra_status cra_predictor_dims(const cra_predictor* p, size_t* dim, size_t* n_attributes) {
  CRA_REQUIRE(p, "null predictor");
  if (dim) *dim = p->pred.dim();
  if (n_attributes) *n_attributes = p->pred.schema().size();
  return CRA_OK;
}

cra_status cra_predictor_predict(const cra_predictor* p, const double* features, size_t dim, int* malignancy,
                                 double* confidence, int* attribute_labels, size_t n_attributes) {
  CRA_REQUIRE(p && features, "null argument");
  CRA_REQUIRE(dim == p->pred.dim(), "feature length does not match the predictor");
  CRA_REQUIRE(n_attributes == p->pred.schema().size(), "attribute count does not match the predictor");
  CRA_REQUIRE(n_attributes == 0 || attribute_labels, "null attribute buffer");
  return guarded([&] {
    auto b = p->pred.forward(std::span<const double>(features, dim));
    if (malignancy) *malignancy = b.malignancy();
    if (confidence) *confidence = b.cls_confidence;
    auto labels = b.attribute_labels();
    for (std::size_t i = 0; i < n_attributes; ++i) attribute_labels[i] = labels[i];
  });
}

cra_status cra_predictor_evaluate(const cra_predictor* p, const cra_dataset* ds, const char* out_dir,
                                  cra_report** out) {
  CRA_REQUIRE(p && ds, "null argument");
  return guarded([&] {
    if (p->pred.dim() != ds->ds.dim())
      throw credanno::Error(credanno::ErrorKind::InvalidArgument, "checkpoint dimension does not match the dataset");
    auto m = credanno::evaluate(p->pred, ds->ds);
    if (out_dir) credanno::write_evaluation(out_dir, m, ds->ds.schema(), p->source);
    if (out) {
      auto* r = new cra_report;
      r->json = nlohmann::json{{"kind", "evaluation"}, {"metrics", credanno::metrics_json(m, ds->ds.schema())}}.dump(2);
      r->text = credanno::metrics_text(m, ds->ds.schema(), "checkpoint");
      r->csv = "metric,value\nmalignancy," + credanno::text::format_double(m.malignancy_accuracy) + "\n";
      for (std::size_t i = 0; i < m.per_attribute_accuracy.size(); ++i)
        r->csv += ds->ds.schema()[i].name + "," + credanno::text::format_double(m.per_attribute_accuracy[i]) + "\n";
      r->malignancy = {m.malignancy_accuracy, 0.0};
      *out = r;
    }
  });
}

void cra_predictor_free(cra_predictor* p) { delete p; }

cra_status cra_report_render(const cra_report* r, cra_format format, char** out) {
  CRA_REQUIRE(r && out, "null argument");
  return guarded([&] {
    switch (format) {
      case CRA_FORMAT_JSON:
        *out = dup(r->json);
        return;
      case CRA_FORMAT_TEXT:
        *out = dup(r->text);
        return;
      case CRA_FORMAT_CSV:
        *out = dup(r->csv);
        return;
    }
    throw credanno::Error(credanno::ErrorKind::InvalidArgument, "unknown report format");
  });
}

cra_status cra_report_malignancy(const cra_report* r, double* mean, double* std) {
  CRA_REQUIRE(r, "null report");
  if (mean) *mean = r->malignancy.mean;
  if (std) *std = r->malignancy.std;
  return CRA_OK;
}

cra_status cra_report_notes(const cra_report* r, char** out) {
  CRA_REQUIRE(r && out, "null argument");
  return guarded([&] { *out = dup(r->notes); });
}

void cra_report_free(cra_report* r) { delete r; }

}  // extern "C"
