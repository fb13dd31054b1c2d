#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "cli_args.hpp"
#include "credanno/credanno.h"

namespace {

using namespace credanno::cli;

int report_failure(const char* what, cra_status status) {
  std::fprintf(stderr, "credanno: %s: %s: %s\n", what, cra_status_name(status), cra_last_error());
  return status == CRA_E_CONFIG ? kExitUsage : kExitRuntime;
}

void print_and_free(char* s) {
  if (!s) return;
  std::fputs(s, stdout);
  cra_string_free(s);
}

int print_report(cra_report* report) {
  char* text = nullptr;
  if (cra_report_render(report, CRA_FORMAT_TEXT, &text) == CRA_OK) print_and_free(text);
  char* notes = nullptr;
  if (cra_report_notes(report, &notes) == CRA_OK && notes) {
    if (*notes) std::fprintf(stderr, "%s", notes);
    cra_string_free(notes);
  }
  cra_report_free(report);
  return kExitOk;
}

// Config echo next to the generated files, so the dataset can be regenerated.
bool save_echo(const cra_config* cfg, const char* dir) {
  char* echo = nullptr;
  if (cra_config_echo(cfg, &echo) != CRA_OK) return false;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  std::ofstream f(std::filesystem::path(dir) / "config.cfg", std::ios::binary);
  f << echo;
  cra_string_free(echo);
  return static_cast<bool>(f);
}

int run(const CliInvocation& inv) {
  std::vector<std::string> kv = inv.overrides;
  if (!inv.checkpoint.empty()) kv.push_back("checkpoint=" + inv.checkpoint);  // --checkpoint beats --set
  std::vector<const char*> overrides;
  for (const auto& o : kv) overrides.push_back(o.c_str());

  cra_config* cfg = nullptr;
  if (auto st = cra_config_load_overrides(inv.config_path.c_str(), overrides.data(), overrides.size(), &cfg); st != CRA_OK)
    return std::fprintf(stderr, "credanno: config: %s\n", cra_last_error()), kExitUsage;

  cra_dataset* ds = nullptr;
  if (auto st = cra_dataset_from_config(cfg, &ds); st != CRA_OK) {
    cra_config_free(cfg);
    return report_failure("dataset", st);
  }

  int code = kExitOk;
  const char* out = inv.output_dir.c_str();
  if (inv.subcommand == "synth") {
    if (!save_echo(cfg, out)) {
      std::fprintf(stderr, "credanno: synth: cannot write %s/config.cfg\n", out);
      code = kExitRuntime;
    } else if (auto st = cra_dataset_write(ds, out); st != CRA_OK) {
      code = report_failure("synth", st);
    } else {
      size_t n_train = 0, n_test = 0, dim = 0, m = 0;
      cra_dataset_shape(ds, &n_train, &n_test, &dim, &m);
      std::printf("wrote %zu train + %zu test samples (D=%zu, %zu attributes) to %s\n", n_train, n_test, dim, m, out);
    }
  } else if (inv.subcommand == "train" || inv.subcommand == "ablate") {
    cra_report* report = nullptr;
    auto st = inv.subcommand == "train" ? cra_train(cfg, ds, out, &report) : cra_ablate(cfg, ds, out, &report);
    if (st != CRA_OK)
      code = report_failure(inv.subcommand.c_str(), st);
    else
      code = print_report(report);
  } else if (inv.subcommand == "eval") {
    char* path = nullptr;
    cra_config_get(cfg, "checkpoint", &path);
    std::string checkpoint = path ? path : "";
    cra_string_free(path);
    cra_predictor* pred = nullptr;
    cra_report* report = nullptr;
    if (checkpoint.empty()) {
      std::fprintf(stderr, "credanno: eval needs --checkpoint or a 'checkpoint' config key\n");
      code = kExitUsage;
    } else if (auto st = cra_predictor_load(checkpoint.c_str(), &pred); st != CRA_OK) {
      code = report_failure("checkpoint", st);
    } else if (auto st2 = cra_predictor_evaluate(pred, ds, out, &report); st2 != CRA_OK) {
      code = report_failure("eval", st2);
    } else {
      code = print_report(report);
    }
    cra_predictor_free(pred);
  }
  cra_dataset_free(ds);
  cra_config_free(cfg);
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CliInvocation inv;
  try {
    inv = parse_cli(argc, argv);
  } catch (const UsageError& e) {
    std::fprintf(stderr, "credanno: %s\nusage: credanno {synth|train|eval|ablate} --config FILE [--set key=value]... "
                         "[--out DIR]\n", e.what());
    return kExitUsage;
  }
  if (inv.help) {
    std::fputs(inv.help_text.c_str(), stdout);
    return kExitOk;
  }
  return run(inv);
}
