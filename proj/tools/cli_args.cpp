#include "cli_args.hpp"

#include <cstdlib>

#include "CLI11.hpp"

namespace credanno::cli {

CliInvocation parse_cli(int argc, const char* const* argv) {
  CliInvocation inv;
  CLI::App app{"Annotation-efficient training of hierarchical predictors on feature embeddings", "credanno"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "Show help for every subcommand");

  struct Sub {
    const char* name;
    const char* description;
  };
  const Sub subs[] = {
      {"synth", "Generate a synthetic embedding dataset (features/annotations/split CSVs)"},
      {"train", "Run one experiment (n_repeats seeded repeats) and write the run directory"},
      {"eval", "Score a checkpoint on the test split"},
      {"ablate", "Run the component ablation grid"},
  };
  std::string out;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.description);
    sub->add_option("-c,--config", inv.config_path, "Flat key = value config file")->required();
    sub->add_option("-s,--set", inv.overrides, "Override a config key (key=value); repeatable")
        ->allow_extra_args(false)
        ->take_all();
    sub->add_option("-o,--out", out, "Output directory");
    if (std::string(s.name) == "eval") sub->add_option("--checkpoint", inv.checkpoint, "Checkpoint manifest (.json)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    inv.help = true;
    inv.help_text = app.help();
    return inv;
  } catch (const CLI::CallForAllHelp&) {
    inv.help = true;
    inv.help_text = app.help("", CLI::AppFormatMode::All);
    return inv;
  } catch (const CLI::ParseError& e) {
    throw UsageError(e.what());
  }

  for (auto* sub : app.get_subcommands()) inv.subcommand = sub->get_name();
  for (const auto& o : inv.overrides) {
    auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("malformed override '" + o + "' (expected key=value)");
  }
  if (!out.empty())
    inv.output_dir = out;
  else if (const char* env = std::getenv(kOutputDirEnv); env && *env)
    inv.output_dir = env;
  else
    inv.output_dir = "credanno_out";
  return inv;
}

}  // namespace credanno::cli
