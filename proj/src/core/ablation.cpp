#include "ablation.hpp"

#include <algorithm>

namespace credanno {

std::string AblationRow::label() const {
  std::string s = to_string(seeding);
  s += " / ";
  s += strategy ? to_string(*strategy) : "none";
  s += " / ";
  s += to_string(pseudo);
  s += quenching ? " / quench" : " / no-quench";
  return s;
}

std::vector<AblationRow> default_ablation_grid() {
  return {
      {SeedingMode::Random, std::nullopt, PseudoMode::Off, false},
      {SeedingMode::Random, Strategy::LeastConfidence, PseudoMode::Dynamic, true},
      {SeedingMode::Sparse, Strategy::IntegratedEntropy, PseudoMode::Dynamic, true},
      {SeedingMode::Sparse, Strategy::LeastConfidence, PseudoMode::Static, false},
      {SeedingMode::Sparse, Strategy::LeastConfidence, PseudoMode::Dynamic, true},
  };
}

RunConfig ablation_cell_config(const RunConfig& base, const AblationRow& row, double budget) {
  RunConfig c = base;
  c.seeding = row.seeding;
  c.pseudo_labels = row.pseudo;
  c.quenching = row.quenching;
  if (row.strategy) {
    c.strategy = *row.strategy;
    c.seed_fraction = std::min(base.seed_fraction, budget);
    c.request_fraction = std::max(0.0, budget - c.seed_fraction);
  } else {
    c.seed_fraction = budget;
    c.request_fraction = 0.0;
  }
  return c;
}

AblationTable run_ablation(const Dataset& dataset, const RunConfig& base, const std::vector<AblationRow>& grid,
                           const std::vector<double>& budgets, int n_repeats, int parallel) {
  AblationTable t;
  t.rows = grid;
  t.budgets = budgets;
  for (const auto& row : grid) {
    std::vector<AblationCell> line;
    for (double b : budgets) {
      auto result = run_experiment(dataset, ablation_cell_config(base, row, b), n_repeats, parallel);
      line.push_back({b, result.aggregate});
    }
    t.cells.push_back(std::move(line));
  }
  return t;
}

}  // namespace credanno
