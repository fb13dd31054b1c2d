#pragma once

#include <optional>
#include <string>
#include <vector>

#include "config.hpp"
#include "trainer.hpp"

namespace credanno {

struct AblationRow {
  SeedingMode seeding = SeedingMode::Sparse;
  std::optional<Strategy> strategy;  // nullopt: no annotation requests
  PseudoMode pseudo = PseudoMode::Dynamic;
  bool quenching = true;

  std::string label() const;
};

// The five component combinations of the published ablation, baseline first
// and the full mechanism last.
std::vector<AblationRow> default_ablation_grid();

// Run config for one grid cell. `budget` is the total annotated fraction:
// rows without an acquisition strategy spend it all on seeds; the others
// keep the base seed fraction and request the remainder.
RunConfig ablation_cell_config(const RunConfig& base, const AblationRow& row, double budget);

struct AblationCell {
  double budget = 0.0;
  AggregateReport aggregate;
};

struct AblationTable {
  std::vector<AblationRow> rows;
  std::vector<double> budgets;
  std::vector<std::vector<AblationCell>> cells;  // [row][budget]
};

AblationTable run_ablation(const Dataset& dataset, const RunConfig& base, const std::vector<AblationRow>& grid,
                           const std::vector<double>& budgets, int n_repeats, int parallel = 1);

}  // namespace credanno
