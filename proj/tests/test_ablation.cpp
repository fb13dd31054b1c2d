#include "ablation.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "report.hpp"
#include "synthgen.hpp"

using namespace credanno;

namespace {

RunConfig desk_config() {
  RunConfig c;
  c.base_lr = 0.0025;
  return c;
}

}  // namespace

TEST_SUITE("ablation") {

TEST_CASE("default grid has the five component rows") {
  auto grid = default_ablation_grid();
  REQUIRE(grid.size() == 5);
  CHECK(grid.front().seeding == SeedingMode::Random);
  CHECK(!grid.front().strategy);
  CHECK(grid.front().pseudo == PseudoMode::Off);
  CHECK(!grid.front().quenching);
  CHECK(grid.back().seeding == SeedingMode::Sparse);
  CHECK(grid.back().strategy == Strategy::LeastConfidence);
  CHECK(grid.back().pseudo == PseudoMode::Dynamic);
  CHECK(grid.back().quenching);
}

TEST_CASE("cell configs split the budget") {
  auto base = desk_config();
  auto grid = default_ablation_grid();
  auto baseline = ablation_cell_config(base, grid.front(), 0.10);
  CHECK(baseline.seed_fraction == 0.10);
  CHECK(baseline.request_fraction == 0.0);
  auto full = ablation_cell_config(base, grid.back(), 0.10);
  CHECK(full.seed_fraction == 0.01);
  CHECK(full.request_fraction == doctest::Approx(0.09));
  auto tiny = ablation_cell_config(base, grid.back(), 0.01);
  CHECK(tiny.request_fraction == 0.0);
}

TEST_CASE("a single-row grid matches a direct experiment") {
  auto ds = generate_synthetic(SynthConfig{}).dataset;
  auto base = desk_config();
  base.seed_epochs = 40;
  auto row = default_ablation_grid().back();
  auto table = run_ablation(ds, base, {row}, {0.10, 0.01}, 3, 3);
  REQUIRE(table.cells.size() == 1);
  REQUIRE(table.cells[0].size() == 2);
  for (std::size_t b = 0; b < 2; ++b) {
    auto direct = run_experiment(ds, ablation_cell_config(base, row, table.budgets[b]), 3).aggregate;
    const auto& cell = table.cells[0][b].aggregate;
    CHECK(cell.malignancy.mean == direct.malignancy.mean);
    CHECK(cell.malignancy.std == direct.malignancy.std);
    CHECK(cell.attributes.size() == direct.attributes.size());
    for (std::size_t i = 0; i < cell.attributes.size(); ++i) CHECK(cell.attributes[i].mean == direct.attributes[i].mean);
  }
  auto text = ablation_text(table);
  CHECK(testing::contains(text, "10%"));
  CHECK(testing::contains(text, "1%"));
}

TEST_CASE("sparse seeding is steadier than random seeding at the small budget") {
  SynthConfig sc;  // D=16, four modes, separation 8, flip 0.05
  auto ds = generate_synthetic(sc).dataset;
  auto grid = default_ablation_grid();
  auto table = run_ablation(ds, desk_config(), grid, {0.01}, 10, 4);
  double worst_sparse = 0, best_random = 1e9;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    double sd = table.cells[r][0].aggregate.malignancy.std;
    MESSAGE(grid[r].label() << ": " << mean_std(table.cells[r][0].aggregate.malignancy));
    if (grid[r].seeding == SeedingMode::Sparse)
      worst_sparse = std::max(worst_sparse, sd);
    else
      best_random = std::min(best_random, sd);
  }
  CHECK(worst_sparse < best_random);
}

}  // TEST_SUITE
