#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "acquisition.hpp"
#include "doctest.h"
#include "helpers.hpp"
#include "synthgen.hpp"

using namespace credanno;

namespace {

void zero_all(Parameters& p) {
  p.for_each([](double& x) { x = 0.0; });
}

Dataset tiny_dataset() {
  AttributeSchema schema({{"a", 3}});
  std::vector<testing::Row> rows;
  for (int i = 0; i < 8; ++i)
    rows.push_back({"r" + std::to_string(i), {std::cos(i * 0.7), std::sin(i * 0.7)}, i % 2, {i % 3}, i < 6});
  return testing::make_dataset(schema, rows);
}

}  // namespace

TEST_SUITE("acquisition") {

TEST_CASE("entropy values") {
  std::vector<double> p{0.7, 0.3};
  CHECK(shannon_entropy(p) == doctest::Approx(0.6109).epsilon(1e-4));
  std::vector<double> one_hot{0, 1, 0};
  CHECK(shannon_entropy(one_hot) == 0.0);
  std::vector<double> uniform(5, 0.2);
  CHECK(shannon_entropy(uniform) == doctest::Approx(std::log(5.0)));
}

TEST_CASE("uniform predictor scores") {
  auto synth = generate_synthetic(SynthConfig{});
  const auto& ds = synth.dataset;
  HierarchicalPredictor p(ds.dim(), ds.schema(), 0);
  zero_all(p.params());
  auto scores = score_pool(p, ds, ds.train_rows());
  double max_entropy = std::log(2.0);
  for (const auto& a : ds.schema().attributes()) max_entropy += std::log(static_cast<double>(a.class_count));
  REQUIRE(scores.size() == ds.train_rows().size());
  for (const auto& s : scores) {
    CHECK(s.cls_confidence == doctest::Approx(0.5));
    CHECK(s.integrated_entropy == doctest::Approx(max_entropy));
  }
}

TEST_CASE("scores stay in range") {
  auto synth = generate_synthetic(SynthConfig{});
  const auto& ds = synth.dataset;
  HierarchicalPredictor p(ds.dim(), ds.schema(), 4);
  double max_entropy = std::log(2.0);
  for (const auto& a : ds.schema().attributes()) max_entropy += std::log(static_cast<double>(a.class_count));
  for (const auto& s : score_pool(p, ds, ds.train_rows())) {
    CHECK(s.cls_confidence >= 0.5);
    CHECK(s.cls_confidence <= 1.0);
    CHECK(s.integrated_entropy >= 0.0);
    CHECK(s.integrated_entropy <= max_entropy + 1e-12);
  }
}

TEST_CASE("malignancy-only entropy from probabilities 0.7/0.3") {
  AttributeSchema none(std::vector<Attribute>{});
  std::vector<testing::Row> rows{{"a", {1.0}, 0, {}, true}, {"b", {1.0}, 1, {}, false}};
  auto ds = testing::make_dataset(none, rows);
  HierarchicalPredictor p(1, none, 0);
  zero_all(p.params());
  p.params().cls.bias = {std::log(0.7), std::log(0.3)};
  auto s = score_pool(p, ds, ds.train_rows());
  CHECK(s[0].cls_confidence == doctest::Approx(0.7));
  CHECK(s[0].integrated_entropy == doctest::Approx(0.6109).epsilon(1e-4));
}

TEST_CASE("least confidence picks the lowest confidence") {
  std::vector<AcquisitionScore> s{{0, 0.9, 0.1}, {1, 0.55, 0.2}, {2, 0.7, 0.3}};
  CHECK(select_requests(s, Strategy::LeastConfidence, 1, 0) == std::vector<std::size_t>{1});
  CHECK(select_requests(s, Strategy::IntegratedEntropy, 1, 0) == std::vector<std::size_t>{2});
  std::vector<AcquisitionScore> tied{{7, 0.6, 1}, {3, 0.6, 1}, {5, 0.6, 1}};
  CHECK(select_requests(tied, Strategy::LeastConfidence, 2, 0) == std::vector<std::size_t>{3, 5});
  CHECK(select_requests(tied, Strategy::IntegratedEntropy, 2, 0) == std::vector<std::size_t>{3, 5});
  CHECK(select_requests(s, Strategy::LeastConfidence, 0, 0).empty());
  CHECK_THROWS_AS(select_requests(s, Strategy::LeastConfidence, 4, 0), Error);
}

TEST_CASE("least confidence equals a brute-force full sort") {
  std::mt19937_64 gen(17);
  for (int t = 0; t < 300; ++t) {
    std::size_t n = 1 + gen() % 40;
    std::vector<AcquisitionScore> s;
    std::vector<std::size_t> rows(n * 3);
    std::iota(rows.begin(), rows.end(), 0);
    std::shuffle(rows.begin(), rows.end(), gen);
    for (std::size_t i = 0; i < n; ++i) {
      // Coarse values so ties are common.
      double c = 0.5 + static_cast<double>(gen() % 6) / 10.0;
      s.push_back({rows[i], c, static_cast<double>(gen() % 4)});
    }
    std::size_t k = gen() % (n + 1);
    auto sorted = s;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
      return a.cls_confidence != b.cls_confidence ? a.cls_confidence < b.cls_confidence : a.row < b.row;
    });
    std::vector<std::size_t> expect;
    for (std::size_t i = 0; i < k; ++i) expect.push_back(sorted[i].row);
    CHECK(select_requests(s, Strategy::LeastConfidence, k, 0) == expect);
  }
}

TEST_CASE("random selection is seeded") {
  std::vector<AcquisitionScore> s;
  for (std::size_t i = 0; i < 50; ++i) s.push_back({i * 2, 0.6, 1.0});
  auto a = select_requests(s, Strategy::Random, 10, 3);
  auto b = select_requests(s, Strategy::Random, 10, 3);
  auto c = select_requests(s, Strategy::Random, 10, 4);
  CHECK(a == b);
  CHECK(a != c);
  std::sort(a.begin(), a.end());
  CHECK(std::unique(a.begin(), a.end()) == a.end());
  CHECK(parse_strategy("least_confidence") == Strategy::LeastConfidence);
  CHECK(parse_strategy("random") == Strategy::Random);
  CHECK_THROWS_AS(parse_strategy("margin"), Error);
}

TEST_CASE("oracle counts reads and refuses the test split") {
  auto ds = tiny_dataset();
  Oracle o(ds);
  CHECK(o.read(0) == ds.truth(0));
  (void)o.read(0);
  CHECK(o.reads() == 2);
  CHECK_THROWS_AS((void)o.read(7), Error);
  CHECK(o.reads() == 2);
}

TEST_CASE("label pool keeps a disjoint cover") {
  auto ds = tiny_dataset();
  LabelPool pool(ds.train_rows());
  CHECK(pool.count(PoolGroup::Unused) == 6);
  pool.add_seed(0, ds.truth(0));
  pool.add_requested(3, ds.truth(3));
  CHECK_THROWS_AS(pool.add_seed(0, ds.truth(0)), Error);
  CHECK_THROWS_AS(pool.add_requested(7, ds.truth(7)), Error);  // test row
  pool.set_pseudo(1, {"r1", 1, {2}});
  CHECK_THROWS_AS(pool.set_pseudo(0, ds.truth(0)), Error);  // seeds keep their oracle record
  CHECK(pool.candidates() == std::vector<std::size_t>{1, 2, 4, 5});
  pool.check_invariants(ds.schema());
  pool.clear_pseudo();
  CHECK(pool.count(PoolGroup::Pseudo) == 0);
  CHECK(pool.count(PoolGroup::Unused) == 4);
  pool.check_invariants(ds.schema());
}

TEST_CASE("confidence gate at the extremes") {
  auto synth = generate_synthetic(SynthConfig{});
  const auto& ds = synth.dataset;
  HierarchicalPredictor p(ds.dim(), ds.schema(), 1);
  LabelPool pool(ds.train_rows());
  for (std::size_t i = 0; i < 5; ++i) pool.add_seed(ds.train_rows()[i], ds.truth(ds.train_rows()[i]));

  CHECK(assign_pseudo_labels(p, ds, pool, 0.5) == ds.train_rows().size() - 5);
  CHECK(pool.count(PoolGroup::Unused) == 0);
  pool.check_invariants(ds.schema());
  for (const auto& [row, rec] : pool.pseudo()) {
    auto out = p.forward(ds.row(row));
    CHECK(rec.malignancy == out.malignancy());
    CHECK(rec.attribute_labels == out.attribute_labels());
    CHECK(rec.id == ds.id(row));
  }

  CHECK(assign_pseudo_labels(p, ds, pool, 1.0) == 0);
  CHECK(pool.count(PoolGroup::Pseudo) == 0);
  CHECK(pool.count(PoolGroup::Unused) == ds.train_rows().size() - 5);
  CHECK(pool.count(PoolGroup::Seed) == 5);
  pool.check_invariants(ds.schema());
}

TEST_CASE("an overfit sample receives its own record as pseudo label") {
  auto ds = tiny_dataset();
  const std::size_t target = 2;
  HierarchicalPredictor p(ds.dim(), ds.schema(), 3);
  auto opt = p.make_optimizer(0.9, 0.5, 1);
  const auto& truth = ds.truth(target);
  std::vector<TrainingExample> batch{{ds.row(target), &truth}};
  for (int step = 0; step < 400 && p.forward(ds.row(target)).cls_confidence < 0.999; ++step)
    sgd_step(p, opt, p.compute_gradients(batch), 0.5);
  REQUIRE(p.forward(ds.row(target)).cls_confidence >= 0.9);

  LabelPool pool(ds.train_rows());
  assign_pseudo_labels(p, ds, pool, 0.9);
  REQUIRE(pool.group(target) == PoolGroup::Pseudo);
  CHECK(pool.pseudo().at(target) == truth);
}

}  // TEST_SUITE
