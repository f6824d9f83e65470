#include <cmath>
#include <set>

#include "doctest.h"
#include "latproph/dataset.hpp"
#include "latproph/errors.hpp"
#include "latproph/rng.hpp"

using namespace latproph;

namespace {

MeasurementRecord make_record(const std::string& family, const std::string& variant,
                              int input_size, double latency, const std::string& device = "agx") {
  MeasurementRecord r;
  r.model_name = family + "-" + variant;
  r.family = family;
  r.variant = variant;
  r.input_size = input_size;
  r.device = device;
  r.replicates = 100;
  r.latency_ms = latency;
  r.latency_std_ms = 0.05 * latency;
  r.features.fill(1.0);
  r.features[kInputImageSize] = input_size;
  r.features[kTotalFlops] = latency * 1e6;
  return r;
}

// families x variants x sizes, latency loosely tied to size
Dataset grid_dataset(const std::vector<std::pair<std::string, int>>& family_variants,
                     const std::vector<int>& sizes, const std::string& device = "agx") {
  Dataset ds;
  ds.device = device;
  for (const auto& [family, variants] : family_variants) {
    for (int v = 0; v < variants; ++v) {
      for (const int size : sizes)
        ds.records.push_back(
            make_record(family, std::to_string(v), size, 0.001 * size * size + v, device));
    }
  }
  return ds;
}

}  // namespace

TEST_CASE("measurement CSV round-trip preserves the dataset") {
  const Dataset ds = grid_dataset({{"a", 2}, {"b", 1}}, {32, 64});
  const std::string csv = measurements_to_csv(ds);
  const Dataset back = parse_measurements_csv(csv, "test");
  REQUIRE(back.size() == ds.size());
  for (std::size_t i = 0; i < ds.size(); ++i) {
    CHECK(back.records[i].model_name == ds.records[i].model_name);
    CHECK(back.records[i].latency_ms == ds.records[i].latency_ms);
    CHECK(back.records[i].features == ds.records[i].features);
  }
  CHECK(measurements_to_csv(back) == csv);
}

TEST_CASE("three-row well-formed CSV loads") {
  Dataset ds = grid_dataset({{"a", 1}}, {32, 64, 128});
  const Dataset back = parse_measurements_csv(measurements_to_csv(ds), "test");
  CHECK(back.size() == 3);
}

TEST_CASE("CSV schema errors carry the row number") {
  const Dataset ds = grid_dataset({{"a", 1}}, {32, 64});
  std::string csv = measurements_to_csv(ds);

  SUBCASE("wrong header") {
    CHECK_THROWS_AS(parse_measurements_csv("nope\n1,2\n", "test"), SchemaError);
  }
  SUBCASE("missing column in row 2") {
    const auto last_comma = csv.find_last_of(',');
    csv.erase(last_comma, 2);
    try {
      parse_measurements_csv(csv, "test");
      FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
  }
  SUBCASE("non-numeric latency") {
    csv.replace(csv.find(",100,"), 5, ",abc,");
    CHECK_THROWS_AS(parse_measurements_csv(csv, "test"), SchemaError);
  }
}

TEST_CASE("invariant violations name the row") {
  Dataset ds = grid_dataset({{"a", 1}}, {32, 64});

  SUBCASE("zero latency") {
    ds.records[1].latency_ms = 0.0;
    try {
      validate_dataset(ds);
      FAIL("expected InvariantError");
    } catch (const InvariantError& e) {
      CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
  }
  SUBCASE("duplicate key") {
    ds.records[1] = ds.records[0];
    CHECK_THROWS_WITH_AS(validate_dataset(ds), doctest::Contains("duplicate"), InvariantError);
  }
  SUBCASE("mixed devices") {
    ds.records[1].device = "tx2";
    CHECK_THROWS_AS(validate_dataset(ds), InvariantError);
  }
  SUBCASE("feature/input-size disagreement") {
    ds.records[0].features[kInputImageSize] = 999;
    CHECK_THROWS_AS(validate_dataset(ds), InvariantError);
  }
}

TEST_CASE("make_split honors the protocol on a known dataset") {
  const Dataset ds =
      grid_dataset({{"a", 2}, {"b", 2}, {"c", 1}}, {32, 64, 128, 224});  // 20 records
  const SplitPlan plan = make_split(ds, 0.7, 42);

  // disjoint cover
  std::set<std::size_t> seen;
  std::size_t total = 0;
  for (const auto* list : {&plan.train, &plan.test_nis, &plan.test_ncv, &plan.test_nca}) {
    for (const std::size_t i : *list) {
      CHECK(seen.insert(i).second);
      ++total;
    }
  }
  CHECK(total == ds.size());

  // |train| = 14 +- 2
  CHECK(plan.train.size() >= 12);
  CHECK(plan.train.size() <= 16);

  // at least one family appears exclusively in test_nca
  std::set<std::string> nca_families;
  for (const std::size_t i : plan.test_nca) nca_families.insert(ds.records[i].family);
  CHECK(!nca_families.empty());
  for (const std::size_t i : plan.train) CHECK(nca_families.count(ds.records[i].family) == 0);
  for (const std::size_t i : plan.test_nis) CHECK(nca_families.count(ds.records[i].family) == 0);

  // NCV variants never in train
  std::set<std::string> ncv_keys;
  for (const std::size_t i : plan.test_ncv)
    ncv_keys.insert(ds.records[i].family + "|" + ds.records[i].variant);
  CHECK(!ncv_keys.empty());
  for (const std::size_t i : plan.train)
    CHECK(ncv_keys.count(ds.records[i].family + "|" + ds.records[i].variant) == 0);

  // NIS (family, variant) pairs train at another size
  for (const std::size_t i : plan.test_nis) {
    bool trained_elsewhere = false;
    for (const std::size_t t : plan.train) {
      if (ds.records[t].family == ds.records[i].family &&
          ds.records[t].variant == ds.records[i].variant) {
        CHECK(ds.records[t].input_size != ds.records[i].input_size);
        trained_elsewhere = true;
      }
    }
    CHECK(trained_elsewhere);
  }
}

TEST_CASE("make_split is deterministic in (ds, ratio, seed)") {
  const Dataset ds = grid_dataset(
      {{"a", 3}, {"b", 3}, {"c", 2}, {"d", 2}, {"e", 2}, {"f", 1}}, {32, 64, 96, 128, 160, 224});
  const SplitPlan p1 = make_split(ds, 0.7, 7);
  const SplitPlan p2 = make_split(ds, 0.7, 7);
  CHECK(p1.train == p2.train);
  CHECK(p1.test_nis == p2.test_nis);
  CHECK(p1.test_ncv == p2.test_ncv);
  CHECK(p1.test_nca == p2.test_nca);

  // different seeds draw different holdouts somewhere in the plan
  bool any_difference = false;
  for (const std::uint64_t seed : {8, 9, 10, 11}) {
    const SplitPlan p3 = make_split(ds, 0.7, seed);
    any_difference = any_difference || p3.train != p1.train || p3.test_nis != p1.test_nis ||
                     p3.test_ncv != p1.test_ncv || p3.test_nca != p1.test_nca;
  }
  CHECK(any_difference);
}

TEST_CASE("make_split rejects thin datasets") {
  SUBCASE("fewer than 3 families") {
    const Dataset ds = grid_dataset({{"a", 2}, {"b", 2}}, {32, 64, 128});
    CHECK_THROWS_AS(make_split(ds, 0.7, 1), InsufficientDiversityError);
  }
  SUBCASE("no family with 2+ variants") {
    const Dataset ds = grid_dataset({{"a", 1}, {"b", 1}, {"c", 1}}, {32, 64, 128});
    CHECK_THROWS_AS(make_split(ds, 0.7, 1), InsufficientDiversityError);
  }
  SUBCASE("a variant with a single size") {
    Dataset ds = grid_dataset({{"a", 2}, {"b", 2}, {"c", 1}}, {32, 64});
    ds.records.push_back(make_record("d", "0", 32, 1.0));
    CHECK_THROWS_AS(make_split(ds, 0.7, 1), InsufficientDiversityError);
  }
}

TEST_CASE("split plan JSON round-trip") {
  const Dataset ds = grid_dataset({{"a", 2}, {"b", 2}, {"c", 1}}, {32, 64, 128, 224});
  const SplitPlan plan = make_split(ds, 0.7, 3);
  const SplitPlan back = split_plan_from_json(split_plan_to_json(plan), ds.size());
  CHECK(back.train == plan.train);
  CHECK(back.test_nis == plan.test_nis);
  CHECK(back.test_ncv == plan.test_ncv);
  CHECK(back.test_nca == plan.test_nca);
  CHECK(back.seed == plan.seed);

  CHECK_THROWS_AS(split_plan_from_json(split_plan_to_json(plan), plan.train.size()), SchemaError);
}

TEST_CASE("standardizer: identical rows go to zero with std clamped to 1") {
  std::vector<FeatureVector> rows(3);
  for (auto& row : rows) row.fill(5.0);
  const Standardizer st = fit_standardizer(rows);
  for (int f = 0; f < kFeatureCount; ++f) {
    CHECK(st.std[f] == 1.0);
    CHECK(st.constant_feature[f]);
    CHECK(standardize(st, rows[0])[f] == 0.0);
  }
}

TEST_CASE("standardizer: population statistics by hand") {
  std::vector<FeatureVector> rows(2);
  rows[0].fill(0.0);
  rows[1].fill(0.0);
  rows[0][0] = 0.0;
  rows[1][0] = 2.0;
  const Standardizer st = fit_standardizer(rows);
  CHECK(st.mean[0] == 1.0);
  CHECK(st.std[0] == 1.0);  // population std of {0, 2}
  FeatureVector x{};
  CHECK(standardize(st, x)[0] == -1.0);
}

TEST_CASE("standardize then invert recovers the vector") {
  Rng rng(4);
  std::vector<FeatureVector> rows(20);
  for (auto& row : rows)
    for (auto& v : row) v = rng.uniform(-5.0, 50.0);
  const Standardizer st = fit_standardizer(rows);
  const FeatureVector z = standardize(st, rows[3]);
  for (int f = 0; f < kFeatureCount; ++f) {
    const double inverted = z[f] * st.std[f] + st.mean[f];
    CHECK(std::abs(inverted - rows[3][f]) < 1e-12 * std::max(1.0, std::abs(rows[3][f])));
  }
}

TEST_CASE("standardizer requires a non-empty training set") {
  CHECK_THROWS_AS(fit_standardizer(std::vector<FeatureVector>{}), EmptyTrainError);
}
