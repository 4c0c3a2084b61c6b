#include <doctest.h>

#include <random>
#include <sstream>

#include "dqlap/dataset.hpp"
#include "dqlap/errors.hpp"
#include "test_util.hpp"

using namespace dqlap;
using namespace dqlap::testutil;

TEST_CASE("load_csv removes drop-flagged rows and preserves order") {
  const auto path = write_file("drop.csv",
                               "day,label,drop,a,b\n"
                               "1,0,,1.0,2.0\n"
                               "1,1,,3.0,4.0\n"
                               "2,0,drop-it,5.0,6.0\n"
                               "2,1,,7.0,8.0\n");
  const Dataset data = load_csv(path);
  REQUIRE(data.size() == 3);
  CHECK(data.feature_count == 2);
  CHECK(data.samples[0].features == std::vector<double>{1.0, 2.0});
  CHECK(data.samples[1].features == std::vector<double>{3.0, 4.0});
  CHECK(data.samples[2].features == std::vector<double>{7.0, 8.0});
  CHECK(data.samples[2].day == 2);
  CHECK(data.day_count == 2);
}

TEST_CASE("load_csv rejects unknown label values with the row number") {
  const auto path = write_file("badlabel.csv",
                               "day,label,a\n"
                               "1,0,1.0\n"
                               "1,2,2.0\n");
  CHECK_THROWS_WITH_AS(load_csv(path),
                       doctest::Contains("line 3"), DataError);
  try {
    load_csv(path);
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("2") != std::string::npos);
  }
}

TEST_CASE("load_csv reads the turbine schema with 31 features") {
  std::ostringstream csv;
  csv << "day,label";
  for (int i = 0; i < 31; ++i) csv << ",c" << i;
  csv << "\n2,1";
  for (int i = 0; i < 31; ++i) csv << "," << i * 0.5;
  csv << "\n";
  const Dataset data = load_csv(write_file("turbine.csv", csv.str()));
  CHECK(data.feature_count == 31);
  CHECK(data.samples[0].features.size() == 31);
}

TEST_CASE("load_csv honors an explicit column mapping") {
  const auto path = write_file("mapped.csv",
                               "b,day,ignored,label,a\n"
                               "2.0,1,9.9,0,1.0\n"
                               "4.0,1,9.9,1,3.0\n");
  CsvSchema schema;
  schema.feature_columns = {"a", "b"};
  const Dataset data = load_csv(path, schema);
  REQUIRE(data.feature_count == 2);
  CHECK(data.feature_names == std::vector<std::string>{"a", "b"});
  CHECK(data.samples[0].features == std::vector<double>{1.0, 2.0});
  CHECK(data.samples[1].features == std::vector<double>{3.0, 4.0});

  schema.feature_columns = {"a", "missing"};
  CHECK_THROWS_WITH_AS(load_csv(path, schema), doctest::Contains("missing"),
                       DataError);
}

TEST_CASE("load_csv error paths") {
  CHECK_THROWS_AS(load_csv(temp_dir() / "does_not_exist.csv"), DataError);

  const auto nonnumeric = write_file("nonnumeric.csv",
                                     "day,label,a\n"
                                     "1,0,oops\n");
  CHECK_THROWS_WITH_AS(load_csv(nonnumeric), doctest::Contains("line 2"), DataError);

  const auto ragged = write_file("ragged.csv",
                                 "day,label,a,b\n"
                                 "1,0,1.0\n");
  CHECK_THROWS_WITH_AS(load_csv(ragged), doctest::Contains("line 2"), DataError);

  const auto badday = write_file("badday.csv",
                                 "day,label,a\n"
                                 "0,0,1.0\n");
  CHECK_THROWS_AS(load_csv(badday), DataError);
}

TEST_CASE("fit_scaler finds exact extrema") {
  SUBCASE("single column") {
    const Dataset d = make_dataset({{0.0}, {10.0}, {5.0}}, {0, 1, 0});
    const ScalerParams p = fit_scaler(d);
    CHECK(p.min == std::vector<double>{0.0});
    CHECK(p.max == std::vector<double>{10.0});
  }
  SUBCASE("constant column") {
    const Dataset d = make_dataset({{3.0}, {3.0}}, {0, 1});
    const ScalerParams p = fit_scaler(d);
    CHECK(p.min[0] == 3.0);
    CHECK(p.max[0] == 3.0);
  }
  SUBCASE("two features") {
    const Dataset d = make_dataset({{1.0, 4.0}, {3.0, 8.0}}, {0, 1});
    const ScalerParams p = fit_scaler(d);
    CHECK(p.min == std::vector<double>{1.0, 4.0});
    CHECK(p.max == std::vector<double>{3.0, 8.0});
  }
  SUBCASE("empty dataset") {
    CHECK_THROWS_AS(fit_scaler(Dataset{}), DataError);
  }
}

TEST_CASE("apply_scaler maps into [0,1] with clamping") {
  ScalerParams p;
  p.min = {0.0, 2.0};
  p.max = {10.0, 2.0};

  const Dataset d = make_dataset({{5.0, 2.0}, {0.0, 2.0}, {10.0, 2.0}, {-3.0, 2.0}, {42.0, 2.0}},
                                 {0, 1, 0, 1, 0});
  const Dataset scaled = apply_scaler(d, p);
  CHECK(scaled.samples[0].features[0] == doctest::Approx(0.5));
  CHECK(scaled.samples[1].features[0] == 0.0);
  CHECK(scaled.samples[2].features[0] == 1.0);
  CHECK(scaled.samples[3].features[0] == 0.0);  // below range clamps
  CHECK(scaled.samples[4].features[0] == 1.0);  // above range clamps
  for (const auto& s : scaled.samples) {
    CHECK(s.features[1] == 0.0);  // constant feature maps to 0
  }
  CHECK(scaled.scaler.has_value());

  ScalerParams wrong;
  wrong.min = {0.0};
  wrong.max = {1.0};
  CHECK_THROWS_AS(apply_scaler(d, wrong), std::invalid_argument);
}

TEST_CASE("scaler fitted on the same data yields exact 0/1 extrema") {
  std::mt19937_64 rng(7);
  Dataset d;
  d.feature_count = 4;
  d.feature_names = {"a", "b", "c", "d"};
  for (int i = 0; i < 50; ++i) {
    Sample s;
    s.label = i % 2;
    for (int j = 0; j < 4; ++j) {
      s.features.push_back(static_cast<double>(rng() % 1000) / 7.0 - 50.0);
    }
    d.samples.push_back(std::move(s));
  }
  const ScalerParams p = fit_scaler(d);
  const Dataset scaled = apply_scaler(d, p);
  for (std::size_t j = 0; j < 4; ++j) {
    double lo = 1e300, hi = -1e300;
    for (const auto& s : scaled.samples) {
      CHECK(s.features[j] >= 0.0);
      CHECK(s.features[j] <= 1.0);
      lo = std::min(lo, s.features[j]);
      hi = std::max(hi, s.features[j]);
    }
    CHECK(lo == 0.0);
    CHECK(hi == 1.0);
  }
}

TEST_CASE("split counts and determinism") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(i % 2);
  }
  const Dataset d = make_dataset(rows, labels);

  SplitSpec spec;
  spec.train_fraction = 0.7;
  spec.seed = 5;
  auto [train, test] = split(d, spec);
  CHECK(train.size() == 7);
  CHECK(test.size() == 3);

  auto [train2, test2] = split(d, spec);
  CHECK(same_samples(train, train2));
  CHECK(same_samples(test, test2));

  spec.train_fraction = 1.5;
  CHECK_THROWS_AS(split(d, spec), ConfigError);
  CHECK_THROWS_AS(split(Dataset{}, SplitSpec{}), DataError);
}

TEST_CASE("stratified split preserves class proportions exactly") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 100; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(i < 90 ? 1 : 0);  // 90 majority, 10 minority
  }
  const Dataset d = make_dataset(rows, labels);

  SplitSpec spec;
  spec.train_fraction = 0.7;
  spec.seed = 11;
  spec.stratified = true;
  auto [train, test] = split(d, spec);
  CHECK(train.size() == 70);
  std::size_t majority = 0, minority = 0;
  for (const auto& s : train.samples) {
    (s.label == 1 ? majority : minority) += 1;
  }
  CHECK(majority == 63);
  CHECK(minority == 7);
}

TEST_CASE("cumulative_through_day") {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels, days;
  const int per_day[] = {2, 3, 4};
  for (int d = 0; d < 3; ++d) {
    for (int k = 0; k < per_day[d]; ++k) {
      rows.push_back({static_cast<double>(d * 10 + k)});
      labels.push_back(k % 2);
      days.push_back(d + 1);
    }
  }
  const Dataset data = make_dataset(rows, labels, days);

  CHECK(cumulative_through_day(data, 3).size() == data.size());
  CHECK(cumulative_through_day(data, 1).size() == 2);
  CHECK(cumulative_through_day(data, 2).size() == 5);
  CHECK_THROWS_AS(cumulative_through_day(data, 0), std::out_of_range);
  CHECK_THROWS_AS(cumulative_through_day(data, 4), std::out_of_range);

  // d-window is always a prefix-subset of the (d+1)-window.
  for (int d = 1; d < 3; ++d) {
    const Dataset a = cumulative_through_day(data, d);
    const Dataset b = cumulative_through_day(data, d + 1);
    REQUIRE(a.size() <= b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a.samples[i].features == b.samples[i].features);
    }
  }
}

TEST_CASE("generate_synthetic class arithmetic and determinism") {
  SUBCASE("balanced stationary") {
    SyntheticSpec spec;
    spec.feature_count = 3;
    spec.days = 4;
    spec.samples_per_day = 300;
    spec.imbalance_ratio = 1.0;
    spec.drift_rate = 0.0;
    spec.seed = 3;
    const Dataset d = generate_synthetic(spec);
    for (int day = 1; day <= 4; ++day) {
      std::size_t fault = 0, normal = 0;
      for (const auto& s : d.samples) {
        if (s.day == day) (s.label == 0 ? fault : normal) += 1;
      }
      CHECK(fault == 150);
      CHECK(normal == 150);
    }
  }
  SUBCASE("2:1 imbalance") {
    SyntheticSpec spec;
    spec.feature_count = 2;
    spec.days = 1;
    spec.samples_per_day = 300;
    spec.imbalance_ratio = 2.0;
    spec.seed = 3;
    const Dataset d = generate_synthetic(spec);
    std::size_t fault = 0, normal = 0;
    for (const auto& s : d.samples) (s.label == 0 ? fault : normal) += 1;
    CHECK(fault == 100);
    CHECK(normal == 200);
  }
  SUBCASE("same seed, identical datasets") {
    SyntheticSpec spec;
    spec.days = 2;
    spec.samples_per_day = 50;
    spec.seed = 99;
    CHECK(same_samples(generate_synthetic(spec), generate_synthetic(spec)));
  }
  SUBCASE("invalid specs") {
    SyntheticSpec spec;
    spec.imbalance_ratio = 0.5;
    CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
    spec = SyntheticSpec{};
    spec.samples_per_day = 0;
    CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
    spec = SyntheticSpec{};
    spec.class_separation = -1.0;
    CHECK_THROWS_AS(generate_synthetic(spec), ConfigError);
  }
}

TEST_CASE("csv round trip reproduces the dataset exactly") {
  SyntheticSpec spec;
  spec.feature_count = 5;
  spec.days = 3;
  spec.samples_per_day = 40;
  spec.drift_rate = 0.2;
  spec.seed = 21;
  const Dataset original = generate_synthetic(spec);

  const auto path = temp_dir() / "roundtrip.csv";
  write_csv(original, path);
  const Dataset reloaded = load_csv(path);
  CHECK(same_samples(original, reloaded));
  CHECK(reloaded.feature_names == original.feature_names);

  // Write-load-write is byte stable.
  const auto path2 = temp_dir() / "roundtrip2.csv";
  write_csv(reloaded, path2);
  std::ifstream a(path), b(path2);
  std::stringstream sa, sb;
  sa << a.rdbuf();
  sb << b.rdbuf();
  CHECK(sa.str() == sb.str());
}
