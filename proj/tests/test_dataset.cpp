#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "tqr/dataset.hpp"

using namespace tqr;

namespace {

DatasetRecord cifar_record(int label, int phase) {
  DatasetRecord r;
  r.label = label;
  r.features = Tensor({32, 32, 3});
  for (int yx = 0; yx < 32 * 32; ++yx)
    for (int c = 0; c < 3; ++c)
      r.features[std::int64_t(yx) * 3 + c] = double((yx + 13 * c + phase) % 256);
  return r;
}

DatasetRecord flat_color(int label, double r, double g, double b, int side = 32) {
  DatasetRecord rec;
  rec.label = label;
  rec.features = Tensor({side, side, 3});
  for (int yx = 0; yx < side * side; ++yx) {
    rec.features[std::int64_t(yx) * 3 + 0] = r;
    rec.features[std::int64_t(yx) * 3 + 1] = g;
    rec.features[std::int64_t(yx) * 3 + 2] = b;
  }
  return rec;
}

bool bitwise_equal(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) return false;
  for (std::int64_t i = 0; i < a.size(); ++i)
    if (a[i] != b[i]) return false;
  return true;
}

std::string temp_path(const std::string& name) { return "/tmp/tqr_dataset_" + name; }

} // namespace

TEST_CASE("batch stacks features and one-hot labels in index order") {
  Dataset d;
  d.shape = {2};
  d.classes = 3;
  for (int i = 0; i < 4; ++i) {
    DatasetRecord r;
    r.features = Tensor({2}, {double(i), double(10 * i)});
    r.label = i % 3;
    d.records.push_back(std::move(r));
  }

  auto [x, y] = d.batch({2, 0});
  CHECK(x.shape() == std::vector<int>{2, 2});
  CHECK(x[0] == 2.0);
  CHECK(x[1] == 20.0);
  CHECK(x[2] == 0.0);
  CHECK(x[3] == 0.0);
  CHECK(y.shape() == std::vector<int>{2, 3});
  CHECK(y[2] == 1.0); // record 2 has label 2
  CHECK(y[3] == 1.0); // record 0 has label 0
  CHECK(y[0] + y[1] + y[4] + y[5] == 0.0);

  auto [fx, fy] = d.full_batch();
  CHECK(fx.dim(0) == 4);
  CHECK(fy.dim(0) == 4);

  CHECK_THROWS_WITH_AS(d.batch({}), "empty dataset", std::invalid_argument);

  Dataset bad = d;
  bad.records[1].label = 3;
  CHECK_THROWS_WITH_AS(bad.batch({1}), "dataset record label out of range",
                       std::invalid_argument);
  Dataset misshapen = d;
  misshapen.records[0].features = Tensor({3});
  CHECK_THROWS_WITH_AS(misshapen.batch({0}), "dataset record feature shape mismatch",
                       std::invalid_argument);
}

TEST_CASE("cifar binary write/load round-trip preserves pixels and order") {
  std::vector<DatasetRecord> recs = {cifar_record(0, 0), cifar_record(3, 5),
                                     cifar_record(7, 11), cifar_record(3, 17),
                                     cifar_record(9, 23)};
  const std::string path = temp_path("roundtrip.bin");
  write_cifar10_binary(path, recs);
  CHECK(std::filesystem::file_size(path) == 5u * 3073u);

  std::vector<DatasetRecord> back = load_cifar10_binary(path);
  REQUIRE(back.size() == recs.size());
  for (std::size_t i = 0; i < recs.size(); ++i) {
    CHECK(back[i].label == recs[i].label);
    CHECK(bitwise_equal(back[i].features, recs[i].features));
  }

  std::vector<DatasetRecord> threes = load_cifar10_binary(path, {3});
  REQUIRE(threes.size() == 2);
  CHECK(bitwise_equal(threes[0].features, recs[1].features));
  CHECK(bitwise_equal(threes[1].features, recs[3].features));

  std::vector<DatasetRecord> capped = load_cifar10_binary(path, {}, 2);
  REQUIRE(capped.size() == 2);
  CHECK(capped[0].label == 0);
  CHECK(capped[1].label == 3);

  std::vector<DatasetRecord> both = load_cifar10_binary(path, {3, 9}, 2);
  REQUIRE(both.size() == 2);
  CHECK(bitwise_equal(both[0].features, recs[1].features));
  CHECK(bitwise_equal(both[1].features, recs[3].features));

  std::remove(path.c_str());
}

TEST_CASE("cifar loader rejects corrupt streams") {
  CHECK_THROWS_WITH_AS(load_cifar10_binary("/tmp/definitely_missing_tqr.bin"),
                       "cannot open dataset file: /tmp/definitely_missing_tqr.bin",
                       std::runtime_error);

  const std::string stub = temp_path("stub.bin");
  {
    std::ofstream os(stub, std::ios::binary);
    os << std::string(100, 'x');
  }
  CHECK_THROWS_WITH_AS(load_cifar10_binary(stub),
                       ("corrupt record stream: " + stub + " holds 100 bytes, not a multiple of 3073")
                           .c_str(),
                       std::runtime_error);
  std::remove(stub.c_str());

  const std::string badlabel = temp_path("badlabel.bin");
  {
    std::ofstream os(badlabel, std::ios::binary);
    std::string rec(3073, '\0');
    rec[0] = char(12);
    os << rec;
  }
  CHECK_THROWS_WITH_AS(load_cifar10_binary(badlabel),
                       "record 0 has label byte 12, expected < 10", std::runtime_error);
  std::remove(badlabel.c_str());
}

TEST_CASE("cifar writer validates records") {
  const std::string path = temp_path("writer.bin");
  DatasetRecord small;
  small.label = 0;
  small.features = Tensor({8, 8, 3});
  CHECK_THROWS_WITH_AS(write_cifar10_binary(path, {small}),
                       "record features must be (32,32,3) to serialize", std::invalid_argument);

  DatasetRecord badlabel = cifar_record(0, 0);
  badlabel.label = 10;
  CHECK_THROWS_WITH_AS(write_cifar10_binary(path, {badlabel}),
                       "record label must be in [0,10)", std::invalid_argument);

  DatasetRecord frac = cifar_record(1, 0);
  frac.features[0] = 3.7;
  CHECK_THROWS_WITH_AS(write_cifar10_binary(path, {frac}),
                       "record pixels must be integral bytes in [0,255]", std::invalid_argument);
  DatasetRecord neg = cifar_record(1, 0);
  neg.features[0] = -1.0;
  CHECK_THROWS_WITH_AS(write_cifar10_binary(path, {neg}),
                       "record pixels must be integral bytes in [0,255]", std::invalid_argument);
  std::remove(path.c_str());
}

TEST_CASE("grayscale anchors: black, white, pure red") {
  DatasetRecord black = preprocess_grayscale(flat_color(0, 0, 0, 0));
  CHECK(black.features.shape() == std::vector<int>{32, 32, 1});
  CHECK(black.features[0] == doctest::Approx(-128.0).epsilon(1e-12));

  DatasetRecord white = preprocess_grayscale(flat_color(1, 255, 255, 255));
  CHECK(white.features[0] == doctest::Approx(127.0).epsilon(1e-9));
  CHECK(white.label == 1);

  DatasetRecord red = preprocess_grayscale(flat_color(2, 255, 0, 0));
  CHECK(red.features[0] == doctest::Approx(0.299 * 255.0 - 128.0).epsilon(1e-9));
}

TEST_CASE("downsampling block-averages the grayscale image") {
  DatasetRecord raw;
  raw.label = 0;
  raw.features = Tensor({4, 4, 3});
  for (int y = 0; y < 4; ++y)
    for (int x = 0; x < 4; ++x) {
      const double v = double(y * 40 + x * 10);
      for (int c = 0; c < 3; ++c) raw.features[(std::int64_t(y) * 4 + x) * 3 + c] = v;
    }
  DatasetRecord down = preprocess_grayscale(raw, 2);
  CHECK(down.features.shape() == std::vector<int>{2, 2, 1});
  CHECK(down.features[0] == doctest::Approx(25.0 - 128.0).epsilon(1e-9));
  CHECK(down.features[1] == doctest::Approx(45.0 - 128.0).epsilon(1e-9));
  CHECK(down.features[2] == doctest::Approx(105.0 - 128.0).epsilon(1e-9));
  CHECK(down.features[3] == doctest::Approx(125.0 - 128.0).epsilon(1e-9));

  CHECK_THROWS_WITH_AS(preprocess_grayscale(raw, 3), "downsample factor must be 1, 2, or 4",
                       std::invalid_argument);
  DatasetRecord odd;
  odd.features = Tensor({6, 6, 3});
  CHECK_THROWS_WITH_AS(preprocess_grayscale(odd, 4),
                       "downsample factor must divide the image side", std::invalid_argument);
  DatasetRecord gray;
  gray.features = Tensor({4, 4, 1});
  CHECK_THROWS_WITH_AS(preprocess_grayscale(gray),
                       "grayscale preprocessing expects (h,w,3) raw features",
                       std::invalid_argument);
}

TEST_CASE("preprocess_cifar filters and remaps labels to subset positions") {
  std::vector<DatasetRecord> raw = {cifar_record(7, 1), cifar_record(2, 2), cifar_record(7, 3),
                                    cifar_record(5, 4)};
  Dataset d = preprocess_cifar(raw, {7, 5}, 4);
  CHECK(d.classes == 2);
  CHECK(d.shape == std::vector<int>{8, 8, 1});
  REQUIRE(d.records.size() == 3);
  CHECK(d.records[0].label == 0);
  CHECK(d.records[1].label == 0);
  CHECK(d.records[2].label == 1);
  CHECK(bitwise_equal(d.records[0].features, preprocess_grayscale(raw[0], 4).features));

  CHECK_THROWS_WITH_AS(preprocess_cifar(raw, {}, 1), "class subset must be non-empty",
                       std::invalid_argument);
}

TEST_CASE("gaussian synthesis: determinism, round-robin labels, separability") {
  Dataset a = synthesize_dataset(SyntheticKind::Gaussians, 50, 6);
  Dataset b = synthesize_dataset(SyntheticKind::Gaussians, 50, 6);
  REQUIRE(a.size() == 50);
  CHECK(a.classes == 2);
  CHECK(a.shape == std::vector<int>{2});
  for (long i = 0; i < a.size(); ++i) {
    CHECK(a.records[std::size_t(i)].label == int(i % 2));
    CHECK(bitwise_equal(a.records[std::size_t(i)].features, b.records[std::size_t(i)].features));
  }

  Dataset two = synthesize_dataset(SyntheticKind::Gaussians, 2, 3);
  REQUIRE(two.size() == 2);
  CHECK(two.records[0].label == 0);
  CHECK(two.records[1].label == 1);

  Dataset three = synthesize_dataset(SyntheticKind::Gaussians, 7, 3, 6.0, 3);
  CHECK(three.classes == 3);
  for (long i = 0; i < three.size(); ++i)
    CHECK(three.records[std::size_t(i)].label == int(i % 3));

  // centers sit at x = -sep/2 and +sep/2; at sep=10 the sign of x classifies
  // essentially perfectly
  Dataset wide = synthesize_dataset(SyntheticKind::Gaussians, 400, 2, 10.0);
  long hits = 0;
  for (const DatasetRecord& r : wide.records)
    if ((r.features[0] > 0.0 ? 1 : 0) == r.label) ++hits;
  CHECK(double(hits) / double(wide.size()) >= 0.99);

  CHECK_THROWS_WITH_AS(synthesize_dataset(SyntheticKind::Gaussians, 1, 0),
                       "synthetic dataset needs at least two samples", std::invalid_argument);
  CHECK_THROWS_WITH_AS(synthesize_dataset(SyntheticKind::Gaussians, 10, 0, 8.0, 1),
                       "gaussians need at least two classes", std::invalid_argument);
}

TEST_CASE("checkerboard labels follow unit-cell parity") {
  Dataset d = synthesize_dataset(SyntheticKind::Checkerboard, 200, 9);
  CHECK(d.classes == 2);
  for (const DatasetRecord& r : d.records) {
    const double x = r.features[0], y = r.features[1];
    CHECK(x >= -2.0);
    CHECK(x < 2.0);
    CHECK(y >= -2.0);
    CHECK(y < 2.0);
    const long cx = long(std::floor(x)), cy = long(std::floor(y));
    CHECK(r.label == int(((cx + cy) % 2 + 2) % 2));
  }
}

TEST_CASE("synthetic kind names round-trip") {
  CHECK(synthetic_kind_from_name("gaussians") == SyntheticKind::Gaussians);
  CHECK(synthetic_kind_from_name("checkerboard") == SyntheticKind::Checkerboard);
  CHECK(synthetic_kind_name(SyntheticKind::Gaussians) == "gaussians");
  CHECK(synthetic_kind_name(SyntheticKind::Checkerboard) == "checkerboard");
  CHECK_THROWS_WITH_AS(synthetic_kind_from_name("blobs"),
                       "unknown synthetic dataset kind: blobs", std::invalid_argument);
}
