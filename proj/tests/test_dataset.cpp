#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>

#include "imblab/dataset.hpp"

using namespace imblab;

namespace {

std::string temp_path(const std::string& name) { return (std::filesystem::temp_directory_path() / ("imblab_ds_" + name)).string(); }

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an imblab::Error");
  return ErrorCode::NoData;
}

}  // namespace

TEST_CASE("construction validates shape and labels") {
  Matrix x(3, 2);
  x << 1, 2, 3, 4, 5, 6;
  LabeledDataset ds(x, {0, 1, 1});
  CHECK(ds.size() == 3);
  CHECK(ds.dim() == 2);
  CHECK(ds.count(0) == 1);
  CHECK(ds.count(1) == 2);
  CHECK(ds.rows_of(1) == std::vector<std::size_t>{1, 2});
  CHECK(code_of([&] { LabeledDataset(x, {0, 1}); }) == ErrorCode::LengthMismatch);
  CHECK(code_of([&] { LabeledDataset(x, {0, 2, 1}); }) == ErrorCode::InvalidLabel);
  CHECK(code_of([&] { LabeledDataset(x, {1, 1, 1}).require_both_classes("t"); }) == ErrorCode::EmptyClass);
}

TEST_CASE("subset and concat preserve rows") {
  Matrix x(4, 1);
  x << 10, 11, 12, 13;
  LabeledDataset ds(x, {0, 0, 1, 1});
  const std::vector<std::size_t> rows{3, 0};
  auto sub = ds.subset(rows);
  CHECK(sub.features()(0, 0) == 13);
  CHECK(sub.labels() == Labels{1, 0});
  auto both = concat(ds, sub);
  CHECK(both.size() == 6);
  CHECK(both.features()(5, 0) == 10);
  Matrix wide(1, 2);
  wide << 1, 2;
  CHECK(code_of([&] { concat(ds, LabeledDataset(wide, {0})); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("CSV round trip is exact") {
  Matrix x(3, 2);
  x << 0.1, -1e-300, std::numeric_limits<double>::max(), 1.0 / 3.0, -0.0, 123456789.123456789;
  LabeledDataset ds(x, {0, 1, 0});
  const auto path = temp_path("roundtrip.csv");
  write_dataset_csv(ds, path);
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  CHECK(header == "x1,x2,y");
  const auto back = read_dataset_csv(path);
  CHECK(back.labels() == ds.labels());
  CHECK(back.features() == ds.features());
  std::remove(path.c_str());
}

TEST_CASE("CSV reader reports malformed input") {
  const auto path = temp_path("bad.csv");
  write_file(path, "x1,y\n1.5,0\nabc,1\n");
  try {
    read_dataset_csv(path);
    FAIL("no error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ParseError);
    CHECK(std::string(e.what()).find(":3") != std::string::npos);
  }
  write_file(path, "x1,y\n1.5,3\n");
  CHECK(code_of([&] { read_dataset_csv(path); }) == ErrorCode::InvalidLabel);
  write_file(path, "x1,y\n1.5\n");
  CHECK(code_of([&] { read_dataset_csv(path); }) == ErrorCode::ParseError);
  std::remove(path.c_str());
  CHECK(code_of([&] { read_dataset_csv(path); }) == ErrorCode::IoError);
}
