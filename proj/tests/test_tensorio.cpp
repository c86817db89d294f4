#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "attnlab/rng.hpp"
#include "attnlab/tensorio.hpp"

using namespace attnlab;

namespace {

std::filesystem::path temp_file(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

}  // namespace

TEST_SUITE("tensorio") {

TEST_CASE("save and load round trip through f32") {
  const CounterRng rng(3, 0, 0);
  Matrix m(5, 3);
  for (std::size_t i = 0; i < 15; ++i) m(i / 3, i % 3) = rng.gaussian(i);
  const auto path = temp_file("attnlab_roundtrip.tensor");
  save_tensor(path, m);
  const Matrix loaded = load_tensor(path);
  REQUIRE(loaded.rows() == 5);
  REQUIRE(loaded.cols() == 3);
  for (std::size_t i = 0; i < 15; ++i) {
    const double expect =
        static_cast<double>(static_cast<float>(m.data()[i]));
    CHECK(loaded.data()[i] == expect);
  }
  std::filesystem::remove(path);
}

TEST_CASE("header line is the documented constant form") {
  const auto path = temp_file("attnlab_header.tensor");
  save_tensor(path, Matrix(2, 4));
  std::ifstream in(path, std::ios::binary);
  std::string header;
  std::getline(in, header);
  CHECK(header ==
        "{\"rows\":2,\"cols\":4,\"dtype\":\"f32\",\"order\":\"row-major\"}");
  std::filesystem::remove(path);
}

TEST_CASE("truncated payload is an io error") {
  const auto path = temp_file("attnlab_truncated.tensor");
  {
    std::ofstream out(path, std::ios::binary);
    out << "{\"rows\":2,\"cols\":2,\"dtype\":\"f32\",\"order\":\"row-major\"}\n";
    out << "xx";  // 2 bytes instead of 16
  }
  CHECK_THROWS_AS(load_tensor(path), IoError);
  std::filesystem::remove(path);
}

TEST_CASE("bad header is an io error") {
  const auto path = temp_file("attnlab_badheader.tensor");
  {
    std::ofstream out(path, std::ios::binary);
    out << "{\"rows\":2}\n";
  }
  CHECK_THROWS_AS(load_tensor(path), IoError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(load_tensor(temp_file("attnlab_missing.tensor")), IoError);
}

}  // TEST_SUITE
