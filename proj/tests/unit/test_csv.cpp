#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <limits>
#include <random>
#include <sstream>

#include "tadam/csv.hpp"

using namespace tadam;

TEST_CASE("format_double round trips") {
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    std::uint64_t bits = rng();
    double x;
    std::memcpy(&x, &bits, sizeof x);
    if (!std::isfinite(x)) continue;
    CHECK(parse_double(format_double(x)) == x);
  }
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(100.0) == "100");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(std::isnan(parse_double("nan")));
}

TEST_CASE("strict number parsing") {
  CHECK(parse_double(" 2.5 ") == 2.5);
  CHECK_THROWS_AS(parse_double("2.5x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_double(""), std::invalid_argument);
  CHECK(parse_integer("-12") == -12);
  CHECK_THROWS_AS(parse_integer("1.5"), std::invalid_argument);
}

TEST_CASE("split and trim") {
  CHECK(split("a,b,,c", ',') == std::vector<std::string>{"a", "b", "", "c"});
  CHECK(trim("  x y \t") == "x y");
}

TEST_CASE("table round trip and column lookup") {
  CsvTable t{{"a", "b"}, {{"1", "x"}, {"2", "y"}}};
  std::stringstream ss;
  write_csv(ss, t);
  CHECK(ss.str() == "a,b\n1,x\n2,y\n");
  auto back = read_csv(ss);
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(back.column("b") == 1);
  try {
    (void)back.column("zzz");
    FAIL("expected out_of_range");
  } catch (const std::out_of_range& e) {
    CHECK(std::string(e.what()).find("zzz") != std::string::npos);
  }
}

TEST_CASE("ragged rows are rejected") {
  std::stringstream ss("a,b\n1\n");
  CHECK_THROWS(read_csv(ss));
}

TEST_CASE("atomic write replaces file content") {
  auto dir = std::filesystem::temp_directory_path() / "tadam_csv_test";
  std::filesystem::create_directories(dir);
  auto path = dir / "f.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  CHECK(read_file(path) == "second");
  for (auto& e : std::filesystem::directory_iterator(dir)) CHECK(e.path().filename() == "f.txt");
  std::filesystem::remove_all(dir);
}
