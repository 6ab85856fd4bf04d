#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include "mcltsgd/csv.hpp"
#include "mcltsgd/errors.hpp"

using namespace mcltsgd;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

}  // namespace

TEST_SUITE("csv") {

TEST_CASE("doubles round-trip bit-exactly through their text form") {
  for (double x : {0.1, 1.0 / 3.0, std::numbers::pi, -2.5e-308, 1.0e300,
                   123456789.123456789, -0.0, 4097.0,
                   std::nextafter(1.0, 2.0)}) {
    const std::string text = io::format_double(x);
    const double back = std::strtod(text.c_str(), nullptr);
    CHECK(std::memcmp(&back, &x, sizeof(double)) == 0);
  }
  CHECK(io::format_double(1.0) == "1");
  CHECK(io::format_double(0.5) == "0.5");
}

TEST_CASE("config fingerprint hash matches the published test vectors") {
  CHECK(io::fnv1a("") == 0xcbf29ce484222325ULL);
  CHECK(io::fnv1a("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(io::fnv1a("foobar") == 0x85944171f73967e8ULL);
  CHECK(io::hex64(0) == "0000000000000000");
  CHECK(io::hex64(0xcbf29ce484222325ULL) == "cbf29ce484222325");
}

TEST_CASE("table writer: layout, comments, strict cells") {
  io::CsvWriter w({"n", "value"});
  w.add_comment("meta line");
  w.add_row({"1", "0.5"});
  w.add_row({"2", "0.25"});
  w.add_footer_comment("slope -1");
  CHECK(w.row_count() == 2);
  CHECK(w.str() ==
        "# meta line\n"
        "n,value\n"
        "1,0.5\n"
        "2,0.25\n"
        "# slope -1\n");

  CHECK_THROWS_AS(w.add_row({"only one"}), ConfigError);
  CHECK_THROWS_AS(w.add_row({"a,b", "c"}), ConfigError);
  CHECK_THROWS_AS(w.add_row({"quote\"", "c"}), ConfigError);
  CHECK_THROWS_AS(io::CsvWriter({}), ConfigError);
  CHECK_THROWS_AS(io::CsvWriter({"bad,name"}), ConfigError);
}

TEST_CASE("atomic writes create directories and replace contents") {
  const auto dir = std::filesystem::temp_directory_path() / "mcltsgd_csv_test";
  std::filesystem::remove_all(dir);
  const std::string path = (dir / "nested" / "out.txt").string();

  io::write_text_atomic(path, "first\n");
  CHECK(slurp(path) == "first\n");
  io::write_text_atomic(path, "second\n");
  CHECK(slurp(path) == "second\n");
  // No stray temporary remains next to the artifact.
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));

  io::CsvWriter w({"x"});
  w.add_row({"42"});
  const std::string table_path = (dir / "table.csv").string();
  w.write(table_path);
  CHECK(slurp(table_path) == "x\n42\n");

  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
