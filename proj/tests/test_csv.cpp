#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "ramankit/csv.hpp"

using namespace ramankit;

namespace {

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / name).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  f << text;
}

}  // namespace

TEST_CASE("csv round trip preserves doubles bitwise") {
  const std::string path = temp_path("ramankit_csv_roundtrip.csv");
  const std::vector<std::vector<double>> rows = {
      {0.1, -3.5, 1.0 / 3.0},
      {1e-300, 6.62607015e-34, 0.0},
      {-0.0, 123456789.123456789, 4.9e307},
  };
  csv::write_table(path, {"a", "b", "c"}, rows);
  const csv::Table t = csv::read_table(path);
  REQUIRE(t.header == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(t.rows.size() == rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(t.rows[i][j] == rows[i][j]);
  std::remove(path.c_str());
}

TEST_CASE("csv rewrite is byte identical") {
  const std::string p1 = temp_path("ramankit_csv_a.csv");
  const std::string p2 = temp_path("ramankit_csv_b.csv");
  const std::vector<std::vector<double>> rows = {{0.30000000000000004, 1e22}};
  csv::write_table(p1, {"x", "y"}, rows);
  csv::write_table(p2, {"x", "y"}, rows);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string s1((std::istreambuf_iterator<char>(f1)), {});
  const std::string s2((std::istreambuf_iterator<char>(f2)), {});
  CHECK(s1 == s2);
  CHECK(!s1.empty());
  std::remove(p1.c_str());
  std::remove(p2.c_str());
}

TEST_CASE("csv errors carry the line number") {
  const std::string path = temp_path("ramankit_csv_bad.csv");

  SUBCASE("non numeric field") {
    write_text(path, "a,b\n1,2\n3,oops\n");
    try {
      csv::read_table(path);
      FAIL("expected a parse error");
    } catch (const std::runtime_error& e) {
      const std::string msg = e.what();
      CHECK(msg.find(":3:") != std::string::npos);
      CHECK(msg.find("oops") != std::string::npos);
    }
  }

  SUBCASE("wrong field count") {
    write_text(path, "a,b\n1,2,3\n");
    try {
      csv::read_table(path);
      FAIL("expected a field count error");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }
  }

  SUBCASE("missing column lookup") {
    write_text(path, "a,b\n1,2\n");
    const csv::Table t = csv::read_table(path);
    CHECK(t.column("b") == 1);
    CHECK_THROWS_AS((void)t.column("z"), std::runtime_error);
  }

  std::remove(path.c_str());
}

TEST_CASE("csv skips comments and blank lines") {
  const std::string path = temp_path("ramankit_csv_comments.csv");
  write_text(path, "# generated\n\na,b\n1,2\n# trailing note\n3,4\n");
  const csv::Table t = csv::read_table(path);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][0] == 3.0);
  std::remove(path.c_str());
}
