#include <doctest.h>

#include <cmath>

#include "fixtures.hpp"
#include "lmm/cli/csv.hpp"

using namespace lmm;
using lmm::cli::IoError;
using lmm::cli::parse_csv;

TEST_CASE("sleepstudy fixture") {
  const auto t = sleepstudy();
  CHECK(t.nrow() == 180);
  CHECK(t.ncol() == 3);
  CHECK(t.at("Reaction").is_numeric());
  CHECK(t.at("Days").is_numeric());
  CHECK_FALSE(t.at("Subject").is_numeric());
  CHECK(t.at("Subject").levels.size() == 18);
}

TEST_CASE("typing rules") {
  const auto t = parse_csv("a,b,c\n1,1,\n2,2,3.5\n3,x,NA\n");
  CHECK(t.at("a").is_numeric());
  CHECK_FALSE(t.at("b").is_numeric());
  CHECK(t.at("b").levels == std::vector<std::string>{"1", "2", "x"});
  CHECK(t.at("c").is_numeric());
  CHECK(std::isnan(t.at("c").numbers[0]));
  CHECK(t.at("c").numbers[1] == 3.5);
  CHECK(t.at("c").is_na(2));
}

TEST_CASE("RFC-4180 quoting") {
  const auto t = parse_csv("name,v\r\n\"a, b\",1\r\n\"say \"\"hi\"\"\",2\r\n\"multi\nline\",3\r\n");
  CHECK(t.nrow() == 3);
  CHECK(t.at("name").levels[0] == "a, b");
  CHECK(t.at("name").levels[1] == "say \"hi\"");
  CHECK(t.at("name").levels[2] == "multi\nline");
  CHECK(t.at("v").numbers[2] == 3.0);
  // Quoted digits are text.
  CHECK_FALSE(parse_csv("g\n\"1\"\n\"2\"\n").at("g").is_numeric());
}

TEST_CASE("malformed input") {
  CHECK_THROWS_AS(parse_csv(""), IoError);
  CHECK_THROWS_WITH_AS(parse_csv("a,b\n1,2\n3\n"), "cli: line 3 has 1 fields, expected 2", IoError);
  CHECK_THROWS_WITH_AS(parse_csv("a,a\n1,2\n"), "cli: duplicate column name 'a' in header", IoError);
  CHECK_THROWS_AS(parse_csv("a\n\"open\n"), IoError);
  CHECK_THROWS_AS(cli::read_csv("/nonexistent/file.csv"), IoError);
}
