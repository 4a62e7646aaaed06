#include <doctest.h>

#include "gspec/error.hpp"
#include "gspec/split.hpp"
#include "oracles.hpp"

using gspec::ErrorCode;
using gspec::make_split;
using gspec::SplitSpec;

TEST_CASE("default rule takes half the sample for fitting and all for checking") {
  SplitSpec s = make_split(200);
  CHECK(s.n == 200);
  CHECK(s.fit_len == 100);
  CHECK(s.check_len == 200);
  CHECK(s.check_start() == 1);
  CHECK(s.lag_count(1) == 200);
  CHECK(s.lag_count(200) == 1);
  CHECK(s.valid());
}

TEST_CASE("default rule floors odd lengths") {
  SplitSpec s = make_split(9);
  CHECK(s.fit_len == 4);
  CHECK(s.check_len == 9);
  CHECK(s.check_start() == 1);
}

TEST_CASE("custom split covers a trailing checking window") {
  SplitSpec s = make_split(100, 100, 100);
  CHECK(s.fit_len == 100);
  CHECK(s.check_len == 100);
  CHECK(s.check_start() == 1);
  CHECK(s.lag_count(40) == 61);

  SplitSpec tail = make_split(100, 50, 30);
  CHECK(tail.check_start() == 71);
  CHECK(tail.lag_count(30) == 1);
}

TEST_CASE("short series and impossible geometries are rejected") {
  CHECK(oracle::caught_code([] { make_split(7); }) == ErrorCode::InvalidSplit);
  CHECK(oracle::caught_code([] { make_split(7, 3, 7); }) == ErrorCode::InvalidSplit);
  CHECK(oracle::caught_code([] { make_split(20, 0, 20); }) == ErrorCode::InvalidSplit);
  CHECK(oracle::caught_code([] { make_split(20, 21, 20); }) == ErrorCode::InvalidSplit);
  CHECK(oracle::caught_code([] { make_split(20, 10, 0); }) == ErrorCode::InvalidSplit);
  CHECK(oracle::caught_code([] { make_split(20, 10, 21); }) == ErrorCode::InvalidSplit);
  CHECK(make_split(8).fit_len == 4);
}

TEST_CASE("validity predicate matches the constructor rules") {
  CHECK_FALSE(SplitSpec{0, 0, 0}.valid());
  CHECK_FALSE(SplitSpec{10, 0, 10}.valid());
  CHECK_FALSE(SplitSpec{10, 11, 10}.valid());
  CHECK_FALSE(SplitSpec{10, 5, 11}.valid());
  CHECK(SplitSpec{10, 5, 10}.valid());
  CHECK(SplitSpec{4, 1, 3}.valid()); // direct construction has no n >= 8 gate
}
