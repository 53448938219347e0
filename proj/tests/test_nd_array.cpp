#include <stdexcept>

#include <doctest.h>

#include "tfn/nd_array.hpp"

using namespace tfn;

TEST_SUITE_BEGIN("ndarray");

TEST_CASE("construction checks data length against the shape") {
  CHECK_NOTHROW(NdArray({2, 3}, {1, 2, 3, 4, 5, 6}));
  CHECK_THROWS_AS(NdArray({2, 3}, {1, 2, 3}), std::invalid_argument);
}

TEST_CASE("scalars are rank 0 with one element") {
  const NdArray s = NdArray::scalar(4.5);
  CHECK(s.rank() == 0);
  CHECK(s.size() == 1);
  CHECK(s[0] == 4.5);
}

TEST_CASE("broadcast shapes follow the NumPy rules") {
  CHECK(broadcast_shapes({2, 3}, {3}) == std::vector<int64_t>{2, 3});
  CHECK(broadcast_shapes({2, 1, 4}, {5, 1}) == std::vector<int64_t>{2, 5, 4});
  CHECK(broadcast_shapes({}, {2, 2}) == std::vector<int64_t>{2, 2});
  CHECK_THROWS_AS(broadcast_shapes({2, 3}, {4}), std::invalid_argument);
}

TEST_CASE("reduce_to_shape sums over broadcast axes") {
  NdArray big({2, 3}, {1, 2, 3, 4, 5, 6});
  const NdArray row = reduce_to_shape(big, {3});
  CHECK(row[0] == 5);
  CHECK(row[1] == 7);
  CHECK(row[2] == 9);
  const NdArray col = reduce_to_shape(big, {2, 1});
  CHECK(col[0] == 6);
  CHECK(col[1] == 15);
}

TEST_CASE("reshape rejects element-count changes") {
  const NdArray a({2, 3});
  CHECK_NOTHROW(a.reshaped({3, 2}));
  CHECK_THROWS_AS(a.reshaped({4, 2}), std::invalid_argument);
}

TEST_SUITE_END();
