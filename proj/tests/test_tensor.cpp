#include <doctest.h>

#include <limits>

#include "cornet/error.hpp"
#include "cornet/tensor.hpp"

using namespace cornet;

TEST_CASE("tensor shape product matches data length") {
  Tensor t({2, 3});
  CHECK(t.size() == 6);
  CHECK(t.rank() == 2);
  CHECK_THROWS_AS(Tensor({2, 3}, {1.0, 2.0}), ShapeError);
}

TEST_CASE("tensor indexing is row-major") {
  Tensor t({2, 3}, {0, 1, 2, 3, 4, 5});
  CHECK(t(0, 2) == 2.0);
  CHECK(t(1, 0) == 3.0);
  Tensor u({2, 2, 2}, {0, 1, 2, 3, 4, 5, 6, 7});
  CHECK(u(1, 0, 1) == 5.0);
}

TEST_CASE("tensor bit equality and finiteness") {
  Tensor a({2}, {1.0, 2.0});
  Tensor b({2}, {1.0, 2.0});
  CHECK(a.bit_equal(b));
  b[1] = 2.0 + 1e-16;
  CHECK(a.bit_equal(b));  // same double after rounding
  b[1] = 2.5;
  CHECK_FALSE(a.bit_equal(b));
  b[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_FALSE(b.all_finite());
  CHECK(a.all_finite());
}

TEST_CASE("scalar helper") {
  Tensor s = Tensor::scalar(3.5);
  CHECK(s.is_scalar());
  CHECK(s[0] == 3.5);
  CHECK(shape_str(s.shape()) == "[1]");
}
