#include <doctest.h>

#include "cornet/error.hpp"
#include "cornet/optimizer.hpp"
#include "cornet/rng.hpp"
#include "test_util.hpp"

using namespace cornet;
using cornet::testing::rand_tensor;

TEST_CASE("zero gradient leaves a parameter unchanged") {
  ParamSet params;
  params.add("p", Tensor({3}, {1.0, -2.0, 0.5}));
  OptimizerState st = OptimizerState::init(params);
  optimizer_step(params, {Tensor({3})}, st);
  CHECK(params.values[0].bit_equal(Tensor({3}, {1.0, -2.0, 0.5})));
  CHECK(st.step == 1);
}

TEST_CASE("learning rate zero leaves all parameters unchanged") {
  Rng rng(5);
  ParamSet params;
  params.add("a", rand_tensor({2, 2}, rng));
  params.add("b", rand_tensor({3}, rng));
  const ParamSet before = params;
  OptimizerState st = OptimizerState::init(params, AdamConfig{.lr = 0.0});
  optimizer_step(params, {rand_tensor({2, 2}, rng), rand_tensor({3}, rng)}, st);
  CHECK(params.values[0].bit_equal(before.values[0]));
  CHECK(params.values[1].bit_equal(before.values[1]));
}

TEST_CASE("first step matches the hand-evaluated bias-corrected update") {
  // p=0, g=1: m=0.1, v=0.001, mhat=1, vhat=1 -> p = -lr/(1+eps)
  ParamSet params;
  params.add("p", Tensor::scalar(0.0));
  OptimizerState st = OptimizerState::init(params);
  optimizer_step(params, {Tensor::scalar(1.0)}, st);
  CHECK(params.values[0][0] == doctest::Approx(-0.0005).epsilon(1e-7));
  CHECK(std::abs(params.values[0][0] + 0.0005) < 1e-10);
}

TEST_CASE("step counter strictly increases") {
  ParamSet params;
  params.add("p", Tensor::scalar(1.0));
  OptimizerState st = OptimizerState::init(params);
  for (int i = 1; i <= 5; ++i) {
    optimizer_step(params, {Tensor::scalar(0.1)}, st);
    CHECK(st.step == i);
  }
}

TEST_CASE("shape mismatch is rejected") {
  ParamSet params;
  params.add("p", Tensor({2, 2}));
  OptimizerState st = OptimizerState::init(params);
  CHECK_THROWS_AS(optimizer_step(params, {Tensor({3})}, st), ShapeError);
  CHECK_THROWS_AS(optimizer_step(params, {}, st), ShapeError);
}

TEST_CASE("update is a pure function of params, grads and state") {
  Rng rng(9);
  ParamSet a;
  a.add("p", rand_tensor({4}, rng));
  ParamSet b = a;
  OptimizerState sa = OptimizerState::init(a);
  OptimizerState sb = OptimizerState::init(b);
  const Tensor g = rand_tensor({4}, rng);
  for (int i = 0; i < 3; ++i) {
    optimizer_step(a, {g}, sa);
    optimizer_step(b, {g}, sb);
  }
  CHECK(a.values[0].bit_equal(b.values[0]));
  CHECK(sa.m[0].bit_equal(sb.m[0]));
  CHECK(sa.v[0].bit_equal(sb.v[0]));
}
