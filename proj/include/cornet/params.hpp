#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cornet/error.hpp"
#include "cornet/tensor.hpp"

namespace cornet {

class Tape;

// Named, ordered collection of trainable tensors. The order is the canonical
// alignment for gradients, optimizer accumulators and checkpoints.
struct ParamSet {
  std::vector<std::string> names;
  std::vector<Tensor> values;

  int add(std::string name, Tensor init) {
    names.push_back(std::move(name));
    values.push_back(std::move(init));
    return static_cast<int>(values.size()) - 1;
  }

  std::size_t count() const { return values.size(); }

  std::size_t total_scalars() const {
    std::size_t n = 0;
    for (const Tensor& t : values) n += t.size();
    return n;
  }

  int find(std::string_view name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return static_cast<int>(i);
    return -1;
  }
};

// Registers every parameter as a trainable leaf on the tape; returns node
// ids aligned with the ParamSet order.
std::vector<int> add_param_leaves(Tape& tape, const ParamSet& params);

}  // namespace cornet
