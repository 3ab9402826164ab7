#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cornet/annotations.hpp"
#include "cornet/tensor.hpp"

namespace cornet {

// Fixed label-embedding matrix W_e, one row per vocabulary entry. Rows stay
// frozen during training; only the correlation projections learn.
struct SemanticSpace {
  enum class Provenance { File, Synthetic };

  Tensor we;  // [N, D_e]
  std::size_t embed_dim = 0;
  Provenance provenance = Provenance::File;
};

// JSON object mapping label -> array of numbers. Rows are aligned to the
// vocabulary order regardless of file order; extra labels are ignored.
SemanticSpace load_semantic_space(const std::string& path,
                                  const ClassVocabulary& vocab);

void save_semantic_space(const std::string& path, const SemanticSpace& space,
                         const ClassVocabulary& vocab);

// Seeded Gaussian rows. Labels in an affinity pair share a common random
// component, giving them higher mutual cosine similarity in expectation.
SemanticSpace synthetic_semantic_space(
    const ClassVocabulary& vocab, std::size_t embed_dim, std::uint64_t seed,
    const std::vector<std::pair<std::size_t, std::size_t>>& affinity = {});

double cosine_similarity(const Tensor& matrix, std::size_t row_a,
                         std::size_t row_b);

}  // namespace cornet
