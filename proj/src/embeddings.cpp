#include "cornet/embeddings.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "cornet/error.hpp"
#include "cornet/rng.hpp"

namespace cornet {

using nlohmann::json;

SemanticSpace load_semantic_space(const std::string& path,
                                  const ClassVocabulary& vocab) {
  std::ifstream in(path);
  if (!in) throw Error("embeddings: cannot open " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError("embeddings: " + path + ": " + e.what());
  }
  if (!j.is_object())
    throw ParseError("embeddings: " + path + ": not a JSON object");

  std::size_t dim = 0;
  std::vector<std::vector<double>> rows(vocab.size());
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    const std::string& label = vocab.labels[c];
    auto it = j.find(label);
    if (it == j.end())
      throw ParseError("embeddings: " + path + ": missing label '" + label +
                       "'");
    if (!it->is_array())
      throw ParseError("embeddings: " + path + ": label '" + label +
                       "' is not an array");
    std::vector<double> row;
    row.reserve(it->size());
    for (const auto& v : *it) {
      if (!v.is_number())
        throw ParseError("embeddings: " + path + ": label '" + label +
                         "' has a non-numeric entry");
      const double x = v.get<double>();
      if (!std::isfinite(x))
        throw ParseError("embeddings: " + path + ": label '" + label +
                         "' has a non-finite value");
      row.push_back(x);
    }
    if (dim == 0) dim = row.size();
    if (row.size() != dim || dim == 0)
      throw ParseError("embeddings: " + path + ": label '" + label +
                       "' has width " + std::to_string(row.size()) +
                       ", expected " + std::to_string(dim));
    rows[c] = std::move(row);
  }

  SemanticSpace space;
  space.embed_dim = dim;
  space.provenance = SemanticSpace::Provenance::File;
  space.we = Tensor({vocab.size(), dim});
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    bool all_zero = true;
    for (std::size_t d = 0; d < dim; ++d) {
      space.we(c, d) = rows[c][d];
      if (rows[c][d] != 0.0) all_zero = false;
    }
    if (all_zero)
      throw ParseError("embeddings: " + path + ": label '" + vocab.labels[c] +
                       "' has an all-zero embedding");
  }
  return space;
}

void save_semantic_space(const std::string& path, const SemanticSpace& space,
                         const ClassVocabulary& vocab) {
  std::ofstream out(path);
  if (!out) throw Error("embeddings: cannot write " + path);
  json j = json::object();
  for (std::size_t c = 0; c < vocab.size(); ++c) {
    json row = json::array();
    for (std::size_t d = 0; d < space.embed_dim; ++d)
      row.push_back(space.we(c, d));
    j[vocab.labels[c]] = std::move(row);
  }
  out << j.dump() << "\n";
}

SemanticSpace synthetic_semantic_space(
    const ClassVocabulary& vocab, std::size_t embed_dim, std::uint64_t seed,
    const std::vector<std::pair<std::size_t, std::size_t>>& affinity) {
  if (embed_dim < 2)
    throw Error("synthetic_semantic_space: embed_dim must be >= 2, got " +
                std::to_string(embed_dim));
  const std::size_t n = vocab.size();
  Rng rng(seed);
  Tensor we({n, embed_dim});
  for (std::size_t c = 0; c < n; ++c)
    for (std::size_t d = 0; d < embed_dim; ++d) we(c, d) = rng.normal();
  for (const auto& [a, b] : affinity) {
    if (a >= n || b >= n)
      throw Error("synthetic_semantic_space: affinity pair out of range");
    // Shared component raises the expected pair cosine above the background.
    for (std::size_t d = 0; d < embed_dim; ++d) {
      const double shared = rng.normal();
      we(a, d) += shared;
      we(b, d) += shared;
    }
  }
  SemanticSpace space;
  space.we = std::move(we);
  space.embed_dim = embed_dim;
  space.provenance = SemanticSpace::Provenance::Synthetic;
  return space;
}

double cosine_similarity(const Tensor& matrix, std::size_t row_a,
                         std::size_t row_b) {
  const std::size_t d = matrix.dim(1);
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    dot += matrix(row_a, i) * matrix(row_b, i);
    na += matrix(row_a, i) * matrix(row_a, i);
    nb += matrix(row_b, i) * matrix(row_b, i);
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

}  // namespace cornet
