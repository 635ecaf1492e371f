#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "aloe/gateway/types.hpp"

namespace aloe::gateway {

// dot(u, v) / (|u| |v|), clamped to [-1, 1]. Throws DimensionMismatch.
double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v);
double cosine_similarity(std::span<const double> u, std::span<const double> v);

namespace kernels {

// Largest dot product between `query` and any row of a row-major matrix
// with `dim` columns. Rows must be unit vectors for this to be a cosine.
// Returns nullopt for an empty matrix.
std::optional<double> max_dot_serial(std::span<const double> rows, std::size_t dim, std::span<const double> query);
std::optional<double> max_dot_parallel(std::span<const double> rows, std::size_t dim, std::span<const double> query);

}  // namespace kernels

// Contiguous store of unit vectors for repeated max-similarity queries.
class SimilarityIndex {
 public:
  SimilarityIndex() = default;

  void add(const EmbeddingVector& v);

  // Max cosine against every stored vector; nullopt when empty.
  std::optional<double> max_similarity(const EmbeddingVector& query) const;

  std::size_t size() const noexcept { return dim_ == 0 ? 0 : rows_.size() / dim_; }
  std::size_t dimension() const noexcept { return dim_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> rows_;
};

}  // namespace aloe::gateway
