#include "aloe/gateway/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "aloe/common/error.hpp"

namespace aloe::gateway {

namespace {

// Below this many rows the thread fork costs more than the scan.
constexpr std::size_t kParallelRows = 512;

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void check_shape(std::span<const double> rows, std::size_t dim, std::span<const double> query) {
  if (dim == 0 || query.size() != dim || rows.size() % dim != 0)
    throw Error(ErrorCode::DimensionMismatch, "query dimension " + std::to_string(query.size()) +
                                                  " does not match index dimension " + std::to_string(dim));
}

}  // namespace

double cosine_similarity(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size() || u.empty())
    throw Error(ErrorCode::DimensionMismatch,
                "cosine of vectors with dimensions " + std::to_string(u.size()) + " and " + std::to_string(v.size()));
  const double uv = dot(u.data(), v.data(), u.size());
  const double uu = dot(u.data(), u.data(), u.size());
  const double vv = dot(v.data(), v.data(), v.size());
  const double denom = std::sqrt(uu) * std::sqrt(vv);
  if (!(denom > 0.0)) throw Error(ErrorCode::InvalidArgument, "cosine of a zero vector");
  return std::clamp(uv / denom, -1.0, 1.0);
}

double cosine_similarity(const EmbeddingVector& u, const EmbeddingVector& v) {
  return cosine_similarity(u.values(), v.values());
}

namespace kernels {

std::optional<double> max_dot_serial(std::span<const double> rows, std::size_t dim, std::span<const double> query) {
  check_shape(rows, dim, query);
  const std::size_t n = rows.size() / dim;
  if (n == 0) return std::nullopt;
  double best = -std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < n; ++r) best = std::max(best, dot(rows.data() + r * dim, query.data(), dim));
  return std::clamp(best, -1.0, 1.0);
}

std::optional<double> max_dot_parallel(std::span<const double> rows, std::size_t dim, std::span<const double> query) {
  check_shape(rows, dim, query);
  const std::size_t n = rows.size() / dim;
  if (n == 0) return std::nullopt;
  const double* base = rows.data();
  const double* q = query.data();
  double best = -std::numeric_limits<double>::infinity();
  const long long count = static_cast<long long>(n);
#pragma omp parallel for reduction(max : best) schedule(static) if (n >= kParallelRows)
  for (long long r = 0; r < count; ++r) {
    best = std::max(best, dot(base + static_cast<std::size_t>(r) * dim, q, dim));
  }
  return std::clamp(best, -1.0, 1.0);
}

}  // namespace kernels

void SimilarityIndex::add(const EmbeddingVector& v) {
  if (dim_ == 0) dim_ = v.dimension();
  if (v.dimension() != dim_)
    throw Error(ErrorCode::DimensionMismatch,
                "index holds dimension " + std::to_string(dim_) + ", got " + std::to_string(v.dimension()));
  rows_.insert(rows_.end(), v.values().begin(), v.values().end());
}

std::optional<double> SimilarityIndex::max_similarity(const EmbeddingVector& query) const {
  if (dim_ == 0) return std::nullopt;
  return kernels::max_dot_parallel(rows_, dim_, query.values());
}

}  // namespace aloe::gateway
