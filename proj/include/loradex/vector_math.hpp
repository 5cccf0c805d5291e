#ifndef LORADEX_VECTOR_MATH_HPP
#define LORADEX_VECTOR_MATH_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace loradex {

/// Stored embeddings keep encoder precision.
using EmbeddingVector = std::vector<float>;
/// Everything derived from embeddings (diffs, means, query vectors) is 64-bit.
using Vector = std::vector<double>;

template <class T, class U>
double dot(std::span<const T> a, std::span<const U> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  }
  return acc;
}

template <class T>
double norm(std::span<const T> v) {
  return std::sqrt(dot(v, v));
}

inline double norm(const Vector& v) { return norm(std::span<const double>(v)); }

/// Cosine similarity; callers must guarantee both norms are nonzero.
template <class T, class U>
double cosine(std::span<const T> a, std::span<const U> b) {
  return dot(a, b) / (norm(a) * norm(b));
}

template <class T>
bool all_finite(std::span<const T> v) {
  return std::all_of(v.begin(), v.end(), [](T x) { return std::isfinite(x); });
}

namespace detail {

inline constexpr std::size_t kPairwiseBlock = 16;

template <class AddRow>
void pairwise_row_sum(std::size_t begin, std::size_t end, std::span<double> out, AddRow& add_row) {
  if (end - begin <= kPairwiseBlock) {
    std::fill(out.begin(), out.end(), 0.0);
    for (std::size_t i = begin; i < end; ++i) add_row(i, out);
    return;
  }
  const std::size_t mid = begin + (end - begin) / 2;
  pairwise_row_sum(begin, mid, out, add_row);
  Vector right(out.size());
  pairwise_row_sum(mid, end, std::span<double>(right), add_row);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += right[j];
}

}  // namespace detail

/// Sums `count` rows of width `dim` with pairwise (tree) reduction.
/// `add_row(i, acc)` must add row i into the accumulator span.
template <class AddRow>
Vector pairwise_row_sum(std::size_t count, std::size_t dim, AddRow&& add_row) {
  Vector out(dim, 0.0);
  if (count == 0) return out;
  detail::pairwise_row_sum(0, count, std::span<double>(out), add_row);
  return out;
}

/// Pairwise summation of scalars.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= detail::kPairwiseBlock) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return acc;
  }
  const std::size_t mid = xs.size() / 2;
  return pairwise_sum(xs.first(mid)) + pairwise_sum(xs.subspan(mid));
}

}  // namespace loradex

#endif  // LORADEX_VECTOR_MATH_HPP
