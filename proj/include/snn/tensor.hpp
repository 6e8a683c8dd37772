#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "snn/error.hpp"

namespace snn {

static_assert(std::endian::native == std::endian::little,
              "binary artifact formats assume a little-endian host");

namespace detail {

inline std::string shape2(int r, int c) {
  return "[" + std::to_string(r) + " x " + std::to_string(c) + "]";
}

inline std::string shape3(int b, int t, int c) {
  return "[" + std::to_string(b) + " x " + std::to_string(t) + " x " +
         std::to_string(c) + "]";
}

template <class S>
bool span_finite(const S* p, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(static_cast<double>(p[i]))) return false;
  }
  return true;
}

}  // namespace detail

// Dense row-major matrix. Rows are the batch / output dimension in most of
// the library; the element type is float for training and double for
// oracle-grade checks.
template <class S>
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<S> v;

  Mat() = default;
  Mat(int r, int c) : rows(r), cols(c) {
    if (r < 0 || c < 0) throw DimensionError("Mat: negative shape " + detail::shape2(r, c));
    v.assign(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), S(0));
  }

  // Adopts `data`; validates the shape product and, when `checked`, rejects
  // non-finite entries.
  static Mat from(int r, int c, std::vector<S> data, bool checked = true) {
    if (r < 0 || c < 0) throw DimensionError("Mat: negative shape " + detail::shape2(r, c));
    if (data.size() != static_cast<std::size_t>(r) * static_cast<std::size_t>(c)) {
      throw DimensionError("Mat: shape " + detail::shape2(r, c) + " needs " +
                           std::to_string(static_cast<std::size_t>(r) * c) +
                           " values, got " + std::to_string(data.size()));
    }
    Mat m;
    m.rows = r;
    m.cols = c;
    m.v = std::move(data);
    if (checked && !m.all_finite()) throw NumericError("Mat: non-finite entry");
    return m;
  }

  S* row(int r) { return v.data() + static_cast<std::size_t>(r) * cols; }
  const S* row(int r) const { return v.data() + static_cast<std::size_t>(r) * cols; }

  S& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  const S& at(int r, int c) const { return v[static_cast<std::size_t>(r) * cols + c]; }

  std::size_t size() const { return v.size(); }
  bool empty() const { return v.empty(); }

  bool all_finite() const { return detail::span_finite(v.data(), v.size()); }

  void require_shape(int r, int c, const char* what) const {
    if (rows != r || cols != c) {
      throw DimensionError(std::string(what) + ": expected " + detail::shape2(r, c) +
                           ", got " + detail::shape2(rows, cols));
    }
  }

  void fill(S x) { std::fill(v.begin(), v.end(), x); }
};

// Dense [batch, steps, channels] sequence block, row-major with the channel
// axis contiguous.
template <class S>
struct Seq {
  int batch = 0;
  int steps = 0;
  int channels = 0;
  std::vector<S> v;

  Seq() = default;
  Seq(int b, int t, int c) : batch(b), steps(t), channels(c) {
    if (b < 0 || t < 0 || c < 0) {
      throw DimensionError("Seq: negative shape " + detail::shape3(b, t, c));
    }
    v.assign(static_cast<std::size_t>(b) * t * c, S(0));
  }

  static Seq from(int b, int t, int c, std::vector<S> data, bool checked = true) {
    if (b < 0 || t < 0 || c < 0) {
      throw DimensionError("Seq: negative shape " + detail::shape3(b, t, c));
    }
    const std::size_t need = static_cast<std::size_t>(b) * t * c;
    if (data.size() != need) {
      throw DimensionError("Seq: shape " + detail::shape3(b, t, c) + " needs " +
                           std::to_string(need) + " values, got " +
                           std::to_string(data.size()));
    }
    Seq s;
    s.batch = b;
    s.steps = t;
    s.channels = c;
    s.v = std::move(data);
    if (checked && !s.all_finite()) throw NumericError("Seq: non-finite entry");
    return s;
  }

  S* at(int b, int t) {
    return v.data() + (static_cast<std::size_t>(b) * steps + t) * channels;
  }
  const S* at(int b, int t) const {
    return v.data() + (static_cast<std::size_t>(b) * steps + t) * channels;
  }

  std::size_t size() const { return v.size(); }
  bool empty() const { return v.empty(); }

  bool all_finite() const { return detail::span_finite(v.data(), v.size()); }
};

using Mat32 = Mat<float>;
using Mat64 = Mat<double>;
using Seq32 = Seq<float>;
using Seq64 = Seq<double>;

template <class S>
void require_finite(const S* p, std::size_t n, const char* what) {
  if (!detail::span_finite(p, n)) {
    throw NumericError(std::string(what) + ": non-finite value");
  }
}

}  // namespace snn
