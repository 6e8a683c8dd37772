#pragma once

#include <vector>

#include "snn/parallel.hpp"
#include "snn/tensor.hpp"

namespace snn {

// y += a * x
template <class S>
inline void axpy(S a, const S* __restrict x, S* __restrict y, int n) {
#pragma omp simd
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

// y += x
template <class S>
inline void add_row(const S* __restrict x, S* __restrict y, int n) {
#pragma omp simd
  for (int i = 0; i < n; ++i) y[i] += x[i];
}

template <class S>
inline S dot(const S* __restrict a, const S* __restrict b, int n) {
  S acc = S(0);
#pragma omp simd reduction(+ : acc)
  for (int i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

// cur[b] = Wt^T x[b] accumulated input-major: Wt is [in x out] so each active
// input contributes one contiguous row. Spiking inputs make most rows skip.
template <class S>
inline void gather_current(const Mat<S>& wt, const S* __restrict x, S* __restrict cur) {
  const int in_w = wt.rows;
  const int out_w = wt.cols;
  for (int i = 0; i < out_w; ++i) cur[i] = S(0);
  for (int j = 0; j < in_w; ++j) {
    const S xv = x[j];
    if (xv == S(0)) continue;
    const S* wrow = wt.row(j);
    if (xv == S(1)) {
      add_row(wrow, cur, out_w);
    } else {
      axpy(xv, wrow, cur, out_w);
    }
  }
}

// y = x W + bias with W stored input-major as [m x n]; x is [B x m],
// y is [B x n]. Batch rows shard across threads under Exec::Parallel.
template <class S>
Mat<S> affine(const Mat<S>& x, const Mat<S>& wt, const std::vector<S>* bias, Exec ex) {
  const int batch = x.rows;
  const int m = x.cols;
  const int n = wt.cols;
  if (wt.rows != m) {
    throw DimensionError("affine: input width " + std::to_string(m) +
                         " vs weight rows " + std::to_string(wt.rows));
  }
  if (bias && static_cast<int>(bias->size()) != n) {
    throw DimensionError("affine: bias size " + std::to_string(bias->size()) +
                         " vs output width " + std::to_string(n));
  }
  Mat<S> y(batch, n);
  auto run_rows = [&](int b0, int b1) {
    for (int b = b0; b < b1; ++b) {
      gather_current(wt, x.row(b), y.row(b));
      if (bias) add_row(bias->data(), y.row(b), n);
    }
  };
  if (ex == Exec::Parallel) {
#pragma omp parallel
    {
      const Shard sh = shard_of(batch, thread_id(), team_size());
      run_rows(sh.begin, sh.end);
    }
  } else {
    run_rows(0, batch);
  }
  return y;
}

}  // namespace snn
