#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "snn/tensor.hpp"

namespace snn {

template <class S>
struct LossResult {
  double loss = 0.0;   // mean over the batch
  Mat<S> dlogits;      // d(loss)/d(logits), already divided by batch size
};

// Softmax cross-entropy, logsumexp-stabilized. Gradient is
// (softmax - onehot) / B.
template <class S>
LossResult<S> cross_entropy(const Mat<S>& logits, const std::vector<std::uint32_t>& labels) {
  const int batch = logits.rows;
  const int classes = logits.cols;
  if (batch < 1) throw DataError("cross_entropy: empty batch");
  if (static_cast<int>(labels.size()) != batch) {
    throw DimensionError("cross_entropy: " + std::to_string(labels.size()) +
                         " labels for batch of " + std::to_string(batch));
  }
  LossResult<S> res;
  res.dlogits = Mat<S>(batch, classes);
  double total = 0.0;
  const double inv_b = 1.0 / batch;
  for (int b = 0; b < batch; ++b) {
    if (labels[b] >= static_cast<std::uint32_t>(classes)) {
      throw DataError("cross_entropy: label " + std::to_string(labels[b]) +
                      " out of range for " + std::to_string(classes) + " classes");
    }
    const S* row = logits.row(b);
    double mx = row[0];
    for (int c = 1; c < classes; ++c) mx = std::max(mx, static_cast<double>(row[c]));
    double sum = 0.0;
    for (int c = 0; c < classes; ++c) sum += std::exp(static_cast<double>(row[c]) - mx);
    const double lse = mx + std::log(sum);
    total += lse - static_cast<double>(row[labels[b]]);
    S* g = res.dlogits.row(b);
    for (int c = 0; c < classes; ++c) {
      const double p = std::exp(static_cast<double>(row[c]) - lse);
      g[c] = static_cast<S>(p * inv_b);
    }
    g[labels[b]] -= static_cast<S>(inv_b);
  }
  res.loss = total * inv_b;
  if (!std::isfinite(res.loss)) throw NumericError("cross_entropy: non-finite loss");
  return res;
}

// Mean cross-entropy over every time step of a per-step logit sequence, with
// the same label applied at each step; the evaluation objective for
// ReadoutMode::PerStep.
template <class S>
double cross_entropy_per_step(const Seq<S>& step_logits,
                              const std::vector<std::uint32_t>& labels) {
  if (step_logits.steps < 1) throw DataError("cross_entropy_per_step: empty sequence");
  double total = 0.0;
  for (int t = 0; t < step_logits.steps; ++t) {
    Mat<S> slice(step_logits.batch, step_logits.channels);
    for (int b = 0; b < step_logits.batch; ++b) {
      const S* src = step_logits.at(b, t);
      std::copy(src, src + step_logits.channels, slice.row(b));
    }
    total += cross_entropy(slice, labels).loss;
  }
  return total / step_logits.steps;
}

template <class S>
int argmax_row(const S* row, int n) {
  int best = 0;
  for (int c = 1; c < n; ++c) {
    if (row[c] > row[best]) best = c;
  }
  return best;
}

template <class S>
double accuracy(const Mat<S>& logits, const std::vector<std::uint32_t>& labels) {
  if (static_cast<int>(labels.size()) != logits.rows) {
    throw DimensionError("accuracy: label count mismatch");
  }
  if (logits.rows == 0) throw DataError("accuracy: empty batch");
  int hits = 0;
  for (int b = 0; b < logits.rows; ++b) {
    if (argmax_row(logits.row(b), logits.cols) == static_cast<int>(labels[b])) ++hits;
  }
  return static_cast<double>(hits) / logits.rows;
}

}  // namespace snn
