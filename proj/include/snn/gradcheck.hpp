#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "snn/error.hpp"

namespace snn {

using ScalarFn = std::function<double(const std::vector<double>&)>;

// Central-difference gradient of a scalar function, double precision.
// Independent of any backward pass; used as the numerical oracle.
inline std::vector<double> finite_diff_grad(const ScalarFn& f,
                                            std::vector<double> theta,
                                            double h) {
  if (!(h > 0.0)) throw OracleError("finite_diff_grad: step must be positive");
  std::vector<double> g(theta.size(), 0.0);
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double saved = theta[i];
    theta[i] = saved + h;
    const double fp = f(theta);
    theta[i] = saved - h;
    const double fm = f(theta);
    theta[i] = saved;
    if (!std::isfinite(fp) || !std::isfinite(fm)) {
      throw OracleError("finite_diff_grad: non-finite probe value at index " +
                        std::to_string(i));
    }
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("max_abs_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

// max_i |a_i - b_i| / max(1, |a_i|, |b_i|): relative where values are large,
// absolute near zero.
inline double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("max_rel_diff: size mismatch");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double scale = std::max({1.0, std::abs(a[i]), std::abs(b[i])});
    m = std::max(m, std::abs(a[i] - b[i]) / scale);
  }
  return m;
}

}  // namespace snn
