#pragma once

#include <cmath>

#include "snn/error.hpp"

namespace snn {

// Triangular pseudo-derivative of the spike nonlinearity:
//   g(u) = (1/gamma^2) * max(0, gamma - |u - v_th|)
// Peak 1/gamma at threshold, support width 2*gamma, unit area.
template <class S>
inline S triangle_surrogate(S u, S v_th, S gamma) {
  const S a = gamma - std::abs(u - v_th);
  return a > S(0) ? a / (gamma * gamma) : S(0);
}

// Integral of the triangle: a C1 ramp from 0 to 1 over [v_th - gamma,
// v_th + gamma]. Used by the gradient oracle as a smoothed spike whose exact
// derivative is triangle_surrogate.
template <class S>
inline S triangle_ramp(S u, S v_th, S gamma) {
  const S x = u - v_th;
  if (x <= -gamma) return S(0);
  if (x >= gamma) return S(1);
  if (x <= S(0)) {
    const S a = x + gamma;
    return a * a / (S(2) * gamma * gamma);
  }
  const S a = gamma - x;
  return S(1) - a * a / (S(2) * gamma * gamma);
}

// Heaviside step with an inclusive threshold: u == v_th fires.
template <class S>
inline S heaviside(S u, S v_th) {
  return u >= v_th ? S(1) : S(0);
}

}  // namespace snn
