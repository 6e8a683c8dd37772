#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "snn/error.hpp"
#include "snn/surrogate.hpp"
#include "snn/tensor.hpp"

namespace snn {

// Leaky integrate-and-fire cell constants. decay is the membrane leak
// multiplier per step, v_th the firing threshold, gamma the surrogate
// half-width.
struct LifParams {
  double decay = 1.0;
  double v_th = 0.5;
  double gamma = 0.4;

  void validate() const {
    if (!(decay >= 0.0 && decay <= 1.0)) {
      throw ConfigError("lif: decay must be in [0, 1], got " + std::to_string(decay));
    }
    if (!std::isfinite(v_th)) throw ConfigError("lif: threshold must be finite");
    if (!(gamma > 0.0)) {
      throw ConfigError("lif: surrogate width must be positive, got " +
                        std::to_string(gamma));
    }
  }
};

// Parallel spiking neuron configuration: a learnable causal kernel of length
// k mixes the last k input currents; no membrane carry between steps.
struct SpsnParams {
  int k = 1;
  double v_th = 0.5;
  double gamma = 0.4;

  void validate() const {
    if (k < 1) throw ConfigError("spsn: kernel length must be >= 1, got " + std::to_string(k));
    if (!std::isfinite(v_th)) throw ConfigError("spsn: threshold must be finite");
    if (!(gamma > 0.0)) throw ConfigError("spsn: surrogate width must be positive");
  }
};

// One LIF update over a population of n cells:
//   u[i] = decay * u_prev[i] * (1 - s_prev[i]) + current[i]
//   s[i] = 1 if u[i] >= v_th else 0
// The (1 - s_prev) factor is the hard reset of cells that fired last step.
template <class S>
void lif_step(const S* u_prev, const S* s_prev, const S* current, int n,
              const LifParams& p, S* u_out, S* s_out) {
  require_finite(current, static_cast<std::size_t>(n), "lif_step: current");
  const S decay = static_cast<S>(p.decay);
  const S v_th = static_cast<S>(p.v_th);
  for (int i = 0; i < n; ++i) {
    const S u = decay * u_prev[i] * (S(1) - s_prev[i]) + current[i];
    u_out[i] = u;
    s_out[i] = heaviside(u, v_th);
  }
}

// Memoryless cell: the membrane is exactly this step's input current.
template <class S>
void notd_step(const S* current, int n, double v_th, S* u_out, S* s_out) {
  require_finite(current, static_cast<std::size_t>(n), "notd_step: current");
  const S th = static_cast<S>(v_th);
  for (int i = 0; i < n; ++i) {
    u_out[i] = current[i];
    s_out[i] = heaviside(current[i], th);
  }
}

}  // namespace snn
