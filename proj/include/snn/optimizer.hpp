#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "snn/backward.hpp"
#include "snn/network.hpp"

namespace snn {

struct AdamWConfig {
  double lr = 5e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.0;
  double clip = 0.0;  // global-norm ceiling; 0 disables clipping

  void validate() const {
    if (!(lr > 0.0)) throw ConfigError("adamw: lr must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("adamw: beta1 must be in [0, 1)");
    if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adamw: beta2 must be in [0, 1)");
    if (!(eps > 0.0)) throw ConfigError("adamw: eps must be positive");
    if (weight_decay < 0.0) throw ConfigError("adamw: weight decay must be >= 0");
    if (clip < 0.0) throw ConfigError("adamw: clip must be >= 0");
  }
};

// First and second moment estimates, shaped like the parameters.
template <class S>
struct OptimizerState {
  GradSet<S> m;
  GradSet<S> v;
  std::int64_t step = 0;

  static OptimizerState zeros_like(const Network<S>& net) {
    return {GradSet<S>::zeros_like(net), GradSet<S>::zeros_like(net), 0};
  }
};

struct StepInfo {
  double grad_norm = 0.0;  // pre-clip global norm
  bool clipped = false;
};

// Global-norm clip followed by one decoupled-weight-decay Adam update.
// Rejects non-finite gradients before touching any parameter, so a diverged
// batch cannot poison the model.
template <class S>
StepInfo clip_and_step(Network<S>& net, GradSet<S>& grads, OptimizerState<S>& state,
                       const AdamWConfig& cfg) {
  cfg.validate();
  const double sq = grads.sq_norm();
  if (!std::isfinite(sq)) {
    throw TrainingError("clip_and_step: non-finite gradient norm");
  }
  StepInfo info;
  info.grad_norm = std::sqrt(sq);
  if (cfg.clip > 0.0 && info.grad_norm > cfg.clip) {
    grads.scale(static_cast<S>(cfg.clip / info.grad_norm));
    info.clipped = true;
  }

  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));

  auto params = build_param_refs(net);
  auto gr = build_grad_refs(grads, net);
  auto mr = build_grad_refs(state.m, net);
  auto vr = build_grad_refs(state.v, net);
  if (params.size() != gr.size()) {
    throw DimensionError("clip_and_step: gradient layout does not match network");
  }
  for (std::size_t k = 0; k < params.size(); ++k) {
    if (params[k].size != gr[k].size) {
      throw DimensionError("clip_and_step: size mismatch in " + params[k].name);
    }
    S* p = params[k].data;
    const S* gp = gr[k].data;
    S* mp = mr[k].data;
    S* vp = vr[k].data;
    for (std::size_t i = 0; i < params[k].size; ++i) {
      const double gi = static_cast<double>(gp[i]);
      const double m = cfg.beta1 * static_cast<double>(mp[i]) + (1.0 - cfg.beta1) * gi;
      const double v = cfg.beta2 * static_cast<double>(vp[i]) + (1.0 - cfg.beta2) * gi * gi;
      mp[i] = static_cast<S>(m);
      vp[i] = static_cast<S>(v);
      const double mhat = m / bc1;
      const double vhat = v / bc2;
      double x = static_cast<double>(p[i]);
      x -= cfg.lr * cfg.weight_decay * x;
      x -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
      p[i] = static_cast<S>(x);
    }
  }
  return info;
}

}  // namespace snn
