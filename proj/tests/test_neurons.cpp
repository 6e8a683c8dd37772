#include <doctest.h>

#include <cmath>
#include <vector>

#include "snn/forward.hpp"
#include "snn/network.hpp"
#include "snn/neuron.hpp"
#include "snn/surrogate.hpp"

using namespace snn;

namespace {

NetworkSpec tiny_spec(Arch arch, NeuronKind kind, int input, std::vector<int> hidden,
                      int classes, ReadoutMode readout) {
  NetworkSpec spec;
  spec.arch = arch;
  spec.input_width = input;
  spec.hidden = std::move(hidden);
  spec.neuron.assign(spec.hidden.size(), kind);
  spec.classes = classes;
  spec.readout = readout;
  return spec;
}

}  // namespace

TEST_CASE("triangle surrogate: peak, support, symmetry, unit area") {
  const double v_th = 0.5, gamma = 0.4;
  CHECK(triangle_surrogate(v_th, v_th, gamma) == doctest::Approx(1.0 / gamma));
  CHECK(triangle_surrogate(v_th + gamma, v_th, gamma) == 0.0);
  CHECK(triangle_surrogate(v_th - gamma, v_th, gamma) == 0.0);
  CHECK(triangle_surrogate(v_th + 2.0, v_th, gamma) == 0.0);
  CHECK(triangle_surrogate(v_th + 0.1, v_th, gamma) ==
        doctest::Approx(triangle_surrogate(v_th - 0.1, v_th, gamma)));
  CHECK(triangle_surrogate(v_th + gamma / 2, v_th, gamma) ==
        doctest::Approx(0.5 / gamma));

  // Trapezoid integral over the support: the area under the triangle is 1.
  const int n = 20000;
  const double lo = v_th - 2 * gamma, hi = v_th + 2 * gamma;
  const double dx = (hi - lo) / n;
  double area = 0.0;
  for (int i = 0; i <= n; ++i) {
    const double w = (i == 0 || i == n) ? 0.5 : 1.0;
    area += w * triangle_surrogate(lo + i * dx, v_th, gamma);
  }
  area *= dx;
  CHECK(area == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("triangle ramp: endpoints, midpoint, and derivative equals the surrogate") {
  const double v_th = 0.5, gamma = 0.4;
  CHECK(triangle_ramp(v_th - gamma, v_th, gamma) == 0.0);
  CHECK(triangle_ramp(v_th - 2.0, v_th, gamma) == 0.0);
  CHECK(triangle_ramp(v_th + gamma, v_th, gamma) == 1.0);
  CHECK(triangle_ramp(v_th + 2.0, v_th, gamma) == 1.0);
  CHECK(triangle_ramp(v_th, v_th, gamma) == doctest::Approx(0.5));
  // Monotone nondecreasing across the support.
  double prev = -1.0;
  for (int i = 0; i <= 100; ++i) {
    const double u = v_th - 1.5 * gamma + i * (3.0 * gamma / 100);
    const double r = triangle_ramp(u, v_th, gamma);
    CHECK(r >= prev);
    prev = r;
  }
  // Central differences of the ramp reproduce the triangle everywhere,
  // including at the kinks where both sides are C1.
  const double h = 1e-6;
  for (double u : {0.2, 0.35, 0.5, 0.62, 0.8, 0.95, 0.1, 0.9}) {
    const double fd =
        (triangle_ramp(u + h, v_th, gamma) - triangle_ramp(u - h, v_th, gamma)) / (2 * h);
    CHECK(fd == doctest::Approx(triangle_surrogate(u, v_th, gamma)).epsilon(1e-5));
  }
}

TEST_CASE("heaviside threshold is inclusive") {
  CHECK(heaviside(0.5, 0.5) == 1.0);
  CHECK(heaviside(0.5f, 0.5f) == 1.0f);
  CHECK(heaviside(0.4999, 0.5) == 0.0);
  CHECK(heaviside(0.5001, 0.5) == 1.0);
}

TEST_CASE("lif_step: integrate, fire, hard reset") {
  LifParams p;
  p.decay = 1.0;
  p.v_th = 0.5;
  // One cell driven by a constant 0.3 current: charges for two steps, fires,
  // resets, repeats with period 2.
  double u = 0.0, s = 0.0;
  const double cur = 0.3;
  std::vector<double> want_u{0.3, 0.6, 0.3, 0.6};
  std::vector<double> want_s{0.0, 1.0, 0.0, 1.0};
  for (int t = 0; t < 4; ++t) {
    double u_next, s_next;
    lif_step(&u, &s, &cur, 1, p, &u_next, &s_next);
    CHECK(u_next == doctest::Approx(want_u[t]));
    CHECK(s_next == want_s[t]);
    u = u_next;
    s = s_next;
  }
}

TEST_CASE("lif_step: leak scales the carried membrane") {
  LifParams p;
  p.decay = 0.5;
  p.v_th = 10.0;  // never fires
  double u = 0.8, s = 0.0;
  const double cur = 0.1;
  double u_next, s_next;
  lif_step(&u, &s, &cur, 1, p, &u_next, &s_next);
  CHECK(u_next == doctest::Approx(0.5 * 0.8 + 0.1));
  CHECK(s_next == 0.0);

  p.decay = 0.0;  // no carry at all
  lif_step(&u, &s, &cur, 1, p, &u_next, &s_next);
  CHECK(u_next == doctest::Approx(0.1));
}

TEST_CASE("lif_step and notd_step reject non-finite current") {
  LifParams p;
  double u = 0.0, s = 0.0, u2, s2;
  const double bad = std::nan("");
  CHECK_THROWS_AS(lif_step(&u, &s, &bad, 1, p, &u2, &s2), NumericError);
  CHECK_THROWS_AS(notd_step(&bad, 1, 0.5, &u2, &s2), NumericError);
}

TEST_CASE("notd_step: membrane is exactly the current") {
  const std::vector<double> cur{0.2, 0.5, 0.7};
  std::vector<double> u(3), s(3);
  notd_step(cur.data(), 3, 0.5, u.data(), s.data());
  CHECK(u == cur);
  CHECK(s == std::vector<double>{0.0, 1.0, 1.0});
}

TEST_CASE("network spec validation rejects bad topologies") {
  auto ok = tiny_spec(Arch::Sfnn, NeuronKind::Lif, 4, {8, 8}, 2, ReadoutMode::MeanOverTime);
  CHECK_NOTHROW(ok.validate());

  auto spec = ok;
  spec.input_width = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  spec = ok;
  spec.classes = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  spec = ok;
  spec.hidden.clear();
  spec.neuron.clear();
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  spec = ok;
  spec.neuron.pop_back();
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  spec = ok;
  spec.hidden[1] = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  spec = ok;
  spec.lif.decay = 1.5;
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  spec = ok;
  spec.lif.gamma = 0.0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);

  // Recurrence needs a cross-step path; SPSN windows and memoryless cells
  // do not define one.
  spec = tiny_spec(Arch::Srnn, NeuronKind::Spsn, 4, {8}, 2, ReadoutMode::MeanOverTime);
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = tiny_spec(Arch::Srnn, NeuronKind::NoTd, 4, {8}, 2, ReadoutMode::MeanOverTime);
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = tiny_spec(Arch::Srnn, NeuronKind::Lif, 4, {8}, 2, ReadoutMode::MeanOverTime);
  CHECK_NOTHROW(spec.validate());

  spec = tiny_spec(Arch::Sfnn, NeuronKind::Spsn, 4, {8}, 2, ReadoutMode::MeanOverTime);
  spec.spsn_kernel = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("build_network: seeded init is reproducible and bounded") {
  auto spec = tiny_spec(Arch::Srnn, NeuronKind::Lif, 4, {6, 5}, 2, ReadoutMode::MeanOverTime);
  auto a = build_network<float>(spec, 42);
  auto b = build_network<float>(spec, 42);
  auto c = build_network<float>(spec, 43);

  CHECK(a.depth() == 2);
  CHECK(a.layers[0].wt.rows == 4);
  CHECK(a.layers[0].wt.cols == 6);
  CHECK(a.layers[1].wt.rows == 6);
  CHECK(a.layers[1].rt.rows == 5);
  CHECK(a.param_count() == 4 * 6 + 6 * 6 + 6 * 5 + 5 * 5 + 5 * 2 + 2);

  CHECK(a.layers[0].wt.v == b.layers[0].wt.v);
  CHECK(a.layers[1].rt.v == b.layers[1].rt.v);
  CHECK(a.readout.wt.v == b.readout.wt.v);
  CHECK(a.layers[0].wt.v != c.layers[0].wt.v);

  const float bound0 = std::sqrt(1.0f / 4.0f);
  for (float w : a.layers[0].wt.v) {
    CHECK(w >= -bound0);
    CHECK(w < bound0);
  }
  const float bound_r = std::sqrt(1.0f / 5.0f);
  for (float w : a.layers[1].rt.v) {
    CHECK(w >= -bound_r);
    CHECK(w < bound_r);
  }
  for (float bias : a.readout.bias) CHECK(bias == 0.0f);
}

TEST_CASE("build_param_refs: fixed order and full coverage") {
  auto spec = tiny_spec(Arch::Srnn, NeuronKind::Lif, 3, {4}, 2, ReadoutMode::MeanOverTime);
  auto net = build_network<float>(spec, 1);
  auto refs = build_param_refs(net);
  REQUIRE(refs.size() == 4);
  CHECK(refs[0].name == "layer0.w");
  CHECK(refs[1].name == "layer0.r");
  CHECK(refs[2].name == "readout.w");
  CHECK(refs[3].name == "readout.b");
  std::size_t total = 0;
  for (const auto& r : refs) total += r.size;
  CHECK(total == net.param_count());

  auto spec2 = tiny_spec(Arch::Sfnn, NeuronKind::Spsn, 3, {4}, 2, ReadoutMode::MeanOverTime);
  spec2.spsn_kernel = 5;
  auto net2 = build_network<float>(spec2, 1);
  auto refs2 = build_param_refs(net2);
  REQUIRE(refs2.size() == 4);
  CHECK(refs2[1].name == "layer0.kappa");
  CHECK(refs2[1].size == 5);
}

TEST_CASE("forward_sequence input validation") {
  auto spec = tiny_spec(Arch::Sfnn, NeuronKind::Lif, 3, {4}, 2, ReadoutMode::MeanOverTime);
  auto net = build_network<float>(spec, 7);

  CHECK_THROWS_AS(forward_sequence(net, Seq32(2, 0, 3), ForwardMode::Temporal),
                  DataError);
  CHECK_THROWS_AS(forward_sequence(net, Seq32(0, 5, 3), ForwardMode::Temporal),
                  DataError);
  CHECK_THROWS_AS(forward_sequence(net, Seq32(2, 5, 4), ForwardMode::Temporal),
                  DataError);

  auto spsn_spec = tiny_spec(Arch::Sfnn, NeuronKind::Spsn, 3, {4}, 2,
                             ReadoutMode::MeanOverTime);
  spsn_spec.spsn_kernel = 8;
  auto spsn_net = build_network<float>(spsn_spec, 7);
  CHECK_THROWS_AS(forward_sequence(spsn_net, Seq32(1, 5, 3), ForwardMode::Temporal),
                  ConfigError);
  // Memoryless only reads the tau = 0 tap, so a short sequence is fine.
  CHECK_NOTHROW(forward_sequence(spsn_net, Seq32(1, 5, 3), ForwardMode::Memoryless));
}

TEST_CASE("forward LIF trace matches the hand recursion") {
  auto spec = tiny_spec(Arch::Sfnn, NeuronKind::Lif, 1, {1}, 2, ReadoutMode::MeanOverTime);
  auto net = build_network<double>(spec, 0);
  net.layers[0].wt.at(0, 0) = 0.3;

  Seq64 x(1, 4, 1);
  for (int t = 0; t < 4; ++t) x.at(0, t)[0] = 1.0;
  auto res = forward_sequence(net, std::move(x), ForwardMode::Temporal,
                              SpikeMode::Hard, Exec::Serial);
  const auto& lt = res.trace.layers[0];
  // Charge 0.3, 0.6 (fire), reset to 0.3, 0.6 (fire).
  CHECK(lt.u.at(0, 0)[0] == doctest::Approx(0.3));
  CHECK(lt.s.at(0, 0)[0] == 0.0);
  CHECK(lt.u.at(0, 1)[0] == doctest::Approx(0.6));
  CHECK(lt.s.at(0, 1)[0] == 1.0);
  CHECK(lt.u.at(0, 2)[0] == doctest::Approx(0.3));
  CHECK(lt.s.at(0, 2)[0] == 0.0);
  CHECK(lt.u.at(0, 3)[0] == doctest::Approx(0.6));
  CHECK(lt.s.at(0, 3)[0] == 1.0);

  // Mean readout: mean spike rate 0.5 through the readout affine map.
  CHECK(res.trace.mean_spikes.at(0, 0) == doctest::Approx(0.5));
  const double w0 = net.readout.wt.at(0, 0);
  const double w1 = net.readout.wt.at(0, 1);
  CHECK(res.logits.at(0, 0) == doctest::Approx(0.5 * w0));
  CHECK(res.logits.at(0, 1) == doctest::Approx(0.5 * w1));
}

TEST_CASE("forward memoryless drops the membrane carry") {
  auto spec = tiny_spec(Arch::Sfnn, NeuronKind::Lif, 1, {1}, 2, ReadoutMode::MeanOverTime);
  auto net = build_network<double>(spec, 0);
  net.layers[0].wt.at(0, 0) = 0.3;
  Seq64 x(1, 4, 1);
  for (int t = 0; t < 4; ++t) x.at(0, t)[0] = 1.0;
  auto res = forward_sequence(net, std::move(x), ForwardMode::Memoryless,
                              SpikeMode::Hard, Exec::Serial);
  for (int t = 0; t < 4; ++t) {
    CHECK(res.trace.layers[0].u.at(0, t)[0] == doctest::Approx(0.3));
    CHECK(res.trace.layers[0].s.at(0, t)[0] == 0.0);
  }
}

TEST_CASE("forward SRNN adds the recurrent current from last step's spikes") {
  auto spec = tiny_spec(Arch::Srnn, NeuronKind::Lif, 1, {1}, 2, ReadoutMode::LastStep);
  spec.lif.decay = 0.5;
  auto net = build_network<double>(spec, 0);
  net.layers[0].wt.at(0, 0) = 0.6;   // input drive: fires immediately
  net.layers[0].rt.at(0, 0) = 0.25;  // self-excitation after a spike

  Seq64 x(1, 3, 1);
  x.at(0, 0)[0] = 1.0;  // only the first step has input
  auto res = forward_sequence(net, std::move(x), ForwardMode::Temporal,
                              SpikeMode::Hard, Exec::Serial);
  const auto& lt = res.trace.layers[0];
  // t=0: u = 0.6, fires. t=1: reset kills the carry, recurrent adds 0.25.
  // t=2: u = 0.5 * 0.25 + 0 = 0.125 (no spike at t=1, no recurrent drive).
  CHECK(lt.u.at(0, 0)[0] == doctest::Approx(0.6));
  CHECK(lt.s.at(0, 0)[0] == 1.0);
  CHECK(lt.u.at(0, 1)[0] == doctest::Approx(0.25));
  CHECK(lt.s.at(0, 1)[0] == 0.0);
  CHECK(lt.u.at(0, 2)[0] == doctest::Approx(0.125));
  CHECK(lt.s.at(0, 2)[0] == 0.0);

  // Memoryless severs the recurrent path too.
  Seq64 x2(1, 3, 1);
  x2.at(0, 0)[0] = 1.0;
  auto res2 = forward_sequence(net, std::move(x2), ForwardMode::Memoryless,
                               SpikeMode::Hard, Exec::Serial);
  CHECK(res2.trace.layers[0].u.at(0, 1)[0] == 0.0);
  CHECK(res2.trace.layers[0].u.at(0, 2)[0] == 0.0);
}

TEST_CASE("forward SPSN mixes the last k currents through kappa") {
  auto spec = tiny_spec(Arch::Sfnn, NeuronKind::Spsn, 1, {1}, 2, ReadoutMode::MeanOverTime);
  spec.spsn_kernel = 2;
  auto net = build_network<double>(spec, 0);
  net.layers[0].wt.at(0, 0) = 1.0;
  net.layers[0].kappa = {0.4, 0.3};

  Seq64 x(1, 3, 1);
  x.at(0, 0)[0] = 1.0;
  x.at(0, 1)[0] = 2.0;
  x.at(0, 2)[0] = 0.0;
  auto res = forward_sequence(net, std::move(x), ForwardMode::Temporal,
                              SpikeMode::Hard, Exec::Serial);
  const auto& lt = res.trace.layers[0];
  CHECK(lt.c.at(0, 0)[0] == doctest::Approx(1.0));
  CHECK(lt.c.at(0, 1)[0] == doctest::Approx(2.0));
  // u[0] = 0.4*1, u[1] = 0.4*2 + 0.3*1, u[2] = 0.4*0 + 0.3*2.
  CHECK(lt.u.at(0, 0)[0] == doctest::Approx(0.4));
  CHECK(lt.u.at(0, 1)[0] == doctest::Approx(1.1));
  CHECK(lt.u.at(0, 2)[0] == doctest::Approx(0.6));
  CHECK(lt.s.at(0, 0)[0] == 0.0);
  CHECK(lt.s.at(0, 1)[0] == 1.0);
  CHECK(lt.s.at(0, 2)[0] == 1.0);

  // Memoryless keeps only the tau = 0 tap.
  Seq64 x2(1, 3, 1);
  x2.at(0, 0)[0] = 1.0;
  x2.at(0, 1)[0] = 2.0;
  auto res2 = forward_sequence(net, std::move(x2), ForwardMode::Memoryless,
                               SpikeMode::Hard, Exec::Serial);
  CHECK(res2.trace.layers[0].u.at(0, 1)[0] == doctest::Approx(0.8));
  CHECK(res2.trace.layers[0].u.at(0, 2)[0] == doctest::Approx(0.0));
}

TEST_CASE("smoothed mode: s is the ramp, fired is the binary crossing") {
  auto spec = tiny_spec(Arch::Sfnn, NeuronKind::Lif, 1, {1}, 2, ReadoutMode::MeanOverTime);
  auto net = build_network<double>(spec, 0);
  net.layers[0].wt.at(0, 0) = 0.45;  // inside the surrogate band around 0.5

  Seq64 x(1, 2, 1);
  x.at(0, 0)[0] = 1.0;
  x.at(0, 1)[0] = 1.0;
  auto res = forward_sequence(net, std::move(x), ForwardMode::Temporal,
                              SpikeMode::Smoothed, Exec::Serial);
  const auto& lt = res.trace.layers[0];
  const double v_th = 0.5, gamma = 0.4;
  CHECK(lt.s.at(0, 0)[0] == doctest::Approx(triangle_ramp(0.45, v_th, gamma)));
  CHECK(lt.fired.at(0, 0)[0] == 0.0);
  // No binary crossing at t=0, so the carry survives: u[1] = 0.45 + 0.45.
  CHECK(lt.u.at(0, 1)[0] == doctest::Approx(0.9));
  CHECK(lt.fired.at(0, 1)[0] == 1.0);
  CHECK(res.trace.fired(0).at(0, 0)[0] == 0.0);

  // Hard mode leaves fired empty and the accessor falls back to s.
  Seq64 x2(1, 2, 1);
  x2.at(0, 0)[0] = 1.0;
  auto res2 = forward_sequence(net, std::move(x2), ForwardMode::Temporal,
                               SpikeMode::Hard, Exec::Serial);
  CHECK(res2.trace.layers[0].fired.empty());
  CHECK(&res2.trace.fired(0) == &res2.trace.layers[0].s);
}

TEST_CASE("readout modes: per-step logits and the aggregate contract") {
  auto spec = tiny_spec(Arch::Sfnn, NeuronKind::Lif, 2, {3}, 2, ReadoutMode::PerStep);
  auto net = build_network<float>(spec, 11);
  Seq32 x(2, 4, 2);
  x.at(0, 0)[0] = 1.0f;
  x.at(1, 2)[1] = 1.0f;
  auto res = forward_sequence(net, std::move(x), ForwardMode::Temporal,
                              SpikeMode::Hard, Exec::Serial);
  CHECK(res.logits.empty());
  CHECK(res.step_logits.batch == 2);
  CHECK(res.step_logits.steps == 4);
  CHECK(res.step_logits.channels == 2);

  // The standalone readout helpers reproduce the in-forward readout.
  const auto per_step = readout_per_step(res.trace.spikes(0), net.readout);
  for (int b = 0; b < 2; ++b) {
    for (int t = 0; t < 4; ++t) {
      for (int k = 0; k < 2; ++k) {
        CHECK(per_step.at(b, t)[k] == res.step_logits.at(b, t)[k]);
      }
    }
  }
  CHECK_THROWS_AS(readout_aggregate(res.trace.spikes(0), net.readout, ReadoutMode::PerStep),
                  ContractError);

  const auto mean_logits =
      readout_aggregate(res.trace.spikes(0), net.readout, ReadoutMode::MeanOverTime);
  const auto last_logits =
      readout_aggregate(res.trace.spikes(0), net.readout, ReadoutMode::LastStep);
  CHECK(mean_logits.rows == 2);
  CHECK(last_logits.rows == 2);
  // Last-step logits equal the final per-step row.
  for (int b = 0; b < 2; ++b) {
    for (int k = 0; k < 2; ++k) {
      CHECK(last_logits.at(b, k) == res.step_logits.at(b, 3)[k]);
    }
  }
}

TEST_CASE("zero input with zero bias yields zero logits") {
  auto spec = tiny_spec(Arch::Sfnn, NeuronKind::Lif, 3, {4, 4}, 2, ReadoutMode::MeanOverTime);
  auto net = build_network<float>(spec, 3);
  auto res = forward_sequence(net, Seq32(2, 5, 3), ForwardMode::Temporal,
                              SpikeMode::Hard, Exec::Serial);
  for (int b = 0; b < 2; ++b) {
    for (int k = 0; k < 2; ++k) CHECK(res.logits.at(b, k) == 0.0f);
  }
}

TEST_CASE("forward is bit-identical between serial and parallel execution") {
  auto spec = tiny_spec(Arch::Srnn, NeuronKind::Lif, 4, {8, 8}, 2, ReadoutMode::MeanOverTime);
  spec.lif.decay = 0.7;
  auto net = build_network<float>(spec, 21);
  Seq32 x(7, 9, 4);
  RngStream rng(5, 123);
  for (auto& v : x.v) v = rng.uniform() < 0.3 ? 1.0f : 0.0f;

  Seq32 x2 = x;
  auto a = forward_sequence(net, std::move(x), ForwardMode::Temporal,
                            SpikeMode::Hard, Exec::Serial);
  auto b = forward_sequence(net, std::move(x2), ForwardMode::Temporal,
                            SpikeMode::Hard, Exec::Parallel);
  CHECK(a.logits.v == b.logits.v);
  for (int l = 0; l < 2; ++l) {
    CHECK(a.trace.layers[l].u.v == b.trace.layers[l].u.v);
    CHECK(a.trace.layers[l].s.v == b.trace.layers[l].s.v);
  }
}
