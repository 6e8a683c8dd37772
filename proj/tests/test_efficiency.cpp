#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "snn/efficiency.hpp"

using namespace snn;

namespace {

// One sample, two steps, two input channels, one spike per step. With the
// weights below the three-neuron layer fires twice per step, once at the end.
Dataset two_step_dataset() {
  Dataset ds;
  ds.meta.n = 1;
  ds.meta.steps = 2;
  ds.meta.channels = 2;
  ds.meta.classes = 2;
  ds.meta.encoding = "synthetic";
  ds.data = {1.0f, 0.0f, 0.0f, 1.0f};
  ds.labels = {0};
  return ds;
}

Network32 hand_net(Arch arch, NeuronKind kind) {
  NetworkSpec spec;
  spec.arch = arch;
  spec.input_width = 2;
  spec.hidden = {3};
  spec.neuron = {kind};
  spec.classes = 2;
  spec.readout = ReadoutMode::MeanOverTime;
  spec.lif.decay = 1.0;
  spec.spsn_kernel = 2;
  auto net = build_network<float>(spec, 0);
  net.layers[0].wt.v = {0.6f, 0.0f, 0.6f,   // input 0 fan-out
                        0.6f, 0.6f, 0.0f};  // input 1 fan-out
  if (arch == Arch::Srnn) net.layers[0].rt.fill(0.0f);
  if (kind == NeuronKind::Spsn) net.layers[0].kappa = {1.0f, 0.0f};
  return net;
}

EnergyQuery base_query(EnergyRow row) {
  EnergyQuery q;
  q.row = row;
  q.m = 256;
  q.n = 256;
  q.k = 32;
  q.h = 512;
  q.t = 256;  // power of two keeps the log2 terms exact
  q.fr_in = 0.05;
  q.fr_out = 0.1;
  q.fr_conv2 = 0.2;
  q.fr_q = 0.3;
  q.fr_k = 0.4;
  q.fr_v = 0.5;
  q.fr_attn = 0.25;
  q.fr_fc1 = 0.15;
  q.fr_fc2 = 0.12;
  q.fr_y = 0.2;
  q.fr_w = 0.3;
  return q;
}

void check_row(EnergyRow row, double acs, double macs, double pj) {
  const EnergyResult r = energy_formula(base_query(row));
  CHECK(r.acs == doctest::Approx(acs).epsilon(1e-9));
  CHECK(r.macs == doctest::Approx(macs).epsilon(1e-9));
  CHECK(r.pj == doctest::Approx(pj).epsilon(1e-9));
  CHECK(r.nj == doctest::Approx(pj / 1000.0).epsilon(1e-9));
}

}  // namespace

TEST_CASE("energy formulas: frozen values for all thirteen rows") {
  check_row(EnergyRow::FfsnnLif, 3302.4, 256, 4149.76);
  check_row(EnergyRow::FfsnnCeLif, 3302.4, 768, 6504.96);
  check_row(EnergyRow::FfsnnLtc, 3840.0, 262912, 1212851.2);
  check_row(EnergyRow::FfsnnSpsn, 3276.8, 8192, 40632.32);
  check_row(EnergyRow::FfsnnPmsn, 3276.8, 5376, 27678.72);
  check_row(EnergyRow::SrnnLif, 9856.0, 256, 10048.0);
  check_row(EnergyRow::SrnnCeLif, 9856.0, 768, 12403.2);
  check_row(EnergyRow::SrnnLtc, 10393.6, 262912, 1218749.44);
  check_row(EnergyRow::Gsn, 19660.8, 1280, 23582.72);
  check_row(EnergyRow::SpikingTcn, 524288.0, 0, 471859.2);
  check_row(EnergyRow::SpikeDrivenTransformer, 102236.16, 0, 92012.544);
  check_row(EnergyRow::BinaryS4d, 13107.2, 6144, 40058.88);
  check_row(EnergyRow::Gsu, 33280.0, 5632, 55859.2);
}

TEST_CASE("energy arithmetic: a known op mix lands at the published scale") {
  const EnergyConstants c;
  CHECK(c.e_ac == 0.9);
  CHECK(c.e_mac == 4.6);
  const EnergyResult r = energy_of(3720, 256, c);
  CHECK(r.pj == doctest::Approx(4525.6));
  CHECK(r.nj == doctest::Approx(4.5256));
  CHECK(std::abs(r.nj - 4.52) / 4.52 < 0.01);

  const EnergyResult s = energy_of(22910, 256, c);
  CHECK(s.pj == doctest::Approx(21796.6));
  CHECK(std::abs(s.nj - 21.79) / 21.79 < 0.01);
}

TEST_CASE("energy queries reject missing or invalid inputs") {
  EnergyQuery q = base_query(EnergyRow::FfsnnLif);
  q.fr_in.reset();
  CHECK_THROWS_WITH_AS(energy_formula(q), doctest::Contains("fr_in"), QueryError);

  q = base_query(EnergyRow::FfsnnLif);
  q.fr_out = 1.5;
  CHECK_THROWS_AS(energy_formula(q), QueryError);
  q.fr_out = -0.1;
  CHECK_THROWS_AS(energy_formula(q), QueryError);

  q = base_query(EnergyRow::FfsnnLif);
  q.n = 0;
  CHECK_THROWS_AS(energy_formula(q), QueryError);
  q = base_query(EnergyRow::FfsnnSpsn);
  q.k = 0;
  CHECK_THROWS_AS(energy_formula(q), QueryError);
  q = base_query(EnergyRow::SpikeDrivenTransformer);
  q.fr_attn.reset();
  CHECK_THROWS_WITH_AS(energy_formula(q), doctest::Contains("fr_attn"), QueryError);

  q = base_query(EnergyRow::FfsnnLif);
  q.constants.e_ac = 0.0;
  CHECK_THROWS_AS(energy_formula(q), QueryError);
}

TEST_CASE("energy row names round-trip and reject unknowns") {
  const EnergyRow all[] = {
      EnergyRow::FfsnnLif,   EnergyRow::FfsnnCeLif, EnergyRow::FfsnnLtc,
      EnergyRow::FfsnnSpsn,  EnergyRow::FfsnnPmsn,  EnergyRow::SrnnLif,
      EnergyRow::SrnnCeLif,  EnergyRow::SrnnLtc,    EnergyRow::Gsn,
      EnergyRow::SpikingTcn, EnergyRow::SpikeDrivenTransformer,
      EnergyRow::BinaryS4d,  EnergyRow::Gsu,
  };
  for (EnergyRow r : all) CHECK(parse_energy_row(to_string(r)) == r);
  CHECK_THROWS_AS(parse_energy_row("mystery-cell"), QueryError);
}

TEST_CASE("spike_frequency counts nonzeros") {
  Seq32 s(2, 2, 2);
  s.at(0, 0)[0] = 1.0f;
  s.at(0, 1)[1] = 1.0f;
  s.at(1, 1)[0] = 1.0f;
  CHECK(spike_frequency(s) == doctest::Approx(3.0 / 8.0));
  Seq32 empty;
  CHECK_THROWS_AS(spike_frequency(empty), DataError);
}

TEST_CASE("record_spike_stats: hand-counted rates and population selection") {
  const Dataset ds = two_step_dataset();
  const auto net = hand_net(Arch::Sfnn, NeuronKind::Lif);

  // Forward: s = [1,0,1] then [1,1,0]; inputs carry one spike per step.
  auto st = record_spike_stats(net, ds, {-1, 0}, 16, ForwardMode::Temporal, Exec::Serial);
  CHECK(st.samples == 1);
  CHECK(st.steps == 2);
  CHECK(st.rate_of(-1) == doctest::Approx(0.5));
  CHECK(st.rate_of(0) == doctest::Approx(2.0 / 3.0));
  CHECK(st.names[0] == "input");
  CHECK(st.names[1] == "layer0");
  CHECK_THROWS_AS(st.rate_of(3), QueryError);

  // Empty selection means the input plus every layer.
  auto all = record_spike_stats(net, ds, {}, 16, ForwardMode::Temporal, Exec::Serial);
  CHECK(all.populations == std::vector<int>{-1, 0});

  CHECK_THROWS_AS(record_spike_stats(net, ds, {5}, 16, ForwardMode::Temporal, Exec::Serial),
                  QueryError);
  CHECK_THROWS_AS(record_spike_stats(net, ds, {-2}, 16, ForwardMode::Temporal, Exec::Serial),
                  QueryError);
}

TEST_CASE("count_ops: hand-counted convention for each cell kind") {
  const Dataset ds = two_step_dataset();

  SUBCASE("temporal lif: fan-out, reset, and one leak mac per neuron") {
    const auto net = hand_net(Arch::Sfnn, NeuronKind::Lif);
    const OpCounts ops = count_ops(net, ds, 16, ForwardMode::Temporal, Exec::Serial);
    REQUIRE(ops.layers.size() == 1);
    // 3 fan-out ACs per step (one input spike each), plus 4 resets over 2
    // steps; the leak runs per neuron regardless of activity.
    CHECK(ops.layers[0].acs == doctest::Approx(5.0));
    CHECK(ops.layers[0].macs == doctest::Approx(3.0));
    CHECK(ops.hidden_acs == doctest::Approx(5.0));
    // Mean readout: rate accumulation per top spike, one affine per sample.
    CHECK(ops.readout.acs == doctest::Approx(2.0));
    CHECK(ops.readout.macs == doctest::Approx(4.0));
  }

  SUBCASE("memoryless run drops reset and leak") {
    const auto net = hand_net(Arch::Sfnn, NeuronKind::Lif);
    const OpCounts ops = count_ops(net, ds, 16, ForwardMode::Memoryless, Exec::Serial);
    CHECK(ops.layers[0].acs == doctest::Approx(3.0));
    CHECK(ops.layers[0].macs == doctest::Approx(0.0));
  }

  SUBCASE("recurrent layer re-injects every pre-final spike") {
    const auto net = hand_net(Arch::Srnn, NeuronKind::Lif);
    const OpCounts ops = count_ops(net, ds, 16, ForwardMode::Temporal, Exec::Serial);
    // Two spikes at t=0 re-enter: 2 spikes * 3 targets / 2 steps = 3 extra.
    CHECK(ops.layers[0].acs == doctest::Approx(8.0));
    CHECK(ops.layers[0].macs == doctest::Approx(3.0));
  }

  SUBCASE("spsn spends kernel macs and never resets") {
    const auto net = hand_net(Arch::Sfnn, NeuronKind::Spsn);
    const OpCounts ops = count_ops(net, ds, 16, ForwardMode::Temporal, Exec::Serial);
    CHECK(ops.layers[0].acs == doctest::Approx(3.0));
    CHECK(ops.layers[0].macs == doctest::Approx(6.0));  // n * k, padding included
    const OpCounts mem = count_ops(net, ds, 16, ForwardMode::Memoryless, Exec::Serial);
    CHECK(mem.layers[0].macs == doctest::Approx(3.0));  // only the zero-lag tap
  }
}

TEST_CASE("count_ops agrees with the closed-form feedforward lif row") {
  const Dataset ds = two_step_dataset();
  const auto net = hand_net(Arch::Sfnn, NeuronKind::Lif);
  const OpCounts ops = count_ops(net, ds, 16, ForwardMode::Temporal, Exec::Serial);
  const auto st = record_spike_stats(net, ds, {-1, 0}, 16, ForwardMode::Temporal, Exec::Serial);

  EnergyQuery q;
  q.row = EnergyRow::FfsnnLif;
  q.m = 2;
  q.n = 3;
  q.fr_in = st.rate_of(-1);
  q.fr_out = st.rate_of(0);
  const EnergyResult formula = energy_formula(q);
  CHECK(formula.acs == doctest::Approx(ops.layers[0].acs).epsilon(1e-9));
  CHECK(formula.macs == doctest::Approx(ops.layers[0].macs).epsilon(1e-9));
}

TEST_CASE("trace_bytes: exact accounting, linear in batch and steps") {
  NetworkSpec spec;
  spec.input_width = 4;
  spec.hidden = {8, 8};
  spec.neuron = {NeuronKind::Lif, NeuronKind::Lif};
  spec.classes = 2;
  // input plane + membrane and spike planes per layer, 4 bytes each
  CHECK(trace_bytes(spec, 1, 1) == (4 + 2 * 8 + 2 * 8) * 4u);
  CHECK(trace_bytes(spec, 16, 200) == 16u * 200 * 36 * 4);
  const auto t200 = trace_bytes(spec, 16, 200);
  CHECK(trace_bytes(spec, 16, 400) == 2 * t200);
  CHECK(trace_bytes(spec, 16, 800) == 4 * t200);
  CHECK(trace_bytes(spec, 32, 200) == 2 * t200);

  NetworkSpec spsn = spec;
  spsn.hidden = {8};
  spsn.neuron = {NeuronKind::Spsn};
  spsn.spsn_kernel = 4;
  // SPSN layers keep a third plane for the per-step currents.
  CHECK(trace_bytes(spsn, 1, 1) == (4 + 3 * 8) * 4u);

  CHECK_THROWS_AS(trace_bytes(spec, 0, 10), ConfigError);
  CHECK_THROWS_AS(trace_bytes(spec, 10, 0), ConfigError);
}

TEST_CASE("fit_affine: exact line, curvature discrimination, validation") {
  const std::vector<double> x{1, 2, 3, 4, 5};
  std::vector<double> line(5), quad(5), xsq(5);
  for (int i = 0; i < 5; ++i) {
    line[i] = 2.0 + 3.0 * x[i];
    quad[i] = x[i] * x[i];
    xsq[i] = x[i] * x[i];
  }
  const FitResult f = fit_affine(x, line);
  CHECK(f.a == doctest::Approx(2.0));
  CHECK(f.b == doctest::Approx(3.0));
  CHECK(f.r2 == doctest::Approx(1.0));

  // Quadratic growth: the fit against x^2 explains it perfectly, the fit
  // against x does not.
  const FitResult lin = fit_affine(x, quad);
  const FitResult sq = fit_affine(xsq, quad);
  CHECK(sq.r2 == doctest::Approx(1.0));
  CHECK(sq.r2 > lin.r2);
  CHECK(lin.r2 < 0.99);

  const std::vector<double> shorter{1.0};
  CHECK_THROWS_AS(fit_affine(shorter, shorter), DimensionError);
  CHECK_THROWS_AS(fit_affine(x, shorter), DimensionError);
  const std::vector<double> flat{2, 2, 2};
  const std::vector<double> y3{1, 2, 3};
  CHECK_THROWS_AS(fit_affine(flat, y3), DimensionError);
}

TEST_CASE("bench_training produces timed points and scaling fits") {
  NetworkSpec spec;
  spec.input_width = kAlChannels;
  spec.hidden = {16};
  spec.neuron = {NeuronKind::Lif};
  spec.classes = kAlClasses;

  TrainPlan plan;
  plan.epochs = 1;
  plan.batch_size = 8;
  plan.exec = Exec::Serial;

  AlSpec task;
  const BenchReport rep = bench_training(spec, plan, task, {8, 16}, 1, 3);
  REQUIRE(rep.points.size() == 2);
  CHECK(rep.batch == 8);
  CHECK(rep.points[0].length == 8);
  CHECK(rep.points[1].length == 16);
  for (const auto& pt : rep.points) {
    CHECK(pt.update_seconds > 0.0);
    CHECK(pt.updates_per_second > 0.0);
    CHECK(pt.timesteps_per_second ==
          doctest::Approx(pt.updates_per_second * pt.length));
  }
  CHECK(rep.points[1].analytic_trace_bytes == 2 * rep.points[0].analytic_trace_bytes);

  CHECK_THROWS_AS(bench_training(spec, plan, task, {}, 1, 3), ConfigError);
  CHECK_THROWS_AS(bench_training(spec, plan, task, {8}, -1, 3), ConfigError);
  CHECK_THROWS_AS(bench_training(spec, plan, task, {8}, 1, 0), ConfigError);
  CHECK_THROWS_AS(bench_training(spec, plan, task, {0}, 1, 1), ConfigError);
}
