#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "qrc/engine.hpp"
#include "qrc/gaussian.hpp"
#include "qrc/network.hpp"
#include "qrc/rng.hpp"
#include "qrc/tasks.hpp"

using namespace qrc;

namespace {

CouplingVector constant_coupling(int n, int m, double value) {
  CouplingVector coupling;
  coupling.strengths = Mat::Constant(n, m, value);
  return coupling;
}

PropagatorBlocks random_blocks(int n, int m, double dt, Rng& rng) {
  const NetworkSpec reservoir = random_reservoir(n, 0.2, 0.25, rng);
  CouplingVector coupling;
  coupling.strengths = Mat::Zero(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j) coupling.strengths(i, j) = rng.uniform(0.01, 0.2);
  return make_blocks(reservoir, coupling, 0.25, dt);
}

// Composed blocks keep the grouped (q_all, p_all) layout over channel then
// reservoir modes; this permutation regroups them into (channel | reservoir)
// subsystem blocks so the two-by-two structure can be checked directly.
Mat stacking_permutation(int nc, int nr) {
  const int dim = 2 * (nc + nr);
  Mat p = Mat::Zero(dim, dim);
  for (int i = 0; i < nc; ++i) {
    p(i, i) = 1.0;
    p(nc + i, nc + nr + i) = 1.0;
  }
  for (int j = 0; j < nr; ++j) {
    p(2 * nc + j, nc + j) = 1.0;
    p(2 * nc + nr + j, 2 * nc + nr + j) = 1.0;
  }
  return p;
}

}  // namespace

TEST_CASE("default interaction-time scan spans four reservoir periods") {
  TaskSettings settings;
  const std::vector<double> scan = dt_scan(settings);
  REQUIRE(scan.size() == 4);
  for (int i = 0; i < 4; ++i)
    CHECK(scan[static_cast<std::size_t>(i)] ==
          doctest::Approx(2.0 * M_PI * (i + 1) / settings.omega0).epsilon(1e-12));

  settings.dt_candidates = {3.0};
  CHECK(dt_scan(settings) == std::vector<double>{3.0});
}

TEST_CASE("make_blocks equals assemble + propagate + partition") {
  Rng rng(5);
  const int n = 3;
  const NetworkSpec reservoir = random_reservoir(n, 0.2, 0.25, rng);
  const CouplingVector coupling = constant_coupling(n, 1, 0.1);
  const PropagatorBlocks fast = make_blocks(reservoir, coupling, 0.25, 7.0);

  const NetworkSpec joint = assemble_joint(reservoir, coupling, 0.25);
  const PropagatorBlocks slow = partition_blocks(propagator(potential_matrix(joint), 7.0), n, 1);
  CHECK((fast.s - slow.s).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((fast.a - slow.a).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(fast.rho_a == doctest::Approx(slow.rho_a).epsilon(1e-12));
}

TEST_CASE("memory training cost hits its pinned values") {
  PropagatorBlocks blocks;
  blocks.reservoir_modes = 1;
  blocks.input_modes = 1;
  blocks.a = Mat::Identity(2, 2);
  blocks.b = Mat::Identity(2, 2);
  blocks.c = Mat::Identity(2, 2);
  blocks.d = Mat::Identity(2, 2);

  SUBCASE("tau 0: identity transmission with max coupling 0.2 costs 5") {
    CHECK(stqm_cost(blocks, 0, constant_coupling(1, 1, 0.2)) == doctest::Approx(5.0).epsilon(1e-12));
  }

  SUBCASE("tau 0: all-zero coupling is infinitely penalized") {
    CHECK(std::isinf(stqm_cost(blocks, 0, constant_coupling(1, 1, 0.0))));
  }

  SUBCASE("tau 1: D = 0 with C A^0 B = I costs 0") {
    blocks.d = Mat::Zero(2, 2);
    CHECK(stqm_cost(blocks, 1, constant_coupling(1, 1, 0.1)) == doctest::Approx(0.0));
  }

  SUBCASE("tau 2: uses A to the power tau - 1") {
    blocks.a = 2.0 * Mat::Identity(2, 2);
    blocks.d = Mat::Zero(2, 2);
    // C A B = 2 I, so the memory term is 5 ||2I - I||_F = 5 sqrt(2).
    CHECK(stqm_cost(blocks, 2, constant_coupling(1, 1, 0.1)) ==
          doctest::Approx(5.0 * std::sqrt(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("memory cost of an uncoupled network is dominated by the identity penalty") {
  Rng rng(9);
  const NetworkSpec reservoir = random_reservoir(2, 0.2, 0.25, rng);
  const CouplingVector zero = constant_coupling(2, 1, 0.0);
  const PropagatorBlocks blocks = make_blocks(reservoir, zero, 0.25, 10.0);
  const double cost = stqm_cost(blocks, 1, zero);
  CHECK(cost == doctest::Approx(0.5 * blocks.d.norm() + 5.0 * std::sqrt(2.0)).epsilon(1e-9));
  CHECK(cost > 5.0);
}

TEST_CASE("identity channel composes to the bare reservoir blocks") {
  Rng rng(13);
  const PropagatorBlocks reservoir = random_blocks(3, 1, 8.0, rng);

  PropagatorBlocks channel;
  channel.reservoir_modes = 2;
  channel.input_modes = 1;
  channel.a = Mat::Identity(4, 4);
  channel.b = Mat::Zero(4, 2);
  channel.c = Mat::Zero(2, 4);
  channel.d = Mat::Identity(2, 2);
  channel.rho_a = 1.0;

  const PropagatorBlocks composed = compose_channel(channel, reservoir);
  CHECK(composed.reservoir_modes == 2 + 3);
  CHECK(composed.input_modes == 1);

  const Mat perm = stacking_permutation(2, 3);
  const Mat a = perm * composed.a * perm.transpose();
  const Mat b = perm * composed.b;
  const Mat c = composed.c * perm.transpose();
  CHECK((a.topLeftCorner(4, 4) - Mat::Identity(4, 4)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(a.topRightCorner(4, 6).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(a.bottomLeftCorner(6, 4).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((a.bottomRightCorner(6, 6) - reservoir.a).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(b.topRows(4).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((b.bottomRows(6) - reservoir.b).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(c.leftCols(4).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((c.rightCols(6) - reservoir.c).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((composed.d - reservoir.d).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("channel composition equals the product of the lifted one-step maps") {
  Rng rng(17);
  const double dt = 1.5 * M_PI / 0.25;
  const ChannelDraw channel = random_channel(2, 1, 0.95, dt, 0.2, 0.25, rng);
  const PropagatorBlocks reservoir = random_blocks(3, 1, dt, rng);
  const PropagatorBlocks composed = compose_channel(channel.blocks, reservoir);

  const int ch = 2 * channel.blocks.reservoir_modes;  // channel state size
  const int rs = 2 * reservoir.reservoir_modes;       // reservoir state size
  const int in = 2 * reservoir.input_modes;           // input size
  const int total = ch + rs + in;

  Mat channel_lift = Mat::Zero(total, total);
  channel_lift.block(0, 0, ch, ch) = channel.blocks.a;
  channel_lift.block(0, ch + rs, ch, in) = channel.blocks.b;
  channel_lift.block(ch, ch, rs, rs) = Mat::Identity(rs, rs);
  channel_lift.block(ch + rs, 0, in, ch) = channel.blocks.c;
  channel_lift.block(ch + rs, ch + rs, in, in) = channel.blocks.d;

  Mat reservoir_lift = Mat::Zero(total, total);
  reservoir_lift.block(0, 0, ch, ch) = Mat::Identity(ch, ch);
  reservoir_lift.block(ch, ch, rs, rs) = reservoir.a;
  reservoir_lift.block(ch, ch + rs, rs, in) = reservoir.b;
  reservoir_lift.block(ch + rs, ch, in, rs) = reservoir.c;
  reservoir_lift.block(ch + rs, ch + rs, in, in) = reservoir.d;

  const Mat product = reservoir_lift * channel_lift;
  const Mat perm = stacking_permutation(channel.blocks.reservoir_modes, reservoir.reservoir_modes);
  Mat rebuilt(total, total);
  rebuilt.topLeftCorner(ch + rs, ch + rs) = perm * composed.a * perm.transpose();
  rebuilt.topRightCorner(ch + rs, in) = perm * composed.b;
  rebuilt.bottomLeftCorner(in, ch + rs) = composed.c * perm.transpose();
  rebuilt.bottomRightCorner(in, in) = composed.d;
  CHECK((product - rebuilt).cwiseAbs().maxCoeff() < 1e-10);

  CHECK(is_symplectic(composed.s, 1e-9));
  CHECK(composed.rho_a == doctest::Approx(spectral_radius(composed.a)).epsilon(1e-12));
}

TEST_CASE("triplet topology wires disjoint groups of three") {
  Rng rng(19);
  const TripletTopology topology = random_triplet_topology(10, 0.2, 0.25, rng);
  CHECK(topology.reservoir.num_nodes() == 20);
  CHECK(topology.coupling.reservoir_nodes() == 20);
  CHECK(topology.coupling.input_modes() == 10);

  for (int t = 0; t < 10; ++t) {
    const int a = 2 * t;
    const int b = 2 * t + 1;
    CHECK(topology.reservoir.couplings(a, b) > 0.0);
    CHECK(topology.reservoir.couplings(a, b) <= 0.2);
    CHECK(topology.coupling.strengths(a, t) > 0.0);
    CHECK(topology.coupling.strengths(b, t) > 0.0);
    for (int other = 0; other < 20; ++other) {
      if (other == a || other == b) continue;
      CHECK(topology.reservoir.couplings(a, other) == 0.0);
      CHECK(topology.reservoir.couplings(b, other) == 0.0);
    }
    for (int k = 0; k < 10; ++k) {
      if (k == t) continue;
      CHECK(topology.coupling.strengths(a, k) == 0.0);
      CHECK(topology.coupling.strengths(b, k) == 0.0);
    }
  }
}

TEST_CASE("quadratic feature map enumerates distinct pairs plus a bias") {
  Mat cov = Mat::Zero(4, 4);
  cov.row(0) << 1.0, 2.0, 3.0, 4.0;
  cov.col(0) << 1.0, 2.0, 3.0, 4.0;
  const Vec features = entropy_feature_map(cov);
  REQUIRE(features.size() == 7);  // C(4, 2) pairs + bias
  CHECK(features(0) == doctest::Approx(1.0 * 2.0));
  CHECK(features(1) == doctest::Approx(1.0 * 3.0));
  CHECK(features(2) == doctest::Approx(1.0 * 4.0));
  CHECK(features(3) == doctest::Approx(2.0 * 3.0));
  CHECK(features(4) == doctest::Approx(2.0 * 4.0));
  CHECK(features(5) == doctest::Approx(3.0 * 4.0));
  CHECK(features(6) == doctest::Approx(1.0));
}

TEST_CASE("ridge readout recovers a linear map and nmse scores it") {
  Rng rng(23);
  const int samples = 60;
  const int dim = 5;
  Mat features(samples, dim);
  for (int i = 0; i < samples; ++i)
    for (int j = 0; j < dim; ++j) features(i, j) = rng.uniform(-1.0, 1.0);
  Vec weights(dim);
  weights << 0.3, -1.2, 0.0, 2.0, 0.7;
  const Vec targets = features * weights;

  const Vec recovered = train_linear_readout(features, targets, 1e-10);
  CHECK((features * recovered - targets).cwiseAbs().maxCoeff() < 1e-6);
  CHECK(nmse(features * recovered, targets) < 1e-12);
}

TEST_CASE("nmse normalizes by the population variance of the actual values") {
  Vec actual(3);
  actual << 0.0, 1.0, 2.0;
  Vec predicted(3);
  predicted << 0.0, 1.0, 1.0;
  CHECK(nmse(predicted, actual) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(nmse(actual, actual) == doctest::Approx(0.0));
  CHECK_THROWS(nmse(predicted, Vec::Constant(3, 1.0)));
}

TEST_CASE("state preparation rejects a series shorter than the run") {
  Rng rng(29);
  const NetworkSpec reservoir = random_reservoir(2, 0.2, 0.25, rng);
  TaskSettings settings;
  settings.phases = PhasePlan{2, 3, 2};
  settings.dt_candidates = {8.0};
  const std::vector<double> series(5, 0.5);  // needs 7 + advance samples
  CHECK_THROWS(run_state_preparation(reservoir, 1, series, settings, rng));
}

TEST_CASE("random guess fidelity baseline reproduces the thermal average") {
  // Fidelity between the vacuum and a thermal state of mean occupation n is
  // 1 / (1 + n); averaging over n uniform on [0, 10] gives ln(11) / 10.
  Rng rng(31);
  const StateSampler vacuum_sampler = [](Rng&) { return vacuum_state(1, 0.25); };
  const StateSampler thermal_sampler = [](Rng& r) {
    return make_single_mode_state(r.uniform(0.0, 10.0), 0.0, 0.0, 0.25);
  };
  const double estimate = random_guess_baseline(vacuum_sampler, thermal_sampler, 20000, rng);
  CHECK(estimate == doctest::Approx(std::log(11.0) / 10.0).epsilon(0.02));

  const TaskSettings settings;
  const double task_baseline = task_random_guess_baseline(settings, 2000, rng);
  CHECK(task_baseline > 0.05);
  CHECK(task_baseline < 0.6);
}
