#include "dragonpit/rl/mixers.hpp"

#include "doctest.h"
#include "dragonpit/rl/gradcheck.hpp"

using namespace dragonpit::rl;
using dragonpit::SeededRng;

namespace {

constexpr int kAgents = 3;
constexpr int kStateDim = 12;  // splits evenly across agents
constexpr int kBatch = 4;

MixInRaw random_mix_in(SeededRng& rng) {
  MixInRaw in;
  in.chosen_qs = normal_matrix(kBatch, kAgents, rng);
  in.mean_qs = normal_matrix(kBatch, kAgents, rng);
  in.state = normal_matrix(kBatch, kStateDim, rng);
  return in;
}

Matrix graph_mix(Mixer& mixer, const MixInRaw& raw) {
  Graph g;
  MixIn in{g.constant(raw.chosen_qs), g.constant(raw.mean_qs),
           g.constant(raw.state)};
  return mixer.mix(g, in).value();
}

// Exhaustive two-agent argmax consistency: the greedy joint action (each
// agent maximizing its own utility) must reach the maximal mixed value.
void check_igm(Mixer& mixer, int instances, std::uint64_t seed, int state_dim,
               int n_actions) {
  SeededRng rng(seed);
  for (int i = 0; i < instances; ++i) {
    Matrix q_table = normal_matrix(2, n_actions, rng);
    Matrix state = normal_matrix(1, state_dim, rng);
    Matrix means(1, 2);
    means << q_table.row(0).mean(), q_table.row(1).mean();

    auto mixed = [&](int a0, int a1) {
      MixInRaw in;
      in.chosen_qs = (Matrix(1, 2) << q_table(0, a0), q_table(1, a1)).finished();
      in.mean_qs = means;
      in.state = state;
      return mixer.mix_raw(in)(0, 0);
    };

    int g0 = 0, g1 = 0;
    for (int a = 1; a < n_actions; ++a) {
      if (q_table(0, a) > q_table(0, g0)) g0 = a;
      if (q_table(1, a) > q_table(1, g1)) g1 = a;
    }
    double greedy_value = mixed(g0, g1);
    double best = greedy_value;
    for (int a0 = 0; a0 < n_actions; ++a0)
      for (int a1 = 0; a1 < n_actions; ++a1)
        best = std::max(best, mixed(a0, a1));
    CHECK(best - greedy_value <= 1e-12);
  }
}

}  // namespace

TEST_SUITE_BEGIN("mixers");

TEST_CASE("dueling recombination recovers the value under averaging") {
  Eigen::RowVectorXd adv(2);
  adv << 0.5, -0.5;
  CHECK(dueling_q(1.0, adv, 0) == doctest::Approx(1.5));
  CHECK(dueling_q(1.0, adv, 1) == doctest::Approx(0.5));

  Eigen::RowVectorXd flat = Eigen::RowVectorXd::Constant(5, 3.25);
  CHECK(dueling_q(-2.0, flat, 3) == doctest::Approx(-2.0));

  Eigen::RowVectorXd any(4);
  any << 1.0, -2.0, 0.25, 7.0;
  double mean_q = 0;
  for (int a = 0; a < 4; ++a) mean_q += dueling_q(0.7, any, a);
  CHECK(mean_q / 4.0 == doctest::Approx(0.7));
}

TEST_CASE("additive mixer sums utilities exactly on both paths") {
  VdnMixer vdn;
  SeededRng rng(1);
  MixInRaw in = random_mix_in(rng);
  Matrix raw = vdn.mix_raw(in);
  CHECK(raw == in.chosen_qs.rowwise().sum());
  CHECK(graph_mix(vdn, in) == raw);
  std::vector<Parameter*> params;
  vdn.collect(params);
  CHECK(params.empty());
}

TEST_CASE("monotone state-conditioned mixer") {
  SeededRng rng(2);
  QmixMixer qmix(kStateDim, kAgents, rng);

  SUBCASE("graph and raw paths agree") {
    SeededRng data_rng(3);
    for (int i = 0; i < 5; ++i) {
      MixInRaw in = random_mix_in(data_rng);
      CHECK(graph_mix(qmix, in).isApprox(qmix.mix_raw(in), 1e-10));
    }
  }
  SUBCASE("raising any utility never lowers the mix") {
    SeededRng data_rng(4);
    for (int i = 0; i < 20; ++i) {
      MixInRaw in = random_mix_in(data_rng);
      Matrix base = qmix.mix_raw(in);
      for (int a = 0; a < kAgents; ++a) {
        MixInRaw bumped = in;
        bumped.chosen_qs.col(a).array() += 0.05;
        Matrix up = qmix.mix_raw(bumped);
        for (Eigen::Index b = 0; b < up.rows(); ++b)
          CHECK(up(b, 0) - base(b, 0) >= -1e-8);
      }
    }
  }
  SUBCASE("argmax consistency on exhaustive two-agent instances") {
    SeededRng mixer_rng(5);
    QmixMixer tiny(6, 2, mixer_rng);
    check_igm(tiny, 50, 6, 6, 3);
  }
  SUBCASE("parameters flow gradients") {
    std::vector<Parameter*> params;
    qmix.collect(params);
    CHECK(params.size() > 0);
    SeededRng data_rng(7);
    MixInRaw in = random_mix_in(data_rng);
    for (auto* p : params) p->grad.setZero();
    auto build = [&](Graph& g) {
      MixIn gin{g.constant(in.chosen_qs), g.constant(in.mean_qs),
                g.constant(in.state)};
      return mean_all(qmix.mix(g, gin));
    };
    {
      Graph g;
      g.backward(build(g));
    }
    auto report = check_gradients(params, [&] {
      Graph g;
      return build(g).value()(0, 0);
    }, 6);
    CHECK(report.max_rel_err < 1e-5);
  }
}

TEST_CASE("duplex dueling mixer") {
  SeededRng rng(8);
  QplexMixer qplex(kStateDim, kAgents, rng);

  SUBCASE("graph and raw paths agree") {
    SeededRng data_rng(9);
    for (int i = 0; i < 5; ++i) {
      MixInRaw in = random_mix_in(data_rng);
      CHECK(graph_mix(qplex, in).isApprox(qplex.mix_raw(in), 1e-10));
    }
  }
  SUBCASE("advantage weights are positive and state-only") {
    Matrix state = normal_matrix(kBatch, kStateDim, rng);
    Matrix lambda = qplex.advantage_weights(state);
    CHECK(lambda.rows() == kBatch);
    CHECK(lambda.cols() == kAgents);
    CHECK(lambda.minCoeff() > 0.0);
    CHECK(lambda == qplex.advantage_weights(state));
  }
  SUBCASE("choosing the mean utility cancels the advantage stream") {
    SeededRng data_rng(11);
    MixInRaw in = random_mix_in(data_rng);
    in.chosen_qs = in.mean_qs;
    Matrix v = qplex.state_value(in.state);
    Matrix mixed = qplex.mix_raw(in);
    for (Eigen::Index b = 0; b < kBatch; ++b)
      CHECK(std::abs(mixed(b, 0) - v(b, 0)) <= 1e-12);
    Matrix graphed = graph_mix(qplex, in);
    for (Eigen::Index b = 0; b < kBatch; ++b)
      CHECK(std::abs(graphed(b, 0) - v(b, 0)) <= 1e-12);
  }
  SUBCASE("argmax consistency on exhaustive two-agent instances") {
    SeededRng mixer_rng(12);
    QplexMixer tiny(6, 2, mixer_rng);
    check_igm(tiny, 50, 13, 6, 3);
  }
}

TEST_CASE("attention mixer") {
  SeededRng rng(14);
  QattenMixer qatten(kStateDim, kAgents, rng);

  SUBCASE("graph and raw paths agree") {
    SeededRng data_rng(15);
    for (int i = 0; i < 5; ++i) {
      MixInRaw in = random_mix_in(data_rng);
      CHECK(graph_mix(qatten, in).isApprox(qatten.mix_raw(in), 1e-10));
    }
  }
  SUBCASE("every attention row is a distribution over agents") {
    Matrix state = normal_matrix(kBatch, kStateDim, rng);
    auto heads = qatten.attention_rows(state);
    CHECK(heads.size() == kAttentionHeads);
    for (const auto& alpha : heads) {
      CHECK(alpha.rows() == kBatch);
      CHECK(alpha.cols() == kAgents);
      CHECK(alpha.minCoeff() >= 0.0);
      for (Eigen::Index b = 0; b < kBatch; ++b)
        CHECK(std::abs(alpha.row(b).sum() - 1.0) <= 1e-12);
    }
    CHECK(qatten.head_weights(state).minCoeff() >= 0.0);
  }
  SUBCASE("identical agent features attend uniformly") {
    SeededRng data_rng(16);
    Matrix feat = normal_matrix(1, kStateDim / kAgents, data_rng);
    Matrix state(1, kStateDim);
    for (int a = 0; a < kAgents; ++a)
      state.middleCols(a * (kStateDim / kAgents), kStateDim / kAgents) = feat;

    for (const auto& alpha : qatten.attention_rows(state)) {
      for (int a = 0; a < kAgents; ++a)
        CHECK(alpha(0, a) == doctest::Approx(1.0 / kAgents).epsilon(1e-12));
    }

    // With uniform attention the mix collapses to sum_h w_h * mean(q).
    MixInRaw in;
    in.chosen_qs = normal_matrix(1, kAgents, data_rng);
    in.mean_qs = Matrix::Zero(1, kAgents);
    in.state = state;
    double expect = qatten.head_weights(state).row(0).sum() *
                    in.chosen_qs.row(0).mean();
    CHECK(qatten.mix_raw(in)(0, 0) == doctest::Approx(expect).epsilon(1e-10));
  }
  SUBCASE("argmax consistency on exhaustive two-agent instances") {
    SeededRng mixer_rng(17);
    QattenMixer tiny(6, 2, mixer_rng);
    check_igm(tiny, 50, 18, 6, 3);
  }
}

TEST_CASE("the factory builds each kind and rejects strangers") {
  SeededRng rng(19);
  CHECK(make_mixer("vdn", kStateDim, kAgents, rng)->kind() == "vdn");
  CHECK(make_mixer("qmix", kStateDim, kAgents, rng)->kind() == "qmix");
  CHECK(make_mixer("qplex", kStateDim, kAgents, rng)->kind() == "qplex");
  CHECK(make_mixer("qatten", kStateDim, kAgents, rng)->kind() == "qatten");
  CHECK_THROWS_AS(make_mixer("qtran", kStateDim, kAgents, rng), TensorError);
}

TEST_SUITE_END();
