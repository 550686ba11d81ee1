#include <cmath>
#include <vector>

#include "doctest.h"
#include "shamopt/optimizer.hpp"

using namespace shamopt;

namespace {

Hyperparams basic_hyper() {
  return Hyperparams{0.1, 0.9, 0.95, 0.0, 1e-12, ExponentPair::shampoo()};
}

}  // namespace

TEST_CASE("init zeroes the moments") {
  Mat x1(2, 2);
  x1 << 3, 2, 6, 5;
  const OptimizerState state = init(x1, basic_hyper());
  CHECK(state.k == 0);
  CHECK((state.x - x1).norm() == 0.0);
  CHECK(state.m_mom.norm() == 0.0);
  CHECK(state.l.matrix().norm() == 0.0);
  CHECK(state.r.matrix().norm() == 0.0);
}

TEST_CASE("zero gradient with zero decay is a fixed point") {
  Mat x1(2, 2);
  x1 << 3, 2, 6, 5;
  const OptimizerState state = init(x1, basic_hyper());
  auto [next, diag] = step(state, Mat::Zero(2, 2), basic_hyper());
  CHECK((next.x - x1).norm() == 0.0);
  CHECK(diag.update_op_norm == 0.0);
}

TEST_CASE("frozen scalar first step") {
  const Hyperparams hyper = basic_hyper();
  const OptimizerState state = init(Mat::Constant(1, 1, 1.0), hyper);
  auto [next, diag] = step(state, Mat::Constant(1, 1, 2.0), hyper);

  CHECK(next.m_mom(0, 0) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(next.l.matrix()(0, 0) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(next.r.matrix()(0, 0) == doctest::Approx(0.2).epsilon(1e-12));
  const double expected = 1.0 - 0.02 / std::sqrt(0.2 + 1e-12);
  CHECK(next.x(0, 0) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(next.x(0, 0) == doctest::Approx(0.9552786).epsilon(1e-6));
  CHECK(next.k == 1);

  // Any conjugate pair collapses to the same scalar preconditioner
  // (l+eps)^{-1/2p} m (l+eps)^{-1/2q} = m (l+eps)^{-1/2}.
  for (const ExponentPair pq :
       {ExponentPair(4.0, 4.0 / 3.0), ExponentPair::left_only(),
        ExponentPair::right_only()}) {
    Hyperparams alt = hyper;
    alt.pq = pq;
    auto [n2, d2] = step(init(Mat::Constant(1, 1, 1.0), alt),
                         Mat::Constant(1, 1, 2.0), alt);
    CHECK(n2.x(0, 0) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("pure weight decay is exact geometric shrinkage") {
  Hyperparams hyper = basic_hyper();
  hyper.lambda = 0.3;
  Mat x1(2, 2);
  x1 << 3, 2, 6, 5;
  OptimizerState state = init(x1, hyper);
  for (int k = 1; k <= 20; ++k) {
    state = step(state, Mat::Zero(2, 2), hyper).first;
    const Mat expected = std::pow(1.0 - 0.3 * 0.1, k) * x1;
    CHECK((state.x - expected).norm() <= 1e-14 * expected.norm());
  }
}

TEST_CASE("EMA closed form under constant gradient") {
  const Hyperparams hyper = basic_hyper();
  Mat g(2, 3);
  g << 1, -2, 0.5, 3, 0.25, -1;
  OptimizerState state = init(Mat::Zero(2, 3), hyper);
  for (int k = 1; k <= 40; ++k) {
    state = step(state, g, hyper).first;
    const Mat m_expected = (1.0 - std::pow(hyper.theta, k)) * g;
    const Mat l_expected = (1.0 - std::pow(hyper.beta, k)) * (g * g.transpose());
    CHECK((state.m_mom - m_expected).norm() <= 1e-10 * (1.0 + m_expected.norm()));
    CHECK((state.l.matrix() - l_expected).norm() <=
          1e-10 * (1.0 + l_expected.norm()));
  }
}

TEST_CASE("one-sided (inf,1) step never consults the left factor") {
  Hyperparams hyper = basic_hyper();
  hyper.pq = ExponentPair::right_only();
  hyper.lambda = 0.05;

  Rng rng(31);
  OptimizerState state = init(Mat::Constant(2, 2, 1.0), hyper);

  // Manual recurrence that never forms L at all.
  Mat x = Mat::Constant(2, 2, 1.0);
  Mat m_mom = Mat::Zero(2, 2);
  Mat r_acc = Mat::Zero(2, 2);
  for (int k = 0; k < 100; ++k) {
    Mat g(2, 2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) g(i, j) = rng.normal();

    state = step(state, g, hyper).first;

    m_mom = hyper.theta * m_mom + (1.0 - hyper.theta) * g;
    r_acc = hyper.beta * r_acc + (1.0 - hyper.beta) * (g.transpose() * g);
    const SymPsd r_eps = SymPsd(r_acc).shifted(hyper.eps);
    x = (1.0 - hyper.lambda * hyper.eta) * x -
        hyper.eta * m_mom * psd_power(r_eps, -0.5).matrix();

    CHECK((state.x - x).norm() <= 1e-10 * (1.0 + x.norm()));
  }
}

TEST_CASE("scalar trajectory equals an independent recurrence") {
  for (const ExponentPair pq :
       {ExponentPair::shampoo(), ExponentPair::right_only()}) {
    Hyperparams hyper{0.01, 0.9, 0.95, 0.02, 1e-8, pq};
    OptimizerState state = init(Mat::Constant(1, 1, 2.0), hyper);

    double x = 2.0, m = 0.0, l = 0.0;
    Rng rng(37);
    for (int k = 0; k < 10000; ++k) {
      const double g = rng.normal() + 0.1 * x;
      state = step(state, Mat::Constant(1, 1, g), hyper).first;

      m = hyper.theta * m + (1.0 - hyper.theta) * g;
      l = hyper.beta * l + (1.0 - hyper.beta) * g * g;
      x = (1.0 - hyper.lambda * hyper.eta) * x -
          hyper.eta * m / std::sqrt(l + hyper.eps);

      REQUIRE(std::abs(state.x(0, 0) - x) <= 1e-12);
    }
  }
}

TEST_CASE("hyperparameter validation") {
  Hyperparams h = basic_hyper();
  h.eps = 0.0;
  CHECK_THROWS_AS(h.validate(), InvalidParameterError);
  h = basic_hyper();
  h.eta = -1.0;
  CHECK_THROWS_AS(h.validate(), InvalidParameterError);
  h = basic_hyper();
  h.theta = 1.0;
  CHECK_THROWS_AS(h.validate(), InvalidParameterError);

  h = basic_hyper();
  h.beta = 0.94;  // 0.9 <= 0.94 <= sqrt(0.9) ~ 0.9487
  CHECK(h.theorem_regime());
  h.beta = 0.5;
  CHECK_FALSE(h.theorem_regime());
}

TEST_CASE("step rejects shape mismatches") {
  const OptimizerState state = init(Mat::Zero(2, 2), basic_hyper());
  CHECK_THROWS_AS(step(state, Mat::Zero(3, 2), basic_hyper()), ShapeError);
}

TEST_CASE("run composes steps and records deterministically") {
  const ToyProblem toy;
  const Hyperparams hyper = basic_hyper();
  const Mat x1 = toy.initial_point();

  SUBCASE("steps=1 equals one manual step") {
    Rng rng(41);
    Rng manual = rng;
    const RunSummary summary =
        run(toy, x1, hyper, 1, 1, rng, TraceSink{});
    const Mat g = toy.sample_grad(x1, manual);
    auto [expected, diag] = step(init(x1, hyper), g, hyper);
    CHECK((summary.final_state.x - expected.x).norm() == 0.0);
    CHECK(summary.steps_done == 1);
  }

  SUBCASE("same seed gives identical traces") {
    std::vector<TraceRecord> a, b;
    run(toy, x1, hyper, 500, 10, Rng(43),
        [&](const TraceRecord& r) { a.push_back(r); });
    run(toy, x1, hyper, 500, 10, Rng(43),
        [&](const TraceRecord& r) { b.push_back(r); });
    REQUIRE(a.size() == b.size());
    CHECK(a.size() == 50);
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].k == b[i].k);
      CHECK(a[i].f_value == b[i].f_value);
      CHECK(a[i].run_avg_grad_fro == b[i].run_avg_grad_fro);
      CHECK(a[i].x_op_norm == b[i].x_op_norm);
    }
  }

  SUBCASE("running averages are prefix means") {
    std::vector<TraceRecord> recs;
    run(toy, x1, hyper, 200, 1, Rng(47),
        [&](const TraceRecord& r) { recs.push_back(r); });
    double sum = 0.0;
    for (std::size_t i = 0; i < recs.size(); ++i) {
      sum += recs[i].grad_fro;
      CHECK(recs[i].run_avg_grad_fro ==
            doctest::Approx(sum / static_cast<double>(i + 1)).epsilon(1e-12));
    }
  }
}
