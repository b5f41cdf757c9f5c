#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "confsep/attacks.hpp"
#include "confsep/losses.hpp"
#include "confsep/network.hpp"
#include "confsep/types.hpp"
#include "oracles.hpp"

using namespace confsep;

namespace {

AttackBudget make_budget(double radius, std::uint64_t seed = 7,
                         NormKind norm = NormKind::linf) {
  AttackBudget b;
  b.norm = norm;
  b.radius = radius;
  b.iterations = 60;
  b.restarts = 5;
  b.seed = seed;
  return b;
}

Network linear_net(const Matrix& W, const Vector& b) {
  Network net;
  net.layer_sizes = {static_cast<int>(W.cols()), static_cast<int>(W.rows())};
  net.weights = {W};
  net.biases = {b};
  net.activation = Activation::tanh;
  return net;
}

}  // namespace

TEST_CASE("project clamps into the ball and the box") {
  AttackBudget b = make_budget(0.1);
  Vector x0(1), z(1);
  x0 << 0.5;
  z << 0.9;
  CHECK(project(x0, z, b)[0] == doctest::Approx(0.6).epsilon(1e-15));

  // Radial scaling for l2 with a [-1,1] box.
  AttackBudget l2 = make_budget(1.0, 7, NormKind::l2);
  l2.box = DomainBox{-1.0, 1.0};
  Vector o(2), far(2);
  o << 0.0, 0.0;
  far << 3.0, 4.0;
  const Vector proj = project(o, far, l2);
  CHECK(proj[0] == doctest::Approx(0.6).epsilon(1e-12));
  CHECK(proj[1] == doctest::Approx(0.8).epsilon(1e-12));

  // Identity on feasible points, and idempotence.
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const Vector c = oracle::random_point(3, rng, 0.2, 0.8);
    const Vector inside = c + 0.05 * oracle::random_point(3, rng, -1.0, 1.0);
    AttackBudget wide = make_budget(0.1);
    CHECK(project(c, inside, wide) == inside);
    const Vector once = project(c, oracle::random_point(3, rng, -2.0, 2.0), wide);
    CHECK(project(c, once, wide) == once);
    CHECK(norm_of(once - c, NormKind::linf) <= 0.1 + 1e-15);
    CHECK(wide.box.contains(once));
  }
}

TEST_CASE("sample_in_ball stays feasible") {
  std::mt19937_64 rng(11);
  for (NormKind norm : {NormKind::linf, NormKind::l2}) {
    AttackBudget b = make_budget(0.3, 5, norm);
    Vector x0(3);
    x0 << 0.1, 0.5, 0.95;
    for (int i = 0; i < 200; ++i) {
      const Vector z = sample_in_ball(x0, b, rng);
      CHECK(norm_of(z - x0, norm) <= 0.3 + 1e-12);
      CHECK(b.box.contains(z));
    }
  }
}

TEST_CASE("attack budget validation") {
  CHECK_NOTHROW(make_budget(0.0).validate());
  AttackBudget b = make_budget(-0.1);
  CHECK_THROWS_AS(b.validate(), ValidationError);
  b = make_budget(0.1);
  b.iterations = 0;
  CHECK_THROWS_AS(b.validate(), ValidationError);
  b = make_budget(0.1);
  b.restarts = 0;
  CHECK_THROWS_AS(b.validate(), ValidationError);
  b = make_budget(0.1);
  b.step_size = -1.0;
  CHECK_THROWS_AS(b.validate(), ValidationError);
  CHECK(make_budget(0.2).step() == doctest::Approx(0.05));
}

TEST_CASE("pgd_maximize keeps the start point as a candidate") {
  // Objective with its maximum at the start: the search must return x0.
  Vector x0(2);
  x0 << 0.4, 0.6;
  PointObjective peak{
      [&](const Vector& z) { return -(z - x0).squaredNorm(); },
      [&](const Vector& z) { return Vector(-2.0 * (z - x0)); }};
  const SearchOutcome out = pgd_maximize(x0, peak, make_budget(0.2));
  CHECK(out.point == x0);
  CHECK(out.objective == 0.0);

  // Radius 0 returns the start bitwise for any objective.
  PointObjective slope{[](const Vector& z) { return z.sum(); },
                       [](const Vector& z) { return Vector::Ones(z.size()); }};
  const SearchOutcome deg = pgd_maximize(x0, slope, make_budget(0.0));
  CHECK(deg.point == x0);
}

TEST_CASE("pgd_maximize_loss on a degenerate ball returns the input") {
  const Network net = random_network({2, 5, 3}, Activation::tanh, 21);
  Vector x(2);
  x << 0.3, 0.8;
  const AttackResult res =
      pgd_maximize_loss(net, x, 1, LossKind::cross_entropy(), make_budget(0.0));
  CHECK(res.point == x);
  CHECK(res.objective == loss(LossKind::cross_entropy(), net, x, 1));
}

TEST_CASE("pgd_maximize_loss matches the linear closed form") {
  Matrix W(2, 2);
  W << 1.2, -0.4, -0.6, 0.9;
  Vector b(2);
  b << 0.05, -0.1;
  const Network net = linear_net(W, b);
  Vector x0(2);
  x0 << 0.5, 0.5;
  const ClassLabel y = 0;
  const double r = 0.2;

  // For two classes the input gradient direction of the loss is fixed at
  // w1 - w0, so the worst point is the matching corner of the box.
  const Vector dir = (W.row(1) - W.row(0)).transpose();
  Vector corner = x0;
  for (int i = 0; i < 2; ++i) corner[i] += r * (dir[i] > 0 ? 1.0 : -1.0);
  const double best = loss(LossKind::cross_entropy(), net, corner, y);

  const AttackResult res =
      pgd_maximize_loss(net, x0, y, LossKind::cross_entropy(), make_budget(r));
  CHECK(res.objective == doctest::Approx(best).epsilon(1e-6));
  CHECK(res.objective <= best + 1e-12);
}

TEST_CASE("pgd_maximize_loss tracks the grid optimum on seeded instances") {
  int hits = 0;
  const int total = 10;
  for (int k = 0; k < total; ++k) {
    const Network net =
        random_network({2, 16, 8, 2}, Activation::tanh, 100 + static_cast<unsigned>(k));
    std::mt19937_64 rng(200 + static_cast<unsigned>(k));
    const Vector x = oracle::random_point(2, rng, 0.2, 0.8);
    const ClassLabel y = predict_label(net, x);
    AttackBudget budget = make_budget(0.15, 300 + static_cast<unsigned>(k));
    budget.iterations = 100;
    budget.restarts = 10;

    const AttackResult res =
        pgd_maximize_loss(net, x, y, LossKind::cross_entropy(), budget);
    const auto grid = oracle::grid_search(
        [&](const Vector& z) { return loss(LossKind::cross_entropy(), net, z, y); }, x,
        budget.radius, budget.norm, budget.box);
    if (res.objective >= 0.99 * grid.value - 1e-12) ++hits;
  }
  CHECK(hits >= 9);
}

TEST_CASE("attack results are feasible and self-consistent") {
  std::mt19937_64 rng(77);
  for (NormKind norm : {NormKind::linf, NormKind::l2}) {
    for (int k = 0; k < 8; ++k) {
      const Network net =
          random_network({3, 8, 3}, k % 2 ? Activation::relu : Activation::tanh,
                         400 + static_cast<unsigned>(k));
      const Vector x = oracle::random_point(3, rng);
      const AttackBudget budget = make_budget(0.12, 500 + static_cast<unsigned>(k), norm);

      const AttackResult res =
          pgd_maximize_loss(net, x, 0, LossKind::squared(), budget);
      CHECK(norm_of(res.point - x, norm) <= budget.radius + 1e-12);
      CHECK(budget.box.contains(res.point, 1e-15));
      CHECK(res.achieved_confidence == confidence(predict(net, res.point).second));
      CHECK(res.achieved_label == predict_label(net, res.point));
      CHECK(res.objective >= loss(LossKind::squared(), net, x, 0));

      const AttackResult tgt = targeted_confidence_attack(net, x, 2, budget);
      CHECK(norm_of(tgt.point - x, norm) <= budget.radius + 1e-12);
      CHECK(budget.box.contains(tgt.point, 1e-15));
      CHECK(tgt.target == 2);
      CHECK(tgt.success == (tgt.achieved_label == 2));
      CHECK(predict(net, tgt.point).second[2] >= predict(net, x).second[2]);
    }
  }
}

TEST_CASE("attacks are deterministic") {
  const Network net = random_network({2, 10, 3}, Activation::tanh, 9);
  Vector x(2);
  x << 0.35, 0.65;
  const AttackBudget budget = make_budget(0.2, 1234);
  const AttackResult a = pgd_maximize_loss(net, x, 1, LossKind::cross_entropy(), budget);
  const AttackResult b = pgd_maximize_loss(net, x, 1, LossKind::cross_entropy(), budget);
  CHECK(a.point == b.point);
  CHECK(a.objective == b.objective);

  const auto wa = best_wrong_attack(net, x, 1, budget);
  const auto wb = best_wrong_attack(net, x, 1, budget);
  REQUIRE(wa.has_value() == wb.has_value());
  if (wa) {
    CHECK(wa->point == wb->point);
    CHECK(wa->achieved_confidence == wb->achieved_confidence);
  }
}

TEST_CASE("targeted attack on a degenerate ball") {
  const Network net = random_network({2, 6, 3}, Activation::tanh, 31);
  Vector x(2);
  x << 0.25, 0.7;
  const ClassLabel base = predict_label(net, x);
  for (ClassLabel target = 0; target < 3; ++target) {
    const AttackResult res = targeted_confidence_attack(net, x, target, make_budget(0.0));
    CHECK(res.point == x);
    CHECK(res.success == (base == target));
  }
  CHECK_THROWS_AS(targeted_confidence_attack(net, x, 5, make_budget(0.1)),
                  ValidationError);
}

TEST_CASE("targeted attack matches the linear closed form") {
  Matrix W(2, 2);
  W << 0.8, -1.1, -0.3, 0.7;
  const Network net = linear_net(W, Vector::Zero(2));
  Vector x0(2);
  x0 << 0.5, 0.5;
  const double r = 0.15;
  const ClassLabel target = 1;

  const Vector dir = (W.row(1) - W.row(0)).transpose();
  Vector corner = x0;
  for (int i = 0; i < 2; ++i) corner[i] += r * (dir[i] > 0 ? 1.0 : -1.0);
  const double best = predict(net, corner).second[target];

  const AttackResult res = targeted_confidence_attack(net, x0, target, make_budget(r));
  CHECK(predict(net, res.point).second[target] == doctest::Approx(best).epsilon(1e-6));
}

TEST_CASE("doubling the radius never hurts the targeted attack") {
  for (unsigned k = 0; k < 20; ++k) {
    const Network net = random_network({2, 12, 3}, Activation::tanh, 600 + k);
    std::mt19937_64 rng(700 + k);
    const Vector x = oracle::random_point(2, rng, 0.25, 0.75);
    const ClassLabel target = static_cast<ClassLabel>(k % 3);
    double prev = 0.0;
    for (double r : {0.05, 0.1, 0.2, 0.4}) {
      AttackBudget budget = make_budget(r, 800 + k);
      budget.iterations = 100;
      budget.restarts = 10;
      const AttackResult res = targeted_confidence_attack(net, x, target, budget);
      const double conf = predict(net, res.point).second[target];
      CHECK(conf >= prev - 1e-12);
      prev = conf;
    }
  }
}

TEST_CASE("best_wrong_attack recomposes from the per-target attacks") {
  const Network net = random_network({2, 14, 3}, Activation::tanh, 55);
  std::mt19937_64 rng(56);
  int composed = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const Vector x = oracle::random_point(2, rng, 0.15, 0.85);
    const ClassLabel y = predict_label(net, x);
    const AttackBudget budget = make_budget(0.25, 900 + static_cast<unsigned>(trial));

    const auto combined = best_wrong_attack(net, x, y, budget);

    std::optional<AttackResult> expected;
    for (ClassLabel target = 0; target < 3; ++target) {
      if (target == y) continue;
      AttackBudget b = budget;
      b.seed = mix_seed(budget.seed, static_cast<std::uint64_t>(target));
      AttackResult res = targeted_confidence_attack(net, x, target, b);
      if (!res.success) continue;
      if (!expected || res.achieved_confidence > expected->achieved_confidence)
        expected = res;
    }
    REQUIRE(combined.has_value() == expected.has_value());
    if (combined) {
      CHECK(combined->point == expected->point);
      CHECK(combined->achieved_confidence == expected->achieved_confidence);
      CHECK(combined->target == expected->target);
      CHECK(combined->achieved_label != y);
      ++composed;
    }
  }
  CHECK(composed > 0);
}

TEST_CASE("a constant model cannot be flipped") {
  const Network net = zero_network({2, 3}, Activation::tanh);
  Vector x(2);
  x << 0.5, 0.5;
  CHECK(!best_wrong_attack(net, x, 0, make_budget(0.3)).has_value());
  CHECK(!p_confident_attack(net, x, 0, 0.5, make_budget(0.3)).has_value());
}

TEST_CASE("p_confident_attack thresholds the best wrong attack") {
  const Network net = random_network({2, 12, 2}, Activation::tanh, 61);
  std::mt19937_64 rng(62);
  int found = 0;
  for (int trial = 0; trial < 15; ++trial) {
    const Vector x = oracle::random_point(2, rng, 0.2, 0.8);
    const ClassLabel y = predict_label(net, x);
    const AttackBudget budget = make_budget(0.3, 950 + static_cast<unsigned>(trial));
    const auto best = best_wrong_attack(net, x, y, budget);
    if (!best) continue;
    ++found;

    const auto vacuous = p_confident_attack(net, x, y, 0.0, budget);
    REQUIRE(vacuous.has_value());
    CHECK(vacuous->point == best->point);

    const auto too_high = p_confident_attack(
        net, x, y, std::min(1.0, best->achieved_confidence + 1e-9), budget);
    CHECK(!too_high.has_value());

    const auto at = p_confident_attack(net, x, y, best->achieved_confidence, budget);
    REQUIRE(at.has_value());
    CHECK(at->achieved_confidence >= best->achieved_confidence);
  }
  CHECK(found > 0);
  CHECK_THROWS_AS(p_confident_attack(net, Vector::Constant(2, 0.5), 0, 1.5,
                                     make_budget(0.1)),
                  ValidationError);
}

TEST_CASE("p_confident_attack finds what the grid can see") {
  int grid_found = 0;
  int attack_found = 0;
  for (unsigned k = 0; k < 30; ++k) {
    Network net = random_network({2, 12, 2}, Activation::tanh, 1000 + k);
    // Sharpen the logits so that high-confidence regions exist nearby.
    for (auto& W : net.weights) W *= 3.0;
    for (auto& b : net.biases) b *= 3.0;
    std::mt19937_64 rng(1100 + k);
    const Vector x = oracle::random_point(2, rng, 0.2, 0.8);
    const ClassLabel y = predict_label(net, x);
    AttackBudget budget = make_budget(0.25, 1200 + k);
    budget.iterations = 100;
    budget.restarts = 10;

    const auto grid = oracle::grid_search(
        [&](const Vector& z) {
          const PredictionVector probs = predict(net, z).second;
          double best = 0.0;
          for (Eigen::Index i = 0; i < probs.size(); ++i)
            if (static_cast<ClassLabel>(i) != y) best = std::max(best, probs[i]);
          return best;
        },
        x, budget.radius, budget.norm, budget.box);
    if (grid.value < 0.9) continue;
    ++grid_found;
    if (p_confident_attack(net, x, y, 0.9, budget)) ++attack_found;
  }
  REQUIRE(grid_found > 0);
  CHECK(attack_found * 10 >= grid_found * 9);
}

TEST_CASE("kappa_hat lower-bounds and tracks the worst-case loss") {
  const Network net = random_network({2, 10, 2}, Activation::tanh, 71);
  Vector x(2);
  x << 0.45, 0.55;
  const ClassLabel y = predict_label(net, x);
  const LossKind kind = LossKind::cross_entropy();

  CHECK(kappa_hat(net, x, y, kind, make_budget(0.0)) == loss(kind, net, x, y));

  double prev = 0.0;
  for (double r : {0.0, 0.05, 0.1, 0.2}) {
    AttackBudget budget = make_budget(r, 4321);
    budget.iterations = 100;
    budget.restarts = 10;
    const double k = kappa_hat(net, x, y, kind, budget);
    CHECK(k >= loss(kind, net, x, y));
    CHECK(k >= prev - 1e-12);
    prev = k;
  }

  // Linear closed form, as for the loss attack.
  Matrix W(2, 2);
  W << 1.0, -0.5, -0.8, 0.6;
  const Network lin = linear_net(W, Vector::Zero(2));
  const Vector dir = (W.row(1) - W.row(0)).transpose();
  Vector corner = Vector::Constant(2, 0.5);
  for (int i = 0; i < 2; ++i) corner[i] += 0.2 * (dir[i] > 0 ? 1.0 : -1.0);
  const double best = loss(kind, lin, corner, 0);
  CHECK(kappa_hat(lin, Vector::Constant(2, 0.5), 0, kind, make_budget(0.2)) ==
        doctest::Approx(best).epsilon(1e-6));
}
