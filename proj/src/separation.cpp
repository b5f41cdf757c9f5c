#include "confsep/separation.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "confsep/parallel.hpp"

namespace confsep {

void SeparationSpec::validate() const {
  if (!(p > 0.0 && p <= 1.0)) throw ValidationError("separation p must be in (0,1]");
  if (!(q >= 0.0 && q <= 1.0)) throw ValidationError("separation q must be in [0,1]");
  if (!(delta >= 0.0)) throw ValidationError("separation delta must be >= 0");
}

namespace {

long long checked_narrow(__int128 v) {
  if (v > std::numeric_limits<long long>::max() ||
      v < std::numeric_limits<long long>::min())
    throw ValidationError("rational arithmetic overflow");
  return static_cast<long long>(v);
}

}  // namespace

Rational::Rational(long long n, long long d) {
  if (d == 0) throw ValidationError("rational denominator must be nonzero");
  if (d < 0) {
    n = -n;
    d = -d;
  }
  const long long g = std::gcd(n < 0 ? -n : n, d);
  num = g == 0 ? 0 : n / g;
  den = g == 0 ? 1 : d / g;
}

std::string Rational::to_string() const {
  std::ostringstream out;
  out << num;
  if (den != 1) out << '/' << den;
  return out.str();
}

Rational operator+(const Rational& a, const Rational& b) {
  const __int128 n = static_cast<__int128>(a.num) * b.den +
                     static_cast<__int128>(b.num) * a.den;
  const __int128 d = static_cast<__int128>(a.den) * b.den;
  return Rational(checked_narrow(n), checked_narrow(d));
}

Rational operator-(const Rational& a, const Rational& b) {
  return a + Rational(-b.num, b.den);
}

Rational operator*(const Rational& a, const Rational& b) {
  const __int128 n = static_cast<__int128>(a.num) * b.num;
  const __int128 d = static_cast<__int128>(a.den) * b.den;
  return Rational(checked_narrow(n), checked_narrow(d));
}

Rational operator/(const Rational& a, const Rational& b) {
  if (b.num == 0) throw ValidationError("rational division by zero");
  return a * Rational(b.den, b.num);
}

bool operator==(const Rational& a, const Rational& b) {
  return a.num == b.num && a.den == b.den;
}

bool operator<(const Rational& a, const Rational& b) {
  return static_cast<__int128>(a.num) * b.den < static_cast<__int128>(b.num) * a.den;
}

SeparationEstimate chebyshev_interval(long long successes, long long t,
                                      double epsilon) {
  if (t <= 0) throw ValidationError("chebyshev_interval: t must be positive");
  if (successes < 0 || successes > t)
    throw ValidationError("chebyshev_interval: successes must be in [0, t]");
  if (!(epsilon > 0.0 && epsilon < 1.0))
    throw ValidationError("chebyshev_interval: epsilon must be in (0,1)");
  SeparationEstimate est;
  est.successes = successes;
  est.t = t;
  est.mu_hat = static_cast<double>(successes) / static_cast<double>(t);
  est.epsilon = epsilon;
  est.alpha = 1.0 - 1.0 / (4.0 * epsilon * epsilon * static_cast<double>(t));
  est.upper = std::min(1.0, est.mu_hat + epsilon);
  est.lower = std::max(0.0, est.mu_hat - epsilon);
  return est;
}

RationalInterval chebyshev_interval_exact(long long successes, long long t,
                                          const Rational& epsilon) {
  if (t <= 0) throw ValidationError("chebyshev_interval: t must be positive");
  if (successes < 0 || successes > t)
    throw ValidationError("chebyshev_interval: successes must be in [0, t]");
  if (!(Rational(0, 1) < epsilon && epsilon < Rational(1, 1)))
    throw ValidationError("chebyshev_interval: epsilon must be in (0,1)");
  const Rational zero(0, 1);
  const Rational one(1, 1);
  RationalInterval interval;
  interval.mu_hat = Rational(successes, t);
  interval.alpha =
      one - one / (Rational(4, 1) * epsilon * epsilon * Rational(t, 1));
  const Rational up = interval.mu_hat + epsilon;
  const Rational low = interval.mu_hat - epsilon;
  interval.upper = one < up ? one : up;
  interval.lower = low < zero ? zero : low;
  return interval;
}

double markov_bound(const LossKind& kind, double rho, double p) {
  if (!(p > 0.0 && p < 1.0)) throw ValidationError("markov_bound: p must be in (0,1)");
  if (!(rho >= 0.0)) throw ValidationError("markov_bound: rho must be >= 0");
  const double t = tau(kind, 1.0 - p);
  if (t == 0.0) return std::numeric_limits<double>::infinity();
  return rho / t;
}

BadEventEstimate estimate_bad_event(const Network& net, const Dataset& data,
                                    double p, double delta,
                                    const AttackBudget& budget, int threads) {
  if (!(p > 0.0 && p <= 1.0)) throw ValidationError("estimate_bad_event: p must be in (0,1]");
  if (budget.radius != delta)
    throw ValidationError("estimate_bad_event: budget radius must equal delta");
  data.validate();
  const int n = data.size();
  std::vector<std::optional<AttackResult>> found(static_cast<std::size_t>(n));
  parallel_for(n, threads, [&](int i) {
    AttackBudget b = budget;
    b.seed = mix_seed(budget.seed, static_cast<std::uint64_t>(i));
    found[static_cast<std::size_t>(i)] =
        p_confident_attack(net, data.xs[static_cast<std::size_t>(i)],
                           data.ys[static_cast<std::size_t>(i)], p, b);
  });
  BadEventEstimate result;
  result.estimate.t = n;
  result.estimate.epsilon = std::numeric_limits<double>::quiet_NaN();
  result.estimate.alpha = std::numeric_limits<double>::quiet_NaN();
  result.estimate.upper = std::numeric_limits<double>::quiet_NaN();
  result.estimate.lower = std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < n; ++i) {
    if (found[static_cast<std::size_t>(i)]) {
      ++result.estimate.successes;
      result.witnesses.push_back(
          WitnessRecord{i, std::move(*found[static_cast<std::size_t>(i)])});
    }
  }
  result.estimate.mu_hat =
      static_cast<double>(result.estimate.successes) / static_cast<double>(n);
  return result;
}

void verify_witnesses(const Network& net, const Dataset& data,
                      const BadEventEstimate& result, double p, double delta,
                      NormKind metric) {
  // Feasibility re-checks allow a relative rounding cushion: l2 projection
  // scales coordinates and may land a few ulps outside the sphere.
  const double ball_tol = delta * 1e-12 + 1e-15;
  for (const WitnessRecord& w : result.witnesses) {
    if (w.index < 0 || w.index >= data.size())
      throw std::logic_error("witness index out of range");
    const Vector& x = data.xs[static_cast<std::size_t>(w.index)];
    const ClassLabel y = data.ys[static_cast<std::size_t>(w.index)];
    if (norm_of(w.attack.point - x, metric) > delta + ball_tol)
      throw std::logic_error("witness point outside the delta ball");
    if (!data.box.contains(w.attack.point, 1e-12))
      throw std::logic_error("witness point outside the domain box");
    const PredictionVector probs = softmax(forward_logits(net, w.attack.point));
    double best_wrong = 0.0;
    for (Eigen::Index l = 0; l < probs.size(); ++l)
      if (static_cast<ClassLabel>(l) != y) best_wrong = std::max(best_wrong, probs[l]);
    if (best_wrong < p)
      throw std::logic_error("witness point is not p-confident for a wrong label");
  }
}

MarkovCheckReport empirical_markov_check(const Network& net, const Dataset& data,
                                         const LossKind& kind, double p,
                                         const AttackBudget& budget, int threads) {
  if (!(p > 0.0 && p < 1.0))
    throw ValidationError("empirical_markov_check: p must be in (0,1)");
  if (!tau_informative(kind))
    throw ValidationError(
        "empirical_markov_check: loss has no usable lower-bound function");
  data.validate();
  const int n = data.size();

  struct Sample {
    double kappa = 0.0;
    bool witness = false;
  };
  std::vector<Sample> samples(static_cast<std::size_t>(n));
  const std::uint64_t kappa_base = mix_seed(budget.seed, 0x6b617070u);
  parallel_for(n, threads, [&](int i) {
    const Vector& x = data.xs[static_cast<std::size_t>(i)];
    const ClassLabel y = data.ys[static_cast<std::size_t>(i)];
    AttackBudget loss_budget = budget;
    loss_budget.seed = mix_seed(kappa_base, static_cast<std::uint64_t>(i));
    double kappa = kappa_hat(net, x, y, kind, loss_budget);

    AttackBudget witness_budget = budget;
    witness_budget.seed = mix_seed(budget.seed, static_cast<std::uint64_t>(i));
    const auto witness = p_confident_attack(net, x, y, p, witness_budget);
    if (witness) {
      // The witness point lies in the ball, so the loss there lower-bounds
      // the true inner max; folding it in keeps the Markov identity exact.
      const LogitsVector logits = forward_logits(net, witness->point);
      kappa = std::max(kappa, loss_value(kind, logits, softmax(logits), y));
    }
    samples[static_cast<std::size_t>(i)] = {kappa, witness.has_value()};
  });

  MarkovCheckReport report;
  report.t = n;
  report.tau = tau(kind, 1.0 - p);
  report.min_witness_kappa = std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (const Sample& s : samples) {
    sum += s.kappa;
    if (s.witness) {
      ++report.witnesses;
      report.min_witness_kappa = std::min(report.min_witness_kappa, s.kappa);
    }
  }
  report.rho_hat = sum / n;
  report.frequency = static_cast<double>(report.witnesses) / static_cast<double>(n);
  report.bound = report.tau == 0.0 ? std::numeric_limits<double>::infinity()
                                   : report.rho_hat / report.tau;

  if (report.frequency > report.bound + 1e-12)
    throw std::logic_error("empirical Markov inequality violated: frequency " +
                           std::to_string(report.frequency) + " > bound " +
                           std::to_string(report.bound));
  if (report.witnesses > 0 && report.min_witness_kappa < report.tau - 1e-12)
    throw std::logic_error("witness kappa " +
                           std::to_string(report.min_witness_kappa) +
                           " below tau " + std::to_string(report.tau));
  return report;
}

namespace {

std::vector<double> axis_values(double center, double radius, double pitch,
                                const DomainBox& box) {
  const double a = std::max(box.lo, center - radius);
  const double b = std::min(box.hi, center + radius);
  std::vector<double> values;
  for (double v = a; v <= b + 1e-12; v += pitch) values.push_back(std::min(v, b));
  const auto ensure = [&](double v) {
    for (double u : values)
      if (std::abs(u - v) <= 1e-12) return;
    values.push_back(v);
  };
  ensure(b);
  if (center >= a && center <= b) ensure(center);
  return values;
}

}  // namespace

std::vector<Vector> grid_points(const Vector& center, double radius, double pitch,
                                NormKind metric, const DomainBox& box) {
  if (!(radius >= 0.0)) throw ValidationError("grid radius must be >= 0");
  if (!(pitch > 0.0)) throw ValidationError("grid pitch must be > 0");
  const int d = static_cast<int>(center.size());
  if (d < 1 || d > 3)
    throw ValidationError("grid enumeration supports dimensions 1 to 3 only");

  std::vector<std::vector<double>> axes;
  for (int j = 0; j < d; ++j)
    axes.push_back(axis_values(center[j], radius, pitch, box));

  std::vector<Vector> points;
  std::vector<std::size_t> idx(static_cast<std::size_t>(d), 0);
  while (true) {
    Vector z(d);
    for (int j = 0; j < d; ++j)
      z[j] = axes[static_cast<std::size_t>(j)][idx[static_cast<std::size_t>(j)]];
    if (metric != NormKind::l2 || (z - center).norm() <= radius + 1e-12)
      points.push_back(std::move(z));
    int j = 0;
    for (; j < d; ++j) {
      auto& k = idx[static_cast<std::size_t>(j)];
      if (++k < axes[static_cast<std::size_t>(j)].size()) break;
      k = 0;
    }
    if (j == d) break;
  }
  return points;
}

std::vector<bool> certify_separation_sample(const Network& net, const Dataset& data,
                                            const SeparationSpec& spec,
                                            double grid_pitch) {
  spec.validate();
  data.validate();
  if (data.dim() > 3)
    throw ValidationError("certify_separation_sample supports dimension <= 3");
  std::vector<bool> good(static_cast<std::size_t>(data.size()), true);
  for (int i = 0; i < data.size(); ++i) {
    const Vector& x = data.xs[static_cast<std::size_t>(i)];
    const ClassLabel y = data.ys[static_cast<std::size_t>(i)];
    for (const Vector& z :
         grid_points(x, spec.delta, grid_pitch, spec.metric, data.box)) {
      const PredictionVector probs = softmax(forward_logits(net, z));
      bool bad = false;
      for (Eigen::Index l = 0; l < probs.size(); ++l) {
        if (static_cast<ClassLabel>(l) != y && probs[l] >= spec.p) {
          bad = true;
          break;
        }
      }
      if (bad) {
        good[static_cast<std::size_t>(i)] = false;
        break;
      }
    }
  }
  return good;
}

}  // namespace confsep
