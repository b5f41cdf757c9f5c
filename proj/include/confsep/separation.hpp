#pragma once

#include <string>
#include <vector>

#include "confsep/attacks.hpp"
#include "confsep/dataset.hpp"
#include "confsep/losses.hpp"
#include "confsep/network.hpp"

namespace confsep {

/// Separation statement parameters: with probability >= 1-q over the data,
/// no point within distance delta of a sample is p-confident for a wrong
/// label.
struct SeparationSpec {
  double p = 0.9;
  double q = 0.0;
  double delta = 0.0;
  NormKind metric = NormKind::linf;
  void validate() const;
};

struct SeparationEstimate {
  long long successes = 0;  // samples where the bad event was witnessed
  long long t = 0;          // sample count
  double mu_hat = 0.0;      // successes / t
  double epsilon = 0.0;
  double alpha = 0.0;       // 1 - 1/(4 epsilon^2 t)
  double upper = 0.0;       // min(1, mu_hat + epsilon)
  double lower = 0.0;       // max(0, mu_hat - epsilon)
};

/// Exact fraction on int64, normalized with positive denominator.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n, long long d);
  static Rational from_int(long long n) { return Rational(n, 1); }

  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string to_string() const;
};

Rational operator+(const Rational& a, const Rational& b);
Rational operator-(const Rational& a, const Rational& b);
Rational operator*(const Rational& a, const Rational& b);
Rational operator/(const Rational& a, const Rational& b);
bool operator==(const Rational& a, const Rational& b);
bool operator<(const Rational& a, const Rational& b);

struct RationalInterval {
  Rational mu_hat;
  Rational alpha;
  Rational upper;
  Rational lower;
};

/// Two-sided sampling-error interval from Chebyshev's inequality for a mean
/// of t Bernoulli draws: with probability >= alpha = 1 - 1/(4 epsilon^2 t)
/// the true mean lies in [mu_hat - epsilon, mu_hat + epsilon] (clamped to
/// [0,1]).
SeparationEstimate chebyshev_interval(long long successes, long long t,
                                      double epsilon);

/// Same computation in exact rational arithmetic.
RationalInterval chebyshev_interval_exact(long long successes, long long t,
                                          const Rational& epsilon);

/// Bound on the bad-event probability from the adversarial risk rho:
/// rho / tau(kind, 1-p). Returns +infinity when the loss has no usable
/// lower-bound function (tau = 0).
double markov_bound(const LossKind& kind, double rho, double p);

struct WitnessRecord {
  int index = 0;
  AttackResult attack;
};

/// Frequency estimate with the witnesses that produced it. The estimate's
/// interval fields are unfilled (NaN) until chebyshev_interval is applied;
/// successes are attack-founded, hence a lower bound on the true frequency.
struct BadEventEstimate {
  SeparationEstimate estimate;
  std::vector<WitnessRecord> witnesses;
};

/// Samples the bad event "some wrong label is p-confident within the
/// delta-ball" with p_confident_attack, per-sample seeds
/// mix_seed(budget.seed, index). Requires budget.radius == delta.
BadEventEstimate estimate_bad_event(const Network& net, const Dataset& data,
                                    double p, double delta,
                                    const AttackBudget& budget, int threads = 1);

/// Recomputes every witness: feasibility (ball and box) and wrong-label
/// p-confidence. Throws std::logic_error on any failure; witnesses are
/// produced by our own attack, so a failure is an implementation bug.
void verify_witnesses(const Network& net, const Dataset& data,
                      const BadEventEstimate& result, double p, double delta,
                      NormKind metric);

struct MarkovCheckReport {
  double rho_hat = 0.0;     // mean per-sample worst-case-loss estimate
  double tau = 0.0;         // tau(kind, 1-p)
  double frequency = 0.0;   // witness fraction
  double bound = 0.0;       // rho_hat / tau
  long long witnesses = 0;
  long long t = 0;
  double min_witness_kappa = 0.0;  // +infinity when there is no witness
};

/// Markov identity on the empirical sample: every witness point's loss is
/// folded into its sample's kappa estimate, which forces
/// frequency <= rho_hat / tau and per-witness kappa >= tau up to a 1e-12
/// floating-point guard. A violation throws std::logic_error: it indicates
/// an implementation bug, not a model property. Requires a loss with an
/// informative tau (cw_margin is rejected).
MarkovCheckReport empirical_markov_check(const Network& net, const Dataset& data,
                                         const LossKind& kind, double p,
                                         const AttackBudget& budget,
                                         int threads = 1);

/// All grid points of pitch-spaced axes covering the radius ball around
/// center, intersected with the box (l2 metric additionally filters to the
/// ball). Center and per-axis range endpoints are always included.
/// Supported up to dimension 3.
std::vector<Vector> grid_points(const Vector& center, double radius, double pitch,
                                NormKind metric, const DomainBox& box);

/// Per labeled sample: true iff no grid point of the delta-ball around it is
/// spec.p-confident for a label other than the sample's. Exhaustive up to
/// the grid pitch; dimension must be <= 3.
std::vector<bool> certify_separation_sample(const Network& net, const Dataset& data,
                                            const SeparationSpec& spec,
                                            double grid_pitch);

}  // namespace confsep
