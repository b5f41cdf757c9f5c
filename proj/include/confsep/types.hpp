#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace confsep {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Feature vectors, logits and probability vectors are all dense double
/// vectors; the aliases name the role a value plays.
using FeatureVector = Vector;
using LogitsVector = Vector;
using PredictionVector = Vector;

using ClassLabel = int;

/// Thrown on bad arguments, malformed files and broken invariants.
/// The CLI maps it to exit code 2.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Thrown on filesystem failures. The CLI maps it to exit code 3.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

enum class NormKind { linf, l2 };

std::string to_string(NormKind norm);
NormKind parse_norm(const std::string& text);

/// Axis-aligned input domain. Every feature coordinate must lie in [lo, hi];
/// attacks, embeddings and grid searches never leave it.
struct DomainBox {
  double lo = 0.0;
  double hi = 1.0;

  bool contains(const Vector& x, double tol = 0.0) const {
    return x.minCoeff() >= lo - tol && x.maxCoeff() <= hi + tol;
  }
  Vector clamp(Vector x) const { return x.cwiseMax(lo).cwiseMin(hi); }
  void validate() const {
    if (!(lo < hi)) throw ValidationError("domain box requires lo < hi");
  }
};

double norm_of(const Vector& v, NormKind norm);

/// argmax with deterministic tie-break: equal maxima yield the lowest index.
int argmax_lowest(const Vector& v);

/// SplitMix64 step, used to derive independent per-sample RNG seeds from a
/// base seed so that batch fan-out stays deterministic regardless of order.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt);

}  // namespace confsep
