#include "confsep/types.hpp"

#include <cmath>

namespace confsep {

std::string to_string(NormKind norm) {
  return norm == NormKind::linf ? "linf" : "l2";
}

NormKind parse_norm(const std::string& text) {
  if (text == "linf") return NormKind::linf;
  if (text == "l2") return NormKind::l2;
  throw ValidationError("unknown norm '" + text + "' (expected linf or l2)");
}

double norm_of(const Vector& v, NormKind norm) {
  if (norm == NormKind::linf) return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
  return v.norm();
}

int argmax_lowest(const Vector& v) {
  if (v.size() == 0) throw ValidationError("argmax of empty vector");
  int best = 0;
  for (int i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t salt) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (salt + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace confsep
