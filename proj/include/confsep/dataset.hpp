#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "confsep/types.hpp"

namespace confsep {

struct Dataset {
  std::vector<Vector> xs;
  std::vector<ClassLabel> ys;
  std::string name;
  DomainBox box;

  int size() const { return static_cast<int>(xs.size()); }
  int dim() const { return xs.empty() ? 0 : static_cast<int>(xs.front().size()); }
  int num_classes() const;
  void validate() const;
};

/// Synthetic generators, deterministic under the seed. Features land in
/// [0,1]^d (Gaussian noise of the given standard deviation is applied in the
/// scaled coordinates, then clamped into the box).
///   two_moons       d=2, 2 classes, interleaved half circles
///   gaussian_blobs  `classes` isotropic blobs on a circle in the first two
///                   of `dim` coordinates
///   ring            d=2, inner disk vs annulus
Dataset make_synthetic(const std::string& name, int n, double noise,
                       std::uint64_t seed, int dim = 2, int classes = 2);

/// Dataset spec strings for the CLI: either a CSV path or
/// `name:n=<count>,noise=<sigma>[,seed=<s>][,dim=<d>][,classes=<c>]`.
Dataset load_dataset_spec(const std::string& spec, std::uint64_t default_seed);

/// CSV with header `label,f0,f1,...`; malformed rows are reported with their
/// line number and features are validated into the domain box.
Dataset load_csv(const std::string& path, const DomainBox& box = DomainBox{});

void save_csv(const Dataset& data, const std::string& path);

}  // namespace confsep
