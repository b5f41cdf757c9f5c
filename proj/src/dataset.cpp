#include "confsep/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace confsep {

int Dataset::num_classes() const {
  ClassLabel m = -1;
  for (ClassLabel y : ys) m = std::max(m, y);
  return m + 1;
}

void Dataset::validate() const {
  box.validate();
  if (xs.size() != ys.size())
    throw ValidationError("dataset: feature/label count mismatch");
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].size() != xs.front().size())
      throw ValidationError("dataset: inconsistent feature dimension at row " +
                            std::to_string(i));
    if (ys[i] < 0)
      throw ValidationError("dataset: negative label at row " + std::to_string(i));
    if (!xs[i].allFinite() || !box.contains(xs[i]))
      throw ValidationError("dataset: feature out of domain at row " +
                            std::to_string(i));
  }
}

namespace {

constexpr double kPi = 3.14159265358979323846;

Vector noisy_clamped(Vector v, double noise, std::mt19937_64& rng,
                     const DomainBox& box) {
  if (noise > 0.0) {
    std::normal_distribution<double> gauss(0.0, noise);
    for (Eigen::Index j = 0; j < v.size(); ++j) v[j] += gauss(rng);
  }
  return box.clamp(v);
}

Dataset make_two_moons(int n, double noise, std::uint64_t seed) {
  Dataset data;
  data.name = "two_moons";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, kPi);
  for (int i = 0; i < n; ++i) {
    const ClassLabel y = i % 2;
    const double t = angle(rng);
    // Raw curves: outer (cos t, sin t), inner (1 - cos t, 1/2 - sin t).
    // The affine map below sends the raw bounding box [-1,2]x[-1/2,1] onto
    // [0,1]^2; the two scaled curves stay at least 0.27 apart in l2.
    double rx, ry;
    if (y == 0) {
      rx = std::cos(t);
      ry = std::sin(t);
    } else {
      rx = 1.0 - std::cos(t);
      ry = 0.5 - std::sin(t);
    }
    Vector v(2);
    v << (rx + 1.0) / 3.0, (ry + 0.5) / 1.5;
    data.xs.push_back(noisy_clamped(std::move(v), noise, rng, data.box));
    data.ys.push_back(y);
  }
  return data;
}

Dataset make_gaussian_blobs(int n, double noise, std::uint64_t seed, int dim,
                            int classes) {
  if (dim < 2) throw ValidationError("gaussian_blobs: dim must be >= 2");
  if (classes < 2) throw ValidationError("gaussian_blobs: classes must be >= 2");
  Dataset data;
  data.name = "gaussian_blobs";
  std::mt19937_64 rng(seed);
  // Blob centers sit on a circle of radius 0.3 in the first two coordinates;
  // remaining coordinates are centered at 0.5.
  std::vector<Vector> centers;
  for (int c = 0; c < classes; ++c) {
    const double theta = 2.0 * kPi * c / classes;
    Vector center = Vector::Constant(dim, 0.5);
    center[0] += 0.3 * std::cos(theta);
    center[1] += 0.3 * std::sin(theta);
    centers.push_back(std::move(center));
  }
  for (int i = 0; i < n; ++i) {
    const ClassLabel y = i % classes;
    data.xs.push_back(noisy_clamped(centers[y], noise, rng, data.box));
    data.ys.push_back(y);
  }
  return data;
}

Dataset make_ring(int n, double noise, std::uint64_t seed) {
  Dataset data;
  data.name = "ring";
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * kPi);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    const ClassLabel y = i % 2;
    const double theta = angle(rng);
    // Class 0 fills a disk of radius 0.15, class 1 an annulus [0.3, 0.4].
    const double r = (y == 0) ? 0.15 * std::sqrt(unit(rng))
                              : std::sqrt(0.09 + (0.16 - 0.09) * unit(rng));
    Vector v(2);
    v << 0.5 + r * std::cos(theta), 0.5 + r * std::sin(theta);
    data.xs.push_back(noisy_clamped(std::move(v), noise, rng, data.box));
    data.ys.push_back(y);
  }
  return data;
}

}  // namespace

Dataset make_synthetic(const std::string& name, int n, double noise,
                       std::uint64_t seed, int dim, int classes) {
  if (n <= 0) throw ValidationError("make_synthetic: n must be positive");
  if (noise < 0.0) throw ValidationError("make_synthetic: noise must be >= 0");
  if (name == "two_moons") return make_two_moons(n, noise, seed);
  if (name == "gaussian_blobs")
    return make_gaussian_blobs(n, noise, seed, dim, classes);
  if (name == "ring") return make_ring(n, noise, seed);
  throw ValidationError("make_synthetic: unknown generator '" + name + "'");
}

Dataset load_dataset_spec(const std::string& spec, std::uint64_t default_seed) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const bool synthetic =
      head == "two_moons" || head == "gaussian_blobs" || head == "ring";
  if (!synthetic) return load_csv(spec);

  int n = 200, dim = 2, classes = 2;
  double noise = 0.0;
  std::uint64_t seed = default_seed;
  if (colon != std::string::npos) {
    std::stringstream rest(spec.substr(colon + 1));
    std::string item;
    while (std::getline(rest, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos)
        throw ValidationError("dataset spec: expected key=value, got '" + item + "'");
      const std::string key = item.substr(0, eq);
      const std::string value = item.substr(eq + 1);
      try {
        if (key == "n") n = std::stoi(value);
        else if (key == "noise") noise = std::stod(value);
        else if (key == "seed") seed = std::stoull(value);
        else if (key == "dim") dim = std::stoi(value);
        else if (key == "classes") classes = std::stoi(value);
        else throw ValidationError("dataset spec: unknown key '" + key + "'");
      } catch (const ValidationError&) {
        throw;
      } catch (const std::exception&) {
        throw ValidationError("dataset spec: bad value for '" + key + "'");
      }
    }
  }
  return make_synthetic(head, n, noise, seed, dim, classes);
}

Dataset load_csv(const std::string& path, const DomainBox& box) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file '" + path + "'");
  Dataset data;
  data.name = path;
  data.box = box;

  std::string line;
  if (!std::getline(in, line))
    throw ValidationError(path + ":1: empty dataset file");
  if (line.rfind("label", 0) != 0)
    throw ValidationError(path + ":1: header must start with 'label'");

  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream row(line);
    std::string cell;
    std::vector<double> values;
    while (std::getline(row, cell, ',')) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw ValidationError(path + ":" + std::to_string(line_no) +
                              ": bad number '" + cell + "'");
      }
    }
    if (values.size() < 2)
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": expected label and at least one feature");
    const double label_raw = values.front();
    const ClassLabel y = static_cast<ClassLabel>(label_raw);
    if (y < 0 || static_cast<double>(y) != label_raw)
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": label must be a non-negative integer");
    Vector x(static_cast<Eigen::Index>(values.size()) - 1);
    for (std::size_t j = 1; j < values.size(); ++j)
      x[static_cast<Eigen::Index>(j - 1)] = values[j];
    if (!data.xs.empty() && x.size() != data.xs.front().size())
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": inconsistent feature count");
    if (!box.contains(x))
      throw ValidationError(path + ":" + std::to_string(line_no) +
                            ": feature outside domain box");
    data.xs.push_back(std::move(x));
    data.ys.push_back(y);
  }
  if (data.xs.empty())
    throw ValidationError(path + ": dataset has no rows");
  return data;
}

void save_csv(const Dataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write dataset file '" + path + "'");
  out << "label";
  for (int j = 0; j < data.dim(); ++j) out << ",f" << j;
  out << "\n";
  char buf[64];
  for (int i = 0; i < data.size(); ++i) {
    out << data.ys[static_cast<std::size_t>(i)];
    const Vector& x = data.xs[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < x.size(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", x[j]);
      out << ',' << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing dataset file '" + path + "'");
}

}  // namespace confsep
