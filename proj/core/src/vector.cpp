#include "lhsja/vector.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "lhsja/errors.hpp"

namespace lhsja {

namespace {

void require_same_dim(const Vector& a, const Vector& b, const char* op) {
  if (a.dim() != b.dim()) {
    throw ContractViolation(std::string(op) + ": dimension mismatch (" +
                            std::to_string(a.dim()) + " vs " + std::to_string(b.dim()) + ")");
  }
}

}  // namespace

Vector::Vector(std::vector<double> data) : data_(std::move(data)) {
  if (data_.empty()) throw ContractViolation("Vector: dim must be >= 1");
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw ContractViolation("Vector: non-finite coordinate at index " + std::to_string(i));
    }
  }
}

Vector::Vector(std::initializer_list<double> values) : Vector(std::vector<double>(values)) {}

Vector Vector::filled(std::size_t dim, double fill) {
  return Vector(std::vector<double>(dim, fill));
}

Vector Vector::from_floats(std::span<const float> values) {
  return Vector(std::vector<double>(values.begin(), values.end()));
}

BoundsBox::BoundsBox(double lo, double hi) : low(lo), high(hi) {
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw ContractViolation("BoundsBox: requires finite low < high");
  }
}

bool BoundsBox::contains(const Vector& v) const noexcept {
  return std::all_of(v.values().begin(), v.values().end(),
                     [this](double x) { return x >= low && x <= high; });
}

double l2_distance(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "l2_distance");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

double mse(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "mse");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum / static_cast<double>(a.dim());
}

Vector clamp_to_bounds(const Vector& v, const BoundsBox& b) {
  std::vector<double> out(v.raw());
  for (double& x : out) x = std::min(std::max(x, b.low), b.high);
  return Vector(std::move(out));
}

double dot(const Vector& a, const Vector& b) {
  require_same_dim(a, b, "dot");
  double sum = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) sum += a[i] * b[i];
  return sum;
}

double l2_norm(const Vector& v) { return std::sqrt(dot(v, v)); }

Vector add(const Vector& a, const Vector& b) { return axpy(a, 1.0, b); }

Vector subtract(const Vector& a, const Vector& b) { return axpy(a, -1.0, b); }

Vector scale(const Vector& v, double s) {
  std::vector<double> out(v.raw());
  for (double& x : out) x *= s;
  return Vector(std::move(out));
}

Vector axpy(const Vector& a, double s, const Vector& b) {
  require_same_dim(a, b, "axpy");
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + s * b[i];
  return Vector(std::move(out));
}

Vector interpolate(const Vector& from, const Vector& to, double t) {
  require_same_dim(from, to, "interpolate");
  std::vector<double> out(from.dim());
  for (std::size_t i = 0; i < from.dim(); ++i) out[i] = (1.0 - t) * from[i] + t * to[i];
  return Vector(std::move(out));
}

Vector normalized(const Vector& v) {
  const double n = l2_norm(v);
  if (n == 0.0) throw ContractViolation("normalized: zero vector");
  return scale(v, 1.0 / n);
}

std::vector<float> to_floats(const Vector& v) {
  std::vector<float> out(v.dim());
  for (std::size_t i = 0; i < v.dim(); ++i) {
    const double x = v[i];
    if (std::abs(x) > static_cast<double>(std::numeric_limits<float>::max())) {
      throw ContractViolation("to_floats: coordinate overflows 32-bit range");
    }
    out[i] = static_cast<float>(x);
  }
  return out;
}

}  // namespace lhsja
