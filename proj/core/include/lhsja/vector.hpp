#ifndef LHSJA_VECTOR_HPP
#define LHSJA_VECTOR_HPP

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace lhsja {

/// Flat array of finite 64-bit coordinates. Used for latents, images and
/// embeddings alike. Construction rejects empty input and NaN/Inf.
class Vector {
 public:
  explicit Vector(std::vector<double> data);
  Vector(std::initializer_list<double> values);
  /// `dim` copies of `fill`.
  static Vector filled(std::size_t dim, double fill);
  /// Widens 32-bit values (e.g. received from the wire) without rounding.
  static Vector from_floats(std::span<const float> values);

  std::size_t dim() const noexcept { return data_.size(); }
  double operator[](std::size_t i) const { return data_[i]; }
  std::span<const double> values() const noexcept { return data_; }
  const std::vector<double>& raw() const noexcept { return data_; }

  bool operator==(const Vector& other) const = default;

 private:
  std::vector<double> data_;
};

struct Label {
  std::uint32_t id = 0;
  bool operator==(const Label&) const = default;
  auto operator<=>(const Label&) const = default;
};

/// Coordinate-wise box [low, high].
struct BoundsBox {
  double low = 0.0;
  double high = 1.0;

  BoundsBox() = default;
  BoundsBox(double lo, double hi);
  bool contains(const Vector& v) const noexcept;
  bool operator==(const BoundsBox&) const = default;
};

double l2_distance(const Vector& a, const Vector& b);
double mse(const Vector& a, const Vector& b);
Vector clamp_to_bounds(const Vector& v, const BoundsBox& b);

double dot(const Vector& a, const Vector& b);
double l2_norm(const Vector& v);
Vector add(const Vector& a, const Vector& b);
Vector subtract(const Vector& a, const Vector& b);
Vector scale(const Vector& v, double s);
/// a + s * b
Vector axpy(const Vector& a, double s, const Vector& b);
/// Point (1 - t) * from + t * to on the segment between two vectors.
Vector interpolate(const Vector& from, const Vector& to, double t);
/// v / ||v||; throws ContractViolation for a zero vector.
Vector normalized(const Vector& v);

/// Rounds every coordinate to the nearest 32-bit float (wire precision).
std::vector<float> to_floats(const Vector& v);

}  // namespace lhsja

#endif  // LHSJA_VECTOR_HPP
