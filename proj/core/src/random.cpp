#include "lhsja/random.hpp"

#include <cmath>
#include <numbers>

#include "lhsja/errors.hpp"

namespace lhsja {

namespace {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace

RngStream::RngStream(RngSeed seed) noexcept : key_(mix64(seed.value ^ 0x6a09e667f3bcc909ULL)), counter_(0) {}

RngStream::result_type RngStream::operator()() noexcept {
  const std::uint64_t c = counter_++;
  return mix64(key_ + (c + 1) * kGolden);
}

double RngStream::uniform() noexcept {
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RngStream::normal() noexcept {
  // 1 - u keeps the log argument in (0, 1].
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::below(std::uint64_t n) noexcept {
  // Rejection sampling for an unbiased result.
  const std::uint64_t limit = max() - max() % n;
  std::uint64_t r = (*this)();
  while (r >= limit) r = (*this)();
  return r % n;
}

RngStream RngStream::fork(std::uint64_t tag) const noexcept {
  return RngStream(mix64(key_ ^ mix64(tag + kGolden)), 0);
}

Vector sample_gaussian(std::size_t dim, RngStream& rng) {
  if (dim == 0) throw ContractViolation("sample_gaussian: dim must be >= 1");
  std::vector<double> out(dim);
  for (double& x : out) x = rng.normal();
  return Vector(std::move(out));
}

Vector sample_unit_sphere(std::size_t dim, RngStream& rng) {
  if (dim == 0) throw ContractViolation("sample_unit_sphere: dim must be >= 1");
  std::vector<double> out(dim);
  double sq = 0.0;
  do {
    sq = 0.0;
    for (double& x : out) {
      x = rng.normal();
      sq += x * x;
    }
  } while (sq == 0.0);
  // Divide rather than multiply by the reciprocal: in 1-D this gives exactly +-1.
  const double norm = std::sqrt(sq);
  for (double& x : out) x /= norm;
  return Vector(std::move(out));
}

}  // namespace lhsja
