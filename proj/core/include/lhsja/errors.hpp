#ifndef LHSJA_ERRORS_HPP
#define LHSJA_ERRORS_HPP

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace lhsja {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Stable machine-readable name, used by the CLI's JSON error output.
  virtual const char* kind() const noexcept { return "error"; }
};

/// A caller broke a documented precondition (dimension mismatch, zero norm, ...).
class ContractViolation : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "contract_violation"; }
};

/// The classifier query budget is spent. Raised before the query is issued,
/// so `used()` never exceeds the budget.
class BudgetExhausted : public Error {
 public:
  BudgetExhausted(std::uint64_t used, std::uint64_t budget)
      : Error("query budget exhausted (" + std::to_string(used) + "/" +
              std::to_string(budget) + ")"),
        used_(used),
        budget_(budget) {}
  const char* kind() const noexcept override { return "budget_exhausted"; }
  std::uint64_t used() const noexcept { return used_; }
  std::uint64_t budget() const noexcept { return budget_; }

 private:
  std::uint64_t used_;
  std::uint64_t budget_;
};

/// The attack start point is not adversarial, or the destination already is.
class InvalidEndpoints : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "invalid_endpoints"; }
};

class StepSearchFailed : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "step_search_failed"; }
};

/// The encoded target latent does not generate an image of the target class.
class EncodingInvalid : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "encoding_invalid"; }
};

class SuiteConstructionFailed : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "suite_construction_failed"; }
};

class TargetNotFound : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "target_not_found"; }
};

class OracleUnreachable : public Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "oracle_unreachable"; }
};

/// Malformed or unexpected wire traffic. `offset()` is the byte offset inside
/// the offending frame where parsing stopped (0 when not applicable).
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& what, std::size_t offset = 0)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  const char* kind() const noexcept override { return "protocol_error"; }
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

}  // namespace lhsja

#endif  // LHSJA_ERRORS_HPP
