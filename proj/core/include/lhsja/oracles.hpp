#ifndef LHSJA_ORACLES_HPP
#define LHSJA_ORACLES_HPP

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lhsja/vector.hpp"

namespace lhsja {

/// Top-1 answer of a classifier. The attack engine never reads `confidence`;
/// only the brute-force sampler does.
struct Classification {
  Label label;
  std::optional<double> confidence;
};

/// Victim model F. Implementations must be deterministic: the same input
/// always yields the same label.
class ClassifierOracle {
 public:
  virtual ~ClassifierOracle() = default;
  virtual Classification classify(const Vector& image) const = 0;
  virtual std::size_t num_classes() const = 0;
  virtual std::size_t input_dim() const = 0;
  /// True when classify() may be called from several threads at once.
  virtual bool concurrent() const { return false; }
  virtual std::string id() const { return "classifier"; }
};

/// Generator G mapping latents to images. Attacker-side, never billed.
class GeneratorOracle {
 public:
  virtual ~GeneratorOracle() = default;
  virtual Vector generate(const Vector& latent) const = 0;
  virtual std::size_t latent_dim() const = 0;
  virtual std::size_t image_dim() const = 0;
  virtual BoundsBox latent_bounds() const = 0;
  virtual bool concurrent() const { return false; }
  virtual std::string id() const { return "generator"; }
};

/// GAN-inversion encoder. Attacker-side, never billed.
class EncoderOracle {
 public:
  virtual ~EncoderOracle() = default;
  virtual Vector encode(const Vector& image) const = 0;
  virtual std::size_t image_dim() const = 0;
  virtual std::size_t latent_dim() const = 0;
  virtual std::string id() const { return "encoder"; }
};

/// Image embedder behind the similarity metric (SIM).
class EmbeddingOracle {
 public:
  virtual ~EmbeddingOracle() = default;
  virtual Vector embed(const Vector& image) const = 0;
  virtual std::size_t embed_dim() const = 0;
  virtual std::string name() const = 0;
};

/// Bundle of oracles an experiment runs against. Any member but the
/// classifier may be null.
struct OracleSet {
  std::shared_ptr<const ClassifierOracle> classifier;
  std::shared_ptr<const GeneratorOracle> generator;
  std::shared_ptr<const EncoderOracle> encoder;
  std::shared_ptr<const EmbeddingOracle> embedder;
};

/// Exact count of oracle invocations. Only classifier queries are charged
/// against the budget. Thread-safe.
class QueryLedger {
 public:
  QueryLedger() = default;
  explicit QueryLedger(std::optional<std::uint64_t> budget);
  QueryLedger(const QueryLedger&) = delete;
  QueryLedger& operator=(const QueryLedger&) = delete;

  /// Reserves one classifier query or throws BudgetExhausted. Counts never
  /// exceed the budget.
  void charge_classify();
  void note_generate() noexcept;

  std::uint64_t classify_count() const noexcept { return classify_.load(); }
  std::uint64_t generate_count() const noexcept { return generate_.load(); }
  std::optional<std::uint64_t> budget() const noexcept { return budget_; }
  bool exhausted() const noexcept;

  void reset() noexcept;

 private:
  std::optional<std::uint64_t> budget_;
  std::atomic<std::uint64_t> classify_{0};
  std::atomic<std::uint64_t> generate_{0};
};

void reset_ledger(QueryLedger& ledger) noexcept;

enum class AttackMode { kTargeted, kUntargeted };

/// Success predicate over the classifier's top-1 label.
struct DecisionFn {
  AttackMode mode = AttackMode::kTargeted;
  Label target;
  Label source;

  static DecisionFn targeted(Label target) { return {AttackMode::kTargeted, target, {}}; }
  static DecisionFn untargeted(Label source) { return {AttackMode::kUntargeted, {}, source}; }

  bool accepts(Label predicted) const noexcept {
    return mode == AttackMode::kTargeted ? predicted == target : predicted != source;
  }
};

/// One billed classifier query, reduced to the attack predicate.
bool decide(const DecisionFn& d, const ClassifierOracle& c, QueryLedger& ledger, const Vector& x);

/// decide() on G(w). Bills one classifier query and records one generation.
bool decide_latent(const DecisionFn& d, const ClassifierOracle& c, const GeneratorOracle& g,
                   QueryLedger& ledger, const Vector& w);

/// Pass-through classifier that counts invocations; independent of any ledger.
class CountingClassifier : public ClassifierOracle {
 public:
  explicit CountingClassifier(const ClassifierOracle& inner) : inner_(inner) {}
  Classification classify(const Vector& image) const override;
  std::size_t num_classes() const override { return inner_.num_classes(); }
  std::size_t input_dim() const override { return inner_.input_dim(); }
  bool concurrent() const override { return inner_.concurrent(); }
  std::string id() const override { return inner_.id(); }

  std::uint64_t calls() const noexcept { return calls_.load(); }

 private:
  const ClassifierOracle& inner_;
  mutable std::atomic<std::uint64_t> calls_{0};
};

/// Memoizes classify results by exact coordinate values. Off unless a caller wraps
/// an oracle with it explicitly: repeated inputs stop reaching the inner
/// oracle, which changes victim query counts.
class CachingClassifier : public ClassifierOracle {
 public:
  explicit CachingClassifier(const ClassifierOracle& inner) : inner_(inner) {}
  Classification classify(const Vector& image) const override;
  std::size_t num_classes() const override { return inner_.num_classes(); }
  std::size_t input_dim() const override { return inner_.input_dim(); }
  bool concurrent() const override { return inner_.concurrent(); }
  std::string id() const override { return inner_.id() + "+cache"; }

  std::size_t hits() const;
  std::size_t size() const;

 private:
  const ClassifierOracle& inner_;
  mutable std::mutex mu_;
  mutable std::map<std::vector<double>, Classification> memo_;
  mutable std::size_t hits_ = 0;
};

}  // namespace lhsja

#endif  // LHSJA_ORACLES_HPP
