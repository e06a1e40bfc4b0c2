#include "lhsja/oracles.hpp"

#include <string>

#include "lhsja/errors.hpp"

namespace lhsja {

QueryLedger::QueryLedger(std::optional<std::uint64_t> budget) : budget_(budget) {}

void QueryLedger::charge_classify() {
  std::uint64_t used = classify_.load();
  do {
    if (budget_ && used >= *budget_) throw BudgetExhausted(used, *budget_);
  } while (!classify_.compare_exchange_weak(used, used + 1));
}

void QueryLedger::note_generate() noexcept { generate_.fetch_add(1); }

bool QueryLedger::exhausted() const noexcept {
  return budget_ && classify_.load() >= *budget_;
}

void QueryLedger::reset() noexcept {
  classify_.store(0);
  generate_.store(0);
}

void reset_ledger(QueryLedger& ledger) noexcept { ledger.reset(); }

bool decide(const DecisionFn& d, const ClassifierOracle& c, QueryLedger& ledger, const Vector& x) {
  if (x.dim() != c.input_dim()) {
    throw ContractViolation("decide: input dim " + std::to_string(x.dim()) +
                            " != classifier input dim " + std::to_string(c.input_dim()));
  }
  ledger.charge_classify();
  const Classification out = c.classify(x);
  if (out.label.id >= c.num_classes()) {
    throw ContractViolation("decide: classifier returned label " + std::to_string(out.label.id) +
                            " >= num_classes");
  }
  return d.accepts(out.label);
}

bool decide_latent(const DecisionFn& d, const ClassifierOracle& c, const GeneratorOracle& g,
                   QueryLedger& ledger, const Vector& w) {
  if (w.dim() != g.latent_dim()) {
    throw ContractViolation("decide_latent: latent dim " + std::to_string(w.dim()) +
                            " != generator latent dim " + std::to_string(g.latent_dim()));
  }
  if (!g.latent_bounds().contains(w)) {
    throw ContractViolation("decide_latent: latent outside generator bounds");
  }
  if (ledger.exhausted()) throw BudgetExhausted(ledger.classify_count(), *ledger.budget());
  const Vector image = g.generate(w);
  ledger.note_generate();
  return decide(d, c, ledger, image);
}

Classification CountingClassifier::classify(const Vector& image) const {
  calls_.fetch_add(1);
  return inner_.classify(image);
}

Classification CachingClassifier::classify(const Vector& image) const {
  {
    std::lock_guard lock(mu_);
    if (auto it = memo_.find(image.raw()); it != memo_.end()) {
      ++hits_;
      return it->second;
    }
  }
  Classification out = inner_.classify(image);
  std::lock_guard lock(mu_);
  memo_.emplace(image.raw(), out);
  return out;
}

std::size_t CachingClassifier::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::size_t CachingClassifier::size() const {
  std::lock_guard lock(mu_);
  return memo_.size();
}

}  // namespace lhsja
