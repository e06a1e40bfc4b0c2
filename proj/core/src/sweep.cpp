#include "lhsja/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <future>
#include <memory>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

#include "lhsja/errors.hpp"
#include "lhsja/metrics.hpp"
#include "lhsja/random.hpp"

namespace lhsja {

std::string to_string(SweepMethod m) { return m == SweepMethod::kLatentHsja ? "latent_hsja" : "image_hsja"; }

SweepMethod sweep_method_from_string(const std::string& s) {
  if (s == "latent_hsja") return SweepMethod::kLatentHsja;
  if (s == "image_hsja") return SweepMethod::kImageHsja;
  throw ContractViolation("unknown sweep method '" + s + "'");
}

namespace {

struct SweepContext {
  const OracleSet& oracles;
  const SweepOptions& options;
  LatentNormalizer normalizer;
  std::shared_ptr<const EmbeddingOracle> embedder;
};

SweepContext make_context(const OracleSet& oracles, const SweepOptions& options) {
  if (!oracles.classifier) throw ContractViolation("run_sweep: classifier oracle required");
  const bool wants_latent = std::find(options.methods.begin(), options.methods.end(), SweepMethod::kLatentHsja) !=
                            options.methods.end();
  std::optional<LatentNormalizer> normalizer = options.normalizer;
  if (!normalizer) {
    if (wants_latent) {
      if (!oracles.generator || !oracles.encoder) throw ContractViolation("run_sweep: latent method needs generator and encoder");
      normalizer = LatentNormalizer::calibrate(*oracles.generator, *oracles.encoder);
    } else {
      normalizer = LatentNormalizer::identity(1);
    }
  }
  std::shared_ptr<const EmbeddingOracle> embedder = oracles.embedder;
  if (!embedder) embedder = std::make_shared<ProjectionEmbedder>(oracles.classifier->input_dim());
  return {oracles, options, *normalizer, std::move(embedder)};
}

AttackConfig cell_config(const SweepOptions& options, std::uint64_t seed, std::uint64_t budget) {
  AttackConfig cfg = options.base_config;
  cfg.max_queries = budget;
  cfg.seed = RngSeed{seed};
  cfg.record_iterates = true;
  return cfg;
}

/// Metrics for one method/pair/seed run, evaluated at each requested budget.
class CellEvaluator {
 public:
  CellEvaluator(const SweepContext& ctx, const SweepPair& pair, std::size_t pair_index, SweepMethod method,
                std::uint64_t seed)
      : ctx_(ctx), pair_(pair), pair_index_(pair_index), method_(method), seed_(seed) {}

  /// Runs at `budget` and returns rows for every budget in `checkpoints`.
  std::vector<SweepRow> evaluate(std::uint64_t budget, std::span<const std::uint64_t> checkpoints) {
    const AttackConfig cfg = cell_config(ctx_.options, seed_, budget);
    std::vector<SweepRow> rows;
    if (method_ == SweepMethod::kLatentHsja) {
      LatentAttackJob job{pair_.x_src, pair_.x_trg, pair_.target, cfg, ctx_.oracles, ctx_.normalizer, std::nullopt};
      const LatentAttackResult res = latent_hsja(job);
      const NormalizedGenerator g(*ctx_.oracles.generator, ctx_.normalizer);
      const Vector reference = ctx_.embedder->embed(pair_.x_src);
      for (std::uint64_t b : checkpoints) {
        const Vector w = checkpoint_at(res.trace, b);
        const Vector x = g.generate(w);
        SweepRow row = base_row(res.trace, b);
        row.latent_l2 = l2_distance(w, res.w_src);
        row.image_l2 = l2_distance(x, pair_.x_src);
        row.sim = cosine_similarity(reference, ctx_.embedder->embed(x));
        if (ctx_.options.lpips) row.lpips = ctx_.options.lpips(pair_.x_src, x);
        rows.push_back(row);
      }
    } else {
      const AttackOutcome out = image_hsja_baseline(pair_.x_src, pair_.x_trg, pair_.target, *ctx_.oracles.classifier, cfg);
      const Vector reference = ctx_.embedder->embed(pair_.x_src);
      for (std::uint64_t b : checkpoints) {
        const Vector x = checkpoint_at(out.trace, b);
        SweepRow row = base_row(out.trace, b);
        row.image_l2 = l2_distance(x, pair_.x_src);
        row.sim = cosine_similarity(reference, ctx_.embedder->embed(x));
        if (ctx_.options.lpips) row.lpips = ctx_.options.lpips(pair_.x_src, x);
        rows.push_back(row);
      }
    }
    return rows;
  }

 private:
  SweepRow base_row(const AttackTrace& trace, std::uint64_t budget) const {
    SweepRow row;
    row.method = method_;
    row.pair = pair_index_;
    row.seed = seed_;
    row.budget = budget;
    const IterationRecord* r = last_record_within(trace, budget);
    row.queries = r ? r->queries_used : 0;
    return row;
  }

  const SweepContext& ctx_;
  const SweepPair& pair_;
  std::size_t pair_index_;
  SweepMethod method_;
  std::uint64_t seed_;
};

auto row_key(const SweepRow& r) { return std::make_tuple(static_cast<int>(r.method), r.pair, r.seed, r.budget); }

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double mean_of(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

SweepReport run_sweep(const OracleSet& oracles, std::span<const SweepPair> pairs, const SweepOptions& options) {
  if (options.grid.empty()) throw ContractViolation("run_sweep: empty budget grid");
  std::vector<std::uint64_t> grid = options.grid;
  std::sort(grid.begin(), grid.end());
  const SweepContext ctx = make_context(oracles, options);

  struct Cell {
    SweepMethod method;
    std::size_t pair;
    std::uint64_t seed;
  };
  std::vector<Cell> cells;
  for (SweepMethod m : options.methods) {
    for (std::size_t p = 0; p < pairs.size(); ++p) {
      for (std::uint64_t s : options.seeds) cells.push_back({m, p, s});
    }
  }

  struct Outcome {
    std::vector<SweepRow> rows;
    std::optional<SweepFailure> failure;
  };
  std::vector<Outcome> outcomes(cells.size());
  auto work = [&](std::size_t i) {
    const Cell& cell = cells[i];
    try {
      CellEvaluator eval(ctx, pairs[cell.pair], cell.pair, cell.method, cell.seed);
      outcomes[i].rows = eval.evaluate(grid.back(), grid);
    } catch (const Error& e) {
      outcomes[i].failure = SweepFailure{cell.method, cell.pair, cell.seed, e.kind(), e.what()};
    }
  };

  const bool safe = oracles.classifier->concurrent() && (!oracles.generator || oracles.generator->concurrent());
  std::size_t workers = options.parallelism == 0 ? std::max(1u, std::thread::hardware_concurrency()) : options.parallelism;
  if (!safe) workers = 1;
  workers = std::min(workers, std::max<std::size_t>(cells.size(), 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) work(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::future<void>> tasks;
    for (std::size_t w = 0; w < workers; ++w) {
      tasks.push_back(std::async(std::launch::async, [&] {
        for (std::size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) work(i);
      }));
    }
    for (auto& t : tasks) t.get();
  }

  SweepReport report;
  for (auto& o : outcomes) {
    report.rows.insert(report.rows.end(), o.rows.begin(), o.rows.end());
    if (o.failure) report.failures.push_back(std::move(*o.failure));
  }
  std::sort(report.rows.begin(), report.rows.end(), [](const SweepRow& a, const SweepRow& b) { return row_key(a) < row_key(b); });
  return report;
}

SweepRow run_cell(const OracleSet& oracles, const SweepPair& pair, std::size_t pair_index, SweepMethod method,
                  std::uint64_t seed, std::uint64_t budget, const SweepOptions& options) {
  const SweepContext ctx = make_context(oracles, options);
  CellEvaluator eval(ctx, pair, pair_index, method, seed);
  const std::uint64_t only[] = {budget};
  return eval.evaluate(budget, only).front();
}

std::string to_string(PairTargets t) {
  return t == PairTargets::kGeneratorSamples ? "generator" : "labeled";
}

PairTargets pair_targets_from_string(const std::string& s) {
  if (s == "generator") return PairTargets::kGeneratorSamples;
  if (s == "labeled") return PairTargets::kLabeledSamples;
  throw ContractViolation("unknown pair target source '" + s + "'");
}

std::vector<SweepPair> make_sweep_pairs(const SyntheticSuite& suite, std::size_t count, std::uint64_t seed,
                                        PairTargets targets) {
  const std::size_t k = suite.params.num_classes;
  const std::size_t per_class = suite.params.samples_per_class;
  if (k < 2 || per_class == 0) throw ContractViolation("make_sweep_pairs: suite needs >= 2 classes with samples");
  RngStream rng(RngSeed{seed});
  RngStream draws = rng.fork(1);
  const BoundsBox box = suite.generator->latent_bounds();
  std::vector<SweepPair> pairs;
  for (std::size_t i = 0; i < count; ++i) {
    const auto src = static_cast<std::uint32_t>(rng.below(k));
    const auto& s = suite.sample_of(Label{src}, rng.below(per_class));
    if (targets == PairTargets::kLabeledSamples) {
      const auto trg = static_cast<std::uint32_t>((src + 1 + rng.below(k - 1)) % k);
      pairs.push_back({s.image, suite.sample_of(Label{trg}, rng.below(per_class)).image, Label{trg}});
      continue;
    }
    for (std::size_t attempt = 0;; ++attempt) {
      if (attempt == 100000) throw ContractViolation("make_sweep_pairs: generator never leaves the source class");
      std::vector<double> w(suite.params.latent_dim);
      for (double& v : w) v = box.low + (box.high - box.low) * draws.uniform();
      Vector x = suite.generator->generate(Vector(std::move(w)));
      const Label label = suite.classifier->classify(x).label;
      if (label.id == src) continue;
      pairs.push_back({s.image, std::move(x), label});
      break;
    }
  }
  return pairs;
}

std::vector<SweepAggregate> SweepReport::aggregates() const {
  std::vector<SweepAggregate> out;
  std::vector<std::pair<SweepMethod, std::uint64_t>> keys;
  for (const auto& r : rows) {
    if (std::find(keys.begin(), keys.end(), std::make_pair(r.method, r.budget)) == keys.end()) {
      keys.emplace_back(r.method, r.budget);
    }
  }
  std::sort(keys.begin(), keys.end());
  for (const auto& [method, budget] : keys) {
    std::vector<double> image, latent, sim;
    for (const auto& r : rows) {
      if (r.method != method || r.budget != budget) continue;
      image.push_back(r.image_l2);
      if (r.latent_l2) latent.push_back(*r.latent_l2);
      if (r.sim) sim.push_back(*r.sim);
    }
    SweepAggregate a;
    a.method = method;
    a.budget = budget;
    a.n = image.size();
    a.mean_image_l2 = mean_of(image);
    a.median_image_l2 = median_of(image);
    if (!latent.empty()) {
      a.mean_latent_l2 = mean_of(latent);
      a.median_latent_l2 = median_of(latent);
    }
    if (!sim.empty()) {
      const double m = mean_of(sim);
      double ss = 0.0;
      for (double s : sim) ss += (s - m) * (s - m);
      a.mean_sim = m;
      a.median_sim = median_of(sim);
      a.stddev_sim = sim.size() > 1 ? std::sqrt(ss / static_cast<double>(sim.size() - 1)) : 0.0;
    }
    out.push_back(a);
  }
  return out;
}

namespace {

std::string format_real(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string format_opt(const std::optional<double>& x) { return x ? format_real(*x) : std::string(); }

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream is(line);
  while (std::getline(is, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

template <typename T>
T parse_number(const std::string& s, const char* what) {
  T value{};
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ContractViolation(std::string("sweep_from_csv: bad ") + what + " '" + s + "'");
  }
  return value;
}

std::optional<double> parse_opt(const std::string& s, const char* what) {
  if (s.empty()) return std::nullopt;
  return parse_number<double>(s, what);
}

constexpr const char* kSweepHeader = "method,pair,seed,budget,queries,latent_l2,image_l2,sim,lpips";

}  // namespace

std::string sweep_to_csv(const SweepReport& report) {
  std::ostringstream os;
  os << kSweepHeader << '\n';
  for (const auto& r : report.rows) {
    os << to_string(r.method) << ',' << r.pair << ',' << r.seed << ',' << r.budget << ',' << r.queries << ','
       << format_opt(r.latent_l2) << ',' << format_real(r.image_l2) << ',' << format_opt(r.sim) << ','
       << format_opt(r.lpips) << '\n';
  }
  return os.str();
}

SweepReport sweep_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line) || line != kSweepHeader) throw ContractViolation("sweep_from_csv: missing or wrong header");
  SweepReport report;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (f.size() != 9) throw ContractViolation("sweep_from_csv: expected 9 fields in '" + line + "'");
    SweepRow r;
    r.method = sweep_method_from_string(f[0]);
    r.pair = parse_number<std::size_t>(f[1], "pair");
    r.seed = parse_number<std::uint64_t>(f[2], "seed");
    r.budget = parse_number<std::uint64_t>(f[3], "budget");
    r.queries = parse_number<std::uint64_t>(f[4], "queries");
    r.latent_l2 = parse_opt(f[5], "latent_l2");
    r.image_l2 = parse_number<double>(f[6], "image_l2");
    r.sim = parse_opt(f[7], "sim");
    r.lpips = parse_opt(f[8], "lpips");
    report.rows.push_back(r);
  }
  return report;
}

std::string aggregates_to_csv(const std::vector<SweepAggregate>& aggregates) {
  std::ostringstream os;
  os << "method,budget,n,mean_latent_l2,median_latent_l2,mean_image_l2,median_image_l2,mean_sim,median_sim,stddev_sim\n";
  for (const auto& a : aggregates) {
    os << to_string(a.method) << ',' << a.budget << ',' << a.n << ',' << format_opt(a.mean_latent_l2) << ','
       << format_opt(a.median_latent_l2) << ',' << format_real(a.mean_image_l2) << ',' << format_real(a.median_image_l2)
       << ',' << format_opt(a.mean_sim) << ',' << format_opt(a.median_sim) << ',' << format_opt(a.stddev_sim) << '\n';
  }
  return os.str();
}

std::string failures_to_csv(const std::vector<SweepFailure>& failures) {
  std::ostringstream os;
  os << "method,pair,seed,kind,message\n";
  for (const auto& f : failures) {
    std::string msg = f.message;
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    os << to_string(f.method) << ',' << f.pair << ',' << f.seed << ',' << f.kind << ',' << msg << '\n';
  }
  return os.str();
}

}  // namespace lhsja
