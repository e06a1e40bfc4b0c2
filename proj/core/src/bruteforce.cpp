#include "lhsja/bruteforce.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <sstream>
#include <thread>

#include "json_util.hpp"
#include "lhsja/errors.hpp"

namespace lhsja {

std::string to_string(SamplerKind k) { return k == SamplerKind::kUniformBox ? "uniform_box" : "gaussian"; }

LatentSampler LatentSampler::uniform(BoundsBox box) { return {SamplerKind::kUniformBox, box, std::nullopt, std::nullopt}; }

LatentSampler LatentSampler::gaussian(Vector mean, Vector stddev, BoundsBox box) {
  if (mean.dim() != stddev.dim()) throw ContractViolation("LatentSampler::gaussian: mean/stddev dim mismatch");
  for (double s : stddev.values()) {
    if (s < 0.0) throw ContractViolation("LatentSampler::gaussian: negative stddev");
  }
  return {SamplerKind::kGaussian, box, std::move(mean), std::move(stddev)};
}

LatentSampler LatentSampler::gaussian_calibrated(const GeneratorOracle& raw_generator, const EncoderOracle& e,
                                                 const LatentNormalizer& normalizer, std::size_t samples,
                                                 std::uint64_t seed) {
  if (samples < 2) throw ContractViolation("gaussian_calibrated: need at least two samples");
  const std::size_t dim = normalizer.dim();
  const BoundsBox box = raw_generator.latent_bounds();
  std::vector<double> sum(dim, 0.0);
  std::vector<double> sum_sq(dim, 0.0);
  RngStream rng(RngSeed{seed});
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<double> raw(raw_generator.latent_dim());
    for (double& x : raw) x = box.low + (box.high - box.low) * rng.uniform();
    const Vector w = normalizer.normalize(e.encode(raw_generator.generate(Vector(std::move(raw)))));
    for (std::size_t i = 0; i < dim; ++i) {
      sum[i] += w[i];
      sum_sq[i] += w[i] * w[i];
    }
  }
  const double n = static_cast<double>(samples);
  std::vector<double> mean(dim);
  std::vector<double> stddev(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    mean[i] = sum[i] / n;
    stddev[i] = std::sqrt(std::max(0.0, (sum_sq[i] - n * mean[i] * mean[i]) / (n - 1.0)));
  }
  return gaussian(Vector(std::move(mean)), Vector(std::move(stddev)));
}

Vector LatentSampler::draw(std::size_t dim, RngStream& rng) const {
  std::vector<double> out(dim);
  if (kind == SamplerKind::kUniformBox) {
    for (double& x : out) x = box.low + (box.high - box.low) * rng.uniform();
    return Vector(std::move(out));
  }
  if (!mean || !stddev || mean->dim() != dim) throw ContractViolation("LatentSampler::draw: gaussian moments missing or wrong dim");
  for (std::size_t i = 0; i < dim; ++i) out[i] = (*mean)[i] + (*stddev)[i] * rng.normal();
  return clamp_to_bounds(Vector(std::move(out)), box);
}

BruteForceResult brute_force_sample(const GeneratorOracle& g, const ClassifierOracle& c,
                                    std::span<const std::uint64_t> budgets, const LatentSampler& sampler,
                                    std::uint64_t seed) {
  if (!std::is_sorted(budgets.begin(), budgets.end())) {
    throw ContractViolation("brute_force_sample: budgets must be ascending");
  }
  const std::size_t k = c.num_classes();
  BruteForceResult out;
  out.table.num_classes = k;
  std::vector<bool> any(k, false);
  std::vector<bool> gt50(k, false);
  std::vector<bool> gt90(k, false);
  RngStream rng(RngSeed{seed});

  const bool parallel = c.concurrent() && g.concurrent() && std::thread::hardware_concurrency() > 1;
  constexpr std::size_t kChunk = 256;
  std::uint64_t drawn = 0;

  auto tally = [&](std::uint64_t index, const Vector& latent, const Classification& cls) {
    const std::size_t label = cls.label.id;
    if (label >= k) throw ContractViolation("brute_force_sample: classifier label out of range");
    const double conf = cls.confidence.value_or(0.0);
    any[label] = true;
    if (conf > 0.5) gt50[label] = true;
    if (conf > 0.9) gt90[label] = true;
    auto it = out.bank.entries.find(cls.label);
    if (it == out.bank.entries.end()) {
      out.bank.entries.emplace(cls.label, BankEntry{latent, conf, index});
    } else if (conf > it->second.confidence) {
      it->second = BankEntry{latent, conf, index};
    }
  };

  for (const std::uint64_t budget : budgets) {
    while (drawn < budget) {
      const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(kChunk, budget - drawn));
      std::vector<Vector> latents;
      latents.reserve(n);
      for (std::size_t i = 0; i < n; ++i) latents.push_back(sampler.draw(g.latent_dim(), rng));

      std::vector<std::optional<Classification>> results(n);
      auto work = [&](std::size_t i) { results[i] = c.classify(g.generate(latents[i])); };
      if (parallel) {
        const std::size_t workers = std::min<std::size_t>(n, std::thread::hardware_concurrency());
        std::vector<std::future<void>> tasks;
        for (std::size_t w = 0; w < workers; ++w) {
          tasks.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < n; i += workers) work(i);
          }));
        }
        for (auto& t : tasks) t.get();
      } else {
        for (std::size_t i = 0; i < n; ++i) work(i);
      }
      for (std::size_t i = 0; i < n; ++i) tally(drawn + i, latents[i], *results[i]);
      drawn += n;
    }
    auto count = [](const std::vector<bool>& v) { return static_cast<std::size_t>(std::count(v.begin(), v.end(), true)); };
    out.table.rows.push_back({budget, count(any), count(gt50), count(gt90)});
  }
  out.queries = drawn;
  return out;
}

Vector seed_attack_from_bank(const TargetBank& bank, Label target) {
  const auto it = bank.entries.find(target);
  if (it == bank.entries.end()) throw TargetNotFound("no bank entry for class " + std::to_string(target.id));
  return it->second.latent;
}

std::string coverage_to_csv(const ClassCoverageTable& table) {
  std::ostringstream os;
  os << "budget,count_any,count_gt50,count_gt90\n";
  for (const auto& r : table.rows) {
    os << r.budget << ',' << r.count_any << ',' << r.count_gt50 << ',' << r.count_gt90 << '\n';
  }
  return os.str();
}

using detail::json;

std::string bank_to_json(const TargetBank& bank, std::size_t num_classes) {
  json entries = json::array();
  for (const auto& [label, e] : bank.entries) {
    entries.push_back({{"label", label.id},
                       {"confidence", e.confidence},
                       {"sample_index", e.sample_index},
                       {"latent", detail::to_json_array(e.latent)}});
  }
  return json{{"format", "lhsja-bank"}, {"version", 1}, {"num_classes", num_classes}, {"entries", std::move(entries)}}
             .dump(2) +
         "\n";
}

TargetBank bank_from_json(const std::string& text) {
  const json j = detail::parse_or_throw(text, "bank_from_json");
  try {
    if (j.at("format") != "lhsja-bank") throw ContractViolation("bank_from_json: unsupported format");
    TargetBank bank;
    for (const json& e : j.at("entries")) {
      bank.entries.emplace(Label{e.at("label").get<std::uint32_t>()},
                           BankEntry{detail::vector_from_json(e.at("latent"), "bank.latent"),
                                     e.at("confidence").get<double>(), e.at("sample_index").get<std::uint64_t>()});
    }
    return bank;
  } catch (const json::exception& ex) {
    throw ContractViolation(std::string("bank_from_json: ") + ex.what());
  }
}

}  // namespace lhsja
