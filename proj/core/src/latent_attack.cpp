#include "lhsja/latent_attack.hpp"

#include <algorithm>
#include <limits>

#include "json_util.hpp"
#include "lhsja/errors.hpp"
#include "lhsja/metrics.hpp"
#include "lhsja/random.hpp"

namespace lhsja {

LatentNormalizer::LatentNormalizer(Vector low, Vector high) : low_(std::move(low)), high_(std::move(high)) {
  if (low_.dim() != high_.dim()) throw ContractViolation("LatentNormalizer: low/high dim mismatch");
  for (std::size_t i = 0; i < low_.dim(); ++i) {
    if (!(high_[i] > low_[i])) throw ContractViolation("LatentNormalizer: high must exceed low per coordinate");
  }
}

LatentNormalizer LatentNormalizer::identity(std::size_t dim, BoundsBox box) {
  return {Vector::filled(dim, box.low), Vector::filled(dim, box.high)};
}

LatentNormalizer LatentNormalizer::calibrate(const GeneratorOracle& g, const EncoderOracle& e, std::size_t samples,
                                             std::uint64_t seed) {
  if (samples == 0) throw ContractViolation("LatentNormalizer::calibrate: need at least one sample");
  const std::size_t dim = e.latent_dim();
  const BoundsBox box = g.latent_bounds();
  std::vector<double> lo(dim, std::numeric_limits<double>::infinity());
  std::vector<double> hi(dim, -std::numeric_limits<double>::infinity());
  RngStream rng(RngSeed{seed});
  for (std::size_t s = 0; s < samples; ++s) {
    std::vector<double> raw(g.latent_dim());
    for (double& x : raw) x = box.low + (box.high - box.low) * rng.uniform();
    const Vector w = e.encode(g.generate(Vector(std::move(raw))));
    for (std::size_t i = 0; i < dim; ++i) {
      lo[i] = std::min(lo[i], w[i]);
      hi[i] = std::max(hi[i], w[i]);
    }
  }
  for (std::size_t i = 0; i < dim; ++i) {
    // Constant coordinates still need an invertible map.
    if (!(hi[i] > lo[i])) {
      lo[i] -= 0.5;
      hi[i] += 0.5;
    }
  }
  return {Vector(std::move(lo)), Vector(std::move(hi))};
}

Vector LatentNormalizer::normalize(const Vector& raw) const {
  if (raw.dim() != dim()) throw ContractViolation("LatentNormalizer::normalize: dim mismatch");
  std::vector<double> out(dim());
  for (std::size_t i = 0; i < dim(); ++i) out[i] = (raw[i] - low_[i]) / (high_[i] - low_[i]);
  return Vector(std::move(out));
}

Vector LatentNormalizer::denormalize(const Vector& unit) const {
  if (unit.dim() != dim()) throw ContractViolation("LatentNormalizer::denormalize: dim mismatch");
  std::vector<double> out(dim());
  for (std::size_t i = 0; i < dim(); ++i) out[i] = low_[i] + unit[i] * (high_[i] - low_[i]);
  return Vector(std::move(out));
}

NormalizedGenerator::NormalizedGenerator(const GeneratorOracle& inner, LatentNormalizer normalizer)
    : inner_(inner), normalizer_(std::move(normalizer)) {
  if (normalizer_.dim() != inner_.latent_dim()) throw ContractViolation("NormalizedGenerator: normalizer dim mismatch");
}

Vector NormalizedGenerator::generate(const Vector& unit_latent) const {
  return inner_.generate(clamp_to_bounds(normalizer_.denormalize(unit_latent), inner_.latent_bounds()));
}

EncodedPair encode_pair(const EncoderOracle& enc, const NormalizedGenerator& g, const ClassifierOracle& c,
                        const Vector& x_src, const Vector& x_trg, Label target, QueryLedger& pre_attack) {
  const BoundsBox unit{0.0, 1.0};
  Vector w_src = clamp_to_bounds(g.normalizer().normalize(enc.encode(x_src)), unit);
  Vector w_trg = clamp_to_bounds(g.normalizer().normalize(enc.encode(x_trg)), unit);
  if (!decide(DecisionFn::targeted(target), c, pre_attack, g.generate(w_trg))) {
    throw EncodingInvalid("encode_pair: G(Encoder(x_trg)) is not classified as the target class");
  }
  return {std::move(w_src), std::move(w_trg)};
}

LatentAttackResult latent_hsja(const LatentAttackJob& job) {
  const auto& o = job.oracles;
  if (!o.classifier || !o.generator || !o.encoder) {
    throw ContractViolation("latent_hsja: classifier, generator and encoder are required");
  }
  if (!job.x_trg && !job.w_init) throw ContractViolation("latent_hsja: need x_trg or w_init");
  const ClassifierOracle& c = *o.classifier;
  const NormalizedGenerator g(*o.generator, job.normalizer);
  const DecisionFn target_fn = DecisionFn::targeted(job.target);

  QueryLedger pre_attack;
  if (decide(target_fn, c, pre_attack, job.x_src)) {
    throw InvalidEndpoints("latent_hsja: source image is already classified as the target");
  }
  if (job.x_trg && !decide(target_fn, c, pre_attack, *job.x_trg)) {
    throw InvalidEndpoints("latent_hsja: target image is not classified as the target");
  }

  const BoundsBox unit{0.0, 1.0};
  Vector w_src = clamp_to_bounds(job.normalizer.normalize(o.encoder->encode(job.x_src)), unit);
  Vector w_start = w_src;
  if (job.w_init) {
    if (!unit.contains(*job.w_init)) throw ContractViolation("latent_hsja: w_init outside [0, 1]");
    w_start = *job.w_init;
    if (!decide(target_fn, c, pre_attack, g.generate(w_start))) {
      throw EncodingInvalid("latent_hsja: start latent no longer generates the target class");
    }
  } else {
    EncodedPair pair = encode_pair(*o.encoder, g, c, job.x_src, *job.x_trg, job.target, pre_attack);
    w_src = std::move(pair.w_src);
    w_start = std::move(pair.w_trg);
  }
  if (w_src == w_start) throw InvalidEndpoints("latent_hsja: source and start latents coincide");

  AttackConfig cfg = job.cfg;
  cfg.bounds = unit;
  QueryLedger ledger;
  const DecisionOracle decision{
      [&](const Vector& w) { return decide_latent(target_fn, c, g, ledger, w); },
      c.concurrent() && g.concurrent(),
  };
  AttackOutcome outcome = run_attack(decision, w_start, w_src, cfg);

  LatentAttackResult r{w_src, w_start, outcome.x_adv, g.generate(outcome.x_adv), std::move(outcome.trace), 0.0, 0.0,
                       0.0, {}, 0, 0, 0};
  r.initial_latent_dist = l2_distance(w_start, w_src);
  r.final_latent_dist = l2_distance(r.w_adv, w_src);
  r.final_image_dist = l2_distance(r.x_adv, job.x_src);
  r.pre_attack_queries = pre_attack.classify_count();
  r.attack_queries = ledger.classify_count();
  r.generations = ledger.generate_count();
  if (o.embedder) {
    r.similarity_scores["sim"] = cosine_similarity(o.embedder->embed(job.x_src), o.embedder->embed(r.x_adv));
  } else {
    r.similarity_scores["sim"] = std::nullopt;
  }
  r.similarity_scores["lpips"] = std::nullopt;
  return r;
}

AttackOutcome image_hsja_baseline(const Vector& x_src, const Vector& x_trg, Label target, const ClassifierOracle& c,
                                  AttackConfig cfg) {
  cfg.bounds = {0.0, 1.0};
  QueryLedger ledger;
  const DecisionFn target_fn = DecisionFn::targeted(target);
  const DecisionOracle decision{
      [&](const Vector& x) { return decide(target_fn, c, ledger, x); },
      c.concurrent(),
  };
  return run_attack(decision, x_trg, x_src, cfg);
}

using detail::json;

namespace {

json config_json(const AttackConfig& cfg) {
  return {
      {"theta_bin", cfg.theta_bin},
      {"b0", cfg.b0},
      {"delta_scale", cfg.delta_scale},
      {"max_queries", cfg.max_queries},
      {"seed", cfg.seed.value},
      {"bounds", {cfg.bounds.low, cfg.bounds.high}},
      {"distance", "l2"},
      {"k_max", cfg.k_max},
      {"max_iterations", cfg.max_iterations},
      {"convergence_tol", cfg.convergence_tol},
      {"record_iterates", cfg.record_iterates},
  };
}

AttackConfig config_from(const json& j) {
  AttackConfig cfg;
  cfg.theta_bin = j.at("theta_bin").get<double>();
  cfg.b0 = j.at("b0").get<std::size_t>();
  cfg.delta_scale = j.at("delta_scale").get<double>();
  cfg.max_queries = j.at("max_queries").get<std::uint64_t>();
  cfg.seed = RngSeed{j.at("seed").get<std::uint64_t>()};
  cfg.bounds = BoundsBox(j.at("bounds").at(0).get<double>(), j.at("bounds").at(1).get<double>());
  if (j.value("distance", std::string("l2")) != "l2") throw ContractViolation("config: only l2 distance is supported");
  cfg.k_max = j.value("k_max", cfg.k_max);
  cfg.max_iterations = j.value("max_iterations", cfg.max_iterations);
  cfg.convergence_tol = j.value("convergence_tol", cfg.convergence_tol);
  cfg.record_iterates = j.value("record_iterates", cfg.record_iterates);
  cfg.validate();
  return cfg;
}

}  // namespace

std::string attack_config_to_json(const AttackConfig& cfg) { return config_json(cfg).dump(2); }

AttackConfig attack_config_from_json(const std::string& text) {
  try {
    return config_from(detail::parse_or_throw(text, "attack_config_from_json"));
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("attack_config_from_json: ") + e.what());
  }
}

std::string manifest_to_json(const RunManifest& m) {
  json j = {
      {"format", "lhsja-manifest"},
      {"version", 1},
      {"method", m.method},
      {"suite", {{"path", m.suite_path}, {"fingerprint", m.suite_fingerprint}}},
      {"job",
       {{"src_class", m.src_class.id},
        {"src_index", m.src_index},
        {"trg_class", m.trg_class.id},
        {"trg_index", m.trg_index}}},
      {"config", config_json(m.config)},
      {"oracles", m.oracle_ids},
      {"terminal", m.terminal},
      {"metrics", m.metrics},
  };
  if (m.normalization) {
    j["normalization"] = {
        {"calibration_samples", m.calibration_samples},
        {"calibration_seed", m.calibration_seed},
        {"low", detail::to_json_array(m.normalization->low())},
        {"high", detail::to_json_array(m.normalization->high())},
    };
  }
  return j.dump(2) + "\n";
}

RunManifest manifest_from_json(const std::string& text) {
  const json j = detail::parse_or_throw(text, "manifest_from_json");
  try {
    if (j.at("format") != "lhsja-manifest" || j.at("version") != 1) {
      throw ContractViolation("manifest_from_json: unsupported format/version");
    }
    RunManifest m;
    m.method = j.at("method").get<std::string>();
    if (m.method != "latent_hsja" && m.method != "image_hsja") {
      throw ContractViolation("manifest_from_json: unknown method '" + m.method + "'");
    }
    m.suite_path = j.at("suite").at("path").get<std::string>();
    m.suite_fingerprint = j.at("suite").at("fingerprint").get<std::uint64_t>();
    const json& job = j.at("job");
    m.src_class = Label{job.at("src_class").get<std::uint32_t>()};
    m.src_index = job.at("src_index").get<std::size_t>();
    m.trg_class = Label{job.at("trg_class").get<std::uint32_t>()};
    m.trg_index = job.at("trg_index").get<std::size_t>();
    m.config = config_from(j.at("config"));
    m.oracle_ids = j.value("oracles", std::map<std::string, std::string>{});
    m.terminal = j.value("terminal", std::string{});
    m.metrics = j.value("metrics", std::map<std::string, double>{});
    if (j.contains("normalization")) {
      const json& n = j.at("normalization");
      m.calibration_samples = n.at("calibration_samples").get<std::size_t>();
      m.calibration_seed = n.at("calibration_seed").get<std::uint64_t>();
      m.normalization.emplace(detail::vector_from_json(n.at("low"), "normalization.low"),
                              detail::vector_from_json(n.at("high"), "normalization.high"));
    }
    return m;
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("manifest_from_json: ") + e.what());
  }
}

}  // namespace lhsja
