#include "lhsja/jobs.hpp"

#include "lhsja/errors.hpp"
#include "lhsja/metrics.hpp"

namespace lhsja {

JobOutput run_manifest(const RunManifest& m, const SyntheticSuite& suite) {
  if (m.suite_fingerprint != 0 && m.suite_fingerprint != suite_fingerprint(suite)) {
    throw ContractViolation("manifest was written for a different suite (fingerprint mismatch)");
  }
  if (m.src_class == m.trg_class) throw ContractViolation("manifest source and target classes coincide");
  const Vector& x_src = suite.sample_of(m.src_class, m.src_index).image;
  const Vector& x_trg = suite.sample_of(m.trg_class, m.trg_index).image;
  const ProjectionEmbedder embedder(suite.classifier->input_dim());

  RunManifest r = m;
  r.suite_fingerprint = suite_fingerprint(suite);
  r.oracle_ids = {{"classifier", suite.classifier->id()}, {"embedder", embedder.name()}};
  r.metrics.clear();

  if (m.method == "latent_hsja") {
    const LatentNormalizer normalizer =
        m.normalization ? *m.normalization
                        : LatentNormalizer::calibrate(*suite.generator, *suite.encoder, m.calibration_samples,
                                                      m.calibration_seed);
    OracleSet oracles = suite.oracles();
    oracles.embedder = std::make_shared<ProjectionEmbedder>(embedder);
    LatentAttackJob job{x_src, x_trg, m.trg_class, m.config, oracles, normalizer, std::nullopt};
    LatentAttackResult res = latent_hsja(job);
    r.normalization = normalizer;
    r.oracle_ids["generator"] = suite.generator->id();
    r.oracle_ids["encoder"] = suite.encoder->id();
    r.terminal = to_string(res.trace.terminal);
    r.metrics["initial_latent_dist"] = res.initial_latent_dist;
    r.metrics["final_latent_dist"] = res.final_latent_dist;
    r.metrics["final_image_dist"] = res.final_image_dist;
    r.metrics["sim"] = res.similarity_scores.at("sim").value();
    r.metrics["attack_queries"] = static_cast<double>(res.attack_queries);
    r.metrics["pre_attack_queries"] = static_cast<double>(res.pre_attack_queries);
    r.metrics["generations"] = static_cast<double>(res.generations);
    return {std::move(r), std::move(res.trace)};
  } else if (m.method == "image_hsja") {
    AttackOutcome res = image_hsja_baseline(x_src, x_trg, m.trg_class, *suite.classifier, m.config);
    r.normalization.reset();
    r.terminal = to_string(res.trace.terminal);
    r.metrics["initial_image_dist"] = l2_distance(x_trg, x_src);
    r.metrics["final_image_dist"] = l2_distance(res.x_adv, x_src);
    r.metrics["sim"] = cosine_similarity(embedder.embed(x_src), embedder.embed(res.x_adv));
    r.metrics["attack_queries"] = static_cast<double>(res.trace.queries.total());
    return {std::move(r), std::move(res.trace)};
  }
  throw ContractViolation("unknown method '" + m.method + "'");
}

}  // namespace lhsja
