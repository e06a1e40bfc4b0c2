#include "lhsja/synthetic.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "json_util.hpp"
#include "lhsja/errors.hpp"
#include "lhsja/random.hpp"

namespace lhsja {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<double> to_row_major(const Eigen::MatrixXd& m) {
  std::vector<double> out(static_cast<std::size_t>(m.size()));
  Eigen::Map<RowMajor>(out.data(), m.rows(), m.cols()) = m;
  return out;
}

}  // namespace

LinearGenerator::LinearGenerator(std::size_t image_dim, std::size_t latent_dim, std::vector<double> matrix,
                                 Vector offset, bool squash, BoundsBox latent_bounds)
    : image_dim_(image_dim),
      latent_dim_(latent_dim),
      matrix_(std::move(matrix)),
      offset_(std::move(offset)),
      squash_(squash),
      latent_bounds_(latent_bounds) {
  if (latent_dim_ == 0 || image_dim_ == 0) throw ContractViolation("LinearGenerator: dims must be >= 1");
  if (matrix_.size() != image_dim_ * latent_dim_) throw ContractViolation("LinearGenerator: matrix size mismatch");
  if (offset_.dim() != image_dim_) throw ContractViolation("LinearGenerator: offset dim mismatch");
  for (double x : matrix_) {
    if (!std::isfinite(x)) throw ContractViolation("LinearGenerator: non-finite matrix entry");
  }
}

Vector LinearGenerator::affine(const Vector& latent) const {
  if (latent.dim() != latent_dim_) throw ContractViolation("LinearGenerator: latent dim mismatch");
  std::vector<double> out(offset_.raw());
  for (std::size_t r = 0; r < image_dim_; ++r) {
    const double* row = matrix_.data() + r * latent_dim_;
    double acc = 0.0;
    for (std::size_t c = 0; c < latent_dim_; ++c) acc += row[c] * latent[c];
    out[r] += acc;
  }
  return Vector(std::move(out));
}

Vector LinearGenerator::generate(const Vector& latent) const {
  Vector x = affine(latent);
  return squash_ ? clamp_to_bounds(x, {0.0, 1.0}) : x;
}

bool LinearGenerator::squash_active(const Vector& latent) const {
  if (!squash_) return false;
  return !BoundsBox(0.0, 1.0).contains(affine(latent));
}

CentroidClassifier::CentroidClassifier(std::vector<Vector> centroids, double temperature)
    : centroids_(std::move(centroids)), temperature_(temperature) {
  if (centroids_.empty()) throw ContractViolation("CentroidClassifier: need at least one centroid");
  if (!(temperature_ > 0.0)) throw ContractViolation("CentroidClassifier: temperature must be > 0");
  for (const auto& c : centroids_) {
    if (c.dim() != centroids_.front().dim()) throw ContractViolation("CentroidClassifier: centroid dims differ");
  }
}

Classification CentroidClassifier::classify(const Vector& image) const {
  std::vector<double> dists(centroids_.size());
  std::size_t best = 0;
  for (std::size_t k = 0; k < centroids_.size(); ++k) {
    dists[k] = l2_distance(image, centroids_[k]);
    if (dists[k] < dists[best]) best = k;
  }
  // Softmax over -d / T, shifted by the winner for stability.
  double denom = 0.0;
  for (double d : dists) denom += std::exp(-(d - dists[best]) / temperature_);
  return {Label{static_cast<std::uint32_t>(best)}, 1.0 / denom};
}

PseudoInverseEncoder::PseudoInverseEncoder(const LinearGenerator& generator)
    : image_dim_(generator.image_dim()), latent_dim_(generator.latent_dim()), offset_(generator.offset()) {
  const Eigen::Map<const RowMajor> a(generator.matrix().data(), static_cast<Eigen::Index>(image_dim_),
                                     static_cast<Eigen::Index>(latent_dim_));
  const Eigen::MatrixXd pinv = Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd>(a).pseudoInverse();
  pinv_ = to_row_major(pinv);
}

Vector PseudoInverseEncoder::encode(const Vector& image) const {
  if (image.dim() != image_dim_) throw ContractViolation("PseudoInverseEncoder: image dim mismatch");
  std::vector<double> centered(image_dim_);
  for (std::size_t i = 0; i < image_dim_; ++i) centered[i] = image[i] - offset_[i];
  std::vector<double> out(latent_dim_, 0.0);
  for (std::size_t r = 0; r < latent_dim_; ++r) {
    const double* row = pinv_.data() + r * image_dim_;
    double acc = 0.0;
    for (std::size_t c = 0; c < image_dim_; ++c) acc += row[c] * centered[c];
    out[r] = acc;
  }
  return Vector(std::move(out));
}

OracleSet SyntheticSuite::oracles() const { return {classifier, generator, encoder, nullptr}; }

const LabeledSample& SyntheticSuite::sample_of(Label label, std::size_t index) const {
  std::size_t seen = 0;
  for (const auto& s : samples) {
    if (s.label == label && seen++ == index) return s;
  }
  throw ContractViolation("SyntheticSuite: no sample " + std::to_string(index) + " for class " +
                          std::to_string(label.id));
}

namespace {

bool well_separated(const std::vector<Vector>& centroids, double min_gap) {
  for (std::size_t i = 0; i < centroids.size(); ++i) {
    for (std::size_t j = i + 1; j < centroids.size(); ++j) {
      if (l2_distance(centroids[i], centroids[j]) < min_gap) return false;
    }
  }
  return true;
}

}  // namespace

SyntheticSuite make_suite(const SuiteParams& p) {
  if (p.latent_dim < 1 || p.latent_dim > p.image_dim) {
    throw ContractViolation("make_suite: requires 1 <= latent_dim <= image_dim");
  }
  if (p.num_classes < 2) throw ContractViolation("make_suite: requires num_classes >= 2");
  if (!(p.intra_radius > 0.0)) throw ContractViolation("make_suite: intra_radius must be > 0");

  RngStream rng(RngSeed{p.seed});
  const auto n = static_cast<Eigen::Index>(p.image_dim);
  const auto d = static_cast<Eigen::Index>(p.latent_dim);

  // Orthonormal columns from the thin Q factor of a Gaussian matrix.
  Eigen::MatrixXd gauss(n, d);
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < d; ++c) gauss(r, c) = rng.normal();
  }
  const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(gauss).householderQ() *
                            Eigen::MatrixXd::Identity(n, d);

  // Offset maps the latent box centre to the image box centre.
  const Eigen::VectorXd centre_image = q * Eigen::VectorXd::Constant(d, 0.5);
  std::vector<double> offset(p.image_dim);
  for (std::size_t i = 0; i < p.image_dim; ++i) offset[i] = 0.5 - centre_image(static_cast<Eigen::Index>(i));

  auto generator = std::make_shared<const LinearGenerator>(p.image_dim, p.latent_dim, to_row_major(q),
                                                           Vector(std::move(offset)), p.squash);

  const double min_gap = 4.0 * p.intra_radius;
  const double span = p.centroid_box.high - p.centroid_box.low;
  for (int round = 0; round < 100; ++round) {
    std::vector<Vector> latent_centroids;
    for (std::size_t k = 0; k < p.num_classes; ++k) {
      std::vector<double> z(p.latent_dim);
      for (double& x : z) x = p.centroid_box.low + span * rng.uniform();
      latent_centroids.emplace_back(std::move(z));
    }
    if (!well_separated(latent_centroids, min_gap)) continue;

    std::vector<Vector> centroids;
    for (const auto& z : latent_centroids) centroids.push_back(generator->affine(z));
    auto classifier = std::make_shared<const CentroidClassifier>(std::move(centroids), p.temperature);

    std::vector<LabeledSample> samples;
    bool all_correct = true;
    for (std::size_t k = 0; k < p.num_classes && all_correct; ++k) {
      for (std::size_t s = 0; s < p.samples_per_class; ++s) {
        // Uniform in the latent ball of radius intra_radius around the centroid.
        const double radius = p.intra_radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(p.latent_dim));
        Vector latent = clamp_to_bounds(axpy(latent_centroids[k], radius, sample_unit_sphere(p.latent_dim, rng)),
                                        generator->latent_bounds());
        Vector image = generator->generate(latent);
        const Label label{static_cast<std::uint32_t>(k)};
        if (classifier->classify(image).label != label) {
          all_correct = false;
          break;
        }
        samples.push_back({std::move(image), std::move(latent), label});
      }
    }
    if (!all_correct) continue;

    auto encoder = std::make_shared<const PseudoInverseEncoder>(*generator);
    return SyntheticSuite{p, generator, classifier, encoder, std::move(latent_centroids), std::move(samples)};
  }
  throw SuiteConstructionFailed("make_suite: no separable configuration after 100 rounds");
}

double analytic_boundary_distance(const CentroidClassifier& c, const Vector& x, Label target) {
  const auto& cs = c.centroids();
  if (cs.size() < 2) throw ContractViolation("analytic_boundary_distance: needs at least two classes");
  if (target.id >= cs.size()) throw ContractViolation("analytic_boundary_distance: target out of range");

  std::size_t rival = cs.size();
  double rival_dist = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < cs.size(); ++k) {
    if (k == target.id) continue;
    const double dk = l2_distance(x, cs[k]);
    if (dk < rival_dist) {
      rival_dist = dk;
      rival = k;
    }
  }
  // Bisector of c_t and c_r: points y with (y - m) . n = 0, m the midpoint.
  const Vector& ct = cs[target.id];
  const Vector& cr = cs[rival];
  const Vector normal = subtract(ct, cr);
  const Vector midpoint = interpolate(ct, cr, 0.5);
  return std::abs(dot(subtract(x, midpoint), normal)) / l2_norm(normal);
}

using detail::json;

std::string suite_to_json(const SyntheticSuite& suite) {
  const auto& p = suite.params;
  const auto& g = *suite.generator;
  json rows = json::array();
  for (std::size_t r = 0; r < g.image_dim(); ++r) {
    rows.push_back(std::vector<double>(g.matrix().begin() + static_cast<std::ptrdiff_t>(r * g.latent_dim()),
                                       g.matrix().begin() + static_cast<std::ptrdiff_t>((r + 1) * g.latent_dim())));
  }
  json centroids = json::array();
  for (const auto& c : suite.classifier->centroids()) centroids.push_back(detail::to_json_array(c));
  json latent_centroids = json::array();
  for (const auto& z : suite.latent_centroids) latent_centroids.push_back(detail::to_json_array(z));
  json samples = json::array();
  for (const auto& s : suite.samples) samples.push_back({{"label", s.label.id}, {"latent", detail::to_json_array(s.latent)}});

  const json j = {
      {"format", "lhsja-suite"},
      {"version", 1},
      {"params",
       {{"latent_dim", p.latent_dim},
        {"image_dim", p.image_dim},
        {"num_classes", p.num_classes},
        {"samples_per_class", p.samples_per_class},
        {"seed", p.seed},
        {"temperature", p.temperature},
        {"intra_radius", p.intra_radius},
        {"centroid_box", {p.centroid_box.low, p.centroid_box.high}},
        {"squash", p.squash}}},
      {"generator",
       {{"image_dim", g.image_dim()},
        {"latent_dim", g.latent_dim()},
        {"matrix", std::move(rows)},
        {"offset", detail::to_json_array(g.offset())},
        {"squash", g.squash()},
        {"latent_bounds", {g.latent_bounds().low, g.latent_bounds().high}}}},
      {"classifier", {{"temperature", suite.classifier->temperature()}, {"centroids", std::move(centroids)}}},
      {"latent_centroids", std::move(latent_centroids)},
      {"samples", std::move(samples)},
  };
  return j.dump(1) + "\n";
}

SyntheticSuite suite_from_json(const std::string& text) {
  const json j = detail::parse_or_throw(text, "suite_from_json");
  try {
    if (j.at("format") != "lhsja-suite" || j.at("version") != 1) {
      throw ContractViolation("suite_from_json: unsupported format/version");
    }
    SuiteParams p;
    const json& jp = j.at("params");
    p.latent_dim = jp.at("latent_dim").get<std::size_t>();
    p.image_dim = jp.at("image_dim").get<std::size_t>();
    p.num_classes = jp.at("num_classes").get<std::size_t>();
    p.samples_per_class = jp.at("samples_per_class").get<std::size_t>();
    p.seed = jp.at("seed").get<std::uint64_t>();
    p.temperature = jp.at("temperature").get<double>();
    p.intra_radius = jp.at("intra_radius").get<double>();
    p.centroid_box = {jp.at("centroid_box").at(0).get<double>(), jp.at("centroid_box").at(1).get<double>()};
    p.squash = jp.at("squash").get<bool>();

    const json& jg = j.at("generator");
    const auto image_dim = jg.at("image_dim").get<std::size_t>();
    const auto latent_dim = jg.at("latent_dim").get<std::size_t>();
    std::vector<double> matrix;
    matrix.reserve(image_dim * latent_dim);
    for (const json& row : jg.at("matrix")) {
      const auto values = row.get<std::vector<double>>();
      if (values.size() != latent_dim) throw ContractViolation("suite_from_json: matrix row length mismatch");
      matrix.insert(matrix.end(), values.begin(), values.end());
    }
    auto generator = std::make_shared<const LinearGenerator>(
        image_dim, latent_dim, std::move(matrix), detail::vector_from_json(jg.at("offset"), "generator.offset"),
        jg.at("squash").get<bool>(),
        BoundsBox(jg.at("latent_bounds").at(0).get<double>(), jg.at("latent_bounds").at(1).get<double>()));

    std::vector<Vector> centroids;
    for (const json& c : j.at("classifier").at("centroids")) centroids.push_back(detail::vector_from_json(c, "centroid"));
    auto classifier =
        std::make_shared<const CentroidClassifier>(std::move(centroids), j.at("classifier").at("temperature").get<double>());

    std::vector<Vector> latent_centroids;
    for (const json& z : j.at("latent_centroids")) latent_centroids.push_back(detail::vector_from_json(z, "latent_centroid"));

    std::vector<LabeledSample> samples;
    for (const json& s : j.at("samples")) {
      Vector latent = detail::vector_from_json(s.at("latent"), "sample.latent");
      Vector image = generator->generate(latent);
      samples.push_back({std::move(image), std::move(latent), Label{s.at("label").get<std::uint32_t>()}});
    }
    auto encoder = std::make_shared<const PseudoInverseEncoder>(*generator);
    return SyntheticSuite{p, generator, classifier, encoder, std::move(latent_centroids), std::move(samples)};
  } catch (const json::exception& e) {
    throw ContractViolation(std::string("suite_from_json: ") + e.what());
  }
}

std::uint64_t suite_fingerprint(const SyntheticSuite& suite) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : suite_to_json(suite)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace lhsja
