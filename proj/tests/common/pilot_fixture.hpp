#ifndef LHSJA_TESTS_PILOT_FIXTURE_HPP
#define LHSJA_TESTS_PILOT_FIXTURE_HPP

// Thresholds and pair policy pinned by the recorded pilot run in
// tests/fixtures/pilot_run.json.

#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "lhsja/synthetic.hpp"

namespace lhsja::testing {

struct PilotFixture {
  SuiteParams suite;
  std::uint64_t fingerprint = 0;
  std::size_t pair_count = 0;
  std::uint64_t pair_seed = 0;
  std::string pair_targets;
  std::vector<std::uint64_t> seeds;
  std::vector<std::uint64_t> grid;
  double latent_win_fraction_min = 0.0;
  std::vector<std::uint64_t> trend_budgets;
  double latent_dist_ratio_max = 0.0;
  std::size_t ratio_pair = 0;
  std::uint64_t ratio_budget = 0;
  std::size_t ratio_seeds = 0;
};

inline PilotFixture load_pilot_fixture(const std::string& dir) {
  const std::string path = dir + "/pilot_run.json";
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  const auto j = nlohmann::json::parse(ss.str());
  if (j.at("format") != "lhsja-pilot" || j.at("version") != 1) throw std::runtime_error("unsupported pilot fixture");

  PilotFixture f;
  const auto& s = j.at("suite");
  f.suite.seed = s.at("seed").get<std::uint64_t>();
  f.suite.latent_dim = s.at("latent_dim").get<std::size_t>();
  f.suite.image_dim = s.at("image_dim").get<std::size_t>();
  f.suite.num_classes = s.at("num_classes").get<std::size_t>();
  f.fingerprint = s.at("fingerprint").get<std::uint64_t>();
  const auto& p = j.at("pairs");
  f.pair_count = p.at("count").get<std::size_t>();
  f.pair_seed = p.at("seed").get<std::uint64_t>();
  f.pair_targets = p.at("targets").get<std::string>();
  f.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  f.grid = j.at("grid").get<std::vector<std::uint64_t>>();
  const auto& t = j.at("thresholds");
  f.latent_win_fraction_min = t.at("latent_win_fraction_min").get<double>();
  f.trend_budgets = t.at("trend_budgets").get<std::vector<std::uint64_t>>();
  f.latent_dist_ratio_max = t.at("latent_dist_ratio_max").get<double>();
  const auto& r = j.at("observed").at("latent_dist_ratio");
  f.ratio_pair = r.at("pair").get<std::size_t>();
  f.ratio_budget = r.at("budget").get<std::uint64_t>();
  f.ratio_seeds = r.at("seeds").get<std::size_t>();
  return f;
}

}  // namespace lhsja::testing

#endif  // LHSJA_TESTS_PILOT_FIXTURE_HPP
