// lhsja: command-line front end for the attack engine, the synthetic suite,
// the budget sweep, brute-force sampling and the remote oracle bridge.
//
// Exit codes: 0 success, 1 failure, 2 usage error or bad input file,
// 3 oracle unreachable. Errors are printed to stderr as one JSON object.

#include <CLI11.hpp>
#include <json.hpp>

#include <pthread.h>
#include <signal.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "lhsja/bruteforce.hpp"
#include "lhsja/errors.hpp"
#include "lhsja/jobs.hpp"
#include "lhsja/metrics.hpp"
#include "lhsja/oracle_server.hpp"
#include "lhsja/random.hpp"
#include "lhsja/remote.hpp"
#include "lhsja/sweep.hpp"
#include "lhsja/synthetic.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitUnreachable = 3;

class IoError : public lhsja::Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "io_error"; }
};

class VerificationFailed : public lhsja::Error {
 public:
  using Error::Error;
  const char* kind() const noexcept override { return "verification_failed"; }
};

void print_error(const std::string& kind, const std::string& message) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << content;
  if (!out) throw IoError("write failed for " + path.string());
}

lhsja::SyntheticSuite load_suite(const std::string& path) {
  try {
    return lhsja::suite_from_json(read_file(path));
  } catch (const IoError& e) {
    throw lhsja::ContractViolation(e.what());
  } catch (const lhsja::ContractViolation& e) {
    throw lhsja::ContractViolation("bad suite file " + path + ": " + e.what());
  }
}

std::string resolve_remote(const CLI::Option* opt, const std::string& value) {
  if (opt->count() == 0) return {};
  if (!value.empty()) return value;
  const char* env = std::getenv(lhsja::remote::kAddressEnv);
  if (env == nullptr || *env == '\0') {
    throw lhsja::ContractViolation(std::string("--remote given without an address and ") +
                                   lhsja::remote::kAddressEnv + " is unset");
  }
  return env;
}

/// Vector with coordinates uniform in [0,1] that are exactly representable
/// as 32-bit floats, so local and remote evaluation see the same input.
lhsja::Vector float_probe(std::size_t dim, lhsja::RngStream& rng) {
  std::vector<double> v(dim);
  for (double& x : v) x = static_cast<double>(static_cast<float>(rng.uniform()));
  return lhsja::Vector(std::move(v));
}

json info_json(const lhsja::wire::Info& i) {
  return {{"num_classes", i.num_classes}, {"input_dim", i.input_dim},   {"latent_dim", i.latent_dim},
          {"image_dim", i.image_dim},     {"embed_dim", i.embed_dim},   {"concurrent", i.concurrent},
          {"deterministic", i.deterministic}};
}

// --- attack / baseline -------------------------------------------------

struct AttackArgs {
  std::string manifest;
  std::string suite;
  std::uint32_t src = 0;
  std::uint32_t trg = 1;
  std::size_t src_index = 0;
  std::size_t trg_index = 0;
  std::uint64_t budget = 20000;
  std::uint64_t seed = 0;
  std::size_t calibration_samples = 1000;
  std::uint64_t calibration_seed = 0;
  std::string out_dir = ".";
};

void add_attack_options(CLI::App* cmd, AttackArgs& a) {
  cmd->add_option("--manifest", a.manifest, "Replay a run manifest");
  cmd->add_option("--suite", a.suite, "Suite JSON (overrides the manifest's suite path)");
  cmd->add_option("--src", a.src, "Source class");
  cmd->add_option("--trg", a.trg, "Target class");
  cmd->add_option("--src-index", a.src_index, "Labeled sample index within the source class");
  cmd->add_option("--trg-index", a.trg_index, "Labeled sample index within the target class");
  cmd->add_option("--budget", a.budget, "Classifier query budget");
  cmd->add_option("--seed", a.seed, "Attack seed");
  cmd->add_option("--calibration-samples", a.calibration_samples, "Samples for latent box calibration");
  cmd->add_option("--calibration-seed", a.calibration_seed, "Seed for latent box calibration");
  cmd->add_option("--out-dir", a.out_dir, "Directory for manifest.json and trace.json");
}

int run_attack_command(const AttackArgs& a, const std::string& forced_method) {
  lhsja::RunManifest m;
  std::string suite_path = a.suite;
  if (!a.manifest.empty()) {
    try {
      m = lhsja::manifest_from_json(read_file(a.manifest));
    } catch (const IoError& e) {
      throw lhsja::ContractViolation(e.what());
    } catch (const lhsja::ContractViolation& e) {
      throw lhsja::ContractViolation("bad manifest " + a.manifest + ": " + e.what());
    }
    if (suite_path.empty()) {
      fs::path p = m.suite_path;
      if (p.is_relative() && !fs::exists(p)) p = fs::path(a.manifest).parent_path() / p;
      suite_path = p.string();
    }
  } else {
    if (a.suite.empty()) throw lhsja::ContractViolation("either --manifest or --suite is required");
    m.src_class = lhsja::Label{a.src};
    m.trg_class = lhsja::Label{a.trg};
    m.src_index = a.src_index;
    m.trg_index = a.trg_index;
    m.config.max_queries = a.budget;
    m.config.seed = lhsja::RngSeed{a.seed};
    m.calibration_samples = a.calibration_samples;
    m.calibration_seed = a.calibration_seed;
  }
  if (!forced_method.empty()) {
    m.method = forced_method;
    if (forced_method == "image_hsja") m.normalization.reset();
  }
  const lhsja::SyntheticSuite suite = load_suite(suite_path);
  if (a.manifest.empty()) {
    m.suite_path = a.suite;
    m.suite_fingerprint = lhsja::suite_fingerprint(suite);
  }

  const lhsja::JobOutput out = lhsja::run_manifest(m, suite);
  const fs::path dir = a.out_dir;
  write_file(dir / "manifest.json", lhsja::manifest_to_json(out.manifest));
  write_file(dir / "trace.json", lhsja::trace_to_json(out.trace));
  std::cout << json{{"method", out.manifest.method},
                    {"terminal", out.manifest.terminal},
                    {"metrics", out.manifest.metrics},
                    {"manifest", (dir / "manifest.json").string()},
                    {"trace", (dir / "trace.json").string()}}
                   .dump()
            << "\n";
  return 0;
}

// --- sweep ---------------------------------------------------------------

struct SweepArgs {
  std::string suite;
  std::string remote;
  CLI::Option* remote_opt = nullptr;
  std::vector<std::uint64_t> grid = lhsja::kDefaultBudgetGrid;
  std::size_t pairs = 10;
  std::uint64_t pair_seed = 0;
  std::string pair_targets = "generator";
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::vector<std::string> methods = {"latent_hsja", "image_hsja"};
  std::size_t parallelism = 0;
  std::string out;
  std::string aggregates;
  std::string failures;
};

lhsja::OracleSet oracles_for(const lhsja::SyntheticSuite& suite, const std::string& remote_address,
                             std::optional<lhsja::remote::RemoteOracleSet>& holder) {
  if (remote_address.empty()) return suite.oracles();
  holder = lhsja::remote::connect(remote_address);
  return holder->oracles();
}

int run_sweep_command(const SweepArgs& a) {
  const lhsja::SyntheticSuite suite = load_suite(a.suite);
  std::optional<lhsja::remote::RemoteOracleSet> remote;
  const lhsja::OracleSet oracles = oracles_for(suite, resolve_remote(a.remote_opt, a.remote), remote);

  lhsja::SweepOptions options;
  options.grid = a.grid;
  options.seeds = a.seeds;
  options.methods.clear();
  for (const auto& m : a.methods) options.methods.push_back(lhsja::sweep_method_from_string(m));
  options.parallelism = a.parallelism;

  const auto pairs =
      lhsja::make_sweep_pairs(suite, a.pairs, a.pair_seed, lhsja::pair_targets_from_string(a.pair_targets));
  const lhsja::SweepReport report = lhsja::run_sweep(oracles, pairs, options);
  write_file(a.out, lhsja::sweep_to_csv(report));
  if (!a.aggregates.empty()) write_file(a.aggregates, lhsja::aggregates_to_csv(report.aggregates()));
  if (!a.failures.empty()) write_file(a.failures, lhsja::failures_to_csv(report.failures));
  std::cout << json{{"rows", report.rows.size()}, {"failures", report.failures.size()}, {"out", a.out}}.dump()
            << "\n";
  return 0;
}

// --- bruteforce ----------------------------------------------------------

struct BruteArgs {
  std::string suite;
  std::string remote;
  CLI::Option* remote_opt = nullptr;
  std::vector<std::uint64_t> budgets = {100, 1000, 10000};
  std::string sampler = "uniform";
  std::uint64_t seed = 0;
  std::size_t calibration_samples = 1000;
  std::uint64_t calibration_seed = 0;
  std::string out;
  std::string bank;
};

int run_bruteforce_command(const BruteArgs& a) {
  std::optional<lhsja::SyntheticSuite> suite;
  std::optional<lhsja::remote::RemoteOracleSet> remote;
  lhsja::OracleSet oracles;
  const std::string address = resolve_remote(a.remote_opt, a.remote);
  if (!address.empty()) {
    remote = lhsja::remote::connect(address);
    oracles = remote->oracles();
  } else {
    if (a.suite.empty()) throw lhsja::ContractViolation("bruteforce needs --suite or --remote");
    suite = load_suite(a.suite);
    oracles = suite->oracles();
  }
  if (!oracles.generator || !oracles.encoder) {
    throw lhsja::ContractViolation("bruteforce needs generator and encoder oracles");
  }
  const auto normalizer = lhsja::LatentNormalizer::calibrate(*oracles.generator, *oracles.encoder,
                                                             a.calibration_samples, a.calibration_seed);
  const lhsja::NormalizedGenerator g(*oracles.generator, normalizer);

  std::vector<std::pair<std::string, lhsja::LatentSampler>> samplers;
  if (a.sampler == "uniform" || a.sampler == "both") samplers.emplace_back("uniform", lhsja::LatentSampler::uniform());
  if (a.sampler == "gaussian" || a.sampler == "both") {
    samplers.emplace_back("gaussian",
                          lhsja::LatentSampler::gaussian_calibrated(*oracles.generator, *oracles.encoder, normalizer,
                                                                     a.calibration_samples, a.calibration_seed));
  }
  if (samplers.empty()) throw lhsja::ContractViolation("--sampler must be uniform, gaussian or both");

  json summary = json::array();
  for (const auto& [name, sampler] : samplers) {
    const auto result = lhsja::brute_force_sample(g, *oracles.classifier, a.budgets, sampler, a.seed);
    fs::path out = a.out;
    fs::path bank = a.bank;
    if (samplers.size() > 1) {
      out.replace_extension("." + name + out.extension().string());
      if (!a.bank.empty()) bank.replace_extension("." + name + bank.extension().string());
    }
    write_file(out, lhsja::coverage_to_csv(result.table));
    if (!a.bank.empty()) write_file(bank, lhsja::bank_to_json(result.bank, result.table.num_classes));
    json rows = json::array();
    for (const auto& r : result.table.rows) {
      rows.push_back({{"budget", r.budget}, {"any", r.count_any}, {"gt50", r.count_gt50}, {"gt90", r.count_gt90}});
    }
    summary.push_back({{"sampler", name}, {"out", out.string()}, {"rows", rows}});
  }
  std::cout << summary.dump() << "\n";
  return 0;
}

// --- make-suite ----------------------------------------------------------

struct SuiteArgs {
  lhsja::SuiteParams params;
  std::string out;
};

int run_make_suite_command(const SuiteArgs& a) {
  const lhsja::SyntheticSuite suite = lhsja::make_suite(a.params);
  write_file(a.out, lhsja::suite_to_json(suite));
  std::cout << json{{"out", a.out}, {"fingerprint", lhsja::suite_fingerprint(suite)}}.dump() << "\n";
  return 0;
}

// --- verify-remote -------------------------------------------------------

struct VerifyArgs {
  std::string address;
  std::size_t probes = 100;
  std::string suite;
  std::size_t equivalence = 100;
  std::uint64_t seed = 0;
  bool allow_nondeterministic = false;
  long timeout_ms = 5000;
};

int run_verify_command(const VerifyArgs& a) {
  std::string address = a.address;
  if (address.empty()) {
    const char* env = std::getenv(lhsja::remote::kAddressEnv);
    if (env == nullptr || *env == '\0') {
      throw lhsja::ContractViolation(std::string("no --address given and ") + lhsja::remote::kAddressEnv +
                                     " is unset");
    }
    address = env;
  }
  lhsja::remote::ClientOptions opts;
  opts.timeout = std::chrono::milliseconds(a.timeout_ms);
  opts.allow_nondeterministic = a.allow_nondeterministic;
  const auto remote = lhsja::remote::connect(address, opts);
  const auto& info = remote.info();

  json report = {{"address", address}, {"info", info_json(info)}};
  bool ok = true;
  if (!info.deterministic && !a.allow_nondeterministic) {
    report["deterministic_flag"] = "server reports deterministic=false";
    ok = false;
  }

  const auto classifier = remote.probe_classifier();
  if (!classifier) throw VerificationFailed("server offers no classifier");
  lhsja::RngStream rng(lhsja::RngSeed{a.seed});
  const lhsja::Vector payload = float_probe(info.input_dim, rng);
  const auto det = lhsja::remote::probe_determinism(*classifier, payload, a.probes);
  report["determinism"] = {{"calls", det.calls}, {"distinct_labels", det.distinct_labels}, {"pass", det.consistent}};
  ok = ok && det.consistent;

  if (!a.suite.empty()) {
    const lhsja::SyntheticSuite suite = load_suite(a.suite);
    const bool dims_match = info.num_classes == suite.classifier->num_classes() &&
                            info.input_dim == suite.classifier->input_dim() &&
                            info.latent_dim == suite.generator->latent_dim() &&
                            info.image_dim == suite.generator->image_dim();
    std::size_t mismatches = 0;
    if (dims_match) {
      lhsja::RngStream probes = rng.fork(1);
      for (std::size_t i = 0; i < a.equivalence; ++i) {
        const lhsja::Vector x = float_probe(info.input_dim, probes);
        if (classifier->classify(x).label != suite.classifier->classify(x).label) ++mismatches;
      }
    }
    report["equivalence"] = {
        {"dims_match", dims_match}, {"probes", a.equivalence}, {"mismatches", mismatches},
        {"pass", dims_match && mismatches == 0}};
    ok = ok && dims_match && mismatches == 0;
  }

  report["pass"] = ok;
  std::cout << report.dump() << "\n";
  if (!ok) throw VerificationFailed("remote oracle failed verification");
  return 0;
}

// --- serve-suite ---------------------------------------------------------

struct ServeArgs {
  std::string suite;
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;
  bool concurrent = false;
  std::size_t workers = 4;
  bool advertise_nondeterministic = false;
};

int run_serve_command(const ServeArgs& a) {
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  const lhsja::SyntheticSuite suite = load_suite(a.suite);
  lhsja::OracleSet oracles = suite.oracles();
  oracles.embedder = std::make_shared<lhsja::ProjectionEmbedder>(suite.classifier->input_dim());
  lhsja::remote::ServerOptions opts;
  opts.concurrent = a.concurrent;
  opts.workers = a.workers;
  opts.deterministic = !a.advertise_nondeterministic;
  lhsja::remote::OracleServer server(oracles, opts);
  server.start(a.host, a.port);
  std::cout << json{{"address", server.address()}}.dump() << std::endl;

  int sig = 0;
  sigwait(&signals, &sig);
  server.stop();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Latent-space hard-label attack toolkit"};
  app.require_subcommand(1);

  AttackArgs attack_args;
  auto* attack = app.add_subcommand("attack", "Run one latent-space attack (from flags or a manifest)");
  add_attack_options(attack, attack_args);

  AttackArgs baseline_args;
  auto* baseline = app.add_subcommand("baseline", "Run the image-space attack on the same job");
  add_attack_options(baseline, baseline_args);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "Budget sweep over pairs, seeds and methods; writes CSV");
  sweep->add_option("--suite", sweep_args.suite, "Suite JSON (pairs are drawn from it)")->required();
  sweep_args.remote_opt =
      sweep->add_option("--remote", sweep_args.remote, "Use a remote oracle server (address or $LHSJA_ORACLE_ADDR)")
          ->expected(0, 1);
  sweep->add_option("--grid", sweep_args.grid, "Budget grid")->delimiter(',');
  sweep->add_option("--pairs", sweep_args.pairs, "Number of (source, target) pairs");
  sweep->add_option("--pair-seed", sweep_args.pair_seed, "Seed for pair selection");
  sweep->add_option("--pair-targets", sweep_args.pair_targets, "Target source: generator or labeled")
      ->check(CLI::IsMember({"generator", "labeled"}));
  sweep->add_option("--seeds", sweep_args.seeds, "Attack seeds")->delimiter(',');
  sweep->add_option("--methods", sweep_args.methods, "Methods")
      ->delimiter(',')
      ->check(CLI::IsMember({"latent_hsja", "image_hsja"}));
  sweep->add_option("--parallelism", sweep_args.parallelism, "Worker threads (0 = hardware)");
  sweep->add_option("--out", sweep_args.out, "Per-cell CSV output")->required();
  sweep->add_option("--aggregates", sweep_args.aggregates, "Aggregate CSV output");
  sweep->add_option("--failures", sweep_args.failures, "Failure CSV output");

  BruteArgs brute_args;
  auto* brute = app.add_subcommand("bruteforce", "Class coverage of random generator samples");
  brute->add_option("--suite", brute_args.suite, "Suite JSON");
  brute_args.remote_opt =
      brute->add_option("--remote", brute_args.remote, "Use a remote oracle server (address or $LHSJA_ORACLE_ADDR)")
          ->expected(0, 1);
  brute->add_option("--budgets", brute_args.budgets, "Ascending sample budgets")->delimiter(',');
  brute->add_option("--sampler", brute_args.sampler, "uniform, gaussian or both")
      ->check(CLI::IsMember({"uniform", "gaussian", "both"}));
  brute->add_option("--seed", brute_args.seed, "Sampling seed");
  brute->add_option("--calibration-samples", brute_args.calibration_samples, "Samples for latent box calibration");
  brute->add_option("--calibration-seed", brute_args.calibration_seed, "Seed for latent box calibration");
  brute->add_option("--out", brute_args.out, "Coverage CSV output")->required();
  brute->add_option("--bank", brute_args.bank, "Target bank JSON output");

  SuiteArgs suite_args;
  auto* make = app.add_subcommand("make-suite", "Generate and serialize a synthetic suite");
  make->add_option("--seed", suite_args.params.seed, "Suite seed");
  make->add_option("--classes", suite_args.params.num_classes, "Number of classes");
  make->add_option("--latent-dim", suite_args.params.latent_dim, "Latent dimension");
  make->add_option("--image-dim", suite_args.params.image_dim, "Image dimension");
  make->add_option("--samples-per-class", suite_args.params.samples_per_class, "Labeled samples per class");
  make->add_option("--temperature", suite_args.params.temperature, "Classifier softmax temperature");
  make->add_option("--intra-radius", suite_args.params.intra_radius, "Labeled sample radius around centroids");
  make->add_option("--out", suite_args.out, "Output JSON")->required();

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify-remote", "Handshake and determinism probe against an oracle server");
  verify->add_option("--address", verify_args.address, "host:port (default $LHSJA_ORACLE_ADDR)");
  verify->add_option("--probes", verify_args.probes, "Repeated classify calls for the determinism probe");
  verify->add_option("--suite", verify_args.suite, "Compare labels with this suite in-process");
  verify->add_option("--equivalence", verify_args.equivalence, "Random probes for the suite comparison");
  verify->add_option("--seed", verify_args.seed, "Probe seed");
  verify->add_option("--timeout-ms", verify_args.timeout_ms, "Per-request timeout");
  verify->add_flag("--allow-nondeterministic", verify_args.allow_nondeterministic,
                   "Do not fail on a server that reports deterministic=false");

  ServeArgs serve_args;
  auto* serve = app.add_subcommand("serve-suite", "Serve a suite's oracles over the wire protocol");
  serve->add_option("--suite", serve_args.suite, "Suite JSON")->required();
  serve->add_option("--host", serve_args.host, "Bind address");
  serve->add_option("--port", serve_args.port, "Port (0 = ephemeral)");
  serve->add_flag("--concurrent", serve_args.concurrent, "Evaluate requests concurrently");
  serve->add_option("--workers", serve_args.workers, "Worker threads per connection in concurrent mode");
  serve->add_flag("--advertise-nondeterministic", serve_args.advertise_nondeterministic,
                  "Report deterministic=false in the handshake");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage_error", e.what());
    return kExitUsage;
  }

  try {
    if (*attack) return run_attack_command(attack_args, "");
    if (*baseline) return run_attack_command(baseline_args, "image_hsja");
    if (*sweep) return run_sweep_command(sweep_args);
    if (*brute) return run_bruteforce_command(brute_args);
    if (*make) return run_make_suite_command(suite_args);
    if (*verify) return run_verify_command(verify_args);
    if (*serve) return run_serve_command(serve_args);
  } catch (const lhsja::OracleUnreachable& e) {
    print_error(e.kind(), e.what());
    return kExitUnreachable;
  } catch (const lhsja::ContractViolation& e) {
    print_error(e.kind(), e.what());
    return kExitUsage;
  } catch (const lhsja::Error& e) {
    print_error(e.kind(), e.what());
    return kExitFailure;
  } catch (const std::exception& e) {
    print_error("internal_error", e.what());
    return kExitFailure;
  }
  return kExitFailure;
}
