// Command-line entry point: run, verify, attack, compare, masks.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "dacsim/error.hpp"
#include "dacsim/experiment.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitTheorem = 4;

int exitCodeFor(dacsim::ErrorKind kind) {
  switch (kind) {
    case dacsim::ErrorKind::NonFiniteState:
    case dacsim::ErrorKind::InsufficientTransient:
    case dacsim::ErrorKind::NonUniformSampling:
      return kExitNumeric;
    default:
      return kExitConfig;
  }
}

int fail(std::string_view kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  return code;
}

struct Options {
  std::string config;
  std::string out = "dacsim-out";
  std::optional<std::uint64_t> seed;
  std::string eta;
  std::string format = "csv";
  std::vector<std::string> checks;
};

dacsim::ExperimentConfig resolveConfig(const Options& opt) {
  dacsim::ExperimentConfig cfg =
      opt.config.empty() ? dacsim::goldenConfig() : dacsim::loadConfig(opt.config);
  if (opt.seed) cfg.seed = *opt.seed;
  if (!opt.eta.empty()) {
    cfg.eta.kind = dacsim::EtaSource::Kind::Explicit;
    cfg.eta.matrix = dacsim::readEtaFile(opt.eta);
  }
  return cfg;
}

fs::path outputRoot(const Options& opt) {
  if (const char* env = std::getenv("DACSIM_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return opt.out;
}

// Graph for the masks subcommand: the config topology when one is given,
// otherwise the support of eta.
dacsim::Graph graphFor(const Options& opt, const Eigen::MatrixXd& eta) {
  if (!opt.config.empty()) return dacsim::buildGraph(dacsim::loadConfig(opt.config).topology);
  std::vector<dacsim::Edge> edges;
  for (Eigen::Index i = 0; i < eta.rows(); ++i) {
    for (Eigen::Index j = i + 1; j < eta.cols(); ++j) {
      if (eta(i, j) != 0.0 || eta(j, i) != 0.0) {
        edges.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
      }
    }
  }
  return dacsim::Graph(static_cast<std::size_t>(eta.rows()), std::move(edges));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Privacy-preserving dynamic average consensus simulator"};
  app.require_subcommand(1);
  Options opt;

  auto addCommon = [&opt](CLI::App* cmd) {
    cmd->add_option("--config", opt.config, "experiment config (JSON); defaults to the golden scenario");
    cmd->add_option("--out", opt.out, "output directory (DACSIM_OUT overrides)");
    cmd->add_option("--seed", opt.seed, "override the config seed");
    cmd->add_option("--eta", opt.eta, "eta matrix file; replaces random drawing");
    cmd->add_option("--format", opt.format, "artifact format")
        ->check(CLI::IsMember({"csv", "json"}));
  };

  auto* run = app.add_subcommand("run", "simulate and write run artifacts");
  auto* verify = app.add_subcommand("verify", "run the theorem checks");
  auto* attack = app.add_subcommand("attack", "simulate and run the configured adversary");
  auto* compare = app.add_subcommand("compare", "conventional vs masked vs decomposed");
  auto* masks = app.add_subcommand("masks", "print the masks for an eta file");
  for (auto* cmd : {run, verify, attack, compare, masks}) addCommon(cmd);
  verify->add_option("--check", opt.checks,
                     "restrict to thm1, thm2, thm3, corollary, lemma1, remark2");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail("UsageError", e.what(), kExitConfig);
  }

  try {
    if (masks->parsed()) {
      if (opt.eta.empty()) return fail("ConfigInvalid", "masks requires --eta <file>", kExitConfig);
      const Eigen::MatrixXd values = dacsim::readEtaFile(opt.eta);
      const dacsim::Graph g = graphFor(opt, values);
      const auto m = dacsim::computeMasks(g, dacsim::loadEta(g, values));
      if (opt.format == "csv") {
        std::cout << "agent_id,mask\n";
        for (std::size_t i = 0; i < m.size(); ++i) std::cout << i + 1 << ',' << json(m[i]).dump() << '\n';
      } else {
        json arr = json::array();
        for (std::size_t i = 0; i < m.size(); ++i) arr.push_back(m[i]);
        std::cout << arr.dump() << '\n';
      }
      return kExitOk;
    }

    dacsim::ExperimentConfig cfg = resolveConfig(opt);
    const fs::path root = outputRoot(opt);

    if (run->parsed()) {
      cfg.adversary.mode = dacsim::AdversaryMode::None;
      dacsim::runScenario(cfg, root, opt.format == "csv");
      std::cout << json{{"status", "ok"}, {"out", root.string()}}.dump() << '\n';
      return kExitOk;
    }
    if (attack->parsed()) {
      if (cfg.adversary.mode == dacsim::AdversaryMode::None) {
        cfg.adversary.mode = dacsim::AdversaryMode::Eavesdropper;
      }
      dacsim::runScenario(cfg, root, opt.format == "csv");
      std::cout << json{{"status", "ok"}, {"out", root.string()}}.dump() << '\n';
      return kExitOk;
    }
    if (verify->parsed()) {
      std::set<dacsim::TheoremCheck> suite;
      for (const auto& name : opt.checks) {
        const auto c = dacsim::parseTheoremCheck(name);
        if (!c) return fail("ConfigInvalid", "unknown check '" + name + "'", kExitConfig);
        suite.insert(*c);
      }
      if (suite.empty()) suite = dacsim::allTheoremChecks();
      const json report = dacsim::verifyTheorems(cfg, suite);
      std::cout << report.dump(2) << '\n';
      return report.at("all_passed").get<bool>() ? kExitOk : kExitTheorem;
    }
    if (compare->parsed()) {
      const json summary = dacsim::compareConvergence(cfg, root);
      std::cout << summary.dump(2) << '\n';
      return kExitOk;
    }
  } catch (const dacsim::Error& e) {
    return fail(dacsim::errorKindName(e.kind()), e.what(), exitCodeFor(e.kind()));
  } catch (const std::exception& e) {
    return fail("InternalError", e.what(), kExitNumeric);
  }
  return kExitOk;
}
