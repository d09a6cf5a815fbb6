// Python bindings. Agent indices are 1-based on the Python side.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dacsim/adversary.hpp"
#include "dacsim/engine.hpp"
#include "dacsim/error.hpp"
#include "dacsim/experiment.hpp"
#include "dacsim/graph.hpp"
#include "dacsim/masks.hpp"
#include "dacsim/signals.hpp"

namespace py = pybind11;
using namespace dacsim;

namespace {

std::vector<Edge> toZeroBased(const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  std::vector<Edge> out;
  for (auto [a, b] : edges) {
    if (a == 0 || b == 0) throw Error(ErrorKind::MalformedEdge, "agent indices start at 1");
    out.emplace_back(a - 1, b - 1);
  }
  return out;
}

Graph makeGraph(const std::string& kind, std::size_t n,
                const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
  const auto k = parseTopologyKind(kind);
  if (!k) throw Error(ErrorKind::ConfigInvalid, "unknown topology kind '" + kind + "'");
  return buildGraph({*k, n, toZeroBased(edges)});
}

std::vector<SinusoidSpec> parseSignals(const std::string& signalsJson) {
  nlohmann::json cfg = configToJson(goldenConfig());
  cfg["signals"] = nlohmann::json::parse(signalsJson);
  return parseConfig(cfg).signals;
}

EngineConfig engineConfig(double beta, double dt, double tFinal, std::size_t recordEvery,
                          double steadyStart) {
  return EngineConfig{beta, dt, tFinal, recordEvery, steadyStart};
}

py::dict runToDict(const RunResult& r) {
  const Transcript& tr = r.transcript;
  Eigen::MatrixXd states(static_cast<Eigen::Index>(tr.samples()),
                         static_cast<Eigen::Index>(tr.agents()));
  for (std::size_t k = 0; k < tr.samples(); ++k)
    for (std::size_t i = 0; i < tr.agents(); ++i)
      states(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(i)) = tr.at(k, i);
  py::dict d;
  d["times"] = tr.times();
  d["states"] = states;
  d["true_average"] = r.trueAverage;
  d["consensus_error"] = r.consensusErrorL2;
  d["gamma"] = r.gamma;
  d["lambda2"] = r.lambda2;
  d["bound"] = r.bound;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "dynamic average consensus with reference masking";

  static py::exception<Error> pyError(m, "DacsimError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(pyError, (std::string(errorKindName(e.kind())) + ": " + e.what()).c_str());
    }
  });

  py::class_<Graph>(m, "Graph")
      .def(py::init([](std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges) {
             return Graph(n, toZeroBased(edges));
           }),
           py::arg("n"), py::arg("edges"))
      .def_property_readonly("n", &Graph::size)
      .def_property_readonly("edges",
                             [](const Graph& g) {
                               std::vector<std::pair<std::size_t, std::size_t>> out;
                               for (auto [a, b] : g.edges()) out.emplace_back(a + 1, b + 1);
                               return out;
                             })
      .def("neighbors",
           [](const Graph& g, std::size_t i) {
             if (i == 0) throw Error(ErrorKind::IndexOutOfRange, "agent indices start at 1");
             std::vector<std::size_t> out;
             for (std::size_t j : g.neighbors(i - 1)) out.push_back(j + 1);
             return out;
           })
      .def("laplacian", [](const Graph& g) { Eigen::MatrixXd l = g.laplacian().cast<double>(); return l; })
      .def("spectrum", [](const Graph& g) {
        const Spectrum s = spectrum(g);
        py::dict d;
        d["eigenvalues"] = Eigen::VectorXd(s.eigenvalues);
        d["lambda2"] = s.lambda2;
        d["lambda_max"] = s.lambdaMax;
        return d;
      });

  m.def("build_graph", &makeGraph, py::arg("kind"), py::arg("n"),
        py::arg("edges") = std::vector<std::pair<std::size_t, std::size_t>>{});

  m.def("draw_eta",
        [](const Graph& g, std::uint64_t seed, double range) {
          std::mt19937_64 rng(seed);
          return Eigen::MatrixXd(drawEta(g, rng, range).values());
        },
        py::arg("graph"), py::arg("seed"), py::arg("range") = kDefaultEtaRange);

  m.def("compute_masks",
        [](const Graph& g, const Eigen::MatrixXd& eta) {
          return Eigen::VectorXd(computeMasks(g, loadEta(g, eta)).values());
        },
        py::arg("graph"), py::arg("eta"));

  m.def("golden_eta", &goldenEtaMatrix);
  m.def("golden_config_json", [] { return configToJson(goldenConfig()).dump(); });

  m.def("compute_gamma",
        [](const std::string& signalsJson) { return computeGamma(SignalBank(parseSignals(signalsJson))); },
        py::arg("signals_json"));

  m.def("simulate",
        [](const Graph& g, const std::string& signalsJson, std::optional<Eigen::VectorXd> masks,
           double beta, double dt, double tFinal, std::size_t recordEvery, double steadyStart) {
          const SignalBank bank(parseSignals(signalsJson));
          const EngineConfig cfg = engineConfig(beta, dt, tFinal, recordEvery, steadyStart);
          if (!masks) return runToDict(simulateConventional(g, bank, cfg));
          const std::vector<double> mv(masks->data(), masks->data() + masks->size());
          return runToDict(simulateMasked(g, maskBank(bank, MaskVector::fromValues(mv)), cfg));
        },
        py::arg("graph"), py::arg("signals_json"), py::arg("masks") = std::nullopt,
        py::arg("beta") = 300.0, py::arg("dt") = 1e-4, py::arg("t_final") = 30.0,
        py::arg("record_every") = 10, py::arg("steady_start") = 1.0);

  m.def("eavesdrop",
        [](const Graph& g, double beta, const std::vector<double>& times, const Eigen::MatrixXd& states) {
          std::vector<double> flat;
          flat.reserve(static_cast<std::size_t>(states.size()));
          for (Eigen::Index k = 0; k < states.rows(); ++k)
            for (Eigen::Index i = 0; i < states.cols(); ++i) flat.push_back(states(k, i));
          Transcript tr(static_cast<std::size_t>(states.cols()), times, std::move(flat));
          return Eigen::MatrixXd(eavesdropReconstruct({g, beta, std::move(tr)}).values);
        },
        py::arg("graph"), py::arg("beta"), py::arg("times"), py::arg("states"));

  m.def("verify_json",
        [](const std::string& configJson, const std::vector<std::string>& checks) {
          std::set<TheoremCheck> suite;
          for (const auto& name : checks) {
            const auto c = parseTheoremCheck(name);
            if (!c) throw Error(ErrorKind::ConfigInvalid, "unknown check '" + name + "'");
            suite.insert(*c);
          }
          if (suite.empty()) suite = allTheoremChecks();
          py::gil_scoped_release release;
          return verifyTheorems(parseConfig(nlohmann::json::parse(configJson)), suite).dump();
        },
        py::arg("config_json"), py::arg("checks") = std::vector<std::string>{});

  m.def("run_json",
        [](const std::string& configJson, const std::string& outDir, bool csv) {
          py::gil_scoped_release release;
          runScenario(parseConfig(nlohmann::json::parse(configJson)), outDir, csv);
        },
        py::arg("config_json"), py::arg("out_dir"), py::arg("csv") = true);

  m.def("compare_json",
        [](const std::string& configJson, const std::string& outDir) {
          py::gil_scoped_release release;
          return compareConvergence(parseConfig(nlohmann::json::parse(configJson)), outDir).dump();
        },
        py::arg("config_json"), py::arg("out_dir"));
}
