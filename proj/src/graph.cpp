#include "dacsim/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "dacsim/error.hpp"

namespace dacsim {

namespace {

bool isConnected(std::size_t n,
                 const std::vector<std::vector<std::size_t>>& adjacency) {
  std::vector<bool> seen(n, false);
  std::queue<std::size_t> frontier;
  frontier.push(0);
  seen[0] = true;
  std::size_t reached = 1;
  while (!frontier.empty()) {
    const std::size_t u = frontier.front();
    frontier.pop();
    for (std::size_t v : adjacency[u]) {
      if (!seen[v]) {
        seen[v] = true;
        ++reached;
        frontier.push(v);
      }
    }
  }
  return reached == n;
}

}  // namespace

Graph::Graph(std::size_t n, std::vector<Edge> edges) : n_(n) {
  if (n < 3) {
    throw Error(ErrorKind::TooFewAgents,
                "graph needs at least 3 agents, got " + std::to_string(n));
  }
  std::set<Edge> unique;
  for (auto [i, j] : edges) {
    if (i >= n || j >= n) {
      throw Error(ErrorKind::MalformedEdge,
                  "edge (" + std::to_string(i + 1) + ", " +
                      std::to_string(j + 1) + ") references an agent outside [1, " +
                      std::to_string(n) + "]");
    }
    if (i == j) {
      throw Error(ErrorKind::MalformedEdge,
                  "self-loop at agent " + std::to_string(i + 1));
    }
    if (!unique.insert(std::minmax(i, j)).second) {
      throw Error(ErrorKind::MalformedEdge,
                  "duplicate edge (" + std::to_string(i + 1) + ", " +
                      std::to_string(j + 1) + ")");
    }
  }
  edges_.assign(unique.begin(), unique.end());
  adjacency_.resize(n);
  for (auto [i, j] : edges_) {
    adjacency_[i].push_back(j);
    adjacency_[j].push_back(i);
  }
  for (auto& nbrs : adjacency_) std::sort(nbrs.begin(), nbrs.end());
  if (!isConnected(n, adjacency_)) {
    throw Error(ErrorKind::DisconnectedGraph, "communication graph is not connected");
  }
}

std::span<const std::size_t> Graph::neighbors(std::size_t i) const {
  if (i >= n_) {
    throw Error(ErrorKind::IndexOutOfRange,
                "agent " + std::to_string(i + 1) + " not in [1, " +
                    std::to_string(n_) + "]");
  }
  return adjacency_[i];
}

bool Graph::hasEdge(std::size_t i, std::size_t j) const {
  if (i >= n_ || j >= n_) return false;
  const auto& nbrs = adjacency_[i];
  return std::binary_search(nbrs.begin(), nbrs.end(), j);
}

Eigen::MatrixXi Graph::adjacency() const {
  Eigen::MatrixXi a = Eigen::MatrixXi::Zero(n_, n_);
  for (auto [i, j] : edges_) a(i, j) = a(j, i) = 1;
  return a;
}

Eigen::MatrixXi Graph::laplacian() const {
  Eigen::MatrixXi l = -adjacency();
  for (std::size_t i = 0; i < n_; ++i) {
    l(i, i) = static_cast<int>(adjacency_[i].size());
  }
  return l;
}

Graph buildGraph(const TopologyDescriptor& spec) {
  const std::size_t n = spec.n;
  if (n < 3) {
    throw Error(ErrorKind::TooFewAgents,
                "graph needs at least 3 agents, got " + std::to_string(n));
  }
  std::vector<Edge> edges;
  switch (spec.kind) {
    case TopologyKind::Ring:
      for (std::size_t i = 0; i < n; ++i) edges.emplace_back(i, (i + 1) % n);
      break;
    case TopologyKind::Path:
      for (std::size_t i = 0; i + 1 < n; ++i) edges.emplace_back(i, i + 1);
      break;
    case TopologyKind::Complete:
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) edges.emplace_back(i, j);
      break;
    case TopologyKind::Custom:
      edges = spec.edges;
      break;
  }
  return Graph(n, std::move(edges));
}

Spectrum laplacianSpectrum(const Eigen::MatrixXd& laplacian) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(laplacian,
                                                        Eigen::EigenvaluesOnly);
  Spectrum s;
  s.laplacian = laplacian;
  s.eigenvalues = solver.eigenvalues();  // Eigen returns them ascending
  s.lambda2 = s.eigenvalues.size() > 1 ? s.eigenvalues(1) : 0.0;
  s.lambdaMax = s.eigenvalues(s.eigenvalues.size() - 1);
  return s;
}

Spectrum spectrum(const Graph& g) {
  return laplacianSpectrum(g.laplacian().cast<double>());
}

std::string topologyKindName(TopologyKind kind) {
  switch (kind) {
    case TopologyKind::Ring: return "ring";
    case TopologyKind::Path: return "path";
    case TopologyKind::Complete: return "complete";
    case TopologyKind::Custom: return "custom";
  }
  return "custom";
}

std::optional<TopologyKind> parseTopologyKind(const std::string& name) {
  if (name == "ring") return TopologyKind::Ring;
  if (name == "path") return TopologyKind::Path;
  if (name == "complete") return TopologyKind::Complete;
  if (name == "custom") return TopologyKind::Custom;
  return std::nullopt;
}

}  // namespace dacsim
