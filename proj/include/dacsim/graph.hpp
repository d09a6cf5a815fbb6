#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace dacsim {

// Agent indices are 0-based inside the library. File formats, the CLI and the
// Python bindings present them 1-based.
using Edge = std::pair<std::size_t, std::size_t>;

enum class TopologyKind { Ring, Path, Complete, Custom };

struct TopologyDescriptor {
  TopologyKind kind = TopologyKind::Ring;
  std::size_t n = 0;
  std::vector<Edge> edges;  // custom only, 0-based
};

/// Connected undirected graph with binary symmetric adjacency.
///
/// Construction validates the topology, so a Graph value always has n >= 3,
/// no self-loops or duplicate edges, and is connected. Immutable afterwards.
class Graph {
 public:
  Graph(std::size_t n, std::vector<Edge> edges);

  std::size_t size() const { return n_; }

  // Normalized (i < j), sorted lexicographically.
  const std::vector<Edge>& edges() const { return edges_; }

  // Sorted ascending.
  std::span<const std::size_t> neighbors(std::size_t i) const;
  std::size_t degree(std::size_t i) const { return neighbors(i).size(); }
  bool hasEdge(std::size_t i, std::size_t j) const;

  Eigen::MatrixXi adjacency() const;
  Eigen::MatrixXi laplacian() const;

 private:
  std::size_t n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::size_t>> adjacency_;
};

Graph buildGraph(const TopologyDescriptor& spec);

struct Spectrum {
  Eigen::MatrixXd laplacian;
  Eigen::VectorXd eigenvalues;  // ascending
  double lambda2 = 0.0;
  double lambdaMax = 0.0;
};

/// Dense symmetric eigen-decomposition of any real symmetric Laplacian.
Spectrum laplacianSpectrum(const Eigen::MatrixXd& laplacian);
Spectrum spectrum(const Graph& g);

std::string topologyKindName(TopologyKind kind);
std::optional<TopologyKind> parseTopologyKind(const std::string& name);

}  // namespace dacsim
