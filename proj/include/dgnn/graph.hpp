#pragma once

#include <optional>
#include <vector>

#include "dgnn/system.hpp"

namespace dgnn {

/// Weighted bipartite edges between catalyst and adsorbate nodes. Every
/// catalyst→adsorbate edge with weight z has a reverse edge with weight −z.
struct CrossEdgeSet {
  std::vector<int> src;
  std::vector<int> dst;
  std::vector<double> weight;

  std::size_t size() const { return src.size(); }
  bool operator==(const CrossEdgeSet&) const = default;
};

/// Directed edges src→dst (messages flow from src into dst).
struct GraphTopology {
  std::size_t num_nodes = 0;
  std::vector<int> edge_src;
  std::vector<int> edge_dst;
  std::vector<double> edge_distance;  // Å
  std::vector<Vec3> edge_vector;      // position[dst] − (position[src] + image offset), Å
  std::optional<CrossEdgeSet> cross_edges;

  std::size_t num_edges() const { return edge_src.size(); }
  bool operator==(const GraphTopology&) const = default;
};

struct RadiusGraphOptions {
  double cutoff = 6.0;  // Å
  int max_neighbors = 50;
};

/// All j→i with |x_i − x_j| ≤ cutoff. Each node keeps at most max_neighbors
/// incoming edges, nearest first, ties to the lower source index. With a
/// cell, neighbors are searched over the 27 surrounding images; the cell must
/// be at least `cutoff` thick along every lattice direction. Edges are sorted
/// by (dst, distance, src, image).
GraphTopology build_radius_graph(const AtomicSystem& system, RadiusGraphOptions options = {});

/// Keeps only edges whose endpoints are both adsorbate or both catalyst.
GraphTopology disconnect_graph(const GraphTopology& topology, const std::vector<int>& tags);

/// Drops tag-0 atoms and reindexes the survivors in their original order.
AtomicSystem remove_tag0_atoms(const AtomicSystem& system);

/// For each catalyst node i and adsorbate node j: i→j with weight z_i and
/// j→i with weight −z_i. With center_on_surface, z is measured relative to
/// the highest tag-1 atom (highest catalyst atom if there is no tag 1).
/// Edges are emitted as consecutive (i→j, j→i) pairs, catalyst-major.
CrossEdgeSet build_cross_attention_edges(const AtomicSystem& system, bool center_on_surface = false);

struct ComponentMasks {
  std::vector<int> adsorbate;
  std::vector<int> catalyst;
};

/// Ascending node indices of each component. Throws if either is empty.
ComponentMasks component_masks(const std::vector<int>& tags);

}  // namespace dgnn
