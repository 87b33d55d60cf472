#include "dgnn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dgnn/error.hpp"

namespace dgnn {
namespace {

Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

std::vector<Vec3> image_offsets(const AtomicSystem& system, double cutoff) {
  if (!system.cell) return {Vec3{0.0, 0.0, 0.0}};
  const Mat3& c = *system.cell;
  const double det = dot(c[0], cross(c[1], c[2]));
  if (!std::isfinite(det) || std::fabs(det) < 1e-8) {
    throw ValidationError("system " + system.id + ": degenerate cell (determinant " +
                          std::to_string(det) + ")");
  }
  // Thickness of the cell perpendicular to each pair of lattice vectors.
  const double v = std::fabs(det);
  const double heights[3] = {v / norm(cross(c[1], c[2])), v / norm(cross(c[2], c[0])),
                             v / norm(cross(c[0], c[1]))};
  for (double h : heights) {
    if (h < cutoff) {
      throw ValidationError("system " + system.id + ": cell thickness " + std::to_string(h) +
                            " Å is below the cutoff " + std::to_string(cutoff) +
                            " Å; 27-image search would miss neighbors");
    }
  }
  std::vector<Vec3> out;
  out.reserve(27);
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b)
      for (int d = -1; d <= 1; ++d) {
        Vec3 o{};
        for (int k = 0; k < 3; ++k) o[k] = a * c[0][k] + b * c[1][k] + d * c[2][k];
        out.push_back(o);
      }
  return out;
}

struct Candidate {
  double distance;
  int src;
  int image;
  Vec3 vec;
};

}  // namespace

GraphTopology build_radius_graph(const AtomicSystem& system, RadiusGraphOptions options) {
  if (!(options.cutoff > 0.0)) throw ValidationError("radius graph cutoff must be positive");
  if (options.max_neighbors < 1) throw ValidationError("max_neighbors must be at least 1");
  const auto offsets = image_offsets(system, options.cutoff);
  const auto n = system.size();
  if (system.positions.size() != n) throw ValidationError("system " + system.id + ": positions/atomic_numbers length mismatch");

  GraphTopology g;
  g.num_nodes = n;
  std::vector<Candidate> cands;
  for (std::size_t i = 0; i < n; ++i) {
    cands.clear();
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      for (std::size_t im = 0; im < offsets.size(); ++im) {
        Vec3 v;
        for (int k = 0; k < 3; ++k) v[k] = system.positions[i][k] - (system.positions[j][k] + offsets[im][k]);
        const double d = norm(v);
        if (d <= options.cutoff) cands.push_back({d, static_cast<int>(j), static_cast<int>(im), v});
      }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
      if (a.distance != b.distance) return a.distance < b.distance;
      if (a.src != b.src) return a.src < b.src;
      return a.image < b.image;
    });
    const auto keep = std::min(cands.size(), static_cast<std::size_t>(options.max_neighbors));
    for (std::size_t k = 0; k < keep; ++k) {
      g.edge_src.push_back(cands[k].src);
      g.edge_dst.push_back(static_cast<int>(i));
      g.edge_distance.push_back(cands[k].distance);
      g.edge_vector.push_back(cands[k].vec);
    }
  }
  return g;
}

GraphTopology disconnect_graph(const GraphTopology& topology, const std::vector<int>& tags) {
  if (tags.size() != topology.num_nodes) {
    throw ValidationError("disconnect_graph: " + std::to_string(tags.size()) + " tags for " +
                          std::to_string(topology.num_nodes) + " nodes");
  }
  GraphTopology out;
  out.num_nodes = topology.num_nodes;
  out.cross_edges = topology.cross_edges;
  for (std::size_t e = 0; e < topology.num_edges(); ++e) {
    const bool src_ads = is_adsorbate(tags[static_cast<std::size_t>(topology.edge_src[e])]);
    const bool dst_ads = is_adsorbate(tags[static_cast<std::size_t>(topology.edge_dst[e])]);
    if (src_ads != dst_ads) continue;
    out.edge_src.push_back(topology.edge_src[e]);
    out.edge_dst.push_back(topology.edge_dst[e]);
    out.edge_distance.push_back(topology.edge_distance[e]);
    out.edge_vector.push_back(topology.edge_vector[e]);
  }
  return out;
}

AtomicSystem remove_tag0_atoms(const AtomicSystem& system) {
  AtomicSystem out;
  out.id = system.id;
  out.cell = system.cell;
  out.target_energy = system.target_energy;
  out.metadata = system.metadata;
  for (std::size_t i = 0; i < system.size(); ++i) {
    if (system.tags[i] == kSubsurface) continue;
    out.atomic_numbers.push_back(system.atomic_numbers[i]);
    out.positions.push_back(system.positions[i]);
    out.tags.push_back(system.tags[i]);
  }
  if (out.atomic_numbers.empty()) {
    throw ValidationError("system " + system.id + ": every atom is tag 0, nothing left after removal");
  }
  return out;
}

CrossEdgeSet build_cross_attention_edges(const AtomicSystem& system, bool center_on_surface) {
  double z_ref = 0.0;
  if (center_on_surface) {
    bool have_surface = false, have_cat = false;
    double top_surface = 0.0, top_cat = 0.0;
    for (std::size_t i = 0; i < system.size(); ++i) {
      const double z = system.positions[i][2];
      if (system.tags[i] == kSurface) {
        top_surface = have_surface ? std::max(top_surface, z) : z;
        have_surface = true;
      }
      if (is_catalyst(system.tags[i])) {
        top_cat = have_cat ? std::max(top_cat, z) : z;
        have_cat = true;
      }
    }
    z_ref = have_surface ? top_surface : top_cat;
  }
  CrossEdgeSet out;
  for (std::size_t i = 0; i < system.size(); ++i) {
    if (!is_catalyst(system.tags[i])) continue;
    const double z = system.positions[i][2] - z_ref;
    for (std::size_t j = 0; j < system.size(); ++j) {
      if (!is_adsorbate(system.tags[j])) continue;
      out.src.push_back(static_cast<int>(i));
      out.dst.push_back(static_cast<int>(j));
      out.weight.push_back(z);
      out.src.push_back(static_cast<int>(j));
      out.dst.push_back(static_cast<int>(i));
      out.weight.push_back(-z);
    }
  }
  return out;
}

ComponentMasks component_masks(const std::vector<int>& tags) {
  ComponentMasks m;
  for (std::size_t i = 0; i < tags.size(); ++i) {
    if (is_adsorbate(tags[i])) {
      m.adsorbate.push_back(static_cast<int>(i));
    } else if (is_catalyst(tags[i])) {
      m.catalyst.push_back(static_cast<int>(i));
    } else {
      throw ValidationError("tag " + std::to_string(tags[i]) + " at node " + std::to_string(i) +
                            " is not one of {0, 1, 2}");
    }
  }
  if (m.adsorbate.empty()) throw ValidationError("no adsorbate (tag 2) atoms");
  if (m.catalyst.empty()) throw ValidationError("no catalyst (tag 0/1) atoms");
  return m;
}

}  // namespace dgnn
