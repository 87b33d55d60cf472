#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace dgnn {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<Vec3, 3>;  // rows are lattice vectors

/// Atom tags as used by OC20: 0 = fixed subsurface catalyst, 1 = catalyst
/// surface, 2 = adsorbate.
enum Tag : int { kSubsurface = 0, kSurface = 1, kAdsorbate = 2 };

inline bool is_adsorbate(int tag) { return tag == kAdsorbate; }
inline bool is_catalyst(int tag) { return tag == kSubsurface || tag == kSurface; }

struct SystemMetadata {
  std::optional<std::string> adsorbate_id;
  std::optional<std::string> bulk_id;
  std::optional<std::string> cell_hash;
  std::string split = "train";

  bool operator==(const SystemMetadata&) const = default;
};

/// An adsorbate + catalyst slab.
struct AtomicSystem {
  std::string id;
  std::vector<int> atomic_numbers;
  std::vector<Vec3> positions;  // Å
  std::vector<int> tags;
  std::optional<Mat3> cell;  // Å
  std::optional<double> target_energy;  // eV
  SystemMetadata metadata;

  std::size_t size() const { return atomic_numbers.size(); }

  /// Throws ValidationError when lengths disagree, a tag or atomic number is
  /// out of range, or a position is non-finite. With require_components, also
  /// when the adsorbate or the catalyst is missing.
  void validate(bool require_components = true) const;

  bool operator==(const AtomicSystem&) const = default;
};

}  // namespace dgnn
