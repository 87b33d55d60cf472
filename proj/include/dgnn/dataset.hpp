#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dgnn/system.hpp"

namespace dgnn {

inline constexpr std::string_view kSplitNames[] = {"train", "val_id", "val_ood_ads", "val_ood_cat",
                                                   "val_ood_both"};
inline constexpr std::string_view kValidationSplits[] = {"val_id", "val_ood_ads", "val_ood_cat",
                                                         "val_ood_both"};

bool is_known_split(std::string_view split);

struct Dataset {
  std::vector<AtomicSystem> systems;

  /// Ids unique, every system valid, every split label known.
  void validate() const;
  std::vector<const AtomicSystem*> split(std::string_view name) const;
  bool operator==(const Dataset&) const = default;
};

/// JSON Lines, one system per line:
/// {"id", "atomic_numbers", "positions", "tags", "cell", "target_energy",
///  "metadata": {"adsorbate_id", "bulk_id", "cell_hash", "split"}}
/// Unknown fields are rejected; errors carry the 1-based line number.
Dataset read_dataset(const std::filesystem::path& path);
Dataset parse_dataset(std::string_view text);
void write_dataset(const Dataset& dataset, const std::filesystem::path& path);
std::string format_dataset(const Dataset& dataset);

/// Hex FNV-1a digest of the cell rounded to 1e-6 Å; "none" without a cell.
std::string cell_hash(const std::optional<Mat3>& cell);

enum class InteractionMode { Separable, Binding };
std::string_view to_string(InteractionMode mode);
InteractionMode parse_interaction_mode(std::string_view name);

struct SyntheticConfig {
  std::uint64_t seed = 0;
  int n_train = 2000;
  int n_val_per_split = 200;
  int adsorbate_vocab_size = 24;
  int catalyst_vocab_size = 24;
  InteractionMode interaction_mode = InteractionMode::Separable;
  double noise_std = 0.05;  // eV

  void validate() const;
};

/// Binding constant k in h(d) = −k/(1 + d), eV·Å.
inline constexpr double kBindingStrength = 2.0;

/// Seeded, deterministic adslab generator. Catalysts are 3-layer slabs on a
/// jittered square lattice (two tag-0 layers under one tag-1 layer);
/// adsorbates are 2–6 H/C/N/O atoms placed above a random surface site with a
/// random orientation. Targets:
///   separable: E = f(adsorbate counts) + g(catalyst counts) + noise
///   binding:   E = f + g − k/(1 + d_min) + noise, d_min the shortest
///              adsorbate–surface distance.
/// The adsorption height depends on the adsorbate/catalyst pair, so in binding
/// mode the pair identity carries part of the interaction term and the exact
/// placement carries the rest.
Dataset generate_synthetic(const SyntheticConfig& config);

/// The generator's published linear maps; exposed so tests can recompute
/// targets independently of the placement code.
struct SyntheticTerms {
  double adsorbate_term = 0.0;  // f
  double catalyst_term = 0.0;   // g
  double binding_term = 0.0;    // h(d_min), 0 in separable mode
  double min_surface_distance = 0.0;
};
SyntheticTerms synthetic_terms(const SyntheticConfig& config, const AtomicSystem& system);

double binding_energy(double min_surface_distance);

struct DuplicateTargetStats {
  std::size_t n_groups = 0;
  std::size_t n_systems = 0;
  std::size_t n_multi_target = 0;
  double fraction_multi_target = 0.0;
};

/// Groups systems by (adsorbate_id, bulk_id, cell_hash). A system counts as
/// multi-target when its group has more than one member and the group's
/// targets are not all within 1e-6 eV of each other.
DuplicateTargetStats duplicate_target_stats(const Dataset& dataset);

}  // namespace dgnn
