#include "dgnn/dataset.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <tuple>

#include "dgnn/error.hpp"
#include "dgnn/rng.hpp"
#include "json.hpp"

namespace dgnn {

using ojson = nlohmann::ordered_json;

bool is_known_split(std::string_view split) {
  return std::find(std::begin(kSplitNames), std::end(kSplitNames), split) != std::end(kSplitNames);
}

void Dataset::validate() const {
  std::set<std::string> ids;
  for (const auto& s : systems) {
    s.validate();
    if (!ids.insert(s.id).second) throw ValidationError("duplicate system id '" + s.id + "'");
    if (!is_known_split(s.metadata.split)) {
      throw ValidationError("system '" + s.id + "': unknown split label '" + s.metadata.split + "'");
    }
  }
}

std::vector<const AtomicSystem*> Dataset::split(std::string_view name) const {
  std::vector<const AtomicSystem*> out;
  for (const auto& s : systems)
    if (s.metadata.split == name) out.push_back(&s);
  return out;
}

// ---------------------------------------------------------------------------
// JSON Lines

namespace {

ojson to_json(const AtomicSystem& s) {
  ojson j;
  j["id"] = s.id;
  j["atomic_numbers"] = s.atomic_numbers;
  ojson pos = ojson::array();
  for (const auto& p : s.positions) pos.push_back({p[0], p[1], p[2]});
  j["positions"] = std::move(pos);
  j["tags"] = s.tags;
  if (s.cell) {
    ojson cell = ojson::array();
    for (const auto& row : *s.cell) cell.push_back({row[0], row[1], row[2]});
    j["cell"] = std::move(cell);
  } else {
    j["cell"] = nullptr;
  }
  j["target_energy"] = s.target_energy ? ojson(*s.target_energy) : ojson(nullptr);
  ojson meta;
  const auto opt = [](const std::optional<std::string>& v) { return v ? ojson(*v) : ojson(nullptr); };
  meta["adsorbate_id"] = opt(s.metadata.adsorbate_id);
  meta["bulk_id"] = opt(s.metadata.bulk_id);
  meta["cell_hash"] = opt(s.metadata.cell_hash);
  meta["split"] = s.metadata.split;
  j["metadata"] = std::move(meta);
  return j;
}

struct LineError {
  std::size_t line;
  [[noreturn]] void fail(const std::string& why) const {
    throw ValidationError("dataset line " + std::to_string(line) + ": " + why);
  }
};

Vec3 parse_vec3(const ojson& v, const LineError& err, const char* field) {
  if (!v.is_array() || v.size() != 3) err.fail(std::string("'") + field + "' entries must be [x, y, z]");
  Vec3 out{};
  for (std::size_t k = 0; k < 3; ++k) {
    if (!v[k].is_number()) err.fail(std::string("'") + field + "' entries must be numbers");
    out[k] = v[k].get<double>();
  }
  return out;
}

std::vector<int> parse_ints(const ojson& v, const LineError& err, const char* field) {
  if (!v.is_array()) err.fail(std::string("'") + field + "' must be an array");
  std::vector<int> out;
  for (const auto& x : v) {
    if (!x.is_number_integer()) err.fail(std::string("'") + field + "' must hold integers");
    out.push_back(x.get<int>());
  }
  return out;
}

AtomicSystem from_json(const ojson& j, const LineError& err) {
  if (!j.is_object()) err.fail("expected a JSON object");
  static const std::set<std::string> known{"id", "atomic_numbers", "positions", "tags",
                                           "cell", "target_energy", "metadata"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) err.fail("unknown field '" + key + "'");
  for (const char* required : {"id", "atomic_numbers", "positions", "tags", "metadata"})
    if (!j.contains(required)) err.fail(std::string("missing field '") + required + "'");

  AtomicSystem s;
  if (!j["id"].is_string()) err.fail("'id' must be a string");
  s.id = j["id"].get<std::string>();
  s.atomic_numbers = parse_ints(j["atomic_numbers"], err, "atomic_numbers");
  s.tags = parse_ints(j["tags"], err, "tags");
  if (!j["positions"].is_array()) err.fail("'positions' must be an array");
  for (const auto& p : j["positions"]) s.positions.push_back(parse_vec3(p, err, "positions"));
  if (j.contains("cell") && !j["cell"].is_null()) {
    const auto& c = j["cell"];
    if (!c.is_array() || c.size() != 3) err.fail("'cell' must be a 3x3 array or null");
    Mat3 m{};
    for (std::size_t r = 0; r < 3; ++r) m[r] = parse_vec3(c[r], err, "cell");
    s.cell = m;
  }
  if (j.contains("target_energy") && !j["target_energy"].is_null()) {
    if (!j["target_energy"].is_number()) err.fail("'target_energy' must be a number or null");
    s.target_energy = j["target_energy"].get<double>();
  }
  const auto& meta = j["metadata"];
  if (!meta.is_object()) err.fail("'metadata' must be an object");
  static const std::set<std::string> meta_known{"adsorbate_id", "bulk_id", "cell_hash", "split"};
  for (const auto& [key, _] : meta.items())
    if (!meta_known.count(key)) err.fail("unknown metadata field '" + key + "'");
  const auto opt = [&](const char* key) -> std::optional<std::string> {
    if (!meta.contains(key) || meta[key].is_null()) return std::nullopt;
    if (!meta[key].is_string()) err.fail(std::string("metadata '") + key + "' must be a string or null");
    return meta[key].get<std::string>();
  };
  s.metadata.adsorbate_id = opt("adsorbate_id");
  s.metadata.bulk_id = opt("bulk_id");
  s.metadata.cell_hash = opt("cell_hash");
  if (!meta.contains("split") || !meta["split"].is_string()) err.fail("metadata 'split' must be a string");
  s.metadata.split = meta["split"].get<std::string>();
  if (!is_known_split(s.metadata.split)) err.fail("unknown split label '" + s.metadata.split + "'");
  try {
    s.validate();
  } catch (const ValidationError& e) {
    err.fail(e.what());
  }
  return s;
}

}  // namespace

Dataset parse_dataset(std::string_view text) {
  Dataset d;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
    const LineError err{line_no};
    ojson j;
    try {
      j = ojson::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      err.fail(std::string("malformed JSON: ") + e.what());
    }
    AtomicSystem s = from_json(j, err);
    if (!ids.insert(s.id).second) err.fail("duplicate id '" + s.id + "'");
    d.systems.push_back(std::move(s));
  }
  return d;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open dataset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str());
}

std::string format_dataset(const Dataset& dataset) {
  std::string out;
  for (const auto& s : dataset.systems) {
    out += to_json(s).dump();
    out += '\n';
  }
  return out;
}

void write_dataset(const Dataset& dataset, const std::filesystem::path& path) {
  dataset.validate();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write dataset " + path.string());
  out << format_dataset(dataset);
  if (!out) throw Error("I/O failure writing " + path.string());
}

std::string cell_hash(const std::optional<Mat3>& cell) {
  if (!cell) return "none";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& row : *cell)
    for (double x : row) {
      auto q = static_cast<std::uint64_t>(static_cast<std::int64_t>(std::llround(x * 1e6)));
      for (int b = 0; b < 8; ++b) {
        h ^= (q >> (8 * b)) & 0xffU;
        h *= 0x100000001b3ULL;
      }
    }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------
// Synthetic generator

std::string_view to_string(InteractionMode mode) {
  return mode == InteractionMode::Separable ? "separable" : "binding";
}

InteractionMode parse_interaction_mode(std::string_view name) {
  if (name == "separable") return InteractionMode::Separable;
  if (name == "binding") return InteractionMode::Binding;
  throw ValidationError("unknown interaction mode '" + std::string(name) + "' (separable|binding)");
}

void SyntheticConfig::validate() const {
  if (n_train < 1 || n_val_per_split < 1 || adsorbate_vocab_size < 1 || catalyst_vocab_size < 1) {
    throw ValidationError("synthetic sizes must be >= 1");
  }
  if (!(noise_std >= 0.0)) throw ValidationError("noise_std must be >= 0");
}

double binding_energy(double d) { return -kBindingStrength / (1.0 + d); }

namespace {

constexpr std::array<int, 4> kAdsorbateElements{1, 6, 7, 8};
constexpr std::array<int, 25> kMetals{22, 23, 24, 25, 26, 27, 28, 29, 30, 40, 41, 42, 44,
                                      45, 46, 47, 48, 72, 73, 74, 75, 76, 77, 78, 79};
constexpr int kSlabSide = 3;
constexpr int kSlabLayers = 3;
constexpr double kSlabBase = 10.0;        // Å, z of the bottom layer
constexpr double kLatticeJitter = 0.05;   // Å
constexpr double kHeightJitter = 0.4;     // Å

// Coefficients shared by generation and synthetic_terms.
struct Coefficients {
  std::array<double, 101> adsorbate{};  // f, per element count
  std::array<double, 101> catalyst{};   // g, per element count
  std::array<std::array<double, 2>, 101> affinity{};
};

// Coefficients live on a 2^-16 grid so every f and g sum is exact in double.
double dyadic(double x) { return std::round(x * 65536.0) / 65536.0; }

Coefficients coefficients(std::uint64_t seed) {
  Rng rng = Rng(seed).fork(1);
  Coefficients c;
  for (int z : kAdsorbateElements) c.adsorbate[static_cast<std::size_t>(z)] = dyadic(rng.uniform(-1.0, 1.0));
  for (int z : kMetals) c.catalyst[static_cast<std::size_t>(z)] = dyadic(rng.uniform(-0.15, 0.15));
  for (int z : kAdsorbateElements) c.affinity[static_cast<std::size_t>(z)] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  for (int z : kMetals) c.affinity[static_cast<std::size_t>(z)] = {rng.uniform(-1, 1), rng.uniform(-1, 1)};
  return c;
}

struct AdsorbateTemplate {
  std::vector<int> elements;
  std::vector<Vec3> positions;  // centered
};

struct CatalystTemplate {
  std::vector<int> elements;  // distinct metals
  double lattice = 2.7;
  std::array<int, kSlabSide * kSlabSide> pattern{};  // index into elements per site
};

AdsorbateTemplate make_adsorbate(Rng& rng) {
  AdsorbateTemplate t;
  const int n = rng.uniform_int(2, 6);
  t.elements.push_back(kAdsorbateElements[1 + rng.below(3)]);
  for (int i = 1; i < n; ++i) t.elements.push_back(kAdsorbateElements[rng.below(4)]);
  t.positions.push_back({0, 0, 0});
  while (t.positions.size() < t.elements.size()) {
    const Vec3 anchor = t.positions[rng.below(t.positions.size())];
    const double bond = rng.uniform(1.0, 1.5);
    const double cz = rng.uniform(-1.0, 1.0), phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double r = std::sqrt(1.0 - cz * cz);
    const Vec3 p{anchor[0] + bond * r * std::cos(phi), anchor[1] + bond * r * std::sin(phi), anchor[2] + bond * cz};
    bool clash = false;
    for (const auto& q : t.positions) {
      const double d = std::hypot(p[0] - q[0], p[1] - q[1], p[2] - q[2]);
      if (d < 0.95) clash = true;
    }
    if (!clash) t.positions.push_back(p);
  }
  Vec3 c{};
  for (const auto& p : t.positions)
    for (int k = 0; k < 3; ++k) c[k] += p[k] / static_cast<double>(t.positions.size());
  for (auto& p : t.positions)
    for (int k = 0; k < 3; ++k) p[k] -= c[k];
  return t;
}

CatalystTemplate make_catalyst(Rng& rng) {
  CatalystTemplate t;
  const double u = rng.uniform();
  const int n_el = u < 0.05 ? 1 : (u < 0.70 ? 2 : 3);
  std::vector<int> pool(kMetals.begin(), kMetals.end());
  rng.shuffle(pool);
  t.elements.assign(pool.begin(), pool.begin() + n_el);
  t.lattice = rng.uniform(2.4, 3.0);
  for (auto& p : t.pattern) p = static_cast<int>(rng.below(static_cast<std::uint64_t>(n_el)));
  return t;
}

// Uniform random rotation (Shoemake's quaternion method).
std::array<Vec3, 3> random_rotation(Rng& rng) {
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double a = std::sqrt(1 - u1), b = std::sqrt(u1);
  const double qx = a * std::sin(2 * std::numbers::pi * u2), qy = a * std::cos(2 * std::numbers::pi * u2);
  const double qz = b * std::sin(2 * std::numbers::pi * u3), qw = b * std::cos(2 * std::numbers::pi * u3);
  return {{{1 - 2 * (qy * qy + qz * qz), 2 * (qx * qy - qz * qw), 2 * (qx * qz + qy * qw)},
           {2 * (qx * qy + qz * qw), 1 - 2 * (qx * qx + qz * qz), 2 * (qy * qz - qx * qw)},
           {2 * (qx * qz - qy * qw), 2 * (qy * qz + qx * qw), 1 - 2 * (qx * qx + qy * qy)}}};
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

// Mean adsorption height of the pair above the surface, Å.
double pair_height(const Coefficients& c, const std::vector<int>& ads_elements,
                   const std::vector<int>& surface_elements) {
  std::array<double, 2> fa{}, fc{};
  for (int z : ads_elements)
    for (int k = 0; k < 2; ++k) fa[k] += c.affinity[static_cast<std::size_t>(z)][k] / static_cast<double>(ads_elements.size());
  for (int z : surface_elements)
    for (int k = 0; k < 2; ++k) fc[k] += c.affinity[static_cast<std::size_t>(z)][k] / static_cast<double>(surface_elements.size());
  return 0.8 + 2.5 * sigmoid(20.0 * (fa[0] * fc[0] + fa[1] * fc[1]));
}

AtomicSystem build_sample(Rng& rng, const AdsorbateTemplate& ads, const CatalystTemplate& cat,
                          const Coefficients& coef) {
  AtomicSystem s;
  std::vector<int> surface;
  double top_z = 0.0;
  double x_min = 1e300, x_max = -1e300, y_min = 1e300, y_max = -1e300;
  for (int layer = 0; layer < kSlabLayers; ++layer) {
    const double shift = (layer % 2) * 0.5 * cat.lattice;
    const double z = kSlabBase + layer * 0.8 * cat.lattice;
    const int tag = layer == kSlabLayers - 1 ? kSurface : kSubsurface;
    for (int ix = 0; ix < kSlabSide; ++ix)
      for (int iy = 0; iy < kSlabSide; ++iy) {
        const int el = cat.elements[static_cast<std::size_t>(cat.pattern[static_cast<std::size_t>(ix * kSlabSide + iy)])];
        const Vec3 p{ix * cat.lattice + shift + rng.uniform(-kLatticeJitter, kLatticeJitter),
                     iy * cat.lattice + shift + rng.uniform(-kLatticeJitter, kLatticeJitter),
                     z + rng.uniform(-kLatticeJitter, kLatticeJitter)};
        s.atomic_numbers.push_back(el);
        s.positions.push_back(p);
        s.tags.push_back(tag);
        if (tag == kSurface) {
          surface.push_back(el);
          top_z += p[2] / (kSlabSide * kSlabSide);
          x_min = std::min(x_min, p[0]);
          x_max = std::max(x_max, p[0]);
          y_min = std::min(y_min, p[1]);
          y_max = std::max(y_max, p[1]);
        }
      }
  }
  const auto rot = random_rotation(rng);
  std::vector<Vec3> placed;
  double lowest = 1e300;
  for (const auto& p : ads.positions) {
    Vec3 q{};
    for (int r = 0; r < 3; ++r) q[r] = rot[r][0] * p[0] + rot[r][1] * p[1] + rot[r][2] * p[2];
    lowest = std::min(lowest, q[2]);
    placed.push_back(q);
  }
  const double site_x = rng.uniform(x_min + 0.25 * (x_max - x_min), x_max - 0.25 * (x_max - x_min));
  const double site_y = rng.uniform(y_min + 0.25 * (y_max - y_min), y_max - 0.25 * (y_max - y_min));
  const double height = pair_height(coef, ads.elements, surface) + rng.uniform(-kHeightJitter, kHeightJitter);
  for (std::size_t i = 0; i < placed.size(); ++i) {
    s.atomic_numbers.push_back(ads.elements[i]);
    s.positions.push_back({placed[i][0] + site_x, placed[i][1] + site_y, placed[i][2] - lowest + top_z + height});
    s.tags.push_back(kAdsorbate);
  }
  return s;
}

}  // namespace

SyntheticTerms synthetic_terms(const SyntheticConfig& config, const AtomicSystem& system) {
  const Coefficients coef = coefficients(config.seed);
  SyntheticTerms t;
  for (std::size_t i = 0; i < system.size(); ++i) {
    const auto z = static_cast<std::size_t>(system.atomic_numbers[i]);
    if (is_adsorbate(system.tags[i])) t.adsorbate_term += coef.adsorbate[z];
    else t.catalyst_term += coef.catalyst[z];
  }
  double best = 1e300;
  for (std::size_t i = 0; i < system.size(); ++i) {
    if (!is_adsorbate(system.tags[i])) continue;
    for (std::size_t j = 0; j < system.size(); ++j) {
      if (system.tags[j] != kSurface) continue;
      const auto& a = system.positions[i];
      const auto& b = system.positions[j];
      best = std::min(best, std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) +
                                      (a[2] - b[2]) * (a[2] - b[2])));
    }
  }
  t.min_surface_distance = best;
  if (config.interaction_mode == InteractionMode::Binding) t.binding_term = binding_energy(best);
  return t;
}

Dataset generate_synthetic(const SyntheticConfig& config) {
  config.validate();
  const Rng root(config.seed);
  const Coefficients coef = coefficients(config.seed);

  const int ads_id = config.adsorbate_vocab_size, cat_id = config.catalyst_vocab_size;
  const int ads_ood = std::max(2, ads_id / 4), cat_ood = std::max(2, cat_id / 4);
  std::vector<AdsorbateTemplate> adsorbates;
  std::vector<CatalystTemplate> catalysts;
  Rng vocab_rng = root.fork(2);
  for (int i = 0; i < ads_id + ads_ood; ++i) adsorbates.push_back(make_adsorbate(vocab_rng));
  for (int i = 0; i < cat_id + cat_ood; ++i) catalysts.push_back(make_catalyst(vocab_rng));

  Dataset d;
  for (std::size_t split = 0; split < std::size(kSplitNames); ++split) {
    const std::string name(kSplitNames[split]);
    const bool ood_ads = name == "val_ood_ads" || name == "val_ood_both";
    const bool ood_cat = name == "val_ood_cat" || name == "val_ood_both";
    const int count = split == 0 ? config.n_train : config.n_val_per_split;
    Rng rng = root.fork(100 + split);
    for (int i = 0; i < count; ++i) {
      const int a = ood_ads ? ads_id + static_cast<int>(rng.below(static_cast<std::uint64_t>(ads_ood)))
                            : static_cast<int>(rng.below(static_cast<std::uint64_t>(ads_id)));
      const int c = ood_cat ? cat_id + static_cast<int>(rng.below(static_cast<std::uint64_t>(cat_ood)))
                            : static_cast<int>(rng.below(static_cast<std::uint64_t>(cat_id)));
      AtomicSystem s = build_sample(rng, adsorbates[static_cast<std::size_t>(a)], catalysts[static_cast<std::size_t>(c)], coef);
      char id[64];
      std::snprintf(id, sizeof(id), "%s_%06d", name.c_str(), i);
      s.id = id;
      s.metadata.adsorbate_id = "ads" + std::to_string(a);
      s.metadata.bulk_id = "bulk" + std::to_string(c);
      s.metadata.cell_hash = cell_hash(s.cell);
      s.metadata.split = name;
      const SyntheticTerms t = synthetic_terms(config, s);
      double e = t.adsorbate_term + t.catalyst_term;
      if (config.interaction_mode == InteractionMode::Binding) e += t.binding_term;
      s.target_energy = e + config.noise_std * rng.normal();
      d.systems.push_back(std::move(s));
    }
  }
  return d;
}

// ---------------------------------------------------------------------------

DuplicateTargetStats duplicate_target_stats(const Dataset& dataset) {
  using Key = std::tuple<std::string, std::string, std::string>;
  std::map<Key, std::vector<double>> groups;
  for (const auto& s : dataset.systems) {
    const auto& m = s.metadata;
    if (!m.adsorbate_id || !m.bulk_id || !m.cell_hash) {
      throw ValidationError("system '" + s.id + "': duplicate analysis needs adsorbate_id, bulk_id and cell_hash");
    }
    if (!s.target_energy) throw ValidationError("system '" + s.id + "': duplicate analysis needs a target energy");
    groups[{*m.adsorbate_id, *m.bulk_id, *m.cell_hash}].push_back(*s.target_energy);
  }
  DuplicateTargetStats st;
  st.n_groups = groups.size();
  st.n_systems = dataset.systems.size();
  for (const auto& [_, targets] : groups) {
    if (targets.size() < 2) continue;
    const auto [lo, hi] = std::minmax_element(targets.begin(), targets.end());
    if (*hi - *lo > 1e-6) st.n_multi_target += targets.size();
  }
  st.fraction_multi_target = st.n_systems == 0 ? 0.0 : static_cast<double>(st.n_multi_target) / static_cast<double>(st.n_systems);
  return st;
}

}  // namespace dgnn
