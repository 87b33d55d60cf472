// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.
//
//   acceptance [--only N[,M...]] [--cli PATH] [--workdir DIR]
//
// With --cli, criterion 9 drives the `dgnn train` and `dgnn gen` commands;
// otherwise it calls the library entry points directly.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "dgnn/dataset.hpp"
#include "dgnn/graph.hpp"
#include "dgnn/harness.hpp"
#include "dgnn/model.hpp"
#include "model_support.hpp"
#include "test_support.hpp"

using namespace dgnn;
using namespace dgnn::testing;

namespace {

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

/// Random adslab with `n` atoms in total, 2 to 6 of them adsorbate.
AtomicSystem random_system(Rng& rng, int n) {
  const int n_ads = std::min(2 + static_cast<int>(rng.below(5)), n - 4);
  return random_adslab(rng, n_ads, n - n_ads);
}

// ---------------------------------------------------------------------------

Outcome invariance_suite() {
  Rng rng(101);
  double perm = 0.0, planar = 0.0, rigid = 0.0, ads = 0.0;
  for (auto v : kAllVariants) {
    const Model m = random_model(v, 17);
    for (int t = 0; t < 50; ++t) {
      const AtomicSystem s = random_system(rng, 6 + static_cast<int>(rng.below(25)));
      const double e0 = m.predict(s);
      perm = std::max(perm, std::fabs(m.predict(permuted(s, rng)) - e0));

      AtomicSystem moved = s;
      const double angle = rng.uniform(0.0, 2.0 * std::numbers::pi);
      const Vec3 shift{rng.uniform(-20, 20), rng.uniform(-20, 20), 0.0};
      for (auto& p : moved.positions) {
        p = rotate_z(p, angle);
        p = {p[0] + shift[0], p[1] + shift[1], p[2]};
      }
      planar = std::max(planar, std::fabs(m.predict(moved) - e0));

      const Mat3 r = random_rotation(rng);
      if (v == VariantKind::Connected) {
        const Vec3 t3{rng.uniform(-20, 20), rng.uniform(-20, 20), rng.uniform(-20, 20)};
        AtomicSystem any = s;
        for (auto& p : any.positions) p = rigid_transform(r, p, t3);
        rigid = std::max(rigid, std::fabs(m.predict(any) - e0));
      } else {
        const Vec3 t3{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-2, 4)};
        ads = std::max(ads, std::fabs(m.predict(move_adsorbate(s, r, t3)) - e0));
      }
    }
  }
  const bool ok = perm <= 1e-10 && planar <= 1e-9 && rigid <= 1e-9 && ads <= 1e-9;
  return {ok, "max |dE| permutation " + fmt("%.2e", perm) + ", z-rotation/xy-translation " + fmt("%.2e", planar) +
                  ", Connected rigid " + fmt("%.2e", rigid) + ", adsorbate rigid " + fmt("%.2e", ads)};
}

Outcome decomposition() {
  Rng rng(202);
  const Model m = random_model(VariantKind::DisconnectedBaseline, 23);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    const AtomicSystem s = random_system(rng, 6 + static_cast<int>(rng.below(25)));
    const double parts = predict_disconnected_baseline(m, component(s, true)) +
                         predict_disconnected_baseline(m, component(s, false));
    worst = std::max(worst, std::fabs(predict_disconnected_baseline(m, s) - parts));
  }
  return {worst <= 1e-9, "max |E - (E_ads + E_cat)| " + fmt("%.2e", worst) + " eV over 50 systems"};
}

Outcome gradient_oracle() {
  Rng rng(303);
  std::string detail;
  double worst = 0.0;
  for (auto v : kAllVariants) {
    double variant_worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      Model m = random_model(v, 40 + static_cast<std::uint64_t>(t));
      const auto errors = gradient_check(m, {random_system(rng, 6 + static_cast<int>(rng.below(7)))}, 1e-5);
      for (const auto& [_, e] : errors) variant_worst = std::max(variant_worst, e);
    }
    worst = std::max(worst, variant_worst);
    detail += (detail.empty() ? "" : ", ") + std::string(to_string(v)) + " " + fmt("%.2e", variant_worst);
  }
  return {worst < 1e-4, "max rel. err " + detail};
}

Outcome attention_oracle() {
  Rng rng(404);
  double worst = 0.0;
  for (int heads : {1, 2}) {
    const Model m = random_model(VariantKind::Attention, 5, heads);
    for (int na = 1; na <= 4; ++na)
      for (int nc = 1; nc <= 4; ++nc) {
        const Batch b = batch_of(m, bipartite_system(rng, na, nc));
        const Tensor ha = random_tensor(rng, {static_cast<std::size_t>(na), 8}, false);
        const Tensor hc = random_tensor(rng, {static_cast<std::size_t>(nc), 8}, false);
        const Tensor ua = random_tensor(rng, {static_cast<std::size_t>(na), 8}, false);
        const Tensor uc = random_tensor(rng, {static_cast<std::size_t>(nc), 8}, false);
        for (int layer = 0; layer < 2; ++layer) {
          const auto p = m.attention_layer_params(layer);
          const auto got = attention_inter_layer(ha, hc, ua, uc, b, p, m.spec().attention);
          const auto want = dense_attention(ha, hc, ua, uc, b, p, m.spec().attention);
          for (std::size_t i = 0; i < want.ads.size(); ++i)
            for (std::size_t c = 0; c < 8; ++c) worst = std::max(worst, std::fabs(got.adsorbate.at(i, c) - want.ads[i][c]));
          for (std::size_t i = 0; i < want.cat.size(); ++i)
            for (std::size_t c = 0; c < 8; ++c) worst = std::max(worst, std::fabs(got.catalyst.at(i, c) - want.cat[i][c]));
        }
      }
  }
  std::size_t violations = 0, edges = 0;
  for (int t = 0; t < 50; ++t) {
    const AtomicSystem s = random_system(rng, 6 + static_cast<int>(rng.below(25)));
    for (bool centered : {false, true}) {
      const CrossEdgeSet c = build_cross_attention_edges(s, centered);
      edges += c.size();
      if (c.size() % 2 != 0) ++violations;
      for (std::size_t e = 0; e + 1 < c.size(); e += 2) {
        const bool cat_to_ads = is_catalyst(s.tags[static_cast<std::size_t>(c.src[e])]) &&
                                is_adsorbate(s.tags[static_cast<std::size_t>(c.dst[e])]);
        if (!cat_to_ads || c.src[e] != c.dst[e + 1] || c.dst[e] != c.src[e + 1] || c.weight[e + 1] != -c.weight[e])
          ++violations;
      }
    }
  }
  const bool ok = worst <= 1e-10 && violations == 0;
  return {ok, "max |dense - layer| " + fmt("%.2e", worst) + " on 1..4 x 1..4 (1 and 2 heads); " +
                  std::to_string(violations) + " antisymmetry violations in " + std::to_string(edges) + " edges"};
}

// ---------------------------------------------------------------------------

double train_val_mae(VariantKind v, const Dataset& data) {
  const auto t0 = std::chrono::steady_clock::now();
  const TrainResult r = train(TrainConfig::defaults(v), data);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("    %-22s val_id MAE %.4f eV (best epoch %d, %.0f s)\n", std::string(to_string(v)).c_str(),
              *r.checkpoint.val_id_mae, r.checkpoint.best_epoch, secs);
  std::fflush(stdout);
  return *r.checkpoint.val_id_mae;
}

Outcome separable_parity() {
  SyntheticConfig c;
  c.interaction_mode = InteractionMode::Separable;
  const Dataset data = generate_synthetic(c);
  const double connected = train_val_mae(VariantKind::Connected, data);
  bool ok = true;
  std::string detail = "Connected " + fmt("%.4f", connected);
  for (auto v : {VariantKind::DisconnectedBaseline, VariantKind::IndependentPooling, VariantKind::IndependentBackbones,
                 VariantKind::Attention}) {
    const double mae = train_val_mae(v, data);
    ok = ok && mae <= 2.0 * connected;
    detail += ", " + std::string(to_string(v)) + " " + fmt("%.4f", mae) + " (" + fmt("%.2f", mae / connected) + "x)";
  }
  return {ok, "val_id MAE eV: " + detail + "; bound 2x"};
}

Outcome binding_ordering() {
  SyntheticConfig c;
  c.interaction_mode = InteractionMode::Binding;
  const Dataset data = generate_synthetic(c);
  const double connected = train_val_mae(VariantKind::Connected, data);
  const double backbones = train_val_mae(VariantKind::IndependentBackbones, data);
  const double baseline = train_val_mae(VariantKind::DisconnectedBaseline, data);
  const double pooling = train_val_mae(VariantKind::IndependentPooling, data);
  const double margin = (baseline - connected) / baseline;
  const bool ok = connected < backbones && backbones < baseline && margin >= 0.05;
  std::printf("    (IndependentPooling %s DisconnectedBaseline: %.4f vs %.4f)\n", pooling < baseline ? "<" : ">=",
              pooling, baseline);
  return {ok, "val_id MAE eV: Connected " + fmt("%.4f", connected) + " < IndependentBackbones " +
                  fmt("%.4f", backbones) + " < DisconnectedBaseline " + fmt("%.4f", baseline) + ", margin " +
                  fmt("%.1f", 100.0 * margin) + "% (need >= 5%)"};
}

Outcome throughput_direction() {
  SyntheticConfig c;
  c.n_train = 1;
  c.n_val_per_split = 1;
  const Dataset d = generate_synthetic(c);
  const std::vector<AtomicSystem> same(500, d.systems[0]);
  const BackboneConfig b = desk_backbone();
  const Model connected(ModelSpec::defaults(VariantKind::Connected, b), 0);
  const Model baseline(ModelSpec::defaults(VariantKind::DisconnectedBaseline, b), 0);
  const ThroughputStats sc = benchmark_throughput(connected, same, 5);
  const ThroughputStats sb = benchmark_throughput(baseline, same, 5);
  char buf[256];
  std::snprintf(buf, sizeof(buf),
                "500 x %zu-atom system, batch %zu, 5 reps: DisconnectedBaseline %.0f +- %.0f vs Connected %.0f +- %.0f "
                "samples/s",
                d.systems[0].size(), sc.batch_size, sb.mean, sb.std, sc.mean, sc.std);
  return {sb.mean >= sc.mean, buf};
}

double pairwise_fraction(const Dataset& d) {
  const auto same = [](const AtomicSystem& a, const AtomicSystem& b) {
    return a.metadata.adsorbate_id == b.metadata.adsorbate_id && a.metadata.bulk_id == b.metadata.bulk_id &&
           a.metadata.cell_hash == b.metadata.cell_hash;
  };
  std::size_t flagged = 0;
  for (const auto& a : d.systems) {
    double lo = *a.target_energy, hi = lo;
    for (const auto& b : d.systems)
      if (same(a, b)) {
        lo = std::min(lo, *b.target_energy);
        hi = std::max(hi, *b.target_energy);
      }
    flagged += hi - lo > 1e-6 ? 1 : 0;
  }
  return d.systems.empty() ? 0.0 : static_cast<double>(flagged) / static_cast<double>(d.systems.size());
}

Outcome duplicate_statistic() {
  const auto sys = [](int i, std::string ads, std::string bulk, std::string hash, double target) {
    AtomicSystem s;
    s.id = "s" + std::to_string(i);
    s.atomic_numbers = {8, 29};
    s.positions = {{0, 0, 2}, {0, 0, 0}};
    s.tags = {kAdsorbate, kSurface};
    s.target_energy = target;
    s.metadata.adsorbate_id = std::move(ads);
    s.metadata.bulk_id = std::move(bulk);
    s.metadata.cell_hash = std::move(hash);
    return s;
  };
  const Dataset unique{{sys(0, "a", "b", "h", 1.0), sys(1, "a", "c", "h", 2.0), sys(2, "x", "b", "h", 3.0)}};
  const Dataset third{{sys(0, "a", "b", "h", 1.0), sys(1, "a", "b", "h", 1.5), sys(2, "x", "b", "h", 1.0)}};
  bool ok = duplicate_target_stats(unique).fraction_multi_target == 0.0 &&
            duplicate_target_stats(third).fraction_multi_target == 2.0 / 3.0;
  Rng rng(808);
  std::size_t mismatches = 0, datasets = 0;
  for (std::size_t n : {0u, 1u, 3u, 10u, 100u, 500u, 1000u}) {
    for (int rep = 0; rep < 3; ++rep) {
      Dataset d;
      for (std::size_t i = 0; i < n; ++i) {
        const double target = static_cast<double>(rng.below(3)) + (rng.below(4) == 0 ? 5e-7 : 0.0);
        d.systems.push_back(sys(static_cast<int>(i), "a" + std::to_string(rng.below(8)),
                                "b" + std::to_string(rng.below(6)), rng.below(2) ? "none" : "h1", target));
      }
      mismatches += duplicate_target_stats(d).fraction_multi_target == pairwise_fraction(d) ? 0 : 1;
      ++datasets;
    }
  }
  ok = ok && mismatches == 0;
  return {ok, "fixtures 0.0 and 2/3 exact; " + std::to_string(mismatches) + " mismatches vs pairwise oracle on " +
                  std::to_string(datasets) + " datasets of 0..1000 systems"};
}

Outcome determinism(const std::string& cli, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const auto data = dir / "data.jsonl";
  const auto data2 = dir / "data2.jsonl";
  const auto run = [](const std::string& cmd) {
    if (std::system(cmd.c_str()) != 0) throw Error("command failed: " + cmd);
  };

  SyntheticConfig c;
  c.seed = 9;
  c.n_train = 120;
  c.n_val_per_split = 20;
  c.interaction_mode = InteractionMode::Binding;
  if (cli.empty()) {
    write_dataset(generate_synthetic(c), data);
    write_dataset(generate_synthetic(c), data2);
  } else {
    for (const auto& out : {data, data2})
      run(cli + " gen --seed 9 --mode binding --n-train 120 --n-val 20 --out " + out.string() + " > /dev/null");
  }
  const bool gen_same = !slurp(data).empty() && slurp(data) == slurp(data2);

  std::string ckpt[2];
  for (int r = 0; r < 2; ++r) {
    TrainConfig cfg = TrainConfig::defaults(VariantKind::Attention);
    cfg.epochs = 2;
    cfg.seed = 5;
    cfg.dataset_path = data.string();
    cfg.checkpoint_path = (dir / ("ckpt" + std::to_string(r) + ".json")).string();
    if (cli.empty()) {
      train(cfg);
    } else {
      const auto config_path = dir / ("config" + std::to_string(r) + ".json");
      std::ofstream(config_path) << train_config_to_json(cfg).dump(2) << "\n";
      run(cli + " train --quiet --config " + config_path.string() + " > /dev/null");
    }
    ckpt[r] = slurp(cfg.checkpoint_path);
  }
  const bool train_same = !ckpt[0].empty() && ckpt[0] == ckpt[1];
  return {gen_same && train_same, std::string(cli.empty() ? "library" : "CLI") + ": gen outputs " +
                                      (gen_same ? "identical" : "DIFFER") + ", Attention checkpoints (" +
                                      std::to_string(ckpt[0].size()) + " bytes) " +
                                      (train_same ? "identical" : "DIFFER")};
}

}  // namespace

int main(int argc, char** argv) {
#if defined(__GLIBC__)
  mallopt(M_MMAP_THRESHOLD, 256 * 1024 * 1024);
#endif
  std::set<int> only;
  std::string cli;
  std::filesystem::path workdir = std::filesystem::temp_directory_path() / "dgnn_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      std::stringstream list(argv[++i]);
      for (std::string item; std::getline(list, item, ',');) only.insert(std::stoi(item));
    } else if (a == "--cli" && i + 1 < argc) {
      cli = argv[++i];
    } else if (a == "--workdir" && i + 1 < argc) {
      workdir = argv[++i];
    } else {
      std::fprintf(stderr, "usage: %s [--only N[,M...]] [--cli PATH] [--workdir DIR]\n", argv[0]);
      return 2;
    }
  }

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"invariance suite", invariance_suite},
      {"disconnection decomposition", decomposition},
      {"gradient oracle", gradient_oracle},
      {"attention-layer oracle", attention_oracle},
      {"separable-regime parity", separable_parity},
      {"binding-regime ordering", binding_ordering},
      {"throughput direction", throughput_direction},
      {"duplicate-target statistic", duplicate_statistic},
      {"determinism", [&] { return determinism(cli, workdir); }},
  };

  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(n)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %d: %s  %s (%.1f s)  %s\n", n, o.passed ? "PASS" : "FAIL", criteria[i].first.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
    failed += o.passed ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
