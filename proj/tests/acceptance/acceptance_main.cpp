// Acceptance suite: runs every criterion at its stated tolerance and prints
// one PASS/FAIL line each. Exit code is the number of failed criteria.
//
//  1. ablation ordering on the synthetic benchmark (3-seed median)
//  2. heterogeneous source/target architectures improve over source
//  3. loss oracles (cross-entropy, KL)
//  4. gradient checks vs central finite differences
//  5. metric oracles (dice exhaustive, ASD brute force, symmetry)
//  6. black-box boundary (query accounting, stub run, remote agreement)
//  7. end-to-end determinism of run-all
//  8. softmax validity across all stages

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "boxdistill/blackbox.hpp"
#include "boxdistill/checkpoint.hpp"
#include "boxdistill/config.hpp"
#include "boxdistill/experiment.hpp"
#include "boxdistill/losses.hpp"
#include "boxdistill/metrics.hpp"
#include "boxdistill/pipeline.hpp"
#include "boxdistill/rng.hpp"
#include "boxdistill/service.hpp"
#include "boxdistill/synthetic.hpp"
#include "bench_config.hpp"

using namespace boxdistill;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, const std::string& name, bool pass,
            const std::string& detail, double seconds) {
  std::printf("[%s] criterion %d: %s — %s (%.1fs)\n", pass ? "PASS" : "FAIL",
              criterion, name.c_str(), detail.c_str(), seconds);
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

template <typename Fn>
void run_criterion(int criterion, const std::string& name, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  bool pass = false;
  std::string detail;
  try {
    std::tie(pass, detail) = fn();
  } catch (const std::exception& e) {
    pass = false;
    detail = std::string("exception: ") + e.what();
  }
  const double dt =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  report(criterion, name, pass, detail, dt);
}

// ---------------------------------------------------------------------------
// Benchmark runs shared by criteria 1, 2 and 8.

struct SeedRun {
  double dsc_source = 0, dsc_stage1 = 0, dsc_stage2_noaug = 0,
         dsc_stage2_aug = 0;
};

struct BenchState {
  DomainSplits source, target;
  std::vector<SeedRun> runs;
  // retained models from the first seed for criteria 2 and 8
  std::optional<SegmentationModel> source_model, stage1_model, stage2_model;
  std::optional<PseudoLabelCache> cache;
};

ModelSpec bench_model_spec(const std::string& arch, std::uint64_t seed) {
  ModelSpec s;
  s.architecture = arch;
  s.out_classes = 3;
  s.init_seed = seed;
  return s;
}

OptimizerConfig bench_opt(int epochs, std::uint64_t seed) {
  OptimizerConfig o;
  o.learning_rate = acceptance::kBench.learning_rate;
  o.batch_size = acceptance::kBench.batch_size;
  o.epochs = epochs;
  o.seed = seed;
  return o;
}

BenchState run_benchmark() {
  const auto& b = acceptance::kBench;
  BenchState state;

  SyntheticShiftSpec spec;
  spec.seed = b.data_seed;
  spec.intensity_offset = b.intensity_offset;
  spec.blur_sigma = b.blur_sigma;
  spec.contrast_scale = b.contrast_scale;
  spec.noise_std = b.noise_std;
  std::tie(state.source, state.target) =
      generate_synthetic_pair(spec, b.n_train, b.n_test, b.image_size);

  const AugmentationPolicy weak = AugmentationPolicy::weak_default();
  const AugmentationPolicy strong = AugmentationPolicy::strong_default();

  for (int i = 0; i < 3; ++i) {
    const std::uint64_t seed = b.seeds[i];

    std::printf("  [bench seed %llu] source...\n",
                static_cast<unsigned long long>(seed));
    std::fflush(stdout);
    TrainOutput src = train_source(
        state.source.train, bench_model_spec("small-encdec", seed * 100 + 11),
        bench_opt(b.source_epochs, seed * 100 + 21));
    const MetricReport m_src = evaluate(src.model, state.target.test);

    const auto box = wrap_as_blackbox(src.model);
    PseudoLabelCache cache = precompute_pseudo_labels(*box, state.target.train);

    std::printf("  [bench seed %llu] stage 1...\n",
                static_cast<unsigned long long>(seed));
    std::fflush(stdout);
    TrainOutput t1 = train_stage1(
        cache, state.target.train, bench_model_spec("small-encdec", seed * 100 + 12),
        bench_opt(b.stage1_epochs, seed * 100 + 22));
    const MetricReport m_t1 = evaluate(t1.model, state.target.test);

    std::printf("  [bench seed %llu] stage 2 (no aug)...\n",
                static_cast<unsigned long long>(seed));
    std::fflush(stdout);
    TrainOutput t2n = train_stage2(
        t1.model, state.target.train, bench_model_spec("small-encdec", seed * 100 + 13),
        weak, strong, bench_opt(b.stage2_epochs, seed * 100 + 23), false);
    const MetricReport m_t2n = evaluate(t2n.model, state.target.test);

    std::printf("  [bench seed %llu] stage 2 (aug)...\n",
                static_cast<unsigned long long>(seed));
    std::fflush(stdout);
    TrainOutput t2a = train_stage2(
        t1.model, state.target.train, bench_model_spec("small-encdec", seed * 100 + 13),
        weak, strong, bench_opt(b.stage2_epochs, seed * 100 + 23), true);
    const MetricReport m_t2a = evaluate(t2a.model, state.target.test);

    SeedRun run;
    run.dsc_source = m_src.mean_dsc;
    run.dsc_stage1 = m_t1.mean_dsc;
    run.dsc_stage2_noaug = m_t2n.mean_dsc;
    run.dsc_stage2_aug = m_t2a.mean_dsc;
    state.runs.push_back(run);
    std::printf(
        "  [bench seed %llu] DSC source=%.2f stage1=%.2f stage2=%.2f "
        "stage2+aug=%.2f\n",
        static_cast<unsigned long long>(seed), run.dsc_source, run.dsc_stage1,
        run.dsc_stage2_noaug, run.dsc_stage2_aug);
    std::fflush(stdout);

    if (i == 0) {
      state.source_model = std::move(src.model);
      state.stage1_model = std::move(t1.model);
      state.stage2_model = std::move(t2a.model);
      state.cache = std::move(cache);
    }
  }
  return state;
}

double median3(double a, double b, double c) {
  return std::max(std::min(a, b), std::min(std::max(a, b), c));
}

}  // namespace

// ---------------------------------------------------------------------------

int main() {
  std::printf("boxdistill acceptance suite\n");
  const auto suite_t0 = std::chrono::steady_clock::now();

  const fs::path work =
      fs::temp_directory_path() /
      ("boxdistill_acceptance_" + std::to_string(::getpid()));
  fs::create_directories(work);

  std::optional<BenchState> bench;

  // Criterion 1: ablation ordering on the synthetic benchmark.
  run_criterion(1, "ablation ordering (3-seed median)", [&] {
    bench = run_benchmark();
    const auto& r = bench->runs;
    const double src = median3(r[0].dsc_source, r[1].dsc_source, r[2].dsc_source);
    const double s1 = median3(r[0].dsc_stage1, r[1].dsc_stage1, r[2].dsc_stage1);
    const double s2n = median3(r[0].dsc_stage2_noaug, r[1].dsc_stage2_noaug,
                               r[2].dsc_stage2_noaug);
    const double s2a = median3(r[0].dsc_stage2_aug, r[1].dsc_stage2_aug,
                               r[2].dsc_stage2_aug);
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << "median DSC " << src << " < " << s1 << " < " << s2n
       << " <= " << s2a << ", gain " << (s2a - src);
    const bool ordered = src < s1 && s1 < s2n && s2n <= s2a;
    const bool gained = (s2a - src) >= 3.0;
    return std::pair{ordered && gained, os.str()};
  });

  // Criterion 2: heterogeneous architectures (small source -> tiny student).
  run_criterion(2, "heterogeneous architectures", [&] {
    if (!bench) return std::pair{false, std::string("benchmark unavailable")};
    const auto& b = acceptance::kBench;
    // Source model and cache reused from seed 1: the tiny-model pipeline
    // only consumes black-box outputs.
    TrainOutput t1 = train_stage1(
        *bench->cache, bench->target.train, bench_model_spec("tiny-encdec", 911),
        bench_opt(b.stage1_epochs, 921));
    TrainOutput t2 = train_stage2(
        t1.model, bench->target.train, bench_model_spec("tiny-encdec", 912),
        AugmentationPolicy::weak_default(), AugmentationPolicy::strong_default(),
        bench_opt(b.stage2_epochs, 922), true);
    const std::size_t p_small =
        build_model(bench_model_spec("small-encdec", 1)).parameter_count();
    const std::size_t p_tiny = t2.model.parameter_count();
    const double dsc_src = bench->runs[0].dsc_source;
    const double dsc_t2 = evaluate(t2.model, bench->target.test).mean_dsc;
    std::ostringstream os;
    os.precision(2);
    os << std::fixed << "tiny student (" << p_tiny << " params < " << p_small
       << ") DSC " << dsc_t2 << " vs source " << dsc_src;
    return std::pair{p_tiny < p_small && (dsc_t2 - dsc_src) >= 2.0, os.str()};
  });

  // Criterion 3: loss oracles.
  run_criterion(3, "loss oracles", [&] {
    // uniform CE = ln K
    SoftLabelMap uniform(4, 4, 3);
    for (double& v : uniform.values) v = 1.0 / 3.0;
    LabelMask labels(4, 4);
    RngStream rng(5);
    for (int& v : labels.values) v = rng.uniform_int(0, 2);
    const double ce_uniform = cross_entropy(uniform, labels).value;
    if (std::abs(ce_uniform - std::log(3.0)) > 1e-6)
      return std::pair{false, std::string("uniform CE != ln K")};

    // hand-computed 2-pixel CE
    SoftLabelMap pred(1, 2, 2);
    pred.at(0, 0, 0) = 0.7;
    pred.at(0, 0, 1) = 0.3;
    pred.at(0, 1, 0) = 0.2;
    pred.at(0, 1, 1) = 0.8;
    LabelMask tg(1, 2);
    tg.at(0, 0) = 0;
    tg.at(0, 1) = 1;
    if (std::abs(cross_entropy(pred, tg).value +
                 (std::log(0.7) + std::log(0.8)) / 2.0) > 1e-9)
      return std::pair{false, std::string("2-pixel CE oracle mismatch")};

    // KL self-divergence and brute-force oracle
    double worst = 0.0;
    for (std::uint64_t s = 0; s < 16; ++s) {
      SoftLabelMap t(2, 2, 3), u(2, 2, 3);
      RngStream r1(100 + s), r2(200 + s);
      for (int p = 0; p < 4; ++p) {
        double st = 0, su = 0;
        for (int k = 0; k < 3; ++k) {
          t.values[p * 3 + k] = 0.05 + r1.uniform();
          u.values[p * 3 + k] = 0.05 + r2.uniform();
          st += t.values[p * 3 + k];
          su += u.values[p * 3 + k];
        }
        for (int k = 0; k < 3; ++k) {
          t.values[p * 3 + k] /= st;
          u.values[p * 3 + k] /= su;
        }
      }
      if (std::abs(kl_distillation(t, t).value) > 1e-7)
        return std::pair{false, std::string("KL(p||p) > 1e-7")};
      // independent summation oracle
      double expected = 0.0;
      for (int p = 0; p < 4; ++p) {
        for (int k = 0; k < 3; ++k) {
          const double tv = t.values[p * 3 + k];
          double sv = u.values[p * 3 + k];
          if (sv < kProbEps) sv = kProbEps;
          if (tv > 0)
            expected += tv * (std::log(std::max(tv, kProbEps)) - std::log(sv));
        }
      }
      expected /= 4.0;
      worst = std::max(worst,
                       std::abs(kl_distillation(t, u).value - expected));
    }
    if (worst > 1e-9)
      return std::pair{false, "KL brute-force mismatch " + std::to_string(worst)};
    std::ostringstream os;
    os << "CE/KL match oracles within 1e-9, uniform CE = ln K, D(p||p) <= 1e-7";
    return std::pair{true, os.str()};
  });

  // Criterion 4: gradient checks.
  run_criterion(4, "finite-difference gradient checks", [&] {
    ModelSpec spec = bench_model_spec("tiny-encdec", 31);
    SegmentationModel model = build_model(spec);
    RngStream rng(32);
    auto rnd_img = [&rng](std::uint64_t s) {
      ImageTensor img(8, 8, 1);
      RngStream r(s);
      for (double& v : img.values) v = r.uniform();
      return img;
    };
    std::vector<std::pair<ImageTensor, LossTarget>> ce_batch, kl_batch;
    LabelMask mask(8, 8);
    for (int& v : mask.values) v = rng.uniform_int(0, 2);
    ce_batch.emplace_back(rnd_img(1), mask);
    SoftLabelMap tmap(8, 8, 3);
    for (int p = 0; p < 64; ++p) {
      double sum = 0;
      for (int k = 0; k < 3; ++k) {
        tmap.values[p * 3 + k] = 0.05 + rng.uniform();
        sum += tmap.values[p * 3 + k];
      }
      for (int k = 0; k < 3; ++k) tmap.values[p * 3 + k] /= sum;
    }
    kl_batch.emplace_back(rnd_img(2), tmap);

    const GradCheckResult ce = loss_gradient_check(model, ce_batch, 24, 7);
    const GradCheckResult kl = loss_gradient_check(model, kl_batch, 24, 8);
    std::ostringstream os;
    os << "max rel err: CE " << ce.max_rel_error << ", KL " << kl.max_rel_error
       << " over " << ce.params_checked + kl.params_checked << " params";
    return std::pair{ce.max_rel_error < 1e-3 && kl.max_rel_error < 1e-3,
                     os.str()};
  });

  // Criterion 5: metric oracles.
  run_criterion(5, "metric oracles (dice exhaustive, ASD brute force)", [&] {
    auto mask_from_bits = [](std::uint32_t bits, int h, int w) {
      LabelMask m(h, w);
      for (int i = 0; i < h * w; ++i) m.values[i] = (bits >> i) & 1u;
      return m;
    };
    auto oracle_dice = [](const LabelMask& a, const LabelMask& b) {
      long na = 0, nb = 0, nab = 0;
      for (std::size_t i = 0; i < a.values.size(); ++i) {
        if (a.values[i] == 1) ++na;
        if (b.values[i] == 1) ++nb;
        if (a.values[i] == 1 && b.values[i] == 1) ++nab;
      }
      if (na + nb == 0) return 100.0;
      return 200.0 * static_cast<double>(nab) / static_cast<double>(na + nb);
    };
    // exhaustive 3x3 all pairs (exact equality)
    for (std::uint32_t pb = 0; pb < 512; ++pb) {
      const LabelMask p = mask_from_bits(pb, 3, 3);
      for (std::uint32_t tb = 0; tb < 512; ++tb) {
        const LabelMask t = mask_from_bits(tb, 3, 3);
        const double mine = dice_percent(p, t, 1);
        if (mine != oracle_dice(p, t) || mine != dice_percent(t, p, 1))
          return std::pair{false, std::string("3x3 dice mismatch")};
      }
    }
    // randomized 5x5 pairs (exact equality + symmetry)
    RngStream rng(51);
    for (int i = 0; i < 50000; ++i) {
      const LabelMask p = mask_from_bits(
          static_cast<std::uint32_t>(rng.next_u64() & 0x1ffffffu), 5, 5);
      const LabelMask t = mask_from_bits(
          static_cast<std::uint32_t>(rng.next_u64() & 0x1ffffffu), 5, 5);
      const double mine = dice_percent(p, t, 1);
      if (mine != oracle_dice(p, t) || mine != dice_percent(t, p, 1))
        return std::pair{false, std::string("5x5 dice mismatch")};
    }
    // ASD vs brute force on 200 random 16x16 pairs
    int tested = 0;
    double worst = 0.0;
    for (int i = 0; tested < 200; ++i) {
      LabelMask p(16, 16), t(16, 16);
      RngStream rp(1000 + i), rt(5000 + i);
      for (int j = 0; j < 256; ++j) {
        p.values[j] = rp.uniform() > 0.65 ? 1 : 0;
        t.values[j] = rt.uniform() > 0.65 ? 1 : 0;
      }
      const auto mine = average_surface_distance(p, t, 1);
      // brute force all-pairs
      auto boundary = [](const LabelMask& m) {
        std::vector<std::pair<int, int>> pts;
        for (int y = 0; y < m.height; ++y)
          for (int x = 0; x < m.width; ++x) {
            if (m.at(y, x) != 1) continue;
            if (y == 0 || y == m.height - 1 || x == 0 || x == m.width - 1 ||
                m.at(y - 1, x) != 1 || m.at(y + 1, x) != 1 ||
                m.at(y, x - 1) != 1 || m.at(y, x + 1) != 1)
              pts.emplace_back(y, x);
          }
        return pts;
      };
      const auto bp = boundary(p), bt = boundary(t);
      if (bp.empty() || bt.empty()) {
        if (mine.has_value())
          return std::pair{false, std::string("ASD defined on empty structure")};
        continue;
      }
      auto directed = [](const auto& from, const auto& to) {
        double total = 0;
        for (const auto& [fy, fx] : from) {
          double best = 1e300;
          for (const auto& [ty, tx] : to)
            best = std::min(best, std::hypot(double(fy - ty), double(fx - tx)));
          total += best;
        }
        return total / from.size();
      };
      const double expected = 0.5 * (directed(bp, bt) + directed(bt, bp));
      if (!mine.has_value())
        return std::pair{false, std::string("ASD undefined unexpectedly")};
      worst = std::max(worst, std::abs(*mine - expected));
      const auto rev = average_surface_distance(t, p, 1);
      if (std::abs(*mine - *rev) > 1e-12)
        return std::pair{false, std::string("ASD asymmetry")};
      ++tested;
    }
    if (worst > 1e-9)
      return std::pair{false, "ASD worst error " + std::to_string(worst)};
    std::ostringstream os;
    os << "dice exact on 3x3 all-pairs + 50k 5x5 pairs; ASD worst |err| "
       << worst << " over 200 pairs";
    return std::pair{true, os.str()};
  });

  // Criterion 6: black-box boundary.
  run_criterion(6, "black-box boundary", [&] {
    SyntheticShiftSpec spec;
    spec.seed = 61;
    spec.noise_std = 0.06;
    spec.intensity_offset = 0.08;
    auto [source, target] = generate_synthetic_pair(spec, 8, 4, 32);

    // (a) stub predictor with no model inside drives stages I and II
    class Stub final : public BlackBoxPredictor {
    public:
      SoftLabelMap predict(const ImageTensor& image) const override {
        count_query();
        SoftLabelMap m(image.height, image.width, 3);
        for (int p = 0; p < image.height * image.width; ++p) {
          const double v = image.values[static_cast<std::size_t>(p)];
          const int c = v < 0.45 ? 0 : (v < 0.75 ? 1 : 2);
          for (int k = 0; k < 3; ++k) m.values[p * 3 + k] = k == c ? 0.8 : 0.1;
        }
        return m;
      }
      int num_classes() const override { return 3; }
      int in_channels() const override { return 1; }
      std::string identity() const override { return "stub"; }
    } stub;

    OptimizerConfig opt = bench_opt(2, 63);
    opt.batch_size = 4;
    const PseudoLabelCache stub_cache =
        precompute_pseudo_labels(stub, target.train);
    if (stub.query_count() != static_cast<long>(target.train.size()))
      return std::pair{false, std::string("precompute query count wrong")};
    TrainOutput t1 = train_stage1(stub_cache, target.train,
                                  bench_model_spec("tiny-encdec", 64), opt);
    TrainOutput t2 = train_stage2(
        t1.model, target.train, bench_model_spec("tiny-encdec", 65),
        AugmentationPolicy::weak_default(), AugmentationPolicy::strong_default(),
        opt, true);
    if (stub.query_count() != static_cast<long>(target.train.size()))
      return std::pair{false,
                       std::string("stages I/II issued extra black-box queries")};
    if (t1.report.query_count != static_cast<long>(target.train.size()) ||
        t2.report.query_count != 0)
      return std::pair{false, std::string("stage report query accounting wrong")};

    // (b) remote vs local predictor agreement and byte-equal caches
    TrainOutput src = train_source(
        source.train, bench_model_spec("tiny-encdec", 66), bench_opt(2, 67));
    const auto local = wrap_as_blackbox(src.model);
    PredictorService service(*local, "127.0.0.1", 0);
    const auto remote = remote_predictor("127.0.0.1", service.port());
    double max_diff = 0.0;
    for (int i = 0; i < 3; ++i) {
      const SoftLabelMap a = local->predict(target.train.samples[i].image);
      const SoftLabelMap b = remote->predict(target.train.samples[i].image);
      for (std::size_t j = 0; j < a.values.size(); ++j)
        max_diff = std::max(max_diff, std::abs(a.values[j] - b.values[j]));
    }
    if (max_diff > 1e-6)
      return std::pair{false, "remote/local disagree: " + std::to_string(max_diff)};

    const PseudoLabelCache cache_local =
        precompute_pseudo_labels(*local, target.train);
    const PseudoLabelCache cache_remote =
        precompute_pseudo_labels(*remote, target.train);
    cache_local.save(work / "c6_local.plc");
    cache_remote.save(work / "c6_remote.plc");
    auto slurp = [](const fs::path& p) {
      std::ifstream is(p, std::ios::binary);
      return std::string((std::istreambuf_iterator<char>(is)), {});
    };
    if (slurp(work / "c6_local.plc") != slurp(work / "c6_remote.plc"))
      return std::pair{false, std::string("local/remote caches differ")};

    // (c) stage-I equivalence: byte-equal caches give identical training
    OptimizerConfig opt1 = bench_opt(2, 68);
    opt1.batch_size = 4;
    TrainOutput via_local = train_stage1(cache_local, target.train,
                                         bench_model_spec("tiny-encdec", 69), opt1);
    TrainOutput via_remote = train_stage1(cache_remote, target.train,
                                          bench_model_spec("tiny-encdec", 69), opt1);
    if (via_local.model.parameters_flat() != via_remote.model.parameters_flat())
      return std::pair{false,
                       std::string("stage-I models differ local vs remote")};
    std::ostringstream os;
    os << "query accounting exact, stub-driven stages, remote diff "
       << max_diff << " <= 1e-6, byte-equal caches, stage-I seed-for-seed equal";
    return std::pair{true, os.str()};
  });

  // Criterion 7: determinism of run-all.
  run_criterion(7, "run-all determinism", [&] {
    ExperimentConfig cfg;
    cfg.data.synthetic.seed = 71;
    cfg.data.synthetic.noise_std = 0.06;
    cfg.data.synthetic.intensity_offset = 0.08;
    cfg.data.n_train = 8;
    cfg.data.n_test = 3;
    cfg.data.image_size = 32;
    cfg.source_model.architecture = "tiny-encdec";
    cfg.target_model.architecture = "tiny-encdec";
    cfg.student_model.architecture = "tiny-encdec";
    cfg.opt_source.epochs = 2;
    cfg.opt_stage1.epochs = 2;
    cfg.opt_stage2.epochs = 2;
    cfg.opt_source.batch_size = 4;
    cfg.opt_stage1.batch_size = 4;
    cfg.opt_stage2.batch_size = 4;
    cfg.seeds.master = 77;

    ExperimentConfig cfg_a = cfg, cfg_b = cfg;
    cfg_a.output_dir = (work / "det_a").string();
    cfg_b.output_dir = (work / "det_b").string();
    run_experiment(cfg_a);
    run_experiment(cfg_b);

    auto slurp = [](const fs::path& p) {
      std::ifstream is(p, std::ios::binary);
      return std::string((std::istreambuf_iterator<char>(is)), {});
    };
    for (const char* rel :
         {"metrics/summary.json", "metrics/summary.txt",
          "checkpoints/source.ckpt", "checkpoints/stage1.ckpt",
          "checkpoints/stage2.ckpt", "cache/pseudo_labels.plc"}) {
      const std::string a = slurp(work / "det_a" / rel);
      const std::string b = slurp(work / "det_b" / rel);
      if (a.empty() || a != b)
        return std::pair{false, std::string("mismatch or missing: ") + rel};
    }
    return std::pair{true,
                     std::string("metric tables, checkpoints and caches are "
                                 "byte-identical across reruns")};
  });

  // Criterion 8: softmax validity across stages.
  run_criterion(8, "softmax validity across all stages", [&] {
    if (!bench) return std::pair{false, std::string("benchmark unavailable")};
    long checked = 0;
    for (const SegmentationModel* model :
         {&*bench->source_model, &*bench->stage1_model, &*bench->stage2_model}) {
      for (const Sample& s : bench->target.test.samples) {
        const SoftLabelMap m = model->predict(s.image);
        if (!m.row_stochastic(1e-5))
          return std::pair{false, std::string("non-stochastic output")};
        ++checked;
      }
    }
    // cached pseudo-labels too
    for (const Sample& s : bench->target.train.samples) {
      if (!bench->cache->at(s.id).row_stochastic(1e-5))
        return std::pair{false, std::string("non-stochastic cache entry")};
      ++checked;
    }
    std::ostringstream os;
    os << checked << " maps row-stochastic within 1e-5";
    return std::pair{true, os.str()};
  });

  fs::remove_all(work);
  const double total =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - suite_t0)
          .count();
  std::printf("acceptance: %d/8 criteria passed (%.1fs total)\n",
              8 - g_failures, total);
  return g_failures;
}
