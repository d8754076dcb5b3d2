#include "xga/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <type_traits>

#include "xga/hash.hpp"

namespace fs = std::filesystem;

namespace xga {
namespace {

constexpr std::uint64_t kDreSeedTag = 40;
constexpr std::uint64_t kXgaSeedTag = 41;
constexpr std::uint64_t kMetricsSeedTag = 42;
constexpr std::uint64_t kBaselineClientTag = 20;
constexpr std::uint64_t kBaselineRefTag = 21;
constexpr std::uint64_t kLeaveoutTag = 1000;
// Pairing profiles for the post-hoc baseline use their own latent streams,
// distinct from the scoring streams inside compute_audit_report.
constexpr std::uint64_t kPairLatentClientTag = 3;
constexpr std::uint64_t kPairLatentRefTag = 4;

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag) {
  return Rng(base).fork(tag).seed();
}

std::string join(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), "cannot write " + path);
  out << content;
  require(out.good(), "failed writing " + path);
}

void write_train_log(const std::string& path,
                     const std::vector<TrainRecord>& log,
                     const char* bank = nullptr) {
  std::ofstream out(path, std::ios::binary | std::ios::app);
  require(out.good(), "cannot write " + path);
  for (const TrainRecord& rec : log) {
    Json j;
    if (bank) j["bank"] = bank;
    j["iteration"] = rec.iteration;
    j["total"] = rec.total;
    j["xent_common_mean"] = rec.xent_common_mean;
    j["xent_unique_mean"] = rec.xent_unique_mean;
    j["unique_mean"] = rec.unique_mean;
    out << j.dump() << '\n';
  }
}

class StageRunner {
 public:
  template <typename F>
  std::invoke_result_t<F> run(const std::string& name, F&& f) {
    try {
      if constexpr (std::is_void_v<std::invoke_result_t<F>>) {
        f();
        stages_.push_back({{"name", name}, {"status", "ok"}});
      } else {
        auto result = f();
        stages_.push_back({{"name", name}, {"status", "ok"}});
        return result;
      }
    } catch (const std::exception& e) {
      stages_.push_back(
          {{"name", name}, {"status", "failed"}, {"error", e.what()}});
      throw;
    }
  }

  const Json& stages() const { return stages_; }

 private:
  Json stages_ = Json::array();
};

void write_manifest(const std::string& dir, const std::string& mode,
                    const std::string& status, const Json& stages,
                    const Json& extra) {
  Json m;
  m["format_version"] = 1;
  m["kind"] = "xga-manifest";
  m["mode"] = mode;
  m["status"] = status;
  m["stages"] = stages;
  for (const auto& [k, v] : extra.items()) m[k] = v;
  write_json_file(join(dir, "manifest.json"), m);
}

std::vector<int> all_attrs(int count) {
  std::vector<int> out(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = k;
  return out;
}

std::string lambda_str(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

WorldConfig world_config_from_json(const Json& j, WorldConfig cfg) {
  if (j.contains("seed")) cfg.seed = j.at("seed");
  if (j.contains("latent_dim")) cfg.latent_dim = j.at("latent_dim");
  if (j.contains("attribute_count")) cfg.attribute_count = j.at("attribute_count");
  if (j.contains("obs_dim")) cfg.obs_dim = j.at("obs_dim");
  if (j.contains("reference_attrs")) {
    cfg.reference_attrs = j.at("reference_attrs").get<std::vector<int>>();
  } else {
    cfg.reference_attrs = all_attrs(cfg.attribute_count);
  }
  if (j.contains("client_attrs")) {
    cfg.client_attrs = j.at("client_attrs").get<std::vector<int>>();
  } else {
    cfg.client_attrs = all_attrs(cfg.attribute_count);
  }
  if (j.contains("baseline")) cfg.baseline = vector_from_json(j.at("baseline"));
  if (j.contains("shear_strength")) cfg.shear_strength = j.at("shear_strength");
  return cfg;
}

Json world_config_to_json(const WorldConfig& cfg) {
  Json j;
  j["seed"] = cfg.seed;
  j["latent_dim"] = cfg.latent_dim;
  j["attribute_count"] = cfg.attribute_count;
  j["obs_dim"] = cfg.obs_dim;
  j["reference_attrs"] = cfg.reference_attrs;
  j["client_attrs"] = cfg.client_attrs;
  j["baseline"] = vector_to_json(cfg.resolved_baseline());
  j["shear_strength"] = cfg.shear_strength;
  return j;
}

DirectionBank reorder_bank(const DirectionBank& bank,
                           const std::vector<std::pair<int, int>>& pairs,
                           bool client_side, int n_common) {
  std::vector<char> used(static_cast<std::size_t>(bank.size()), 0);
  DirectionBank out;
  out.alpha = bank.alpha;
  out.n_common = n_common;
  for (const auto& [i, j] : pairs) {
    const int idx = client_side ? i : j;
    out.mats.push_back(bank.mats[static_cast<std::size_t>(idx)]);
    used[static_cast<std::size_t>(idx)] = 1;
  }
  for (int n = 0; n < bank.size(); ++n) {
    if (!used[static_cast<std::size_t>(n)]) {
      out.mats.push_back(bank.mats[static_cast<std::size_t>(n)]);
    }
  }
  return out;
}

}  // namespace

void FeatureConfig::validate() const {
  require(feature_dim > 0, "feature_dim must be positive");
  require(hidden_dim > 0, "feature hidden_dim must be positive");
}

Json FeatureConfig::to_json() const {
  Json j;
  j["kind"] = to_string(kind);
  j["feature_dim"] = feature_dim;
  j["hidden_dim"] = hidden_dim;
  j["seed"] = seed;
  return j;
}

FeatureConfig FeatureConfig::from_json(const Json& j) {
  FeatureConfig cfg;
  if (j.contains("kind")) cfg.kind = extractor_kind_from_string(j.at("kind"));
  if (j.contains("feature_dim")) cfg.feature_dim = j.at("feature_dim");
  if (j.contains("hidden_dim")) cfg.hidden_dim = j.at("hidden_dim");
  if (j.contains("seed")) cfg.seed = j.at("seed");
  cfg.validate();
  return cfg;
}

FeatureExtractor make_extractor(const FeatureConfig& cfg, int obs_dim) {
  switch (cfg.kind) {
    case ExtractorKind::identity:
      return FeatureExtractor::identity(obs_dim);
    case ExtractorKind::random_projection:
      return FeatureExtractor::random_projection(cfg.seed, obs_dim,
                                                 cfg.feature_dim);
    case ExtractorKind::frozen_mlp:
      return FeatureExtractor::frozen_mlp(cfg.seed, obs_dim, cfg.feature_dim,
                                          cfg.hidden_dim);
  }
  throw ConfigError("unknown extractor kind");
}

void ExperimentConfig::validate() const {
  world.validate();
  features.validate();
  dre.validate();
  xga.validate();
  require(n_common >= 1, "n_common must be at least 1");
  require(n_novel >= 0 && n_missing >= 0, "block sizes must be nonnegative");
  require(n_common + std::max(n_novel, n_missing) >= 2,
          "need at least 2 directions in total");
  require(eval_samples >= 1, "eval_samples must be positive");
  require(c_scale > 0.0, "c_scale must be positive");
  static const std::set<std::string> kSuites = {
      "single-audit", "leave-one-out", "lambda-sweep", "loss-kind-sweep"};
  require(kSuites.count(suite) > 0, "unknown suite kind: " + suite);
  require(!lambda_grid.empty(), "lambda_grid must be nonempty");
  for (double v : lambda_grid) {
    require(v >= 0.0, "lambda_grid entries must be nonnegative");
  }
  require(!sweep_losses.empty(), "sweep_losses must be nonempty");
  std::set<std::uint64_t> uniq(seeds.begin(), seeds.end());
  require(uniq.size() == seeds.size(), "suite seeds must be distinct");
  const std::set<std::uint64_t> stage_seeds = {world.seed, features.seed,
                                               dre.seed, xga.seed};
  require(stage_seeds.size() == 4, "world/features/dre/xga seeds must differ");
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["world"] = world_config_to_json(world);
  j["features"] = features.to_json();
  j["dre"] = dre.to_json();
  j["xga"] = xga.to_json();
  j["directions"] = {
      {"n_common", n_common}, {"n_novel", n_novel}, {"n_missing", n_missing}};
  j["metrics"] = {
      {"eval_samples", eval_samples},
      {"c_scale", c_scale},
      {"missing_profiles_from_reference", missing_profiles_from_reference}};
  Json losses = Json::array();
  for (DreKind k : sweep_losses) losses.push_back(dre_kind_name(k));
  j["suite"] = {{"kind", suite},
                {"seeds", seeds},
                {"lambda_grid", lambda_grid},
                {"losses", losses}};
  if (!output_dir.empty()) j["output_dir"] = output_dir;
  return j;
}

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  try {
    ExperimentConfig cfg;
    cfg.world = world_config_from_json(
        j.contains("world") ? j.at("world") : Json::object(), WorldConfig{});
    if (j.contains("features")) {
      cfg.features = FeatureConfig::from_json(j.at("features"));
    }
    if (j.contains("dre")) cfg.dre = DreConfig::from_json(j.at("dre"));
    if (j.contains("xga")) cfg.xga = XgaConfig::from_json(j.at("xga"));
    if (!j.contains("dre") || !j.at("dre").contains("seed")) {
      cfg.dre.seed = derive_seed(cfg.world.seed, kDreSeedTag);
    }
    if (!j.contains("xga") || !j.at("xga").contains("seed")) {
      cfg.xga.seed = derive_seed(cfg.world.seed, kXgaSeedTag);
    }
    if (j.contains("directions")) {
      const Json& d = j.at("directions");
      if (d.contains("n_common")) cfg.n_common = d.at("n_common");
      if (d.contains("n_novel")) cfg.n_novel = d.at("n_novel");
      if (d.contains("n_missing")) cfg.n_missing = d.at("n_missing");
    }
    if (j.contains("metrics")) {
      const Json& m = j.at("metrics");
      if (m.contains("eval_samples")) cfg.eval_samples = m.at("eval_samples");
      if (m.contains("c_scale")) cfg.c_scale = m.at("c_scale");
      if (m.contains("missing_profiles_from_reference")) {
        cfg.missing_profiles_from_reference =
            m.at("missing_profiles_from_reference");
      }
    }
    if (j.contains("suite")) {
      const Json& s = j.at("suite");
      if (s.contains("kind")) cfg.suite = s.at("kind");
      if (s.contains("seeds")) {
        cfg.seeds = s.at("seeds").get<std::vector<std::uint64_t>>();
      }
      if (s.contains("lambda_grid")) {
        cfg.lambda_grid = s.at("lambda_grid").get<std::vector<double>>();
      }
      if (s.contains("losses")) {
        cfg.sweep_losses.clear();
        for (const auto& name : s.at("losses")) {
          cfg.sweep_losses.push_back(dre_kind_from_name(name));
        }
      }
    }
    if (j.contains("output_dir")) cfg.output_dir = j.at("output_dir");
    if (j.value("paper_scale", false)) cfg.apply_paper_scale();
    cfg.validate();
    return cfg;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("invalid experiment config: ") + e.what());
  }
}

void ExperimentConfig::apply_paper_scale() {
  xga.iterations = 10000;
  n_common = 12;
  n_novel = 4;
  n_missing = 4;
}

MetricsOptions ExperimentConfig::metrics_options() const {
  MetricsOptions opts;
  opts.eval_samples = eval_samples;
  opts.seed = derive_seed(world.seed, kMetricsSeedTag);
  opts.c_scale = c_scale;
  opts.missing_profiles_from_reference = missing_profiles_from_reference;
  return opts;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return ExperimentConfig::from_json(read_json_file(path));
}

std::uint64_t derived_dre_seed(std::uint64_t world_seed) {
  return derive_seed(world_seed, kDreSeedTag);
}

std::uint64_t derived_xga_seed(std::uint64_t world_seed) {
  return derive_seed(world_seed, kXgaSeedTag);
}

ExperimentConfig with_world_seed(const ExperimentConfig& cfg,
                                 std::uint64_t world_seed) {
  ExperimentConfig out = cfg;
  out.world.seed = world_seed;
  out.dre.seed = derive_seed(world_seed, kDreSeedTag);
  out.xga.seed = derive_seed(world_seed, kXgaSeedTag);
  return out;
}

AuditReport run_audit(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  StageRunner stages;
  const Json echo = cfg.to_json();
  Json extra;
  extra["config"] = echo;
  try {
    const World world = stages.run("world", [&] {
      World w = make_world(cfg.world);
      write_json_file(join(out_dir, "world.json"), world_to_json(w));
      return w;
    });
    const std::string world_hash =
        git_blob_sha1_file(join(out_dir, "world.json"));
    extra["world_hash"] = world_hash;

    const FeatureExtractor extractor =
        make_extractor(cfg.features, cfg.world.obs_dim);

    auto estimators = stages.run("dre", [&] {
      auto pair = train_dre(world, extractor, cfg.dre);
      write_json_file(join(out_dir, "dre_c.json"), pair.first.to_json());
      write_json_file(join(out_dir, "dre_r.json"), pair.second.to_json());
      return pair;
    });

    const TrainResult trained = stages.run("train", [&] {
      TrainResult t = train_directions(world, extractor, &estimators.first,
                                       &estimators.second, cfg.n_common,
                                       cfg.n_novel, cfg.n_missing, cfg.xga);
      write_json_file(join(out_dir, "bank_client.json"), bank_to_json(t.client));
      write_json_file(join(out_dir, "bank_reference.json"),
                      bank_to_json(t.reference));
      fs::remove(join(out_dir, "log.jsonl"));
      write_train_log(join(out_dir, "log.jsonl"), t.log);
      return t;
    });

    AuditReport report = stages.run("metrics", [&] {
      AuditReport rep = compute_audit_report(world, trained.client,
                                             trained.reference,
                                             cfg.metrics_options());
      rep.config = echo;
      rep.world_hash = world_hash;
      rep.dre_client_trained = estimators.first.trained;
      rep.dre_reference_trained = estimators.second.trained;
      return rep;
    });

    stages.run("report", [&] {
      write_json_file(join(out_dir, "report.json"), report_to_json(report));
      write_text(join(out_dir, "report.csv"), report_to_csv(report));
    });

    extra["artifacts"] = {"bank_client.json", "bank_reference.json",
                          "dre_c.json",       "dre_r.json",
                          "log.jsonl",        "manifest.json",
                          "report.csv",       "report.json",
                          "world.json"};
    write_manifest(out_dir, "audit", "ok", stages.stages(), extra);
    return report;
  } catch (...) {
    write_manifest(out_dir, "audit", "failed", stages.stages(), extra);
    throw;
  }
}

AuditReport run_baseline(const ExperimentConfig& cfg,
                         const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  StageRunner stages;
  const Json echo = cfg.to_json();
  Json extra;
  extra["config"] = echo;
  try {
    const World world = stages.run("world", [&] {
      World w = make_world(cfg.world);
      write_json_file(join(out_dir, "world.json"), world_to_json(w));
      return w;
    });
    const std::string world_hash =
        git_blob_sha1_file(join(out_dir, "world.json"));
    extra["world_hash"] = world_hash;

    const FeatureExtractor extractor =
        make_extractor(cfg.features, cfg.world.obs_dim);

    XgaConfig bcfg = cfg.xga;
    bcfg.lambda_a = 0.0;
    bcfg.lambda_b = 0.0;

    std::vector<TrainRecord> client_log;
    std::vector<TrainRecord> ref_log;
    DirectionBank client_bank = stages.run("train_client", [&] {
      return train_single(world.client, extractor, cfg.n_common + cfg.n_novel,
                          bcfg, kBaselineClientTag, &client_log);
    });
    DirectionBank ref_bank = stages.run("train_reference", [&] {
      return train_single(world.reference, extractor,
                          cfg.n_common + cfg.n_missing, bcfg, kBaselineRefTag,
                          &ref_log);
    });
    fs::remove(join(out_dir, "log.jsonl"));
    write_train_log(join(out_dir, "log.jsonl"), client_log, "client");
    write_train_log(join(out_dir, "log.jsonl"), ref_log, "reference");

    const MetricsOptions opts = cfg.metrics_options();
    const auto pairs = stages.run("align", [&] {
      const Rng root(opts.seed);
      Rng rng_c = root.fork(kPairLatentClientTag);
      Rng rng_r = root.fork(kPairLatentRefTag);
      const Mat clat =
          rng_c.normal_matrix(cfg.world.latent_dim, opts.eval_samples);
      const Mat rlat =
          rng_r.normal_matrix(cfg.world.latent_dim, opts.eval_samples);
      const auto pc =
          discrepancy_profiles(world.client, world.oracle, client_bank, clat);
      const auto pr = discrepancy_profiles(world.reference, world.oracle,
                                           ref_bank, rlat);
      return greedy_align(pc, pr, cfg.n_common);
    });

    client_bank = reorder_bank(client_bank, pairs, true, cfg.n_common);
    ref_bank = reorder_bank(ref_bank, pairs, false, cfg.n_common);
    write_json_file(join(out_dir, "bank_client.json"),
                    bank_to_json(client_bank));
    write_json_file(join(out_dir, "bank_reference.json"),
                    bank_to_json(ref_bank));

    AuditReport report = stages.run("metrics", [&] {
      AuditReport rep = compute_audit_report(world, client_bank, ref_bank,
                                             opts);
      rep.alignment = "posthoc";
      rep.config = echo;
      rep.world_hash = world_hash;
      rep.dre_client_trained = false;
      rep.dre_reference_trained = false;
      return rep;
    });

    stages.run("report", [&] {
      write_json_file(join(out_dir, "report.json"), report_to_json(report));
      write_text(join(out_dir, "report.csv"), report_to_csv(report));
    });

    extra["artifacts"] = {"bank_client.json", "bank_reference.json",
                          "log.jsonl",        "manifest.json",
                          "report.csv",       "report.json",
                          "world.json"};
    write_manifest(out_dir, "baseline", "ok", stages.stages(), extra);
    return report;
  } catch (...) {
    write_manifest(out_dir, "baseline", "failed", stages.stages(), extra);
    throw;
  }
}

std::vector<AuditReport> run_leaveout_suite(const ExperimentConfig& cfg,
                                            const std::string& out_dir) {
  cfg.validate();
  fs::create_directories(out_dir);
  StageRunner stages;
  Json extra;
  extra["config"] = cfg.to_json();
  try {
    const int attrs = cfg.world.attribute_count;
    std::vector<AuditReport> reports;
    Json rows = Json::array();
    std::ostringstream csv;
    csv << "attribute,a_score,r_score\n";
    double a_sum = 0.0;
    double r_sum = 0.0;
    for (int m = 0; m < attrs; ++m) {
      const std::string name = "attr_" + std::to_string(m);
      AuditReport rep = stages.run(name, [&] {
        ExperimentConfig sub = with_world_seed(
            cfg, derive_seed(cfg.world.seed, kLeaveoutTag + m));
        sub.suite = "single-audit";
        sub.world.reference_attrs = all_attrs(attrs);
        sub.world.client_attrs.clear();
        for (int k = 0; k < attrs; ++k) {
          if (k != m) sub.world.client_attrs.push_back(k);
        }
        return run_audit(sub, join(out_dir, name));
      });
      require(rep.has_r_score, "leave-one-out report lacks a recovery score");
      rows.push_back({{"attribute", m},
                      {"a_score", rep.a_score},
                      {"r_score", rep.r_score},
                      {"dir", name}});
      csv << m << ',' << Json(rep.a_score).dump() << ','
          << Json(rep.r_score).dump() << '\n';
      a_sum += rep.a_score;
      r_sum += rep.r_score;
      reports.push_back(std::move(rep));
    }
    Json summary;
    summary["format_version"] = 1;
    summary["kind"] = "xga-leaveout-summary";
    summary["rows"] = rows;
    summary["mean_a_score"] = a_sum / attrs;
    summary["mean_r_score"] = r_sum / attrs;
    write_json_file(join(out_dir, "summary.json"), summary);
    write_text(join(out_dir, "summary.csv"), csv.str());
    write_manifest(out_dir, "leaveout", "ok", stages.stages(), extra);
    return reports;
  } catch (...) {
    write_manifest(out_dir, "leaveout", "failed", stages.stages(), extra);
    throw;
  }
}

SweepResult run_lambda_sweep(const ExperimentConfig& cfg,
                             const std::string& out_dir) {
  cfg.validate();
  {
    const World probe = make_world(cfg.world);
    require(!probe.missing_attrs().empty(),
            "lambda sweep needs a world with missing attributes");
  }
  fs::create_directories(out_dir);
  StageRunner stages;
  Json extra;
  extra["config"] = cfg.to_json();

  SweepResult result;
  for (DreKind kind : cfg.sweep_losses) {
    for (double lb : cfg.lambda_grid) {
      SweepCell cell;
      cell.kind = kind;
      cell.lambda_b = lb;
      result.cells.push_back(cell);
    }
  }
  auto cell_of = [&](DreKind kind, double lb) -> SweepCell& {
    for (SweepCell& c : result.cells) {
      if (c.kind == kind && c.lambda_b == lb) return c;
    }
    throw ConfigError("sweep cell lookup failed");
  };

  const std::vector<std::uint64_t> seeds =
      cfg.seeds.empty() ? std::vector<std::uint64_t>{cfg.world.seed}
                        : cfg.seeds;
  try {
    for (std::uint64_t seed : seeds) {
      const ExperimentConfig sub = with_world_seed(cfg, seed);
      const std::string seed_dir =
          join(out_dir, "seed_" + std::to_string(seed));
      fs::create_directories(seed_dir);
      const World world = stages.run("seed_" + std::to_string(seed) + "/world",
                                     [&] {
                                       World w = make_world(sub.world);
                                       write_json_file(
                                           join(seed_dir, "world.json"),
                                           world_to_json(w));
                                       return w;
                                     });
      const std::string world_hash =
          git_blob_sha1_file(join(seed_dir, "world.json"));
      const FeatureExtractor extractor =
          make_extractor(sub.features, sub.world.obs_dim);

      for (DreKind kind : cfg.sweep_losses) {
        DreConfig dcfg = sub.dre;
        dcfg.kind = kind;
        const std::string kind_dir = join(seed_dir, dre_kind_name(kind));
        const auto estimators =
            stages.run("seed_" + std::to_string(seed) + "/" +
                           dre_kind_name(kind) + "/dre",
                       [&] { return train_dre(world, extractor, dcfg); });

        for (double lb : cfg.lambda_grid) {
          XgaConfig xcfg = sub.xga;
          xcfg.lambda_b = lb;
          const std::string run_dir =
              join(kind_dir, "lambda_" + lambda_str(lb));
          const std::string stage_name = "seed_" + std::to_string(seed) + "/" +
                                         dre_kind_name(kind) + "/lambda_" +
                                         lambda_str(lb);
          AuditReport rep = stages.run(stage_name, [&] {
            const TrainResult trained = train_directions(
                world, extractor, &estimators.first, &estimators.second,
                sub.n_common, sub.n_novel, sub.n_missing, xcfg);
            ExperimentConfig run_cfg = sub;
            run_cfg.dre.kind = kind;
            run_cfg.xga.lambda_b = lb;
            AuditReport r =
                compute_audit_report(world, trained.client, trained.reference,
                                     sub.metrics_options());
            r.config = run_cfg.to_json();
            r.world_hash = world_hash;
            r.dre_client_trained = estimators.first.trained;
            r.dre_reference_trained = estimators.second.trained;
            fs::create_directories(run_dir);
            write_json_file(join(run_dir, "report.json"), report_to_json(r));
            return r;
          });
          require(rep.has_r_score, "sweep report lacks a recovery score");
          cell_of(kind, lb).r_scores.push_back(rep.r_score);
        }
      }
    }

    Json cells = Json::array();
    for (SweepCell& c : result.cells) {
      const double n = static_cast<double>(c.r_scores.size());
      double mean = 0.0;
      for (double v : c.r_scores) mean += v;
      mean /= n;
      double var = 0.0;
      for (double v : c.r_scores) var += (v - mean) * (v - mean);
      c.mean = mean;
      c.stddev = std::sqrt(var / n);
      cells.push_back({{"loss", dre_kind_name(c.kind)},
                       {"lambda_b", c.lambda_b},
                       {"r_scores", c.r_scores},
                       {"mean", c.mean},
                       {"std", c.stddev}});
    }
    Json summary;
    summary["format_version"] = 1;
    summary["kind"] = "xga-lambda-sweep";
    summary["cells"] = cells;
    write_json_file(join(out_dir, "summary.json"), summary);
    write_text(join(out_dir, "summary.csv"),
               sweep_to_csv(result, cfg.sweep_losses, cfg.lambda_grid));
    write_manifest(out_dir, "lambda-sweep", "ok", stages.stages(), extra);
    return result;
  } catch (...) {
    write_manifest(out_dir, "lambda-sweep", "failed", stages.stages(), extra);
    throw;
  }
}

std::string sweep_to_csv(const SweepResult& result,
                         const std::vector<DreKind>& kinds,
                         const std::vector<double>& grid) {
  std::ostringstream oss;
  oss << "lambda";
  for (DreKind k : kinds) {
    oss << ',' << dre_kind_name(k) << "_mean," << dre_kind_name(k) << "_std";
  }
  oss << '\n';
  for (double lb : grid) {
    oss << lambda_str(lb);
    for (DreKind k : kinds) {
      const SweepCell* cell = nullptr;
      for (const SweepCell& c : result.cells) {
        if (c.kind == k && c.lambda_b == lb) {
          cell = &c;
          break;
        }
      }
      require(cell != nullptr, "sweep csv cell missing");
      oss << ',' << Json(cell->mean).dump() << ',' << Json(cell->stddev).dump();
    }
    oss << '\n';
  }
  return oss.str();
}

}  // namespace xga
