#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "common.hpp"

namespace fs = std::filesystem;
using namespace xga;

int main(int argc, char** argv) {
  CLI::App app{"Density-ratio estimator pretraining"};
  app.require_subcommand(1);

  std::string world_dir;
  std::string out_dir;
  std::string loss;
  CLI::App* fit = app.add_subcommand("fit", "Fit gamma_c and gamma_r on a world");
  fit->add_option("--world", world_dir, "Directory holding world.json")
      ->required();
  fit->add_option("--loss", loss, "kliep or log")
      ->check(CLI::IsMember({"kliep", "log"}));
  fit->add_option("--out", out_dir, "Output directory")->required();
  fit->callback([&] {
    const fs::path wdir(world_dir);
    const World world = world_from_json(read_json_file(wdir / "world.json"));
    FeatureExtractor extractor =
        fs::exists(wdir / "extractor.json")
            ? FeatureExtractor::from_json(read_json_file(wdir / "extractor.json"))
            : make_extractor(FeatureConfig{}, world.config.obs_dim);
    require(extractor.obs_dim() == world.config.obs_dim,
            "extractor obs_dim does not match the world");

    DreConfig cfg;
    cfg.seed = derived_dre_seed(world.config.seed);
    if (!loss.empty()) cfg.kind = dre_kind_from_name(loss);

    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    std::vector<DreTrainRecord> trace;
    const auto estimators = train_dre(world, extractor, cfg, &trace);
    write_json_file(out / "dre_c.json", estimators.first.to_json());
    write_json_file(out / "dre_r.json", estimators.second.to_json());

    {
      std::ofstream log(out / "log.jsonl", std::ios::binary);
      require(log.good(), "cannot write " + (out / "log.jsonl").string());
      for (const DreTrainRecord& rec : trace) {
        Json j;
        j["iteration"] = rec.iteration;
        j["loss_c"] = rec.loss_c;
        j["loss_r"] = rec.loss_r;
        log << j.dump() << '\n';
      }
    }

    Json manifest;
    manifest["format_version"] = 1;
    manifest["kind"] = "xga-manifest";
    manifest["mode"] = "dre-fit";
    manifest["status"] = "ok";
    manifest["artifacts"] = {"dre_c.json", "dre_r.json", "log.jsonl",
                             "manifest.json"};
    manifest["loss"] = dre_kind_name(cfg.kind);
    manifest["config"] = cfg.to_json();
    write_json_file(out / "manifest.json", manifest);
    std::cout << "estimators written to " << out_dir << '\n';
  });

  return cli::run_app(app, argc, argv);
}
