#include <filesystem>
#include <iostream>
#include <string>

#include "common.hpp"
#include "xga/hash.hpp"

namespace fs = std::filesystem;
using namespace xga;

int main(int argc, char** argv) {
  CLI::App app{"Synthetic generator-pair worlds"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  CLI::App* make = app.add_subcommand("make", "Build a world from a config");
  make->add_option("--config", config_path, "World or experiment config JSON")
      ->required();
  make->add_option("--out", out_dir, "Output directory")->required();
  make->callback([&] {
    const ExperimentConfig cfg = cli::load_config_flexible(config_path);
    fs::create_directories(out_dir);
    const World world = make_world(cfg.world);
    const fs::path out(out_dir);
    write_json_file(out / "world.json", world_to_json(world));
    const FeatureExtractor extractor =
        make_extractor(cfg.features, cfg.world.obs_dim);
    write_json_file(out / "extractor.json", extractor.to_json());

    Json manifest;
    manifest["format_version"] = 1;
    manifest["kind"] = "xga-manifest";
    manifest["mode"] = "world";
    manifest["status"] = "ok";
    manifest["artifacts"] = {"extractor.json", "manifest.json", "world.json"};
    manifest["world_hash"] = git_blob_sha1_file((out / "world.json").string());
    manifest["config"] = cfg.to_json();
    write_json_file(out / "manifest.json", manifest);
    std::cout << "world written to " << out_dir << '\n';
  });

  return cli::run_app(app, argc, argv);
}
