#include <filesystem>
#include <iostream>
#include <string>

#include "common.hpp"

namespace fs = std::filesystem;
using namespace xga;

int main(int argc, char** argv) {
  CLI::App app{"Audit report inspection"};
  app.require_subcommand(1);

  std::string target;
  CLI::App* show = app.add_subcommand("show", "Pretty-print a run's JSON");
  show->add_option("dir", target, "Run directory (or a JSON file)")->required();
  show->callback([&] {
    fs::path path(target);
    if (fs::is_directory(path)) {
      if (fs::exists(path / "report.json")) {
        path /= "report.json";
      } else if (fs::exists(path / "summary.json")) {
        path /= "summary.json";
      } else {
        throw ConfigError("no report.json or summary.json in " + target);
      }
    }
    std::cout << read_json_file(path).dump(2) << '\n';
  });

  return cli::run_app(app, argc, argv);
}
