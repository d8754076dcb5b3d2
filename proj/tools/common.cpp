#include "common.hpp"

#include <exception>
#include <iostream>

namespace xga::cli {

int run_app(CLI::App& app, int argc, char** argv) {
  try {
    app.parse(argc, argv);
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

ExperimentConfig load_config_flexible(const std::string& path) {
  Json j = read_json_file(path);
  static const char* kSections[] = {"world", "features", "dre",    "xga",
                                    "directions", "metrics", "suite"};
  for (const char* s : kSections) {
    if (j.contains(s)) return ExperimentConfig::from_json(j);
  }
  Json wrapped;
  wrapped["world"] = std::move(j);
  return ExperimentConfig::from_json(wrapped);
}

}  // namespace xga::cli
