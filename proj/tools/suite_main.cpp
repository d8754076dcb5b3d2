#include <iostream>
#include <string>

#include "common.hpp"

using namespace xga;

int main(int argc, char** argv) {
  CLI::App app{"Controlled experiment suites"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool paper_scale = false;

  CLI::App* leaveout =
      app.add_subcommand("leaveout", "One audit per left-out client attribute");
  leaveout->add_option("--config", config_path, "Experiment config JSON")
      ->required();
  leaveout->add_option("--out", out_dir, "Output directory")->required();
  leaveout->add_flag("--paper-scale", paper_scale,
                     "10,000 iterations with the 12/4/4 direction split");
  leaveout->callback([&] {
    ExperimentConfig cfg = cli::load_config_flexible(config_path);
    if (paper_scale) cfg.apply_paper_scale();
    const auto reports = run_leaveout_suite(cfg, out_dir);
    double mean_r = 0.0;
    for (const AuditReport& rep : reports) mean_r += rep.r_score;
    mean_r /= static_cast<double>(reports.size());
    std::cout << reports.size() << " audits, mean R_score " << mean_r << '\n';
  });

  CLI::App* lambda =
      app.add_subcommand("lambda", "R_score over the lambda_b grid per loss kind");
  lambda->add_option("--config", config_path, "Experiment config JSON")
      ->required();
  lambda->add_option("--out", out_dir, "Output directory")->required();
  lambda->add_flag("--paper-scale", paper_scale,
                   "10,000 iterations with the 12/4/4 direction split");
  lambda->callback([&] {
    ExperimentConfig cfg = cli::load_config_flexible(config_path);
    if (paper_scale) cfg.apply_paper_scale();
    const SweepResult result = run_lambda_sweep(cfg, out_dir);
    std::cout << sweep_to_csv(result, cfg.sweep_losses, cfg.lambda_grid);
  });

  return cli::run_app(app, argc, argv);
}
