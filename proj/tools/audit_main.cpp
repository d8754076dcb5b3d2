#include <iostream>
#include <string>

#include "common.hpp"

using namespace xga;

namespace {

void print_scores(const AuditReport& rep) {
  std::cout << "A_score " << rep.a_score;
  if (rep.has_r_score) {
    std::cout << "  R_score " << rep.r_score;
  } else {
    std::cout << "  R_score n/a";
  }
  std::cout << "  H_client " << rep.h_score_client << "  H_reference "
            << rep.h_score_reference << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generative model audits"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  bool paper_scale = false;

  CLI::App* run = app.add_subcommand("run", "Joint xGA audit");
  run->add_option("--config", config_path, "Experiment config JSON")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_flag("--paper-scale", paper_scale,
                "10,000 iterations with the 12/4/4 direction split");
  run->callback([&] {
    ExperimentConfig cfg = cli::load_config_flexible(config_path);
    if (paper_scale) cfg.apply_paper_scale();
    print_scores(run_audit(cfg, out_dir));
  });

  CLI::App* baseline =
      app.add_subcommand("baseline", "Independent training, post-hoc alignment");
  baseline->add_option("--config", config_path, "Experiment config JSON")
      ->required();
  baseline->add_option("--out", out_dir, "Output directory")->required();
  baseline->add_flag("--paper-scale", paper_scale,
                     "10,000 iterations with the 12/4/4 direction split");
  baseline->callback([&] {
    ExperimentConfig cfg = cli::load_config_flexible(config_path);
    if (paper_scale) cfg.apply_paper_scale();
    print_scores(run_baseline(cfg, out_dir));
  });

  return cli::run_app(app, argc, argv);
}
