#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "polyelast/energy.hpp"
#include "polyelast/runner.hpp"

namespace {

std::vector<double> parse_dt_list(const std::string& s) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= s.size()) {
    const auto comma = s.find(',', pos);
    const std::string tok =
        s.substr(pos, comma == std::string::npos ? std::string::npos
                                                 : comma - pos);
    if (tok.empty()) throw std::invalid_argument("empty entry in --dt-list");
    std::size_t used = 0;
    out.push_back(std::stod(tok, &used));
    if (used != tok.size())
      throw std::invalid_argument("malformed entry in --dt-list: " + tok);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"variational solver for polyconvex elastodynamics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string dt_list;

  CLI::App* solve = app.add_subcommand("solve", "run a single experiment");
  solve->add_option("--config", config_path, "config file")->required();

  CLI::App* study =
      app.add_subcommand("study", "tau-refinement rate study");
  study->add_option("--config", config_path, "config file")->required();
  study->add_option("--dt-list", dt_list, "comma-separated tau values")
      ->required();

  CLI::App* check =
      app.add_subcommand("check-energy", "verify the energy hypotheses");
  check->add_option("--config", config_path, "config file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    const polyelast::RunConfig cfg = polyelast::parse_config_file(config_path);

    if (solve->parsed()) {
      const polyelast::RunSummary summary = polyelast::run_experiment(cfg);
      std::cout << "steps: " << summary.steps_completed
                << "  total energy: " << polyelast::format_double(summary.total_final)
                << "  dissipated: " << polyelast::format_double(summary.dissipation_sum)
                << "\n";
      if (!summary.certificates_passed) {
        std::cerr << "step certificate failed at step " << summary.failing_step
                  << "\n";
        return 1;
      }
      return 0;
    }

    if (study->parsed()) {
      const polyelast::RateReport report =
          polyelast::refinement_study(cfg, parse_dt_list(dt_list));
      if (report.slope_defined)
        std::cout << "fitted slope: "
                  << polyelast::format_double(report.slope) << "\n";
      else
        std::cout << "fitted slope: undefined (relative entropy vanished)\n";
      return 0;
    }

    // check-energy
    const polyelast::EnergyModel model =
        polyelast::EnergyModel::make(cfg.kappa, cfg.gamma, cfg.p);
    const polyelast::HypothesisReport report =
        polyelast::check_hypotheses(model, 1000, 2.0, cfg.seed);
    std::cout << "samples: " << report.samples << "\n"
              << "H1 margin: " << polyelast::format_double(report.h1_margin) << "\n"
              << "H2 margin: " << polyelast::format_double(report.h2_margin) << "\n"
              << "H3 margin: " << polyelast::format_double(report.h3_margin) << "\n"
              << "H4 margin: " << polyelast::format_double(report.h4_margin) << "\n"
              << "H5 margin: " << polyelast::format_double(report.h5_margin) << "\n"
              << (report.passed ? "hypotheses satisfied\n"
                                : "hypothesis violation detected\n");
    return report.passed ? 0 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
