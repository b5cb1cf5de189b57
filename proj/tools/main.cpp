#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "commands.hpp"
#include "randex/error.hpp"

int main(int argc, char** argv) {
  CLI::App app{"randex: design-based analysis of randomized experiments"};
  app.require_subcommand(1);

  randex::cli::AnalysisConfig analyze_cfg;
  auto* analyze = app.add_subcommand(
      "analyze", "Estimate treatment effects from an experiment CSV");
  analyze->add_option("--input", analyze_cfg.input, "input CSV file")
      ->required();
  analyze->add_option("--outcome", analyze_cfg.outcome, "outcome column")
      ->required();
  analyze->add_option("--group", analyze_cfg.group, "group-label column")
      ->required();
  analyze
      ->add_option("--covariates", analyze_cfg.covariates,
                   "covariate columns (comma separated)")
      ->delimiter(',');
  analyze
      ->add_option("--estimator", analyze_cfg.estimators,
                   "estimators: unadjusted, adjusted, interact, tyranny, "
                   "targeted_ancova")
      ->delimiter(',');
  analyze
      ->add_option("--se", analyze_cfg.se_flavors,
                   "SE flavors: classic, hc0, hc1, hc2, hc3, neyman "
                   "(neyman applies to unadjusted only)")
      ->delimiter(',');
  analyze->add_option("--ci", analyze_cfg.ci_method,
                      "interval method: normal or welch_t");
  analyze->add_option("--level", analyze_cfg.level, "confidence level");
  analyze->add_option("--format", analyze_cfg.format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));
  analyze->add_option("--contrast", analyze_cfg.contrast,
                      "treatment_label,control_label (default: the two most "
                      "frequent labels)");

  randex::cli::SimulationConfig sim_cfg;
  auto* simulate = app.add_subcommand(
      "simulate", "Monte Carlo study of a completely randomized design");
  simulate->add_option("--population", sim_cfg.population,
                       "population CSV (columns a,b,z1..zK)");
  simulate->add_option("--dgp", sim_cfg.dgp,
                       "builtin data-generating process (lin2013)");
  simulate->add_option("--n", sim_cfg.n, "population size for --dgp");
  simulate->add_option("--n-treated", sim_cfg.n_treated,
                       "subjects assigned to group A");
  simulate
      ->add_option("--p-a", sim_cfg.p_a,
                   "treated fractions to sweep (comma separated)")
      ->delimiter(',');
  simulate->add_option("--reps", sim_cfg.reps, "Monte Carlo replications");
  simulate->add_option("--seed", sim_cfg.seed, "base RNG seed");
  simulate->add_option("--estimators", sim_cfg.estimators, "estimator set")
      ->delimiter(',');
  simulate->add_option("--se", sim_cfg.se_flavors, "SE flavor set")
      ->delimiter(',');
  simulate->add_option("--ci", sim_cfg.ci_methods, "CI method set")
      ->delimiter(',');
  simulate->add_option("--level", sim_cfg.level, "confidence level");
  simulate->add_option("--out", sim_cfg.out,
                       "report file (default: stdout)");
  simulate->add_option("--threads", sim_cfg.threads,
                       "worker threads (never changes the report bytes)");

  randex::cli::AsymptoticsConfig asym_cfg;
  auto* asym = app.add_subcommand(
      "asymptotics", "Large-sample variances, gaps, and bias leading terms");
  asym->add_option("--population", asym_cfg.population, "population CSV")
      ->required();
  asym->add_option("--p-a", asym_cfg.p_a, "treated fractions")
      ->delimiter(',');
  asym->add_option("--format", asym_cfg.format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));

  randex::cli::EnumerateConfig enum_cfg;
  auto* enumerate = app.add_subcommand(
      "enumerate", "Exact randomization distribution over all assignments");
  enumerate->add_option("--population", enum_cfg.population, "population CSV")
      ->required();
  enumerate->add_option("--n-treated", enum_cfg.n_treated,
                        "subjects assigned to group A")
      ->required();
  enumerate->add_option("--estimator", enum_cfg.estimator, "estimator kind");
  enumerate->add_option("--format", enum_cfg.format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));

  randex::cli::BiasConfig bias_cfg;
  auto* bias = app.add_subcommand(
      "bias", "Plug-in estimates of the leading adjustment bias");
  bias->add_option("--input", bias_cfg.input, "input CSV file")->required();
  bias->add_option("--outcome", bias_cfg.outcome, "outcome column")
      ->required();
  bias->add_option("--group", bias_cfg.group, "group-label column")
      ->required();
  bias->add_option("--covariates", bias_cfg.covariates,
                   "covariate columns (exactly one)")
      ->delimiter(',');
  bias->add_option("--contrast", bias_cfg.contrast,
                   "treatment_label,control_label");
  bias->add_option("--se", bias_cfg.se_flavor, "SE flavor for the ratio");
  bias->add_option("--format", bias_cfg.format, "table or json")
      ->check(CLI::IsMember({"table", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*analyze) return randex::cli::cmd_analyze(analyze_cfg, std::cout);
    if (*simulate) return randex::cli::cmd_simulate(sim_cfg, std::cout);
    if (*asym) return randex::cli::cmd_asymptotics(asym_cfg, std::cout);
    if (*enumerate) return randex::cli::cmd_enumerate(enum_cfg, std::cout);
    if (*bias) return randex::cli::cmd_bias(bias_cfg, std::cout);
  } catch (const randex::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.category()) {
      case randex::ErrorCategory::usage: return 2;
      case randex::ErrorCategory::data: return 3;
      case randex::ErrorCategory::numeric: return 4;
    }
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
