#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace randex::cli {

struct AnalysisConfig {
  std::string input;
  std::string outcome;
  std::string group;
  std::vector<std::string> covariates;
  std::vector<std::string> estimators = {"unadjusted", "adjusted", "interact"};
  std::vector<std::string> se_flavors = {"hc2"};
  std::string ci_method = "normal";
  double level = 0.95;
  std::string format = "table";
  std::string contrast;  // "treatment,control"; empty = two most frequent
};

struct SimulationConfig {
  std::string population;  // CSV path; empty when using the builtin DGP
  std::string dgp;         // builtin DGP name ("lin2013")
  std::uint64_t n = 1000;  // builtin population size
  std::int64_t n_treated = -1;  // exact n_A; or use the p_a sweep
  std::vector<double> p_a;
  std::uint64_t reps = 1000;
  std::uint64_t seed = 0;
  std::vector<std::string> estimators = {"unadjusted", "adjusted", "interact",
                                         "tyranny"};
  std::vector<std::string> se_flavors = {"hc2"};
  std::vector<std::string> ci_methods = {"normal"};
  double level = 0.95;
  std::string out;  // report file; empty = stdout
  int threads = 1;
};

struct AsymptoticsConfig {
  std::string population;
  std::vector<double> p_a = {0.5};
  std::string format = "table";
};

struct EnumerateConfig {
  std::string population;
  std::int64_t n_treated = 1;
  std::string estimator = "unadjusted";
  std::string format = "table";
};

struct BiasConfig {
  std::string input;
  std::string outcome;
  std::string group;
  std::vector<std::string> covariates;
  std::string contrast;
  std::string se_flavor = "hc2";
  std::string format = "table";
};

// Each command writes its report to `out` and returns 0; failures are
// reported by throwing randex::Error (the main driver maps categories to
// exit codes 2/3/4).
int cmd_analyze(const AnalysisConfig& config, std::ostream& out);
int cmd_simulate(const SimulationConfig& config, std::ostream& out);
int cmd_asymptotics(const AsymptoticsConfig& config, std::ostream& out);
int cmd_enumerate(const EnumerateConfig& config, std::ostream& out);
int cmd_bias(const BiasConfig& config, std::ostream& out);

}  // namespace randex::cli
