#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <utility>

#include <json.hpp>

#include "csv.hpp"
#include "randex/asymptotics.hpp"
#include "randex/error.hpp"
#include "randex/estimators.hpp"
#include "randex/simulate.hpp"
#include "randex/variance.hpp"

namespace randex::cli {

namespace {

using json = nlohmann::json;
using estimators::EstimatorKind;
using variance::CiMethod;
using variance::Flavor;

std::string fmt6(double v) {
  if (v == 0.0) v = 0.0;  // avoid printing "-0"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

EstimatorKind kind_from(const std::string& name) {
  if (name == "unadjusted") return EstimatorKind::unadjusted;
  if (name == "adjusted") return EstimatorKind::adjusted;
  if (name == "interact") return EstimatorKind::interact;
  if (name == "tyranny") return EstimatorKind::tyranny;
  if (name == "targeted_ancova") return EstimatorKind::targeted_ancova;
  fail(ErrorKind::out_of_domain, "unknown estimator '" + name + "'");
}

Flavor flavor_from(const std::string& name) {
  if (name == "classic") return Flavor::classic;
  if (name == "hc0") return Flavor::hc0;
  if (name == "hc1") return Flavor::hc1;
  if (name == "hc2") return Flavor::hc2;
  if (name == "hc3") return Flavor::hc3;
  if (name == "neyman") return Flavor::neyman;
  fail(ErrorKind::out_of_domain, "unknown SE flavor '" + name + "'");
}

CiMethod method_from(const std::string& name) {
  if (name == "normal") return CiMethod::normal;
  if (name == "welch_t") return CiMethod::welch_t;
  fail(ErrorKind::out_of_domain, "unknown CI method '" + name + "'");
}

void check_level(double level) {
  if (!(level > 0.0 && level < 1.0))
    fail(ErrorKind::out_of_domain, "--level must be in (0,1)");
}

void print_table(std::ostream& out, const std::vector<std::string>& headers,
                 const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(headers.size());
  for (std::size_t j = 0; j < headers.size(); ++j) width[j] = headers[j].size();
  for (const auto& row : rows)
    for (std::size_t j = 0; j < row.size(); ++j)
      width[j] = std::max(width[j], row[j].size());
  auto print_row = [&](const std::vector<std::string>& row) {
    for (std::size_t j = 0; j < row.size(); ++j) {
      out << row[j];
      if (j + 1 < row.size())
        out << std::string(width[j] - row[j].size() + 2, ' ');
    }
    out << '\n';
  };
  print_row(headers);
  for (const auto& row : rows) print_row(row);
}

struct LoadedData {
  estimators::ObservedData data;
  estimators::Contrast contrast;
  std::vector<std::string> labels;  // group id -> label
};

LoadedData load_observed(const std::string& input, const std::string& outcome,
                         const std::string& group,
                         const std::vector<std::string>& covariates,
                         const std::string& contrast_spec) {
  const CsvTable table = read_csv(input);
  const int col_y = table.require_column(outcome);
  const int col_g = table.require_column(group);
  std::vector<int> col_z;
  col_z.reserve(covariates.size());
  for (const auto& name : covariates)
    col_z.push_back(table.require_column(name));

  const auto n = static_cast<Eigen::Index>(table.rows.size());
  Eigen::VectorXd y(n);
  Eigen::MatrixXd z(n, static_cast<Eigen::Index>(col_z.size()));
  std::vector<int> ids(static_cast<std::size_t>(n));
  std::vector<std::string> labels;
  std::vector<std::size_t> counts;

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    y[i] = parse_cell(row[static_cast<std::size_t>(col_y)],
                      static_cast<std::size_t>(i), outcome);
    for (std::size_t k = 0; k < col_z.size(); ++k)
      z(i, static_cast<Eigen::Index>(k)) =
          parse_cell(row[static_cast<std::size_t>(col_z[k])],
                     static_cast<std::size_t>(i), covariates[k]);
    const std::string& label = row[static_cast<std::size_t>(col_g)];
    const auto pos = std::find(labels.begin(), labels.end(), label);
    if (pos == labels.end()) {
      ids[static_cast<std::size_t>(i)] = static_cast<int>(labels.size());
      labels.push_back(label);
      counts.push_back(1);
    } else {
      const auto id = static_cast<int>(pos - labels.begin());
      ids[static_cast<std::size_t>(i)] = id;
      ++counts[static_cast<std::size_t>(id)];
    }
  }
  if (labels.size() < 2)
    fail(ErrorKind::bad_data,
         "group column '" + group + "' has fewer than 2 distinct labels");

  estimators::Contrast contrast;
  if (contrast_spec.empty()) {
    // default: the two most frequent labels, ties broken alphabetically
    std::vector<int> order(labels.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
      const auto cx = counts[static_cast<std::size_t>(x)];
      const auto cy = counts[static_cast<std::size_t>(y)];
      if (cx != cy) return cx > cy;
      return labels[static_cast<std::size_t>(x)] <
             labels[static_cast<std::size_t>(y)];
    });
    contrast = {order[0], order[1]};
  } else {
    const auto comma = contrast_spec.find(',');
    if (comma == std::string::npos)
      fail(ErrorKind::out_of_domain,
           "--contrast takes 'treatment_label,control_label'");
    const std::string la = contrast_spec.substr(0, comma);
    const std::string lb = contrast_spec.substr(comma + 1);
    auto id_of = [&](const std::string& label) {
      const auto pos = std::find(labels.begin(), labels.end(), label);
      if (pos == labels.end())
        fail(ErrorKind::bad_data,
             "label '" + label + "' does not appear in column '" + group +
                 "'");
      return static_cast<int>(pos - labels.begin());
    };
    contrast = {id_of(la), id_of(lb)};
  }

  return {estimators::ObservedData(std::move(y), std::move(ids), std::move(z),
                                   static_cast<int>(labels.size())),
          contrast, std::move(labels)};
}

std::optional<double> welch_df_for(const estimators::ObservedData& data,
                                   estimators::Contrast contrast) {
  auto var_of = [&](const std::vector<Eigen::Index>& idx) {
    double m = 0.0;
    for (auto i : idx) m += data.y[i];
    m /= static_cast<double>(idx.size());
    double ss = 0.0;
    for (auto i : idx) ss += (data.y[i] - m) * (data.y[i] - m);
    return ss / (static_cast<double>(idx.size()) - 1.0);
  };
  const auto idx_a = data.members_of(contrast.a);
  const auto idx_b = data.members_of(contrast.b);
  return variance::welch_df(var_of(idx_a), static_cast<int>(idx_a.size()),
                            var_of(idx_b), static_cast<int>(idx_b.size()));
}

json asymptotic_json(const asymptotics::AsymptoticReport& rep) {
  json sd = json::object();
  json nv = json::object();
  for (const auto& entry : rep.entries) {
    sd[estimators::to_string(entry.kind)] = entry.sd;
    nv[estimators::to_string(entry.kind)] = entry.normalized_variance;
  }
  json block = {
      {"sd", sd},
      {"normalized_variance", nv},
      {"gaps",
       {{"unadjusted_minus_interact", rep.gaps.unadjusted_minus_interact},
        {"adjusted_minus_interact", rep.gaps.adjusted_minus_interact}}},
      {"sandwich_limits",
       {{"adjusted", rep.sandwich.adjusted},
        {"interact", rep.sandwich.interact}}}};
  if (rep.bias_adjusted && rep.bias_interact)
    block["bias_leading"] = {{"adjusted", *rep.bias_adjusted},
                             {"interact", *rep.bias_interact}};
  return block;
}

json simulation_json(const simulate::SimulationReport& rep) {
  json jests = json::array();
  for (const auto& est : rep.estimators) {
    json jses = json::array();
    for (const auto& se : est.ses) {
      json jcis = json::array();
      for (const auto& ci : se.cis)
        jcis.push_back({{"method", variance::to_string(ci.method)},
                        {"coverage", ci.coverage},
                        {"mean_width", ci.mean_width}});
      jses.push_back({{"flavor", variance::to_string(se.flavor)},
                      {"mean_se", se.mean_se},
                      {"sd_se", se.sd_se},
                      {"ci", jcis}});
    }
    jests.push_back({{"kind", estimators::to_string(est.kind)},
                     {"mean", est.mean},
                     {"sd", est.sd},
                     {"bias", est.bias},
                     {"se", jses}});
  }
  return {{"n_a", rep.n_a},
          {"p_a", static_cast<double>(rep.n_a) / static_cast<double>(rep.n)},
          {"failures", rep.failures},
          {"estimators", jests}};
}

void write_report(const json& report, const std::string& out_path,
                  std::ostream& fallback) {
  if (out_path.empty()) {
    fallback << report.dump(2) << '\n';
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) fail(ErrorKind::bad_data, "cannot write '" + out_path + "'");
  file << report.dump(2) << '\n';
}

}  // namespace

int cmd_analyze(const AnalysisConfig& config, std::ostream& out) {
  check_level(config.level);
  const CiMethod method = method_from(config.ci_method);
  if (config.estimators.empty())
    fail(ErrorKind::out_of_domain, "--estimator list is empty");
  const LoadedData loaded =
      load_observed(config.input, config.outcome, config.group,
                    config.covariates, config.contrast);
  const auto& data = loaded.data;

  std::optional<double> df;
  if (method == CiMethod::welch_t)
    df = welch_df_for(data, loaded.contrast);

  json jests = json::array();
  std::vector<std::vector<std::string>> rows;
  for (const auto& name : config.estimators) {
    const EstimatorKind kind = kind_from(name);
    if (method == CiMethod::welch_t && kind != EstimatorKind::unadjusted)
      fail(ErrorKind::out_of_domain,
           "welch_t intervals pair with the unadjusted estimator");
    const auto est = estimators::estimate(data, kind, loaded.contrast);
    json jses = json::array();
    for (const auto& fname : config.se_flavors) {
      const Flavor flavor = flavor_from(fname);
      if (flavor == Flavor::neyman && kind != EstimatorKind::unadjusted)
        continue;  // documented pairing rule
      const double se = variance::ate_standard_error(est, data, flavor);
      const auto ci = variance::confidence_interval(est.point, se, method,
                                                    config.level, df, flavor);
      rows.push_back({name, fname, fmt6(est.point), fmt6(se), fmt6(ci.lower),
                      fmt6(ci.upper)});
      jses.push_back({{"flavor", fname},
                      {"se", se},
                      {"ci",
                       {{"lower", ci.lower},
                        {"upper", ci.upper},
                        {"level", ci.level},
                        {"method", variance::to_string(ci.method)}}}});
    }
    jests.push_back(
        {{"estimator", name}, {"point", est.point}, {"se", jses}});
  }

  const std::string label_a =
      loaded.labels[static_cast<std::size_t>(loaded.contrast.a)];
  const std::string label_b =
      loaded.labels[static_cast<std::size_t>(loaded.contrast.b)];
  if (config.format == "json") {
    json report = {{"n", data.n()},
                   {"n_groups", data.n_groups},
                   {"contrast", {{"treatment", label_a}, {"control", label_b}}},
                   {"level", config.level},
                   {"ci_method", config.ci_method},
                   {"estimates", jests}};
    if (df) report["welch_df"] = *df;
    out << report.dump(2) << '\n';
  } else {
    out << "contrast: " << label_a << " - " << label_b << "  (n=" << data.n()
        << ", level=" << fmt6(config.level) << ", ci=" << config.ci_method
        << ")\n\n";
    print_table(out, {"estimator", "se_flavor", "point", "se", "ci_lower",
                      "ci_upper"},
                rows);
  }
  return 0;
}

int cmd_simulate(const SimulationConfig& config, std::ostream& out) {
  check_level(config.level);
  if (config.population.empty() == config.dgp.empty())
    fail(ErrorKind::out_of_domain,
         "choose exactly one of --population and --dgp");
  if ((config.n_treated >= 0) == !config.p_a.empty())
    fail(ErrorKind::out_of_domain,
         "choose exactly one of --n-treated and --p-a");

  std::optional<asymptotics::Population> pop;
  std::string source;
  if (!config.population.empty()) {
    pop.emplace(read_population(config.population));
    source = config.population;
  } else {
    if (config.dgp != "lin2013")
      fail(ErrorKind::out_of_domain,
           "unknown DGP '" + config.dgp + "' (available: lin2013)");
    rng::Rng gen(config.seed, simulate::kPopulationStream);
    pop.emplace(simulate::generate_lin_population(
        static_cast<Eigen::Index>(config.n), gen));
    source = "builtin:lin2013";
  }

  std::vector<Eigen::Index> designs;
  if (config.n_treated >= 0) {
    designs.push_back(static_cast<Eigen::Index>(config.n_treated));
  } else {
    for (double p : config.p_a) {
      if (!(p > 0.0 && p < 1.0))
        fail(ErrorKind::out_of_domain, "--p-a values must be in (0,1)");
      designs.push_back(static_cast<Eigen::Index>(
          std::llround(p * static_cast<double>(pop->n()))));
    }
  }

  simulate::EngineConfig engine;
  for (const auto& name : config.estimators)
    engine.estimator_kinds.push_back(kind_from(name));
  for (const auto& name : config.se_flavors)
    engine.se_flavors.push_back(flavor_from(name));
  for (const auto& name : config.ci_methods)
    engine.ci_methods.push_back(method_from(name));
  engine.level = config.level;
  engine.threads = config.threads;

  json jdesigns = json::array();
  for (const Eigen::Index n_a : designs) {
    const auto rep =
        simulate::run_replications(*pop, n_a, config.reps, config.seed, engine);
    json block = simulation_json(rep);
    block["asymptotic"] = asymptotic_json(asymptotics::asymptotic_report(
        *pop, static_cast<double>(n_a) / static_cast<double>(pop->n())));
    jdesigns.push_back(std::move(block));
  }

  // config echo excludes the thread count: reports must be byte-identical
  // across thread counts
  json report = {{"config",
                  {{"population", source},
                   {"n", pop->n()},
                   {"reps", config.reps},
                   {"seed", config.seed},
                   {"level", config.level},
                   {"estimators", config.estimators},
                   {"se", config.se_flavors},
                   {"ci", config.ci_methods}}},
                 {"true_ate", pop->ate()},
                 {"designs", jdesigns}};
  write_report(report, config.out, out);
  return 0;
}

int cmd_asymptotics(const AsymptoticsConfig& config, std::ostream& out) {
  const asymptotics::Population pop = read_population(config.population);
  json jreports = json::array();
  std::vector<std::vector<std::string>> rows;
  for (double p : config.p_a) {
    const auto rep = asymptotics::asymptotic_report(pop, p);
    json block = asymptotic_json(rep);
    block["p_a"] = p;
    jreports.push_back(std::move(block));
    for (const auto& entry : rep.entries)
      rows.push_back({fmt6(p), estimators::to_string(entry.kind),
                      fmt6(entry.normalized_variance), fmt6(entry.sd),
                      fmt6(entry.sd * 1000.0)});
  }
  if (config.format == "json") {
    json report = {{"n", pop.n()},
                   {"k", pop.k()},
                   {"true_ate", pop.ate()},
                   {"reports", jreports}};
    out << report.dump(2) << '\n';
  } else {
    out << "population: n=" << pop.n() << ", k=" << pop.k()
        << ", ate=" << fmt6(pop.ate()) << "\n\n";
    print_table(out,
                {"p_a", "estimator", "normalized_variance", "sd", "sd_x1000"},
                rows);
    for (double p : config.p_a) {
      const auto rep = asymptotics::asymptotic_report(pop, p);
      out << "\np_a=" << fmt6(p) << "  gaps: unadjusted-interact="
          << fmt6(rep.gaps.unadjusted_minus_interact)
          << ", adjusted-interact=" << fmt6(rep.gaps.adjusted_minus_interact)
          << "\n  sandwich limits: adjusted=" << fmt6(rep.sandwich.adjusted)
          << ", interact=" << fmt6(rep.sandwich.interact) << '\n';
      if (rep.bias_adjusted && rep.bias_interact)
        out << "  bias leading: adjusted=" << fmt6(*rep.bias_adjusted)
            << ", interact=" << fmt6(*rep.bias_interact) << '\n';
    }
  }
  return 0;
}

int cmd_enumerate(const EnumerateConfig& config, std::ostream& out) {
  const asymptotics::Population pop = read_population(config.population);
  const EstimatorKind kind = kind_from(config.estimator);
  const auto n_a = static_cast<Eigen::Index>(config.n_treated);
  const auto summary = simulate::enumerate_assignments(pop, n_a, kind);
  const double ate = pop.ate();
  const double exact_bias = summary.mean - ate;

  std::optional<double> leading;
  if (pop.k() == 1) {
    if (kind == EstimatorKind::adjusted)
      leading = asymptotics::bias_leading_adjusted(pop);
    else if (kind == EstimatorKind::interact)
      leading = asymptotics::bias_leading_interact(
          pop, static_cast<double>(n_a) / static_cast<double>(pop.n()));
  }

  if (config.format == "json") {
    json report = {{"estimator", config.estimator},
                   {"n", pop.n()},
                   {"n_a", n_a},
                   {"assignments", summary.count},
                   {"mean", summary.mean},
                   {"variance", summary.variance},
                   {"min", summary.min},
                   {"max", summary.max},
                   {"true_ate", ate},
                   {"exact_bias", exact_bias}};
    if (leading) report["bias_leading"] = *leading;
    out << report.dump(2) << '\n';
  } else {
    out << "estimator: " << config.estimator << "  (n=" << pop.n()
        << ", n_a=" << n_a << ", assignments=" << summary.count << ")\n";
    out << "mean        " << fmt6(summary.mean) << '\n';
    out << "variance    " << fmt6(summary.variance) << '\n';
    out << "min         " << fmt6(summary.min) << '\n';
    out << "max         " << fmt6(summary.max) << '\n';
    out << "true_ate    " << fmt6(ate) << '\n';
    out << "exact_bias  " << fmt6(exact_bias) << '\n';
    if (leading) out << "bias_leading " << fmt6(*leading) << '\n';
  }
  return 0;
}

int cmd_bias(const BiasConfig& config, std::ostream& out) {
  const LoadedData loaded =
      load_observed(config.input, config.outcome, config.group,
                    config.covariates, config.contrast);
  if (loaded.data.k() != 1)
    fail(ErrorKind::multi_covariate_unsupported,
         "bias estimation needs exactly one covariate");

  // keep only the two contrast groups, relabeled treatment=0, control=1
  const auto& data = loaded.data;
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < data.n(); ++i)
    if (data.group[static_cast<std::size_t>(i)] == loaded.contrast.a ||
        data.group[static_cast<std::size_t>(i)] == loaded.contrast.b)
      keep.push_back(i);
  Eigen::VectorXd y(static_cast<Eigen::Index>(keep.size()));
  Eigen::MatrixXd z(static_cast<Eigen::Index>(keep.size()), 1);
  std::vector<int> groups(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) {
    y[static_cast<Eigen::Index>(r)] = data.y[keep[r]];
    z(static_cast<Eigen::Index>(r), 0) = data.z(keep[r], 0);
    groups[r] =
        data.group[static_cast<std::size_t>(keep[r])] == loaded.contrast.a ? 0
                                                                           : 1;
  }
  const estimators::ObservedData sub(std::move(y), std::move(groups),
                                     std::move(z), 2);
  const auto est = asymptotics::bias_estimate_from_sample(sub);

  const Flavor flavor = flavor_from(config.se_flavor);
  const estimators::Contrast contrast{0, 1};
  const auto adj = estimators::ate_adjusted(sub, contrast);
  const auto inter = estimators::ate_interact(sub, contrast);
  const double se_adj = variance::ate_standard_error(adj, sub, flavor);
  const double se_int = variance::ate_standard_error(inter, sub, flavor);
  const double ratio_adj = est.adjusted / se_adj;
  const double ratio_int = est.interact / se_int;
  const bool flag_adj = std::abs(ratio_adj) > 0.1;
  const bool flag_int = std::abs(ratio_int) > 0.1;

  const std::string label_a =
      loaded.labels[static_cast<std::size_t>(loaded.contrast.a)];
  const std::string label_b =
      loaded.labels[static_cast<std::size_t>(loaded.contrast.b)];
  if (config.format == "json") {
    json report = {
        {"contrast", {{"treatment", label_a}, {"control", label_b}}},
        {"n", sub.n()},
        {"se_flavor", config.se_flavor},
        {"adjusted",
         {{"bias_estimate", est.adjusted},
          {"point", adj.point},
          {"se", se_adj},
          {"bias_to_se", ratio_adj},
          {"flagged", flag_adj}}},
        {"interact",
         {{"bias_estimate", est.interact},
          {"point", inter.point},
          {"se", se_int},
          {"bias_to_se", ratio_int},
          {"flagged", flag_int}}}};
    out << report.dump(2) << '\n';
  } else {
    out << "contrast: " << label_a << " - " << label_b << "  (n=" << sub.n()
        << ", se=" << config.se_flavor << ")\n\n";
    print_table(
        out, {"estimator", "bias_estimate", "point", "se", "bias_to_se",
              "flagged"},
        {{"adjusted", fmt6(est.adjusted), fmt6(adj.point), fmt6(se_adj),
          fmt6(ratio_adj), flag_adj ? "yes" : "no"},
         {"interact", fmt6(est.interact), fmt6(inter.point), fmt6(se_int),
          fmt6(ratio_int), flag_int ? "yes" : "no"}});
  }
  return 0;
}

}  // namespace randex::cli
