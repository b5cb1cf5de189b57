#pragma once

#include <cstdint>
#include <vector>

#include "randex/asymptotics.hpp"
#include "randex/error.hpp"
#include "randex/estimators.hpp"
#include "randex/rng.hpp"
#include "randex/variance.hpp"

namespace randex::simulate {

// Replication r draws its randomness from stream index r, so this
// reserved stream keeps population generation off every replication
// stream even when both share one base seed.
inline constexpr std::uint64_t kPopulationStream = ~0ULL;

struct Assignment {
  std::vector<int> groups;  // 0 = group A, 1 = group B
  Eigen::Index n_a = 0;
  Eigen::Index n_b = 0;
};

// Uniform draw over all C(n, n_a) subsets: partial Fisher-Yates over an
// index vector, first n_a positions -> group A. Throws: invalid_design.
Assignment draw_assignment(Eigen::Index n, Eigen::Index n_a, rng::Rng& gen);

// Benchmark population: z ~ U[-4,4], a = (e^z + e^{z/2})/4 + nu,
// b = (-e^z + e^{z/2})/4 + eps, with nu, eps independent standard
// normals. Per subject the draw order is z, nu, eps. Throws:
// invalid_sample_size.
asymptotics::Population generate_lin_population(Eigen::Index n,
                                                rng::Rng& gen);

struct EngineConfig {
  std::vector<estimators::EstimatorKind> estimator_kinds;
  std::vector<variance::Flavor> se_flavors;
  std::vector<variance::CiMethod> ci_methods;
  double level = 0.95;
  int threads = 1;
};

struct CiStats {
  variance::CiMethod method = variance::CiMethod::normal;
  double coverage = 0.0;
  double mean_width = 0.0;
};

struct SeStats {
  variance::Flavor flavor = variance::Flavor::hc2;
  double mean_se = 0.0;
  double sd_se = 0.0;
  std::vector<CiStats> cis;
};

struct EstimatorStats {
  estimators::EstimatorKind kind = estimators::EstimatorKind::unadjusted;
  double mean = 0.0;
  double sd = 0.0;  // sample SD over successful replications
  double bias = 0.0;
  std::vector<SeStats> ses;
};

struct SimulationReport {
  Eigen::Index n = 0;
  Eigen::Index n_a = 0;
  std::uint64_t reps = 0;
  std::uint64_t seed = 0;
  std::uint64_t failures = 0;
  double level = 0.95;
  double true_ate = 0.0;
  std::vector<EstimatorStats> estimators;
};

// Monte Carlo engine. For each replication r in [0, reps): an assignment
// is drawn from stream r of the base seed, Y_i = a_i (T_i = A) or b_i,
// and every requested estimator/SE/CI is evaluated. Replications may run
// on several threads, but per-replication results land in a
// replication-indexed buffer that is reduced sequentially with
// compensated summation, so the report is bitwise identical for a fixed
// seed regardless of thread count.
//
// Pairing rules: the neyman flavor is evaluated only for the unadjusted
// estimator, and the welch_t interval only for unadjusted x hc2 (with
// Welch-Satterthwaite df from the two group variances); other
// combinations are omitted rather than errors.
//
// Replications whose estimator throws (e.g. a rank-deficient draw) are
// excluded from all aggregates and counted; more than 0.1% failures
// aborts. Throws: invalid_design, invalid_sample_size, rank_deficient.
SimulationReport run_replications(const asymptotics::Population& pop,
                                  Eigen::Index n_a, std::uint64_t reps,
                                  std::uint64_t seed,
                                  const EngineConfig& config);

struct EnumerationSummary {
  double mean = 0.0;
  double variance = 0.0;  // over all assignments (divisor = count)
  double min = 0.0;
  double max = 0.0;
  std::uint64_t count = 0;
};

// Exact randomization distribution of one estimator: evaluates every one
// of the C(n, n_a) assignments in lexicographic order. Throws:
// too_many_subsets (> 10^6), invalid_design, plus anything the estimator
// throws (nothing is skipped here; this is an oracle).
EnumerationSummary enumerate_assignments(const asymptotics::Population& pop,
                                         Eigen::Index n_a,
                                         estimators::EstimatorKind kind);

}  // namespace randex::simulate
