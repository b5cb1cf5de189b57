#include "randex/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

namespace randex::simulate {

namespace {

constexpr std::uint64_t kSubsetGuard = 1000000;

struct Kahan {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

std::uint64_t binomial_capped(Eigen::Index n, Eigen::Index k) {
  if (k > n - k) k = n - k;
  std::uint64_t c = 1;
  for (Eigen::Index i = 1; i <= k; ++i) {
    c = c * static_cast<std::uint64_t>(n - k + i) /
        static_cast<std::uint64_t>(i);
    if (c > kSubsetGuard) return kSubsetGuard + 1;
  }
  return c;
}

void check_design(Eigen::Index n, Eigen::Index n_a) {
  if (!(n_a > 0 && n_a < n))
    fail(ErrorKind::invalid_design, "need 0 < n_a < n");
}

Eigen::VectorXd observed_outcomes(const asymptotics::Population& pop,
                                  const std::vector<int>& groups) {
  Eigen::VectorXd y(pop.n());
  for (Eigen::Index i = 0; i < pop.n(); ++i)
    y[i] = groups[static_cast<std::size_t>(i)] == 0 ? pop.a[i] : pop.b[i];
  return y;
}

// two-pass sample mean/SD (divisor count-1) with compensated sums
void mean_sd(const std::vector<double>& values, double& mean, double& sd) {
  const auto m = static_cast<double>(values.size());
  Kahan s;
  for (double v : values) s.add(v);
  mean = s.sum / m;
  Kahan ss;
  for (double v : values) ss.add((v - mean) * (v - mean));
  sd = m > 1.0 ? std::sqrt(ss.sum / (m - 1.0)) : 0.0;
}

}  // namespace

Assignment draw_assignment(Eigen::Index n, Eigen::Index n_a, rng::Rng& gen) {
  check_design(n, n_a);
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (Eigen::Index i = 0; i < n_a; ++i) {
    const auto j =
        i + static_cast<Eigen::Index>(
                gen.next_below(static_cast<std::uint64_t>(n - i)));
    std::swap(idx[static_cast<std::size_t>(i)],
              idx[static_cast<std::size_t>(j)]);
  }
  Assignment asg;
  asg.groups.assign(static_cast<std::size_t>(n), 1);
  for (Eigen::Index i = 0; i < n_a; ++i)
    asg.groups[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])] = 0;
  asg.n_a = n_a;
  asg.n_b = n - n_a;
  return asg;
}

asymptotics::Population generate_lin_population(Eigen::Index n,
                                                rng::Rng& gen) {
  if (n < 2) fail(ErrorKind::invalid_sample_size, "population needs n >= 2");
  Eigen::VectorXd a(n), b(n);
  Eigen::MatrixXd z(n, 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double zi = gen.next_uniform(-4.0, 4.0);
    const double nu = gen.next_normal();
    const double eps = gen.next_normal();
    const double ez = std::exp(zi);
    const double eh = std::exp(0.5 * zi);
    z(i, 0) = zi;
    a[i] = 0.25 * (ez + eh) + nu;
    b[i] = 0.25 * (-ez + eh) + eps;
  }
  return {std::move(a), std::move(b), std::move(z)};
}

SimulationReport run_replications(const asymptotics::Population& pop,
                                  Eigen::Index n_a, std::uint64_t reps,
                                  std::uint64_t seed,
                                  const EngineConfig& config) {
  check_design(pop.n(), n_a);
  if (reps < 1) fail(ErrorKind::invalid_sample_size, "reps must be >= 1");
  if (config.estimator_kinds.empty())
    fail(ErrorKind::out_of_domain, "no estimators requested");
  if (!(config.level > 0.0 && config.level < 1.0))
    fail(ErrorKind::out_of_domain, "level must be in (0,1)");

  using estimators::EstimatorKind;
  using variance::CiMethod;
  using variance::Flavor;

  const auto n_est = config.estimator_kinds.size();
  const auto n_fl = config.se_flavors.size();
  const bool want_normal_ci =
      std::find(config.ci_methods.begin(), config.ci_methods.end(),
                CiMethod::normal) != config.ci_methods.end();
  const bool want_welch_ci =
      std::find(config.ci_methods.begin(), config.ci_methods.end(),
                CiMethod::welch_t) != config.ci_methods.end();

  // replication-indexed buffer: points, then one SE per (estimator,
  // flavor) pair, then the Welch df; a NaN marks a combination that does
  // not apply (neyman SEs off the unadjusted estimator)
  const std::size_t stride = n_est + n_est * n_fl + 1;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> buffer(static_cast<std::size_t>(reps) * stride, nan);
  std::vector<std::uint8_t> failed(static_cast<std::size_t>(reps), 0);

  const estimators::Contrast contrast{0, 1};
  const Eigen::Index n = pop.n();

  auto run_range = [&](std::uint64_t first, std::uint64_t last) {
    for (std::uint64_t r = first; r < last; ++r) {
      rng::Rng gen(seed, r);
      const Assignment asg = draw_assignment(n, n_a, gen);
      double* row = buffer.data() + static_cast<std::size_t>(r) * stride;
      try {
        const estimators::ObservedData data(observed_outcomes(pop, asg.groups),
                                            asg.groups, pop.z, 2);
        for (std::size_t e = 0; e < n_est; ++e) {
          const auto est =
              estimators::estimate(data, config.estimator_kinds[e], contrast);
          row[e] = est.point;
          for (std::size_t f = 0; f < n_fl; ++f) {
            const Flavor flavor = config.se_flavors[f];
            if (flavor == Flavor::neyman &&
                est.kind != EstimatorKind::unadjusted)
              continue;
            row[n_est + e * n_fl + f] =
                variance::ate_standard_error(est, data, flavor);
          }
        }
        if (want_welch_ci) {
          const auto idx_a = data.members_of(0);
          const auto idx_b = data.members_of(1);
          auto var_of = [&](const std::vector<Eigen::Index>& idx) {
            double m = 0.0;
            for (auto i : idx) m += data.y[i];
            m /= static_cast<double>(idx.size());
            double ss = 0.0;
            for (auto i : idx) ss += (data.y[i] - m) * (data.y[i] - m);
            return ss / (static_cast<double>(idx.size()) - 1.0);
          };
          row[stride - 1] = variance::welch_df(
              var_of(idx_a), static_cast<int>(idx_a.size()), var_of(idx_b),
              static_cast<int>(idx_b.size()));
        }
      } catch (const Error&) {
        failed[static_cast<std::size_t>(r)] = 1;
      }
    }
  };

  const int threads = std::max(
      1, std::min<int>(config.threads, static_cast<int>(std::min<std::uint64_t>(
                                           reps, 256))));
  if (threads == 1) {
    run_range(0, reps);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(threads));
    const std::uint64_t chunk =
        (reps + static_cast<std::uint64_t>(threads) - 1) /
        static_cast<std::uint64_t>(threads);
    for (int t = 0; t < threads; ++t) {
      const std::uint64_t first = chunk * static_cast<std::uint64_t>(t);
      const std::uint64_t last = std::min(reps, first + chunk);
      pool.emplace_back([&, t, first, last] {
        try {
          run_range(first, last);
        } catch (...) {
          errors[static_cast<std::size_t>(t)] = std::current_exception();
        }
      });
    }
    for (auto& th : pool) th.join();
    for (auto& err : errors)
      if (err) std::rethrow_exception(err);
  }

  std::uint64_t failures = 0;
  for (auto f : failed) failures += f;
  if (10000 * failures > reps * 10)  // > 0.1%
    fail(ErrorKind::rank_deficient,
         std::to_string(failures) + " of " + std::to_string(reps) +
             " replications failed");

  // sequential reduction, identical regardless of thread count
  SimulationReport report;
  report.n = n;
  report.n_a = n_a;
  report.reps = reps;
  report.seed = seed;
  report.failures = failures;
  report.level = config.level;
  report.true_ate = pop.ate();

  const double z_normal = variance::normal_quantile(0.5 * (1.0 + config.level));
  const double ate = report.true_ate;
  std::vector<double> scratch;
  scratch.reserve(static_cast<std::size_t>(reps));

  auto collect = [&](std::size_t offset) {
    scratch.clear();
    for (std::uint64_t r = 0; r < reps; ++r) {
      if (failed[static_cast<std::size_t>(r)]) continue;
      scratch.push_back(buffer[static_cast<std::size_t>(r) * stride + offset]);
    }
  };

  for (std::size_t e = 0; e < n_est; ++e) {
    EstimatorStats stats;
    stats.kind = config.estimator_kinds[e];
    collect(e);
    mean_sd(scratch, stats.mean, stats.sd);
    stats.bias = stats.mean - ate;
    for (std::size_t f = 0; f < n_fl; ++f) {
      const Flavor flavor = config.se_flavors[f];
      if (flavor == Flavor::neyman && stats.kind != EstimatorKind::unadjusted)
        continue;
      SeStats se_stats;
      se_stats.flavor = flavor;
      const std::size_t se_off = n_est + e * n_fl + f;
      collect(se_off);
      mean_sd(scratch, se_stats.mean_se, se_stats.sd_se);

      auto add_ci = [&](CiMethod method) {
        CiStats ci;
        ci.method = method;
        Kahan covered, width;
        std::uint64_t used = 0;
        for (std::uint64_t r = 0; r < reps; ++r) {
          if (failed[static_cast<std::size_t>(r)]) continue;
          const double* row =
              buffer.data() + static_cast<std::size_t>(r) * stride;
          const double point = row[e];
          const double se = row[se_off];
          const double q =
              method == CiMethod::normal
                  ? z_normal
                  : variance::student_t_quantile(0.5 * (1.0 + config.level),
                                                 row[stride - 1]);
          covered.add(std::abs(point - ate) <= q * se ? 1.0 : 0.0);
          width.add(2.0 * q * se);
          ++used;
        }
        if (used > 0) {
          ci.coverage = covered.sum / static_cast<double>(used);
          ci.mean_width = width.sum / static_cast<double>(used);
        }
        se_stats.cis.push_back(ci);
      };

      if (want_normal_ci) add_ci(CiMethod::normal);
      if (want_welch_ci && stats.kind == EstimatorKind::unadjusted &&
          flavor == Flavor::hc2)
        add_ci(CiMethod::welch_t);
      stats.ses.push_back(std::move(se_stats));
    }
    report.estimators.push_back(std::move(stats));
  }
  return report;
}

EnumerationSummary enumerate_assignments(const asymptotics::Population& pop,
                                         Eigen::Index n_a,
                                         estimators::EstimatorKind kind) {
  const Eigen::Index n = pop.n();
  check_design(n, n_a);
  const std::uint64_t total = binomial_capped(n, n_a);
  if (total > kSubsetGuard)
    fail(ErrorKind::too_many_subsets,
         "C(n, n_a) exceeds the enumeration guard of 10^6");

  const estimators::Contrast contrast{0, 1};
  std::vector<Eigen::Index> pick(static_cast<std::size_t>(n_a));
  std::iota(pick.begin(), pick.end(), Eigen::Index{0});
  std::vector<double> values;
  values.reserve(total);

  while (true) {
    std::vector<int> groups(static_cast<std::size_t>(n), 1);
    for (auto i : pick) groups[static_cast<std::size_t>(i)] = 0;
    const estimators::ObservedData data(observed_outcomes(pop, groups),
                                        groups, pop.z, 2);
    values.push_back(estimators::estimate(data, kind, contrast).point);

    // next combination in lexicographic order
    Eigen::Index pos = n_a - 1;
    while (pos >= 0 &&
           pick[static_cast<std::size_t>(pos)] == n - n_a + pos)
      --pos;
    if (pos < 0) break;
    ++pick[static_cast<std::size_t>(pos)];
    for (Eigen::Index j = pos + 1; j < n_a; ++j)
      pick[static_cast<std::size_t>(j)] =
          pick[static_cast<std::size_t>(j - 1)] + 1;
  }

  EnumerationSummary summary;
  summary.count = values.size();
  double mean = 0.0, sd = 0.0;
  mean_sd(values, mean, sd);
  summary.mean = mean;
  // exact distribution variance, divisor = number of assignments
  Kahan ss;
  for (double v : values) ss.add((v - mean) * (v - mean));
  summary.variance = ss.sum / static_cast<double>(values.size());
  summary.min = *std::min_element(values.begin(), values.end());
  summary.max = *std::max_element(values.begin(), values.end());
  return summary;
}

}  // namespace randex::simulate
