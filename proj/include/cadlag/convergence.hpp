#pragma once

// Weak-convergence diagnostics for sequences of finitely supported laws.

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "cadlag/laws.hpp"
#include "cadlag/metrics.hpp"
#include "cadlag/tightness.hpp"

namespace cadlag {

/// Finite set of evaluation times; contains T on a finite horizon.
class DenseGrid {
 public:
  DenseGrid(std::vector<double> times, const TimeHorizon& horizon);
  const std::vector<double>& times() const noexcept { return times_; }

 private:
  std::vector<double> times_;
};

/// max over products prod_j g_j(X_{t_j}) with t_j in F, g_j in {1, atan x^i, atan^2 x^i}
/// and at most three non-constant factors, of |E_Q1 f - E_Q2 f|.
double fdd_gap(const DiscreteProcessLaw& Q1, const DiscreteProcessLaw& Q2, std::span<const double> F);

/// Human-readable description of the fdd test-function library.
std::string fdd_library_description();

double weakstar_gap(const DiscreteProcessLaw& Q1, const DiscreteProcessLaw& Q2,
                    std::span<const MzFunctional> fs);

struct ConvergenceReport {
  std::vector<double> fdd_gaps;
  std::vector<double> functional_gaps;
  bool fdd_converged;
  bool functional_converged;
  bool converged;
  Classification limit_classification;
};

/// Verdict: both gap sequences are below tol on the last ceil(N/2) indices.
ConvergenceReport converges(std::span<const DiscreteProcessLaw> sequence, const DiscreteProcessLaw& limit,
                            const DenseGrid& D, std::span<const MzFunctional> fs, double tol);

struct StabilityConfig {
  std::vector<double> c_grid{1, 2, 4, 8};
  Threshold threshold{8, 0.05};
  std::vector<double> t_list;
  std::vector<LevelPair> levels;
  UTOptions ut;
  double tol = 1e-9;
};

struct PropositionVerdict {
  bool hypotheses;
  bool conclusion;
  std::string status;
};

struct StabilityReport {
  ConditionReport ut_report;
  ConditionReport ub_report;
  ConditionReport ui_report;
  ConditionReport limit_ut_report;
  Classification limit_classification;
  double sequence_mean_abs;  ///< sup over the sequence and grid times of E|X_t|
  PropositionVerdict semimartingale;    ///< UT carries over to the limit
  PropositionVerdict quasimartingale;   ///< UB bound carries over
  PropositionVerdict supermartingale;   ///< UI plus supermartingale sequence
};

StabilityReport stability_suite(std::span<const DiscreteProcessLaw> sequence, const DiscreteProcessLaw& limit,
                                const StabilityConfig& config);

/// Smallest observed-value envelope whose complement has mass <= eps under every law.
CompactnessProfile tightness_profile(std::span<const DiscreteProcessLaw> family, double eps,
                                     std::span<const double> t_list, std::span<const LevelPair> levels);

}  // namespace cadlag
