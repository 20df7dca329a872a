#pragma once

// Family-level tightness conditions (UT), (UB), (UI), (US), the worst-case
// integrands behind them, the weak-type bound b = 2(a+1)d, and compact-set mass.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cadlag/laws.hpp"

namespace cadlag {

enum class Condition { UT, UB, UI, US };

std::string to_string(Condition c);

struct CurvePoint {
  double c;
  double value;
};

struct Curve {
  std::string name;
  std::vector<CurvePoint> points;  ///< c increasing

  /// Value at the largest grid c <= x. DomainError when x is below the grid.
  double at(double x) const;
};

struct Offender {
  std::size_t law;
  double t;
  double value;
};

struct ConditionReport {
  Condition condition;
  std::string statistic;  ///< definition of what the curves measure
  std::vector<Curve> curves;
  double scalar = 0.0;    ///< UB statistic; for tail conditions the max curve value at c_max
  double c_max = 0.0;
  double eps = 0.0;
  bool pass = false;
  bool lower_bound = false;         ///< the statistic is a certified lower bound on the true sup
  std::vector<Offender> offenders;  ///< worst (t, value) per law, sorted by value descending
  std::string note;
};

struct Threshold {
  double c_max;
  double eps;
};

using LevelPair = std::pair<double, double>;

/// Rational pairs q < r from {-2, -1, -0.5, 0, 0.5, 1, 2}.
std::vector<LevelPair> default_levels();

ConditionReport check_UB(std::span<const DiscreteProcessLaw> family);

ConditionReport check_UI(std::span<const DiscreteProcessLaw> family, std::span<const double> c_grid,
                         Threshold verdict);

/// Hitting integrands per coordinate at level c, crossing integrands with up to
/// m_max crossings per level pair and coordinate, and the sign integrand at t.
std::vector<ElementaryIntegrand> worstcase_integrands(const DiscreteProcessLaw& Q, double t, double c,
                                                      std::span<const LevelPair> levels,
                                                      std::size_t m_max);

/// sum_{k <= m} 1_{]sigma_k ^ t, tau_k ^ t]} on coordinate i for levels a < b.
ElementaryIntegrand crossing_integrand(const DiscreteProcessLaw& Q, std::size_t i, double t,
                                       double a, double b, std::size_t m);

struct UTOptions {
  std::size_t extra_random = 0;
  std::uint64_t seed = 0;
  /// Enumerate every extreme integrand when there are at most this many free
  /// coefficients; 0 disables enumeration.
  std::size_t max_bits = 16;
};

/// Times in t_list that are not grid times of a law are replaced by the last
/// grid time before them; an empty t_list means every grid time.
ConditionReport check_UT_empirical(std::span<const DiscreteProcessLaw> family,
                                   std::span<const double> c_grid, std::span<const double> t_list,
                                   std::span<const LevelPair> levels, const UTOptions& options,
                                   Threshold verdict);

ConditionReport check_US(std::span<const DiscreteProcessLaw> family, std::span<const double> t_list,
                         std::span<const LevelPair> levels, std::span<const double> c_grid,
                         Threshold verdict);

class BoundConstants {
 public:
  BoundConstants(double a, std::size_t d);
  double a() const noexcept { return a_; }
  std::size_t d() const noexcept { return d_; }
  double b() const noexcept { return 2.0 * (a_ + 1.0) * static_cast<double>(d_); }

 private:
  double a_;
  std::size_t d_;
};

struct BurkholderResult {
  double lhs;    ///< Q(|(H o X)_t| > c)
  double rhs;    ///< (b/c)(E|X_t| + sum_i Var_t(X^i))
  double ratio;  ///< lhs * c / (E|X_t| + sum_i Var_t(X^i))
  bool holds;
  bool decomposition_step_ok;
  /// Smallest a for which lhs <= rhs would hold on this instance.
  double minimal_a;
};

BurkholderResult burkholder_check(const DiscreteProcessLaw& Q, const ElementaryIntegrand& H, double t,
                                  double c, const BoundConstants& constants);

/// Q(sup |X^i| on [0,t] > c) and Q(|X^i_{tau ^ t}| > c) for the hitting integrand; equal on step laws.
std::pair<double, double> hitting_identity(const DiscreteProcessLaw& Q, std::size_t i, double t, double c);

/// Q(N^{a,b}(X^i on [0,t]) > c) and Q(|(H^m o X^i)_t| > a^+ + c(b - a)) with m = ceil(c) + 1.
std::pair<double, double> crossing_tail(const DiscreteProcessLaw& Q, std::size_t i, double t, double a,
                                        double b, double c);

/// Non-negative, non-decreasing step function on the horizon; values may be +inf.
class StepBound {
 public:
  StepBound(std::vector<double> breakpoints, std::vector<double> values);
  static StepBound constant(double v) { return StepBound({0.0}, {v}); }
  double operator()(double t) const;
  const std::vector<double>& breakpoints() const noexcept { return breakpoints_; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> breakpoints_;
  std::vector<double> values_;
};

struct UpcrossingBound {
  std::size_t i;
  double q;
  double r;
  StepBound bound;
};

struct CompactnessProfile {
  std::vector<StepBound> sup_bound;  ///< per coordinate
  std::vector<UpcrossingBound> upcrossing_bounds;
};

/// sup_norm and N^{a,b} of coordinate i restricted to [0,t].
double restricted_sup(const CadlagPath& path, std::size_t i, double t);
std::size_t restricted_upcrossings(const CadlagPath& path, std::size_t i, double t, double a, double b);

/// Total weight of atoms outside the profile's product set at some t in t_list.
double compact_mass(const DiscreteProcessLaw& Q, const CompactnessProfile& profile,
                    std::span<const double> t_list);

}  // namespace cadlag
