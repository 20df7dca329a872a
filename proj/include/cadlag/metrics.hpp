#pragma once

// Topology functionals on step paths: the Skorokhod J1 metric (finite horizon and
// half-line) and the Meyer-Zheng functional library.

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "cadlag/paths.hpp"

namespace cadlag {

/// Strictly increasing piecewise-linear bijection of [0,T] with lambda(0)=0, lambda(T)=T.
class TimeChange {
 public:
  TimeChange(std::vector<double> knots, std::vector<double> images);
  static TimeChange identity(double T);

  double operator()(double t) const;
  /// Returns the knot exactly when `s` is one of the knot images.
  double inverse(double s) const;
  double end() const noexcept { return knots_.back(); }
  std::span<const double> knots() const noexcept { return knots_; }
  std::span<const double> images() const noexcept { return images_; }

  /// sup_{s<t} |log((lambda t - lambda s)/(t - s))|, attained at the extreme segment slopes.
  double log_slope_cost() const;

 private:
  std::vector<double> knots_;
  std::vector<double> images_;
};

/// max(log-slope cost of lambda, sup_t ||omega(t) - other(lambda(t))||_inf).
double j1_cost(const CadlagPath& omega, const CadlagPath& other, const TimeChange& lambda);

struct J1Result {
  double distance;
  TimeChange time_change;
  /// True when the matching search covered every monotone jump alignment.
  bool exhaustive;
};

struct J1Options {
  int refinement = 1;
  /// Above this many (node pairs) the alignment DP only links pairs at most
  /// `max_skip` jumps apart on either side.
  std::size_t exhaustive_pair_limit = 1024;
  std::size_t max_skip = 6;
};

/// Upper bound on J1_T; exact over piecewise-linear time changes when `exhaustive`.
J1Result j1_finite_detailed(const CadlagPath& omega, const CadlagPath& other,
                            const J1Options& options = {});
double j1_finite(const CadlagPath& omega, const CadlagPath& other, int refinement = 1);

struct HalfLineJ1 {
  double value;  ///< sum_{r<=r_max} 2^{-r} (1 ^ J1_r)
  double tail;   ///< 2^{-r_max}; the full series lies in [value, value + tail]
};

HalfLineJ1 j1_halfline(const CadlagPath& omega, const CadlagPath& other, int r_max,
                       int refinement = 1);

// ---------------------------------------------------------------------------
// Meyer-Zheng functionals

/// (1/r) * integral_q^{q+r} omega^i(t) dt
struct WindowAverage {
  std::size_t i;
  double q;
  double r;
  bool operator==(const WindowAverage&) const = default;
};

/// integral over the horizon of e^{-kt} arctan(omega^i(t))^power e^{-t} dt
struct ArctanMoment {
  std::size_t i;
  unsigned k;
  int power;  // 1 or 2
  bool operator==(const ArctanMoment&) const = default;
};

/// omega^i(T); finite horizon only.
struct TerminalValue {
  std::size_t i;
  bool operator==(const TerminalValue&) const = default;
};

using MzFunctional = std::variant<WindowAverage, ArctanMoment, TerminalValue>;

/// Closed-form evaluation. On the half-line the arctan moment is integrated exactly
/// past the last breakpoint; see mz_truncation_bound for the T* cut-off error.
double mz_eval(const MzFunctional& f, const CadlagPath& path);

/// (pi/2)^power e^{-(k+1)T*}/(k+1) for ArctanMoment on a half-line horizon, else 0.
double mz_truncation_bound(const MzFunctional& f, const TimeHorizon& horizon);

/// On a finite horizon the set is completed with TerminalValue(i) for every
/// coordinate so the gap separates paths that differ only at T.
std::vector<MzFunctional> with_terminal_values(std::span<const MzFunctional> fs,
                                               const TimeHorizon& horizon, std::size_t d);

double mz_gap(const CadlagPath& omega, const CadlagPath& other, std::span<const MzFunctional> fs);

struct MzConvergenceReport {
  bool converged;
  std::vector<MzFunctional> functionals;  ///< including any added terminal values
  std::vector<std::vector<double>> gaps;  ///< gaps[n][f]
  std::vector<double> max_gaps;           ///< per index
};

/// Verdict: every gap in the last ceil(N/2) elements is below tol.
MzConvergenceReport mz_converges(std::span<const CadlagPath> sequence, const CadlagPath& limit,
                                 std::span<const MzFunctional> fs, double tol);

/// Tail-within-tolerance rule shared by the convergence checkers.
bool tail_within(std::span<const double> gaps, double tol);

}  // namespace cadlag
