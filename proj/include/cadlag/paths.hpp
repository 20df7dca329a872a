#pragma once

// Exact d-dimensional cadlag step paths on [0,T] or on a truncated half-line.
//
// A coordinate is a breakpoint sequence 0 = s_0 < s_1 < ... < s_m with values
// v_0, ..., v_m; the coordinate equals v_j on [s_j, s_{j+1}) and v_m from s_m
// to the end of the horizon. Construction merges equal adjacent values, so
// every stored coordinate is canonical.

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cadlag {

enum class HorizonKind { finite, half_line };

class TimeHorizon {
 public:
  static TimeHorizon finite(double T);
  /// [0, inf); `truncation` is the T* used only where a numerical cut-off is needed.
  static TimeHorizon half_line(double truncation);

  HorizonKind kind() const noexcept { return kind_; }
  bool is_finite() const noexcept { return kind_ == HorizonKind::finite; }
  /// T for a finite horizon, T* for the half-line.
  double end() const noexcept { return end_; }
  bool contains(double t) const noexcept;

  bool operator==(const TimeHorizon&) const = default;

 private:
  TimeHorizon(HorizonKind kind, double end) : kind_(kind), end_(end) {}
  HorizonKind kind_;
  double end_;
};

struct StepCoordinate {
  std::vector<double> breakpoints;
  std::vector<double> values;

  bool operator==(const StepCoordinate&) const = default;
};

class CadlagPath {
 public:
  /// Validates breakpoints (start at 0, strictly increasing, inside the horizon)
  /// and merges equal-valued adjacent segments. Throws ValidationError.
  CadlagPath(TimeHorizon horizon, std::vector<StepCoordinate> coords);

  static CadlagPath constant(TimeHorizon horizon, const std::vector<double>& value);
  /// One-dimensional convenience constructor.
  static CadlagPath scalar(TimeHorizon horizon, std::vector<double> breakpoints,
                           std::vector<double> values);

  std::size_t dimension() const noexcept { return coords_.size(); }
  const TimeHorizon& horizon() const noexcept { return horizon_; }
  const StepCoordinate& coordinate(std::size_t i) const { return coords_.at(i); }
  const std::vector<StepCoordinate>& coordinates() const noexcept { return coords_; }

  /// Sorted union of the positive breakpoints of all coordinates.
  std::vector<double> jump_times() const;

  bool operator==(const CadlagPath&) const = default;

 private:
  TimeHorizon horizon_;
  std::vector<StepCoordinate> coords_;
};

enum class Side { right, left };

/// omega(t) for Side::right, omega(t-) for Side::left (t > 0 required).
std::vector<double> eval(const CadlagPath& path, double t, Side side = Side::right);
double eval(const CadlagPath& path, std::size_t i, double t, Side side = Side::right);

/// [omega]^t: the restriction to the finite horizon [0,t]. Breakpoints > t are dropped.
CadlagPath restrict_path(const CadlagPath& path, double t);

double sup_norm(const CadlagPath& path);
double sup_norm(const CadlagPath& path, std::size_t i);

/// |omega(t)| = sum of absolute coordinate values.
double l1_value(const CadlagPath& path, double t);

/// sum_i ( |v_0| + sum_j |v_{j+1} - v_j| ), exact for step paths.
double total_variation(const CadlagPath& path);

/// Finite strictly increasing sequence of times starting at 0.
class Partition {
 public:
  explicit Partition(std::vector<double> times);
  std::span<const double> times() const noexcept { return times_; }
  std::size_t size() const noexcept { return times_.size(); }

 private:
  std::vector<double> times_;
};

/// N^{a,b}(omega^i): completed passages from a value < a to a later value > b.
std::size_t upcrossings(const CadlagPath& path, std::size_t i, double a, double b);

/// N_pi^{a,b}(omega^i) over the cells [t_{l-1}, t_l) of the partition; the last cell
/// is closed when its right end is the terminal time T of a finite horizon. A
/// crossing needs a cell where the path dips below a followed by a strictly later
/// cell where it exceeds b; distinct crossings use disjoint, ordered cells.
std::size_t upcrossings(const CadlagPath& path, std::size_t i, double a, double b,
                        const Partition& partition);

}  // namespace cadlag
