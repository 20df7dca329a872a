#include "cadlag/paths.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cadlag/errors.hpp"

namespace cadlag {

namespace {

// Index of the segment holding the right value at t: last j with s_j <= t.
std::size_t segment_at(const StepCoordinate& c, double t) {
  auto it = std::upper_bound(c.breakpoints.begin(), c.breakpoints.end(), t);
  return static_cast<std::size_t>(it - c.breakpoints.begin()) - 1;
}

// Last j with s_j < t, t > 0.
std::size_t segment_before(const StepCoordinate& c, double t) {
  auto it = std::lower_bound(c.breakpoints.begin(), c.breakpoints.end(), t);
  return static_cast<std::size_t>(it - c.breakpoints.begin()) - 1;
}

void check_time(const TimeHorizon& h, double t) {
  if (!h.contains(t)) {
    throw DomainError("time " + std::to_string(t) + " outside the horizon");
  }
}

// Greedy scan over a sequence of (min, max) cell ranges. Arm on a cell with
// min < a, fire on a strictly later cell with max > b.
template <typename CellRange>
std::size_t count_crossings(std::size_t n_cells, CellRange range, double a, double b) {
  std::size_t count = 0;
  bool armed = false;
  for (std::size_t l = 0; l < n_cells; ++l) {
    auto [lo, hi] = range(l);
    if (!armed) {
      if (lo < a) armed = true;
    } else if (hi > b) {
      ++count;
      armed = false;
    }
  }
  return count;
}

void check_levels(double a, double b) {
  if (!(a < b)) throw DomainError("upcrossing levels require a < b");
}

}  // namespace

TimeHorizon TimeHorizon::finite(double T) {
  if (!(T > 0) || !std::isfinite(T)) {
    throw ValidationError("horizon.positive", "finite horizon needs 0 < T < inf");
  }
  return TimeHorizon(HorizonKind::finite, T);
}

TimeHorizon TimeHorizon::half_line(double truncation) {
  if (!(truncation > 0) || !std::isfinite(truncation)) {
    throw ValidationError("horizon.positive", "half-line truncation T* must be positive");
  }
  return TimeHorizon(HorizonKind::half_line, truncation);
}

bool TimeHorizon::contains(double t) const noexcept {
  if (!(t >= 0) || !std::isfinite(t)) return false;
  return kind_ == HorizonKind::half_line || t <= end_;
}

CadlagPath::CadlagPath(TimeHorizon horizon, std::vector<StepCoordinate> coords)
    : horizon_(horizon), coords_(std::move(coords)) {
  if (coords_.empty()) throw ValidationError("path.dimension", "path needs d >= 1");
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    auto& c = coords_[i];
    const std::string where = "coordinate " + std::to_string(i);
    if (c.breakpoints.empty() || c.breakpoints.size() != c.values.size()) {
      throw ValidationError("path.lengths",
                            where + ": breakpoints and values must be nonempty and of equal length");
    }
    if (c.breakpoints.front() != 0.0) {
      throw ValidationError("path.starts_at_zero", where + ": first breakpoint must be 0");
    }
    for (std::size_t j = 0; j < c.breakpoints.size(); ++j) {
      if (!horizon_.contains(c.breakpoints[j])) {
        throw ValidationError("path.breakpoints_in_horizon", where + ": breakpoint outside horizon");
      }
      if (j > 0 && !(c.breakpoints[j] > c.breakpoints[j - 1])) {
        throw ValidationError("path.breakpoints_sorted",
                              where + ": breakpoints must be strictly increasing");
      }
      if (!std::isfinite(c.values[j])) {
        throw ValidationError("path.finite_values", where + ": values must be finite");
      }
    }
    // canonical form
    std::size_t w = 1;
    for (std::size_t j = 1; j < c.values.size(); ++j) {
      if (c.values[j] == c.values[w - 1]) continue;
      c.breakpoints[w] = c.breakpoints[j];
      c.values[w] = c.values[j];
      ++w;
    }
    c.breakpoints.resize(w);
    c.values.resize(w);
  }
}

CadlagPath CadlagPath::constant(TimeHorizon horizon, const std::vector<double>& value) {
  std::vector<StepCoordinate> coords;
  coords.reserve(value.size());
  for (double v : value) coords.push_back({{0.0}, {v}});
  return CadlagPath(horizon, std::move(coords));
}

CadlagPath CadlagPath::scalar(TimeHorizon horizon, std::vector<double> breakpoints,
                              std::vector<double> values) {
  return CadlagPath(horizon, {StepCoordinate{std::move(breakpoints), std::move(values)}});
}

std::vector<double> CadlagPath::jump_times() const {
  std::vector<double> out;
  for (const auto& c : coords_) out.insert(out.end(), c.breakpoints.begin() + 1, c.breakpoints.end());
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

double eval(const CadlagPath& path, std::size_t i, double t, Side side) {
  check_time(path.horizon(), t);
  const auto& c = path.coordinate(i);
  if (side == Side::right) return c.values[segment_at(c, t)];
  if (!(t > 0)) throw DomainError("left limit requires t > 0");
  return c.values[segment_before(c, t)];
}

std::vector<double> eval(const CadlagPath& path, double t, Side side) {
  std::vector<double> out(path.dimension());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = eval(path, i, t, side);
  return out;
}

CadlagPath restrict_path(const CadlagPath& path, double t) {
  if (!(t > 0)) throw DomainError("restriction time must be positive");
  check_time(path.horizon(), t);
  std::vector<StepCoordinate> coords;
  coords.reserve(path.dimension());
  for (const auto& c : path.coordinates()) {
    std::size_t keep = segment_at(c, t) + 1;
    coords.push_back({{c.breakpoints.begin(), c.breakpoints.begin() + keep},
                      {c.values.begin(), c.values.begin() + keep}});
  }
  return CadlagPath(TimeHorizon::finite(t), std::move(coords));
}

double sup_norm(const CadlagPath& path, std::size_t i) {
  double m = 0.0;
  for (double v : path.coordinate(i).values) m = std::max(m, std::abs(v));
  return m;
}

double sup_norm(const CadlagPath& path) {
  double m = 0.0;
  for (std::size_t i = 0; i < path.dimension(); ++i) m = std::max(m, sup_norm(path, i));
  return m;
}

double l1_value(const CadlagPath& path, double t) {
  double s = 0.0;
  for (double v : eval(path, t)) s += std::abs(v);
  return s;
}

double total_variation(const CadlagPath& path) {
  double tv = 0.0;
  for (const auto& c : path.coordinates()) {
    tv += std::abs(c.values.front());
    for (std::size_t j = 1; j < c.values.size(); ++j) tv += std::abs(c.values[j] - c.values[j - 1]);
  }
  return tv;
}

Partition::Partition(std::vector<double> times) : times_(std::move(times)) {
  if (times_.empty()) throw ValidationError("partition.nonempty", "partition needs at least one time");
  if (times_.front() != 0.0) throw ValidationError("partition.starts_at_zero", "partition must start at 0");
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) {
      throw ValidationError("partition.sorted", "partition times must be strictly increasing");
    }
  }
}

std::size_t upcrossings(const CadlagPath& path, std::size_t i, double a, double b) {
  check_levels(a, b);
  const auto& v = path.coordinate(i).values;
  return count_crossings(
      v.size(), [&](std::size_t l) { return std::pair{v[l], v[l]}; }, a, b);
}

std::size_t upcrossings(const CadlagPath& path, std::size_t i, double a, double b,
                        const Partition& partition) {
  check_levels(a, b);
  const auto& h = path.horizon();
  for (double t : partition.times()) check_time(h, t);
  const auto& c = path.coordinate(i);
  auto times = partition.times();
  const std::size_t n_cells = times.size() - 1;
  const bool closed_end = h.is_finite() && n_cells > 0 && times.back() == h.end();

  auto range = [&](std::size_t l) {
    const double lo_t = times[l];
    const double hi_t = times[l + 1];
    const bool closed = closed_end && l + 1 == n_cells;
    std::size_t first = segment_at(c, lo_t);
    std::size_t last = closed ? segment_at(c, hi_t) : segment_before(c, hi_t);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t j = first; j <= last; ++j) {
      lo = std::min(lo, c.values[j]);
      hi = std::max(hi, c.values[j]);
    }
    return std::pair{lo, hi};
  };
  return count_crossings(n_cells, range, a, b);
}

}  // namespace cadlag
