#include "cadlag/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "cadlag/errors.hpp"

namespace cadlag {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Relative tolerance under which a preimage lambda^{-1}(s) and a breakpoint of
// omega are treated as the same instant.
constexpr double kCoincidence = 1e-12;

void check_same_finite_shape(const CadlagPath& a, const CadlagPath& b) {
  if (a.dimension() != b.dimension()) throw DomainError("paths differ in dimension");
  if (!a.horizon().is_finite() || !b.horizon().is_finite()) {
    throw DomainError("J1_T needs finite horizons");
  }
  if (a.horizon().end() != b.horizon().end()) throw DomainError("paths differ in horizon");
}

double coord_max_diff(const CadlagPath& w, double t, const CadlagPath& o, double s) {
  double m = 0.0;
  for (std::size_t i = 0; i < w.dimension(); ++i) {
    m = std::max(m, std::abs(eval(w, i, t) - eval(o, i, s)));
  }
  return m;
}

// sup over t in [x0, x1) (or [x0, x1] when closed) of ||w(t) - o(map(t))||_inf
// where map is increasing from [x0,x1] onto [y0,y1]. Both paths are constant
// between consecutive events, so evaluating at the events is exact.
template <typename Fwd, typename Inv>
double piece_discrepancy(const CadlagPath& w, const std::vector<double>& w_jumps,
                         const CadlagPath& o, const std::vector<double>& o_jumps, double x0,
                         double x1, double y0, double y1, bool closed, Fwd fwd, Inv inv) {
  const double tol = kCoincidence * std::max(1.0, x1);
  double worst = coord_max_diff(w, x0, o, y0);

  auto wi = std::upper_bound(w_jumps.begin(), w_jumps.end(), x0);
  auto we = std::lower_bound(w_jumps.begin(), w_jumps.end(), x1);
  auto oi = std::upper_bound(o_jumps.begin(), o_jumps.end(), y0);
  auto oe = std::lower_bound(o_jumps.begin(), o_jumps.end(), y1);

  auto clamp_s = [&](double s) { return std::clamp(s, y0, y1); };
  while (wi != we || oi != oe) {
    double t, s;
    if (oi == oe) {
      t = *wi++;
      s = clamp_s(fwd(t));
    } else {
      const double p = std::clamp(inv(*oi), x0, x1);
      if (wi != we && std::abs(*wi - p) <= tol) {
        t = *wi++;
        s = *oi++;
      } else if (wi != we && *wi < p) {
        t = *wi++;
        s = clamp_s(fwd(t));
      } else {
        t = p;
        s = *oi++;
      }
    }
    worst = std::max(worst, coord_max_diff(w, t, o, s));
  }
  if (closed) worst = std::max(worst, coord_max_diff(w, x1, o, y1));
  return worst;
}

std::vector<double> interior_nodes(const CadlagPath& p) {
  const double T = p.horizon().end();
  std::vector<double> nodes{0.0};
  for (double t : p.jump_times()) {
    if (t < T) nodes.push_back(t);
  }
  nodes.push_back(T);
  return nodes;
}

}  // namespace

TimeChange::TimeChange(std::vector<double> knots, std::vector<double> images)
    : knots_(std::move(knots)), images_(std::move(images)) {
  if (knots_.size() < 2 || knots_.size() != images_.size()) {
    throw ValidationError("time_change.knots", "need at least two knots with matching images");
  }
  if (knots_.front() != 0.0 || images_.front() != 0.0) {
    throw ValidationError("time_change.fixes_zero", "lambda(0) must be 0");
  }
  if (knots_.back() != images_.back()) {
    throw ValidationError("time_change.fixes_end", "lambda(T) must be T");
  }
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    if (!(knots_[k] > knots_[k - 1]) || !(images_[k] > images_[k - 1])) {
      throw ValidationError("time_change.increasing", "knots and images must be strictly increasing");
    }
  }
}

TimeChange TimeChange::identity(double T) { return TimeChange({0.0, T}, {0.0, T}); }

double TimeChange::operator()(double t) const {
  if (t <= 0.0) return 0.0;
  if (t >= knots_.back()) return images_.back();
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const std::size_t k = static_cast<std::size_t>(it - knots_.begin()) - 1;
  if (knots_[k] == t) return images_[k];
  const double w = (t - knots_[k]) / (knots_[k + 1] - knots_[k]);
  return images_[k] + w * (images_[k + 1] - images_[k]);
}

double TimeChange::inverse(double s) const {
  if (s <= 0.0) return 0.0;
  if (s >= images_.back()) return knots_.back();
  auto it = std::upper_bound(images_.begin(), images_.end(), s);
  const std::size_t k = static_cast<std::size_t>(it - images_.begin()) - 1;
  if (images_[k] == s) return knots_[k];
  const double w = (s - images_[k]) / (images_[k + 1] - images_[k]);
  return knots_[k] + w * (knots_[k + 1] - knots_[k]);
}

double TimeChange::log_slope_cost() const {
  double worst = 0.0;
  for (std::size_t k = 1; k < knots_.size(); ++k) {
    const double slope = (images_[k] - images_[k - 1]) / (knots_[k] - knots_[k - 1]);
    worst = std::max(worst, std::abs(std::log(slope)));
  }
  return worst;
}

double j1_cost(const CadlagPath& omega, const CadlagPath& other, const TimeChange& lambda) {
  check_same_finite_shape(omega, other);
  const double T = omega.horizon().end();
  if (lambda.end() != T) throw DomainError("time change is not defined on the paths' horizon");
  const auto wj = omega.jump_times();
  const auto oj = other.jump_times();
  const double disc = piece_discrepancy(
      omega, wj, other, oj, 0.0, T, 0.0, T, true, [&](double t) { return lambda(t); },
      [&](double s) { return lambda.inverse(s); });
  return std::max(lambda.log_slope_cost(), disc);
}

J1Result j1_finite_detailed(const CadlagPath& omega, const CadlagPath& other,
                            const J1Options& options) {
  check_same_finite_shape(omega, other);
  if (options.refinement < 1) throw DomainError("refinement must be positive");
  const double T = omega.horizon().end();

  const TimeChange id = TimeChange::identity(T);
  J1Result best{j1_cost(omega, other, id), id, true};
  if (best.distance == 0.0) return best;

  // Bottleneck DP over monotone alignments of the jump times of omega (X) with
  // those of other (Y). Between two aligned pairs lambda is linear, so the cost
  // of a piece depends only on its endpoints.
  const auto X = interior_nodes(omega);
  const auto Y = interior_nodes(other);
  const auto wj = omega.jump_times();
  const auto oj = other.jump_times();
  const std::size_t nx = X.size(), ny = Y.size();
  const bool windowed = nx * ny > options.exhaustive_pair_limit;
  const std::size_t skip = windowed ? options.max_skip : std::max(nx, ny);

  std::vector<double> cost(nx * ny, kInf);
  std::vector<std::size_t> parent(nx * ny, 0);
  auto at = [ny](std::size_t a, std::size_t b) { return a * ny + b; };
  cost[at(0, 0)] = 0.0;

  for (std::size_t a = 1; a < nx; ++a) {
    for (std::size_t b = 1; b < ny; ++b) {
      const bool end_a = a == nx - 1, end_b = b == ny - 1;
      if (end_a != end_b) continue;
      double& here = cost[at(a, b)];
      const std::size_t a_lo = a > skip ? a - skip : 0;
      const std::size_t b_lo = b > skip ? b - skip : 0;
      for (std::size_t pa = a_lo; pa < a; ++pa) {
        for (std::size_t pb = b_lo; pb < b; ++pb) {
          const double prev = cost[at(pa, pb)];
          if (!(prev < here)) continue;
          const double dx = X[a] - X[pa], dy = Y[b] - Y[pb];
          const double slope = std::abs(std::log(dy / dx));
          double c = std::max(prev, slope);
          if (!(c < here)) continue;
          const double x0 = X[pa], y0 = Y[pb], x1 = X[a], y1 = Y[b];
          const double disc = piece_discrepancy(
              omega, wj, other, oj, x0, x1, y0, y1, end_a,
              [&](double t) { return t == x0 ? y0 : y0 + (t - x0) * dy / dx; },
              [&](double s) { return s == y0 ? x0 : x0 + (s - y0) * dx / dy; });
          c = std::max(c, disc);
          if (c < here) {
            here = c;
            parent[at(a, b)] = at(pa, pb);
          }
        }
      }
    }
  }

  std::vector<double> knots, images;
  for (std::size_t node = at(nx - 1, ny - 1);; node = parent[node]) {
    knots.push_back(X[node / ny]);
    images.push_back(Y[node % ny]);
    if (node == 0) break;
  }
  std::reverse(knots.begin(), knots.end());
  std::reverse(images.begin(), images.end());
  TimeChange aligned(std::move(knots), std::move(images));
  const double aligned_cost = j1_cost(omega, other, aligned);
  if (aligned_cost < best.distance) best = {aligned_cost, aligned, !windowed};
  else best.exhaustive = !windowed;

  // Dyadic perturbations of the interior images of the best time change.
  for (int r = 1; r <= options.refinement; ++r) {
    const double scale = std::ldexp(1.0, -r);
    bool improved = true;
    while (improved) {
      improved = false;
      auto kn = best.time_change.knots();
      auto im = best.time_change.images();
      for (std::size_t k = 1; k + 1 < kn.size() && !improved; ++k) {
        for (int sign : {-1, 1}) {
          const double room = sign > 0 ? im[k + 1] - im[k] : im[k] - im[k - 1];
          std::vector<double> moved(im.begin(), im.end());
          moved[k] += sign * scale * room;
          if (!(moved[k] > moved[k - 1] && moved[k] < moved[k + 1])) continue;
          TimeChange candidate({kn.begin(), kn.end()}, std::move(moved));
          const double c = j1_cost(omega, other, candidate);
          if (c < best.distance) {
            best.distance = c;
            best.time_change = std::move(candidate);
            improved = true;
            break;
          }
        }
      }
    }
  }
  return best;
}

double j1_finite(const CadlagPath& omega, const CadlagPath& other, int refinement) {
  J1Options opts;
  opts.refinement = refinement;
  return j1_finite_detailed(omega, other, opts).distance;
}

HalfLineJ1 j1_halfline(const CadlagPath& omega, const CadlagPath& other, int r_max,
                       int refinement) {
  if (omega.horizon().is_finite() || other.horizon().is_finite()) {
    throw DomainError("j1_halfline needs half-line horizons");
  }
  if (omega.dimension() != other.dimension()) throw DomainError("paths differ in dimension");
  if (r_max < 1) throw DomainError("r_max must be positive");
  double value = 0.0;
  for (int r = 1; r <= r_max; ++r) {
    const double d = j1_finite(restrict_path(omega, r), restrict_path(other, r), refinement);
    value += std::ldexp(std::min(1.0, d), -r);
  }
  return {value, std::ldexp(1.0, -r_max)};
}

// ---------------------------------------------------------------------------

namespace {

struct MzEvaluator {
  const CadlagPath& path;

  double operator()(const WindowAverage& f) const {
    const auto& h = path.horizon();
    if (f.i >= path.dimension()) throw DomainError("functional coordinate out of range");
    if (!(f.r > 0) || !(f.q >= 0)) throw DomainError("window needs q >= 0 and r > 0");
    const double hi = f.q + f.r;
    if (h.is_finite() && hi > h.end()) throw DomainError("window extends past the horizon");
    const auto& c = path.coordinate(f.i);
    double acc = 0.0;
    for (std::size_t j = 0; j < c.breakpoints.size(); ++j) {
      const double s0 = c.breakpoints[j];
      const double s1 = j + 1 < c.breakpoints.size() ? c.breakpoints[j + 1] : kInf;
      const double overlap = std::min(s1, hi) - std::max(s0, f.q);
      if (overlap > 0) acc += c.values[j] * overlap;
    }
    return acc / f.r;
  }

  double operator()(const ArctanMoment& f) const {
    if (f.i >= path.dimension()) throw DomainError("functional coordinate out of range");
    if (f.power != 1 && f.power != 2) throw DomainError("arctan moment power must be 1 or 2");
    const auto& h = path.horizon();
    const double rate = static_cast<double>(f.k) + 1.0;
    const auto& c = path.coordinate(f.i);
    double acc = 0.0;
    for (std::size_t j = 0; j < c.breakpoints.size(); ++j) {
      const double s0 = c.breakpoints[j];
      double mass;
      if (j + 1 < c.breakpoints.size()) {
        mass = -std::exp(-rate * s0) * std::expm1(-rate * (c.breakpoints[j + 1] - s0)) / rate;
      } else if (h.is_finite()) {
        mass = -std::exp(-rate * s0) * std::expm1(-rate * (h.end() - s0)) / rate;
      } else {
        mass = std::exp(-rate * s0) / rate;
      }
      acc += std::pow(std::atan(c.values[j]), f.power) * mass;
    }
    return acc;
  }

  double operator()(const TerminalValue& f) const {
    if (f.i >= path.dimension()) throw DomainError("functional coordinate out of range");
    if (!path.horizon().is_finite()) throw DomainError("terminal value needs a finite horizon");
    return eval(path, f.i, path.horizon().end());
  }
};

void check_same_shape(const CadlagPath& a, const CadlagPath& b) {
  if (a.dimension() != b.dimension()) throw DomainError("paths differ in dimension");
  if (!(a.horizon() == b.horizon())) throw DomainError("paths differ in horizon");
}

}  // namespace

double mz_eval(const MzFunctional& f, const CadlagPath& path) {
  return std::visit(MzEvaluator{path}, f);
}

double mz_truncation_bound(const MzFunctional& f, const TimeHorizon& horizon) {
  const auto* m = std::get_if<ArctanMoment>(&f);
  if (m == nullptr || horizon.is_finite()) return 0.0;
  const double rate = static_cast<double>(m->k) + 1.0;
  return std::pow(std::numbers::pi / 2, m->power) * std::exp(-rate * horizon.end()) / rate;
}

std::vector<MzFunctional> with_terminal_values(std::span<const MzFunctional> fs,
                                               const TimeHorizon& horizon, std::size_t d) {
  std::vector<MzFunctional> out(fs.begin(), fs.end());
  if (!horizon.is_finite()) return out;
  for (std::size_t i = 0; i < d; ++i) {
    const MzFunctional tv = TerminalValue{i};
    if (std::find(out.begin(), out.end(), tv) == out.end()) out.push_back(tv);
  }
  return out;
}

double mz_gap(const CadlagPath& omega, const CadlagPath& other, std::span<const MzFunctional> fs) {
  if (fs.empty()) throw DomainError("empty functional set");
  check_same_shape(omega, other);
  double gap = 0.0;
  for (const auto& f : with_terminal_values(fs, omega.horizon(), omega.dimension())) {
    gap = std::max(gap, std::abs(mz_eval(f, omega) - mz_eval(f, other)));
  }
  return gap;
}

bool tail_within(std::span<const double> gaps, double tol) {
  if (gaps.empty()) return false;
  const std::size_t tail = (gaps.size() + 1) / 2;
  return std::all_of(gaps.end() - static_cast<std::ptrdiff_t>(tail), gaps.end(),
                     [tol](double g) { return g < tol; });
}

MzConvergenceReport mz_converges(std::span<const CadlagPath> sequence, const CadlagPath& limit,
                                 std::span<const MzFunctional> fs, double tol) {
  if (fs.empty()) throw DomainError("empty functional set");
  MzConvergenceReport report{false, with_terminal_values(fs, limit.horizon(), limit.dimension()),
                             {}, {}};
  for (const auto& path : sequence) {
    check_same_shape(path, limit);
    std::vector<double> row;
    row.reserve(report.functionals.size());
    for (const auto& f : report.functionals) {
      row.push_back(std::abs(mz_eval(f, path) - mz_eval(f, limit)));
    }
    report.max_gaps.push_back(row.empty() ? 0.0 : *std::max_element(row.begin(), row.end()));
    report.gaps.push_back(std::move(row));
  }
  report.converged = tail_within(report.max_gaps, tol);
  return report;
}

}  // namespace cadlag
