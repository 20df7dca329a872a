#include "cadlag/tightness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "cadlag/errors.hpp"

namespace cadlag {

namespace {

constexpr double kSlack = 1e-12;

void check_family(std::span<const DiscreteProcessLaw> family) {
  if (family.empty()) throw DomainError("empty family");
  for (const auto& Q : family) {
    if (!(Q.horizon() == family.front().horizon())) throw DomainError("family laws differ in horizon");
  }
}

std::vector<double> checked_grid(std::span<const double> c_grid, double c_max) {
  if (c_grid.empty()) throw DomainError("empty threshold grid");
  std::vector<double> out(c_grid.begin(), c_grid.end());
  for (std::size_t j = 0; j < out.size(); ++j) {
    if (!(out[j] > 0) || (j > 0 && !(out[j] > out[j - 1]))) {
      throw DomainError("threshold grid must be positive and strictly increasing");
    }
  }
  if (!(c_max > 0)) throw DomainError("c_max must be positive");
  if (!std::binary_search(out.begin(), out.end(), c_max)) {
    out.insert(std::upper_bound(out.begin(), out.end(), c_max), c_max);
  }
  return out;
}

double tail(const DiscreteProcessLaw& Q, std::span<const double> z, double c) {
  double m = 0.0;
  for (std::size_t a = 0; a < z.size(); ++a) {
    if (std::abs(z[a]) > c) m += Q.weight(a);
  }
  return m;
}

std::size_t floor_index(const DiscreteProcessLaw& Q, double t) {
  if (!Q.horizon().contains(t)) throw DomainError("time outside the horizon");
  const auto times = Q.times();
  if (t < times.front()) throw DomainError("time before the grid");
  return static_cast<std::size_t>(std::upper_bound(times.begin(), times.end(), t) - times.begin()) - 1;
}

std::vector<std::size_t> time_indices(const DiscreteProcessLaw& Q, std::span<const double> t_list) {
  std::vector<std::size_t> out;
  if (t_list.empty()) {
    for (std::size_t k = 0; k < Q.n_times(); ++k) out.push_back(k);
    return out;
  }
  for (double t : t_list) out.push_back(floor_index(Q, t));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::vector<double> check_times(const DiscreteProcessLaw& Q, std::span<const double> t_list) {
  if (t_list.empty()) return {Q.times().begin(), Q.times().end()};
  for (double t : t_list) {
    if (!Q.horizon().contains(t)) throw DomainError("time outside the horizon");
  }
  return {t_list.begin(), t_list.end()};
}

std::string fmt(double x) {
  std::ostringstream os;
  os << x;
  return os.str();
}

void check_levels(std::span<const LevelPair> levels) {
  for (auto [a, b] : levels) {
    if (!(a < b)) throw DomainError("level pair needs a < b");
  }
}

void sort_offenders(ConditionReport& r) {
  std::stable_sort(r.offenders.begin(), r.offenders.end(),
                   [](const Offender& x, const Offender& y) { return x.value > y.value; });
}

ElementaryIntegrand coordinate_part(const DiscreteProcessLaw& Q, const ElementaryIntegrand& H,
                                    std::size_t i) {
  std::vector<IntegrandCoordinate> coords(Q.dimension(),
                                          IntegrandCoordinate{std::vector<double>(Q.size(), 0.0), {}});
  coords[i] = H.coordinates()[i];
  return ElementaryIntegrand(Q, std::move(coords));
}

}  // namespace

std::string to_string(Condition c) {
  switch (c) {
    case Condition::UT: return "UT";
    case Condition::UB: return "UB";
    case Condition::UI: return "UI";
    case Condition::US: return "US";
  }
  return "?";
}

double Curve::at(double x) const {
  auto it = std::upper_bound(points.begin(), points.end(), x,
                             [](double v, const CurvePoint& p) { return v < p.c; });
  if (it == points.begin()) throw DomainError("threshold below the curve grid");
  return std::prev(it)->value;
}

std::vector<LevelPair> default_levels() {
  const double q[] = {-2, -1, -0.5, 0, 0.5, 1, 2};
  std::vector<LevelPair> out;
  for (double a : q) {
    for (double b : q) {
      if (a < b) out.emplace_back(a, b);
    }
  }
  return out;
}

ConditionReport check_UB(std::span<const DiscreteProcessLaw> family) {
  check_family(family);
  ConditionReport r;
  r.condition = Condition::UB;
  r.statistic = "sup over laws and grid times t of E|X_t| + sum_i Var_t(X^i)";
  for (std::size_t l = 0; l < family.size(); ++l) {
    const auto cls = classify(family[l], 0.0);
    r.offenders.push_back({l, cls.statistic_time, cls.quasimartingale_statistic});
    r.scalar = std::max(r.scalar, cls.quasimartingale_statistic);
  }
  r.pass = std::isfinite(r.scalar);
  sort_offenders(r);
  return r;
}

ConditionReport check_UI(std::span<const DiscreteProcessLaw> family, std::span<const double> c_grid,
                         Threshold verdict) {
  check_family(family);
  const auto cs = checked_grid(c_grid, verdict.c_max);
  const auto ub = check_UB(family);

  ConditionReport r;
  r.condition = Condition::UI;
  r.statistic = "sup over laws and grid times t of E[X_t^- 1{X_t^- > c}], X^- = sum_i (X^i)^-";
  r.c_max = verdict.c_max;
  r.eps = verdict.eps;
  Curve curve{"negative_part_tail", {}};
  for (double c : cs) curve.points.push_back({c, 0.0});

  for (std::size_t l = 0; l < family.size(); ++l) {
    const auto& Q = family[l];
    Offender worst{l, Q.times().front(), 0.0};
    for (std::size_t k = 0; k < Q.n_times(); ++k) {
      std::vector<double> neg(Q.size(), 0.0);
      for (std::size_t a = 0; a < Q.size(); ++a) {
        for (std::size_t i = 0; i < Q.dimension(); ++i) neg[a] += std::max(0.0, -Q.value(a, k, i));
      }
      for (auto& p : curve.points) {
        double m = 0.0;
        for (std::size_t a = 0; a < Q.size(); ++a) {
          if (neg[a] > p.c) m += Q.weight(a) * neg[a];
        }
        p.value = std::max(p.value, m);
        if (p.c == verdict.c_max && m > worst.value) worst = {l, Q.times()[k], m};
      }
    }
    r.offenders.push_back(worst);
  }
  r.scalar = curve.at(verdict.c_max);
  r.pass = ub.pass && r.scalar < verdict.eps;
  if (!ub.pass) r.note = "(UB) fails";
  r.curves.push_back(std::move(curve));
  sort_offenders(r);
  return r;
}

ElementaryIntegrand crossing_integrand(const DiscreteProcessLaw& Q, std::size_t i, double t, double a,
                                       double b, std::size_t m) {
  if (!(a < b)) throw DomainError("level pair needs a < b");
  if (i >= Q.dimension()) throw DomainError("coordinate out of range");
  const std::size_t kt = Q.grid_index(t);
  const auto times = Q.times();
  std::vector<IntegrandCoordinate> coords(Q.dimension(),
                                          IntegrandCoordinate{std::vector<double>(Q.size(), 0.0), {}});
  std::vector<std::size_t> done(Q.size(), 0);
  std::vector<bool> armed(Q.size(), false);
  for (std::size_t j = 0; j < kt; ++j) {
    IntegrandLeg leg{times[j], times[j + 1], std::vector<double>(Q.size(), 0.0)};
    for (std::size_t at = 0; at < Q.size(); ++at) {
      const double x = Q.value(at, j, i);
      if (!armed[at] && done[at] < m && x < a) {
        armed[at] = true;
      } else if (armed[at] && x > b) {
        armed[at] = false;
        ++done[at];
      }
      leg.coefficient[at] = armed[at] ? 1.0 : 0.0;
    }
    coords[i].legs.push_back(std::move(leg));
  }
  return ElementaryIntegrand(Q, std::move(coords));
}

std::vector<ElementaryIntegrand> worstcase_integrands(const DiscreteProcessLaw& Q, double t, double c,
                                                      std::span<const LevelPair> levels,
                                                      std::size_t m_max) {
  check_levels(levels);
  std::vector<ElementaryIntegrand> out;
  for (std::size_t i = 0; i < Q.dimension(); ++i) out.push_back(hitting_integrand(Q, i, t, c));
  for (auto [a, b] : levels) {
    for (std::size_t i = 0; i < Q.dimension(); ++i) out.push_back(crossing_integrand(Q, i, t, a, b, m_max));
  }
  out.push_back(sign_integrand(Q, t));
  return out;
}

ConditionReport check_UT_empirical(std::span<const DiscreteProcessLaw> family,
                                   std::span<const double> c_grid, std::span<const double> t_list,
                                   std::span<const LevelPair> levels, const UTOptions& options,
                                   Threshold verdict) {
  check_family(family);
  check_levels(levels);
  const auto cs = checked_grid(c_grid, verdict.c_max);

  ConditionReport r;
  r.condition = Condition::UT;
  r.statistic = "sup over laws, t and integrands H of Q(|(H o X)_t| > c); certified lower bound";
  r.c_max = verdict.c_max;
  r.eps = verdict.eps;
  r.lower_bound = true;
  Curve curve{"integral_tail", {}};
  for (double c : cs) curve.points.push_back({c, 0.0});
  bool all_exhaustive = options.max_bits > 0;

  for (std::size_t l = 0; l < family.size(); ++l) {
    const auto& Q = family[l];
    std::seed_seq seq{static_cast<std::uint32_t>(options.seed), static_cast<std::uint32_t>(options.seed >> 32),
                      static_cast<std::uint32_t>(l)};
    std::mt19937_64 rng(seq);
    Offender worst{l, Q.times().front(), 0.0};

    for (std::size_t k : time_indices(Q, t_list)) {
      const double t = Q.times()[k];
      std::vector<double> best(cs.size(), 0.0);
      auto absorb = [&](std::span<const double> z) {
        for (std::size_t j = 0; j < cs.size(); ++j) best[j] = std::max(best[j], tail(Q, z, cs[j]));
      };

      for (std::size_t j = 0; j < cs.size(); ++j) {
        for (std::size_t i = 0; i < Q.dimension(); ++i) {
          best[j] = std::max(best[j], tail(Q, elementary_integral(Q, hitting_integrand(Q, i, t, cs[j]), t), cs[j]));
        }
      }
      for (auto [a, b] : levels) {
        for (std::size_t i = 0; i < Q.dimension(); ++i) {
          absorb(elementary_integral(Q, crossing_integrand(Q, i, t, a, b, Q.n_times()), t));
        }
      }
      absorb(elementary_integral(Q, sign_integrand(Q, t), t));

      const std::size_t bits = extreme_bits(Q, k);
      std::uniform_int_distribution<int> coin(0, 1);
      for (std::size_t e = 0; e < options.extra_random; ++e) {
        std::vector<int> signs(bits);
        for (int& s : signs) s = coin(rng) ? 1 : -1;
        absorb(elementary_integral(Q, extreme_integrand(Q, k, signs), t));
      }
      if (options.max_bits > 0 && bits <= options.max_bits) {
        for_each_extreme_integral(Q, k, options.max_bits, absorb);
      } else {
        all_exhaustive = false;
      }

      for (std::size_t j = 0; j < cs.size(); ++j) {
        curve.points[j].value = std::max(curve.points[j].value, best[j]);
        if (cs[j] == verdict.c_max && best[j] > worst.value) worst = {l, t, best[j]};
      }
    }
    r.offenders.push_back(worst);
  }
  r.scalar = curve.at(verdict.c_max);
  r.pass = r.scalar < verdict.eps;
  r.note = all_exhaustive ? "every extreme integrand on the grid was enumerated"
                          : "structured and sampled integrands only";
  r.curves.push_back(std::move(curve));
  sort_offenders(r);
  return r;
}

double restricted_sup(const CadlagPath& path, std::size_t i, double t) {
  if (t == 0.0) return std::abs(eval(path, i, 0.0));
  return sup_norm(restrict_path(path, t), i);
}

std::size_t restricted_upcrossings(const CadlagPath& path, std::size_t i, double t, double a, double b) {
  if (!(a < b)) throw DomainError("upcrossing levels require a < b");
  if (t == 0.0) return 0;
  return upcrossings(restrict_path(path, t), i, a, b);
}

ConditionReport check_US(std::span<const DiscreteProcessLaw> family, std::span<const double> t_list,
                         std::span<const LevelPair> levels, std::span<const double> c_grid,
                         Threshold verdict) {
  check_family(family);
  check_levels(levels);
  const auto cs = checked_grid(c_grid, verdict.c_max);
  const std::size_t d = family.front().dimension();
  for (const auto& Q : family) {
    if (Q.dimension() != d) throw DomainError("family laws differ in dimension");
  }

  ConditionReport r;
  r.condition = Condition::US;
  r.statistic = "sup over laws and t of Q(sup_norm(X^i on [0,t]) > c) and Q(N^{a,b}(X^i on [0,t]) > c)";
  r.c_max = verdict.c_max;
  r.eps = verdict.eps;
  for (std::size_t i = 0; i < d; ++i) {
    r.curves.push_back({"sup_norm[i=" + std::to_string(i) + "]", {}});
    for (auto [a, b] : levels) {
      r.curves.push_back(
          {"upcrossings[i=" + std::to_string(i) + ",a=" + fmt(a) + ",b=" + fmt(b) + "]", {}});
    }
  }
  for (auto& curve : r.curves) {
    for (double c : cs) curve.points.push_back({c, 0.0});
  }

  for (std::size_t l = 0; l < family.size(); ++l) {
    const auto& Q = family[l];
    Offender worst{l, 0.0, 0.0};
    for (double t : check_times(Q, t_list)) {
      std::size_t ci = 0;
      for (std::size_t i = 0; i < d; ++i) {
        std::vector<std::vector<double>> stats(1 + levels.size(), std::vector<double>(Q.size()));
        for (std::size_t a = 0; a < Q.size(); ++a) {
          const auto& path = Q.atoms()[a].path;
          stats[0][a] = restricted_sup(path, i, t);
          for (std::size_t lv = 0; lv < levels.size(); ++lv) {
            stats[lv + 1][a] = static_cast<double>(
                restricted_upcrossings(path, i, t, levels[lv].first, levels[lv].second));
          }
        }
        for (const auto& s : stats) {
          auto& curve = r.curves[ci++];
          for (auto& p : curve.points) {
            const double m = tail(Q, s, p.c);
            p.value = std::max(p.value, m);
            if (p.c == verdict.c_max && m > worst.value) worst = {l, t, m};
          }
        }
      }
    }
    r.offenders.push_back(worst);
  }
  r.scalar = 0.0;
  for (const auto& curve : r.curves) r.scalar = std::max(r.scalar, curve.at(verdict.c_max));
  r.pass = r.scalar < verdict.eps;
  if (!family.front().horizon().is_finite()) {
    r.note = "half-line horizon: only the listed times are checked";
  }
  sort_offenders(r);
  return r;
}

BoundConstants::BoundConstants(double a, std::size_t d) : a_(a), d_(d) {
  if (!(a > 0) || !std::isfinite(a)) throw DomainError("constant a must be positive");
  if (d == 0) throw DomainError("dimension must be positive");
}

BurkholderResult burkholder_check(const DiscreteProcessLaw& Q, const ElementaryIntegrand& H, double t,
                                  double c, const BoundConstants& constants) {
  if (!(c > 0)) throw DomainError("c must be positive");
  const std::size_t k = Q.grid_index(t);
  BurkholderResult out{};
  out.lhs = tail(Q, elementary_integral(Q, H, t), c);

  const auto dd = doob_decomposition(Q);
  double scale = mean_abs(Q, k);
  out.decomposition_step_ok = true;
  for (std::size_t i = 0; i < Q.dimension(); ++i) {
    const double var = conditional_variation(Q, Q.values(), i, k);
    scale += var;
    const double drift_tail = tail(Q, elementary_integral(Q, coordinate_part(Q, H, i), dd.A, t), c);
    if (drift_tail > var / c + kSlack) out.decomposition_step_ok = false;
  }
  out.rhs = constants.b() / c * scale;
  out.holds = out.lhs <= out.rhs + kSlack;
  constexpr double inf = std::numeric_limits<double>::infinity();
  out.ratio = scale > 0 ? out.lhs * c / scale : (out.lhs > 0 ? inf : 0.0);
  const double two_d = 2.0 * static_cast<double>(Q.dimension());
  out.minimal_a = std::max(0.0, out.ratio / two_d - 1.0);
  return out;
}

std::pair<double, double> hitting_identity(const DiscreteProcessLaw& Q, std::size_t i, double t, double c) {
  double sup_tail = 0.0;
  for (std::size_t a = 0; a < Q.size(); ++a) {
    if (restricted_sup(Q.atoms()[a].path, i, t) > c) sup_tail += Q.weight(a);
  }
  const double stopped_tail = tail(Q, elementary_integral(Q, hitting_integrand(Q, i, t, c), t), c);
  return {sup_tail, stopped_tail};
}

std::pair<double, double> crossing_tail(const DiscreteProcessLaw& Q, std::size_t i, double t, double a,
                                        double b, double c) {
  if (!(c >= 0)) throw DomainError("c must be non-negative");
  const auto m = static_cast<std::size_t>(std::ceil(c)) + 1;
  double lhs = 0.0;
  for (std::size_t at = 0; at < Q.size(); ++at) {
    if (static_cast<double>(restricted_upcrossings(Q.atoms()[at].path, i, t, a, b)) > c) lhs += Q.weight(at);
  }
  const double level = std::max(a, 0.0) + c * (b - a);
  const double rhs = tail(Q, elementary_integral(Q, crossing_integrand(Q, i, t, a, b, m), t), level);
  return {lhs, rhs};
}

StepBound::StepBound(std::vector<double> breakpoints, std::vector<double> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (breakpoints_.empty() || breakpoints_.size() != values_.size() || breakpoints_.front() != 0.0) {
    throw ValidationError("profile.breakpoints", "bound needs matching breakpoints starting at 0");
  }
  for (std::size_t j = 0; j < values_.size(); ++j) {
    if (!(values_[j] >= 0)) throw ValidationError("profile.nonnegative", "bounds must be non-negative");
    if (j > 0 && !(breakpoints_[j] > breakpoints_[j - 1])) {
      throw ValidationError("profile.breakpoints", "breakpoints must be strictly increasing");
    }
    if (j > 0 && values_[j] < values_[j - 1]) {
      throw ValidationError("profile.nondecreasing", "bounds must be non-decreasing in t");
    }
  }
}

double StepBound::operator()(double t) const {
  auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), t);
  if (it == breakpoints_.begin()) throw DomainError("negative time");
  return values_[static_cast<std::size_t>(it - breakpoints_.begin()) - 1];
}

double compact_mass(const DiscreteProcessLaw& Q, const CompactnessProfile& profile,
                    std::span<const double> t_list) {
  const std::size_t d = Q.dimension();
  if (!profile.sup_bound.empty() && profile.sup_bound.size() != d) {
    throw DomainError("profile needs one sup-norm bound per coordinate");
  }
  for (const auto& ub : profile.upcrossing_bounds) {
    if (ub.i >= d) throw DomainError("profile coordinate out of range");
    if (!(ub.q < ub.r)) throw DomainError("level pair needs q < r");
  }
  const auto times = check_times(Q, t_list);
  double mass = 0.0;
  for (std::size_t a = 0; a < Q.size(); ++a) {
    const auto& path = Q.atoms()[a].path;
    bool outside = false;
    for (double t : times) {
      for (std::size_t i = 0; i < profile.sup_bound.size() && !outside; ++i) {
        outside = restricted_sup(path, i, t) > profile.sup_bound[i](t);
      }
      for (const auto& ub : profile.upcrossing_bounds) {
        if (outside) break;
        outside = static_cast<double>(restricted_upcrossings(path, ub.i, t, ub.q, ub.r)) > ub.bound(t);
      }
      if (outside) break;
    }
    if (outside) mass += Q.weight(a);
  }
  return mass;
}

}  // namespace cadlag
