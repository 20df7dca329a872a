#include "cadlag/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cadlag/errors.hpp"

namespace cadlag {

namespace {

void check_pair(const DiscreteProcessLaw& Q1, const DiscreteProcessLaw& Q2) {
  if (Q1.dimension() != Q2.dimension()) throw DomainError("laws differ in dimension");
  if (!(Q1.horizon() == Q2.horizon())) throw DomainError("laws differ in horizon");
}

// factors[j][g][a]: the g-th non-constant test factor at time F[j] on atom a,
// g = 2i for atan x^i and 2i+1 for atan^2 x^i.
std::vector<std::vector<std::vector<double>>> factor_table(const DiscreteProcessLaw& Q,
                                                           std::span<const double> F) {
  const std::size_t d = Q.dimension();
  std::vector<std::vector<std::vector<double>>> out(F.size(), std::vector<std::vector<double>>(2 * d));
  for (std::size_t j = 0; j < F.size(); ++j) {
    for (std::size_t i = 0; i < d; ++i) {
      auto& g1 = out[j][2 * i];
      auto& g2 = out[j][2 * i + 1];
      for (const auto& atom : Q.atoms()) {
        const double v = std::atan(eval(atom.path, i, F[j]));
        g1.push_back(v);
        g2.push_back(v * v);
      }
    }
  }
  return out;
}

double expectation(const DiscreteProcessLaw& Q, const std::vector<const std::vector<double>*>& factors) {
  double e = 0.0;
  for (std::size_t a = 0; a < Q.size(); ++a) {
    double prod = Q.weight(a);
    for (const auto* f : factors) prod *= (*f)[a];
    e += prod;
  }
  return e;
}

double law_functional_mean(const DiscreteProcessLaw& Q, const MzFunctional& f) {
  double e = 0.0;
  for (const auto& atom : Q.atoms()) e += atom.weight * mz_eval(f, atom.path);
  return e;
}

std::string verdict_status(bool hypotheses, bool conclusion) {
  if (!hypotheses) return "hypothesis failed";
  return conclusion ? "hypotheses and conclusion hold" : "conclusion failed";
}

}  // namespace

DenseGrid::DenseGrid(std::vector<double> times, const TimeHorizon& horizon) : times_(std::move(times)) {
  if (times_.empty()) throw ValidationError("grid.nonempty", "dense grid needs at least one time");
  for (std::size_t j = 0; j < times_.size(); ++j) {
    if (!horizon.contains(times_[j])) throw ValidationError("grid.in_horizon", "time outside the horizon");
    if (j > 0 && !(times_[j] > times_[j - 1])) {
      throw ValidationError("grid.sorted", "times must be strictly increasing");
    }
  }
  if (horizon.is_finite() && times_.back() != horizon.end()) {
    throw ValidationError("grid.includes_T", "dense grid must contain T on a finite horizon");
  }
}

std::string fdd_library_description() {
  return "products over at most 3 times of g(X_t), g in {atan(x^i), atan(x^i)^2}";
}

double fdd_gap(const DiscreteProcessLaw& Q1, const DiscreteProcessLaw& Q2, std::span<const double> F) {
  if (F.empty()) throw DomainError("empty time set");
  check_pair(Q1, Q2);
  for (double t : F) {
    if (!Q1.horizon().contains(t)) throw DomainError("time outside the horizon");
  }
  const auto f1 = factor_table(Q1, F);
  const auto f2 = factor_table(Q2, F);
  const std::size_t n = F.size(), g = 2 * Q1.dimension();
  double gap = 0.0;
  std::vector<const std::vector<double>*> p1, p2;
  auto measure = [&] { gap = std::max(gap, std::abs(expectation(Q1, p1) - expectation(Q2, p2))); };
  for (std::size_t j1 = 0; j1 < n; ++j1) {
    for (std::size_t g1 = 0; g1 < g; ++g1) {
      p1 = {&f1[j1][g1]};
      p2 = {&f2[j1][g1]};
      measure();
      for (std::size_t j2 = j1 + 1; j2 < n; ++j2) {
        for (std::size_t g2 = 0; g2 < g; ++g2) {
          p1 = {&f1[j1][g1], &f1[j2][g2]};
          p2 = {&f2[j1][g1], &f2[j2][g2]};
          measure();
          for (std::size_t j3 = j2 + 1; j3 < n; ++j3) {
            for (std::size_t g3 = 0; g3 < g; ++g3) {
              p1 = {&f1[j1][g1], &f1[j2][g2], &f1[j3][g3]};
              p2 = {&f2[j1][g1], &f2[j2][g2], &f2[j3][g3]};
              measure();
            }
          }
        }
      }
    }
  }
  return gap;
}

double weakstar_gap(const DiscreteProcessLaw& Q1, const DiscreteProcessLaw& Q2,
                    std::span<const MzFunctional> fs) {
  if (fs.empty()) throw DomainError("empty functional set");
  check_pair(Q1, Q2);
  double gap = 0.0;
  for (const auto& f : fs) {
    gap = std::max(gap, std::abs(law_functional_mean(Q1, f) - law_functional_mean(Q2, f)));
  }
  return gap;
}

ConvergenceReport converges(std::span<const DiscreteProcessLaw> sequence, const DiscreteProcessLaw& limit,
                            const DenseGrid& D, std::span<const MzFunctional> fs, double tol) {
  ConvergenceReport r{};
  for (const auto& Q : sequence) {
    check_pair(Q, limit);
    r.fdd_gaps.push_back(fdd_gap(Q, limit, D.times()));
    r.functional_gaps.push_back(weakstar_gap(Q, limit, fs));
  }
  r.fdd_converged = tail_within(r.fdd_gaps, tol);
  r.functional_converged = tail_within(r.functional_gaps, tol);
  r.converged = r.fdd_converged && r.functional_converged;
  r.limit_classification = classify(limit, 1e-9);
  return r;
}

StabilityReport stability_suite(std::span<const DiscreteProcessLaw> sequence, const DiscreteProcessLaw& limit,
                                const StabilityConfig& config) {
  if (sequence.empty()) throw DomainError("empty sequence");
  StabilityReport r{check_UT_empirical(sequence, config.c_grid, config.t_list, config.levels, config.ut,
                                       config.threshold),
                    check_UB(sequence),
                    check_UI(sequence, config.c_grid, config.threshold),
                    check_UT_empirical(std::span(&limit, 1), config.c_grid, config.t_list, config.levels,
                                       config.ut, config.threshold),
                    classify(limit, config.tol),
                    0.0,
                    {},
                    {},
                    {}};

  bool all_super = true;
  for (const auto& Q : sequence) {
    for (std::size_t k = 0; k < Q.n_times(); ++k) r.sequence_mean_abs = std::max(r.sequence_mean_abs, mean_abs(Q, k));
    const auto cls = classify(Q, config.tol);
    all_super = all_super && std::all_of(cls.supermartingale.begin(), cls.supermartingale.end(),
                                         [](bool b) { return b; });
  }

  const bool ut_hyp = r.ut_report.pass;
  const bool ut_con = r.limit_ut_report.pass;
  r.semimartingale = {ut_hyp, ut_con, verdict_status(ut_hyp, ut_con)};

  const bool ub_hyp = r.ub_report.pass;
  const double bound = 4.0 * r.ub_report.scalar + r.sequence_mean_abs;
  const double stat = r.limit_classification.quasimartingale_statistic;
  const bool ub_con = std::isfinite(stat) && stat <= bound + config.tol;
  r.quasimartingale = {ub_hyp, ub_con, verdict_status(ub_hyp, ub_con)};

  const bool ui_hyp = r.ui_report.pass && all_super;
  const auto& flags = r.limit_classification.supermartingale;
  const bool ui_con = std::all_of(flags.begin(), flags.end(), [](bool b) { return b; });
  r.supermartingale = {ui_hyp, ui_con, verdict_status(ui_hyp, ui_con)};
  return r;
}

CompactnessProfile tightness_profile(std::span<const DiscreteProcessLaw> family, double eps,
                                     std::span<const double> t_list, std::span<const LevelPair> levels) {
  if (family.empty()) throw DomainError("empty family");
  if (!(eps > 0 && eps < 1)) throw DomainError("eps must lie in (0,1)");
  const std::size_t d = family.front().dimension();
  for (const auto& Q : family) {
    if (Q.dimension() != d) throw DomainError("family laws differ in dimension");
  }
  for (auto [a, b] : levels) {
    if (!(a < b)) throw DomainError("level pair needs a < b");
  }

  std::vector<double> times(t_list.begin(), t_list.end());
  if (times.empty()) {
    for (const auto& Q : family) times.insert(times.end(), Q.times().begin(), Q.times().end());
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end()), times.end());

  // stat s = 0..d-1 sup norms, then (i, level) upcrossings.
  const std::size_t n_stats = d * (1 + levels.size());
  auto statistic = [&](const CadlagPath& path, std::size_t s, double t) {
    if (s < d) return restricted_sup(path, s, t);
    const std::size_t i = (s - d) / levels.size(), lv = (s - d) % levels.size();
    return static_cast<double>(restricted_upcrossings(path, i, t, levels[lv].first, levels[lv].second));
  };

  auto build = [&](double level) {
    std::vector<std::vector<double>> theta(n_stats, std::vector<double>(times.size(), 0.0));
    for (const auto& Q : family) {
      for (std::size_t s = 0; s < n_stats; ++s) {
        for (std::size_t j = 0; j < times.size(); ++j) {
          std::vector<std::pair<double, double>> vw;
          for (const auto& atom : Q.atoms()) vw.emplace_back(statistic(atom.path, s, times[j]), atom.weight);
          std::sort(vw.begin(), vw.end());
          // Smallest observed v with Q(stat > v) <= level.
          double above = 1.0, pick = vw.back().first;
          for (std::size_t q = 0; q < vw.size(); ++q) {
            above -= vw[q].second;
            if (q + 1 < vw.size() && vw[q + 1].first == vw[q].first) continue;
            if (above <= level + 1e-15) {
              pick = vw[q].first;
              break;
            }
          }
          theta[s][j] = std::max(theta[s][j], pick);
        }
      }
    }
    auto to_bound = [&](std::vector<double> v) {
      for (std::size_t j = 1; j < v.size(); ++j) v[j] = std::max(v[j], v[j - 1]);
      std::vector<double> bps(times);
      bps.front() = 0.0;
      return StepBound(std::move(bps), std::move(v));
    };
    CompactnessProfile p;
    for (std::size_t i = 0; i < d; ++i) p.sup_bound.push_back(to_bound(theta[i]));
    for (std::size_t s = d; s < n_stats; ++s) {
      const std::size_t i = (s - d) / levels.size(), lv = (s - d) % levels.size();
      p.upcrossing_bounds.push_back({i, levels[lv].first, levels[lv].second, to_bound(theta[s])});
    }
    return p;
  };

  double level = eps;
  for (;;) {
    auto profile = build(level);
    bool ok = true;
    for (const auto& Q : family) ok = ok && compact_mass(Q, profile, times) <= eps + 1e-15;
    if (ok) return profile;
    level /= 2;
  }
}

}  // namespace cadlag
