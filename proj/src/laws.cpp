#include "cadlag/laws.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>

#include "cadlag/errors.hpp"

namespace cadlag {

namespace {

double sign(double x) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); }

void check_shape(const DiscreteProcessLaw& Q, const GridProcess& Y) {
  if (Y.atoms() != Q.size() || Y.times() != Q.n_times() || Y.dimension() != Q.dimension()) {
    throw DomainError("grid process does not match the law's shape");
  }
}

// Unnormalised class sums of w * (Y_k - Y_{k-1}) over the classes at k-1.
std::vector<double> increment_sums(const DiscreteProcessLaw& Q, const GridProcess& Y, std::size_t i,
                                   std::size_t from, std::size_t to) {
  const auto& cls = Q.classes(from);
  std::vector<double> sums(cls.size(), 0.0);
  for (std::size_t c = 0; c < cls.size(); ++c) {
    for (std::size_t a : cls[c]) sums[c] += Q.weight(a) * (Y(a, to, i) - Y(a, from, i));
  }
  return sums;
}

std::vector<double> class_weights(const DiscreteProcessLaw& Q, std::size_t k) {
  const auto& cls = Q.classes(k);
  std::vector<double> w(cls.size(), 0.0);
  for (std::size_t c = 0; c < cls.size(); ++c) {
    for (std::size_t a : cls[c]) w[c] += Q.weight(a);
  }
  return w;
}

void check_constant_on_classes(const DiscreteProcessLaw& Q, std::size_t k,
                               const std::vector<double>& coef, const std::string& what) {
  if (coef.size() != Q.size()) throw DomainError(what + ": one coefficient per atom expected");
  for (std::size_t a = 0; a < coef.size(); ++a) {
    if (!(std::abs(coef[a]) <= 1.0)) throw PredictabilityError(what + ": coefficient exceeds 1");
  }
  for (const auto& members : Q.classes(k)) {
    for (std::size_t a : members) {
      if (coef[a] != coef[members.front()]) {
        throw PredictabilityError(what + ": coefficient is not constant on a prefix class at t = " +
                                  std::to_string(Q.times()[k]));
      }
    }
  }
}

double lp_norm(const DiscreteProcessLaw& Q, std::span<const double> z, double p) {
  double s = 0.0;
  for (std::size_t a = 0; a < z.size(); ++a) s += Q.weight(a) * std::pow(std::abs(z[a]), p);
  return std::pow(s, 1.0 / p);
}

}  // namespace

DiscreteProcessLaw::DiscreteProcessLaw(Partition grid, std::vector<Atom> atoms)
    : grid_(std::move(grid)), atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ValidationError("law.nonempty", "a law needs at least one atom");
  double total = 0.0;
  for (std::size_t a = 0; a < atoms_.size(); ++a) {
    const auto& atom = atoms_[a];
    if (!(atom.weight > 0) || !std::isfinite(atom.weight)) {
      throw ValidationError("law.weights_positive", "atom " + std::to_string(a) + " has weight <= 0");
    }
    total += atom.weight;
    if (atom.path.dimension() != atoms_.front().path.dimension()) {
      throw ValidationError("law.shared_dimension", "atom " + std::to_string(a) + " differs in dimension");
    }
    if (!(atom.path.horizon() == atoms_.front().path.horizon())) {
      throw ValidationError("law.shared_horizon", "atom " + std::to_string(a) + " differs in horizon");
    }
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ValidationError("law.weights_normalized",
                          "weights sum to " + std::to_string(total) + ", expected 1");
  }

  const auto& h = horizon();
  const auto times = grid_.times();
  for (double t : times) {
    if (!h.contains(t)) throw ValidationError("law.grid_in_horizon", "grid time outside the horizon");
  }
  if (h.is_finite() && times.back() != h.end()) {
    throw ValidationError("law.grid_ends_at_horizon", "grid must end at T");
  }
  for (std::size_t a = 0; a < atoms_.size(); ++a) {
    for (double s : atoms_[a].path.jump_times()) {
      if (!std::binary_search(times.begin(), times.end(), s)) {
        throw ValidationError("law.breakpoints_on_grid",
                              "atom " + std::to_string(a) + " jumps at " + std::to_string(s) +
                                  ", which is not a grid time");
      }
    }
  }

  const std::size_t n = atoms_.size(), K = times.size(), d = dimension();
  values_ = GridProcess(n, K, d);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < d; ++i) values_(a, k, i) = eval(atoms_[a].path, i, times[k]);
    }
  }

  classes_.resize(K);
  class_of_.assign(K, std::vector<std::size_t>(n, 0));
  for (std::size_t k = 0; k < K; ++k) {
    std::map<std::pair<std::size_t, std::vector<double>>, std::size_t> index;
    for (std::size_t a = 0; a < n; ++a) {
      const std::size_t parent = k == 0 ? 0 : class_of_[k - 1][a];
      std::vector<double> key(d);
      for (std::size_t i = 0; i < d; ++i) key[i] = values_(a, k, i);
      auto [it, inserted] = index.try_emplace({parent, std::move(key)}, classes_[k].size());
      if (inserted) classes_[k].emplace_back();
      classes_[k][it->second].push_back(a);
      class_of_[k][a] = it->second;
    }
  }
}

std::size_t DiscreteProcessLaw::grid_index(double t) const {
  const auto times = grid_.times();
  auto it = std::lower_bound(times.begin(), times.end(), t);
  if (it == times.end() || *it != t) {
    throw DomainError("time " + std::to_string(t) + " is not a grid time");
  }
  return static_cast<std::size_t>(it - times.begin());
}

std::vector<PrefixClass> prefix_classes(const DiscreteProcessLaw& Q, std::size_t k) {
  if (k >= Q.n_times()) throw DomainError("grid index out of range");
  std::vector<PrefixClass> out;
  for (const auto& members : Q.classes(k)) out.push_back({k, members});
  return out;
}

std::vector<double> conditional_expectation(const DiscreteProcessLaw& Q, std::span<const double> Z,
                                            std::size_t k) {
  if (k >= Q.n_times()) throw DomainError("grid index out of range");
  if (Z.size() != Q.size()) throw DomainError("one value per atom expected");
  const auto& cls = Q.classes(k);
  std::vector<double> out(cls.size(), 0.0);
  for (std::size_t c = 0; c < cls.size(); ++c) {
    double mass = 0.0, acc = 0.0;
    for (std::size_t a : cls[c]) {
      mass += Q.weight(a);
      acc += Q.weight(a) * Z[a];
    }
    out[c] = acc / mass;
  }
  return out;
}

ElementaryIntegrand::ElementaryIntegrand(const DiscreteProcessLaw& Q,
                                         std::vector<IntegrandCoordinate> coords)
    : coords_(std::move(coords)), atoms_(Q.size()) {
  if (coords_.size() != Q.dimension()) throw DomainError("integrand needs one entry per coordinate");
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    const auto& c = coords_[i];
    const std::string where = "coordinate " + std::to_string(i);
    check_constant_on_classes(Q, 0, c.h0, where + " H0");
    double prev = 0.0;
    for (std::size_t l = 0; l < c.legs.size(); ++l) {
      const auto& leg = c.legs[l];
      const std::size_t kf = Q.grid_index(leg.from);
      Q.grid_index(leg.to);
      if (leg.from != prev || leg.to < leg.from) {
        throw DomainError(where + ": legs must form a chain 0 = t_0 <= t_1 <= ...");
      }
      check_constant_on_classes(Q, kf, leg.coefficient, where + " leg " + std::to_string(l));
      prev = leg.to;
    }
  }
}

ElementaryIntegrand ElementaryIntegrand::zero(const DiscreteProcessLaw& Q) {
  std::vector<IntegrandCoordinate> coords(Q.dimension(),
                                          IntegrandCoordinate{std::vector<double>(Q.size(), 0.0), {}});
  return ElementaryIntegrand(Q, std::move(coords));
}

std::vector<double> elementary_integral(const DiscreteProcessLaw& Q, const ElementaryIntegrand& H,
                                        const GridProcess& Y, double t) {
  check_shape(Q, Y);
  if (H.atoms() != Q.size()) throw DomainError("integrand belongs to a different law");
  const std::size_t kt = Q.grid_index(t);
  std::vector<double> out(Q.size(), 0.0);
  for (std::size_t i = 0; i < H.coordinates().size(); ++i) {
    const auto& c = H.coordinates()[i];
    for (std::size_t a = 0; a < out.size(); ++a) out[a] += c.h0[a] * Y(a, 0, i);
    for (const auto& leg : c.legs) {
      const std::size_t lo = std::min(Q.grid_index(leg.from), kt);
      const std::size_t hi = std::min(Q.grid_index(leg.to), kt);
      if (lo == hi) continue;
      for (std::size_t a = 0; a < out.size(); ++a) {
        out[a] += leg.coefficient[a] * (Y(a, hi, i) - Y(a, lo, i));
      }
    }
  }
  return out;
}

std::vector<double> elementary_integral(const DiscreteProcessLaw& Q, const ElementaryIntegrand& H,
                                        double t) {
  return elementary_integral(Q, H, Q.values(), t);
}

DoobDecomposition doob_decomposition(const DiscreteProcessLaw& Q) {
  const std::size_t n = Q.size(), K = Q.n_times(), d = Q.dimension();
  const auto& X = Q.values();
  DoobDecomposition dd{GridProcess(n, K, d), GridProcess(n, K, d)};
  for (std::size_t k = 1; k < K; ++k) {
    const auto w = class_weights(Q, k - 1);
    for (std::size_t i = 0; i < d; ++i) {
      const auto sums = increment_sums(Q, X, i, k - 1, k);
      for (std::size_t a = 0; a < n; ++a) {
        const std::size_t c = Q.class_of(k - 1, a);
        dd.A(a, k, i) = dd.A(a, k - 1, i) + sums[c] / w[c];
      }
    }
  }
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < d; ++i) dd.M(a, k, i) = X(a, k, i) - dd.A(a, k, i);
    }
  }
  return dd;
}

bool martingale_check(const DiscreteProcessLaw& Q, const GridProcess& Y, double tol) {
  check_shape(Q, Y);
  for (std::size_t k = 1; k < Q.n_times(); ++k) {
    const auto w = class_weights(Q, k - 1);
    for (std::size_t i = 0; i < Q.dimension(); ++i) {
      const auto sums = increment_sums(Q, Y, i, k - 1, k);
      for (std::size_t c = 0; c < sums.size(); ++c) {
        if (std::abs(sums[c] / w[c]) > tol) return false;
      }
    }
  }
  return true;
}

namespace {

double variation_over(const DiscreteProcessLaw& Q, const GridProcess& Y, std::size_t i,
                      std::span<const std::size_t> idx) {
  double v = 0.0;
  for (std::size_t a = 0; a < Q.size(); ++a) v += Q.weight(a) * std::abs(Y(a, 0, i));
  for (std::size_t j = 1; j < idx.size(); ++j) {
    for (double s : increment_sums(Q, Y, i, idx[j - 1], idx[j])) v += std::abs(s);
  }
  return v;
}

}  // namespace

double conditional_variation(const DiscreteProcessLaw& Q, const GridProcess& Y, std::size_t i,
                             std::size_t k) {
  check_shape(Q, Y);
  if (i >= Q.dimension()) throw DomainError("coordinate out of range");
  if (k >= Q.n_times()) throw DomainError("grid index out of range");
  std::vector<std::size_t> idx(k + 1);
  for (std::size_t j = 0; j <= k; ++j) idx[j] = j;
  return variation_over(Q, Y, i, idx);
}

double conditional_variation(const DiscreteProcessLaw& Q, std::size_t i, double t,
                             const std::optional<Partition>& pi) {
  const std::size_t kt = Q.grid_index(t);
  if (!pi) return conditional_variation(Q, Q.values(), i, kt);
  if (i >= Q.dimension()) throw DomainError("coordinate out of range");
  std::vector<std::size_t> idx;
  for (double s : pi->times()) {
    const std::size_t k = Q.grid_index(s);
    if (k > kt) throw DomainError("partition extends past t");
    idx.push_back(k);
  }
  if (idx.back() != kt) idx.push_back(kt);
  return variation_over(Q, Q.values(), i, idx);
}

ElementaryIntegrand sign_integrand(const DiscreteProcessLaw& Q, double t) {
  const std::size_t kt = Q.grid_index(t);
  const auto times = Q.times();
  std::vector<IntegrandCoordinate> coords(Q.dimension());
  for (std::size_t i = 0; i < Q.dimension(); ++i) {
    auto& c = coords[i];
    c.h0.resize(Q.size());
    for (std::size_t a = 0; a < Q.size(); ++a) c.h0[a] = sign(Q.value(a, 0, i));
    for (std::size_t k = 1; k <= kt; ++k) {
      const auto sums = increment_sums(Q, Q.values(), i, k - 1, k);
      IntegrandLeg leg{times[k - 1], times[k], std::vector<double>(Q.size())};
      for (std::size_t a = 0; a < Q.size(); ++a) leg.coefficient[a] = sign(sums[Q.class_of(k - 1, a)]);
      c.legs.push_back(std::move(leg));
    }
  }
  return ElementaryIntegrand(Q, std::move(coords));
}

ElementaryIntegrand hitting_integrand(const DiscreteProcessLaw& Q, std::size_t i, double t, double c) {
  if (i >= Q.dimension()) throw DomainError("coordinate out of range");
  const std::size_t kt = Q.grid_index(t);
  const auto times = Q.times();
  std::vector<IntegrandCoordinate> coords(
      Q.dimension(), IntegrandCoordinate{std::vector<double>(Q.size(), 0.0), {}});
  auto& ci = coords[i];
  std::fill(ci.h0.begin(), ci.h0.end(), 1.0);
  std::vector<bool> stopped(Q.size(), false);
  for (std::size_t k = 1; k <= kt; ++k) {
    IntegrandLeg leg{times[k - 1], times[k], std::vector<double>(Q.size())};
    for (std::size_t a = 0; a < Q.size(); ++a) {
      if (std::abs(Q.value(a, k - 1, i)) > c) stopped[a] = true;
      leg.coefficient[a] = stopped[a] ? 0.0 : 1.0;
    }
    ci.legs.push_back(std::move(leg));
  }
  return ElementaryIntegrand(Q, std::move(coords));
}

double mean_abs(const DiscreteProcessLaw& Q, std::size_t k) {
  double m = 0.0;
  for (std::size_t a = 0; a < Q.size(); ++a) {
    double s = 0.0;
    for (std::size_t i = 0; i < Q.dimension(); ++i) s += std::abs(Q.value(a, k, i));
    m += Q.weight(a) * s;
  }
  return m;
}

Classification classify(const DiscreteProcessLaw& Q, double tol) {
  const std::size_t d = Q.dimension();
  Classification out{true, std::vector<bool>(d, true), 0.0, 0.0};
  std::vector<double> var(d, 0.0);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t a = 0; a < Q.size(); ++a) var[i] += Q.weight(a) * std::abs(Q.value(a, 0, i));
  }
  auto update = [&](std::size_t k) {
    double stat = mean_abs(Q, k);
    for (double v : var) stat += v;
    if (k == 0 || stat > out.quasimartingale_statistic) {
      out.quasimartingale_statistic = stat;
      out.statistic_time = Q.times()[k];
    }
  };
  update(0);
  for (std::size_t k = 1; k < Q.n_times(); ++k) {
    const auto w = class_weights(Q, k - 1);
    for (std::size_t i = 0; i < d; ++i) {
      const auto sums = increment_sums(Q, Q.values(), i, k - 1, k);
      for (std::size_t c = 0; c < sums.size(); ++c) {
        const double mean = sums[c] / w[c];
        if (std::abs(mean) > tol) out.martingale = false;
        if (mean > tol) out.supermartingale[i] = false;
        var[i] += std::abs(sums[c]);
      }
    }
    update(k);
  }
  return out;
}

DiscreteProcessLaw negate(const DiscreteProcessLaw& Q) {
  std::vector<Atom> atoms;
  atoms.reserve(Q.size());
  for (const auto& atom : Q.atoms()) {
    std::vector<StepCoordinate> coords = atom.path.coordinates();
    for (auto& c : coords) {
      for (double& v : c.values) v = 0.0 - v;
    }
    atoms.push_back({CadlagPath(atom.path.horizon(), std::move(coords)), atom.weight});
  }
  return DiscreteProcessLaw(Q.grid(), std::move(atoms));
}

// ---------------------------------------------------------------------------

namespace {

struct FreeCoefficient {
  std::size_t i;
  std::size_t leg;  // 0 for H0, j for the leg ]t_{j-1}, t_j]
  std::size_t cls;  // class index at 0 (H0) or at j-1
};

std::vector<FreeCoefficient> free_coefficients(const DiscreteProcessLaw& Q, std::size_t k) {
  if (k >= Q.n_times()) throw DomainError("grid index out of range");
  std::vector<FreeCoefficient> out;
  for (std::size_t i = 0; i < Q.dimension(); ++i) {
    for (std::size_t c = 0; c < Q.classes(0).size(); ++c) out.push_back({i, 0, c});
    for (std::size_t j = 1; j <= k; ++j) {
      for (std::size_t c = 0; c < Q.classes(j - 1).size(); ++c) out.push_back({i, j, c});
    }
  }
  return out;
}

}  // namespace

std::size_t extreme_bits(const DiscreteProcessLaw& Q, std::size_t k) {
  return free_coefficients(Q, k).size();
}

ElementaryIntegrand extreme_integrand(const DiscreteProcessLaw& Q, std::size_t k,
                                      std::span<const int> signs) {
  const auto fc = free_coefficients(Q, k);
  if (signs.size() != fc.size()) throw DomainError("one sign per free coefficient expected");
  const auto times = Q.times();
  std::vector<IntegrandCoordinate> coords(Q.dimension());
  for (auto& c : coords) {
    c.h0.assign(Q.size(), 0.0);
    for (std::size_t j = 1; j <= k; ++j) {
      c.legs.push_back({times[j - 1], times[j], std::vector<double>(Q.size(), 0.0)});
    }
  }
  for (std::size_t b = 0; b < fc.size(); ++b) {
    const auto& f = fc[b];
    auto& target = f.leg == 0 ? coords[f.i].h0 : coords[f.i].legs[f.leg - 1].coefficient;
    const std::size_t at = f.leg == 0 ? 0 : f.leg - 1;
    for (std::size_t a : Q.classes(at)[f.cls]) target[a] = signs[b] < 0 ? -1.0 : 1.0;
  }
  return ElementaryIntegrand(Q, std::move(coords));
}

void for_each_extreme_integral(const DiscreteProcessLaw& Q, std::size_t k, std::size_t max_bits,
                               const std::function<void(std::span<const double>)>& visit) {
  const auto fc = free_coefficients(Q, k);
  if (fc.size() > max_bits || fc.size() >= 63) {
    throw DomainError("extreme-point enumeration needs " + std::to_string(fc.size()) +
                      " bits, above the limit");
  }
  // Contribution of each free coefficient when it equals +1.
  std::vector<std::vector<std::pair<std::size_t, double>>> contrib(fc.size());
  for (std::size_t b = 0; b < fc.size(); ++b) {
    const auto& f = fc[b];
    const std::size_t at = f.leg == 0 ? 0 : f.leg - 1;
    for (std::size_t a : Q.classes(at)[f.cls]) {
      const double x = f.leg == 0 ? Q.value(a, 0, f.i) : Q.value(a, f.leg, f.i) - Q.value(a, f.leg - 1, f.i);
      contrib[b].push_back({a, x});
    }
  }
  std::vector<double> vals(Q.size(), 0.0);
  std::vector<int> state(fc.size(), -1);
  for (const auto& cb : contrib) {
    for (auto [a, x] : cb) vals[a] -= x;
  }
  visit(vals);
  const std::uint64_t total = std::uint64_t{1} << fc.size();
  for (std::uint64_t s = 1; s < total; ++s) {
    const auto b = static_cast<std::size_t>(std::countr_zero(s));
    const double factor = state[b] < 0 ? 2.0 : -2.0;
    state[b] = -state[b];
    for (auto [a, x] : contrib[b]) vals[a] += factor * x;
    visit(vals);
  }
}

Norms norms(const DiscreteProcessLaw& Q, double p, std::span<const ElementaryIntegrand> extra,
            std::size_t max_bits) {
  if (!(p >= 1.0)) throw DomainError("p must be at least 1");
  const std::size_t n = Q.size(), K = Q.n_times(), d = Q.dimension();
  Norms out{0.0, 0.0, 0.0, false, 0};

  std::vector<double> sup(n);
  for (std::size_t a = 0; a < n; ++a) sup[a] = sup_norm(Q.atoms()[a].path);
  out.lp_sup = lp_norm(Q, sup, p);

  const auto dd = doob_decomposition(Q);
  std::vector<double> hardy(n, 0.0);
  for (std::size_t a = 0; a < n; ++a) {
    double m = 0.0, v = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t i = 0; i < d; ++i) {
        m = std::max(m, std::abs(dd.M(a, k, i)));
        if (k > 0) v += std::abs(dd.A(a, k, i) - dd.A(a, k - 1, i));
      }
    }
    hardy[a] = m + v;
  }
  out.hardy = lp_norm(Q, hardy, p);

  const double T = Q.times().back();
  auto consider = [&](const ElementaryIntegrand& H) {
    out.emery_lower = std::max(out.emery_lower, lp_norm(Q, elementary_integral(Q, H, T), p));
    ++out.library_size;
  };
  for (double t : Q.times()) consider(sign_integrand(Q, t));
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> levels;
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t k = 0; k < K; ++k) levels.push_back(std::abs(Q.value(a, k, i)));
    }
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (double c : levels) consider(hitting_integrand(Q, i, T, c));
  }
  for (const auto& H : extra) consider(H);

  if (extreme_bits(Q, K - 1) <= max_bits) {
    for_each_extreme_integral(Q, K - 1, max_bits, [&](std::span<const double> z) {
      out.emery_lower = std::max(out.emery_lower, lp_norm(Q, z, p));
    });
    out.emery_exhaustive = true;
  }
  return out;
}

}  // namespace cadlag
