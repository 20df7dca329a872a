#include "cadlag/generators.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <string>

#include "cadlag/errors.hpp"

namespace cadlag {

namespace {

struct Step {
  double increment;
  double prob;
};

void require(bool ok, const char* invariant, const std::string& detail) {
  if (!ok) throw ValidationError(invariant, detail);
}

void check_probability(double p) {
  require(p >= 0.0 && p <= 1.0, "generator.probability", "probabilities must lie in [0,1]");
}

// Exhaustive tree with the same step distribution at every grid time.
DiscreteProcessLaw build_tree(std::vector<double> grid, double x0, const std::vector<Step>& steps,
                              std::size_t cap) {
  std::vector<Step> live;
  for (const auto& s : steps) {
    if (s.prob > 0) live.push_back(s);
  }
  const std::size_t n = grid.size() - 1;
  double count = std::pow(static_cast<double>(live.size()), static_cast<double>(n));
  require(count <= static_cast<double>(cap), "generator.atom_cap",
          "law would have " + std::to_string(static_cast<long double>(count)) + " atoms, above the cap " +
              std::to_string(cap));

  const auto horizon = TimeHorizon::finite(grid.back());
  std::vector<Atom> atoms;
  std::vector<double> values(n + 1);
  values[0] = x0;
  auto dfs = [&](auto&& self, std::size_t k, double weight) -> void {
    if (k == n) {
      atoms.push_back({CadlagPath::scalar(horizon, grid, values), weight});
      return;
    }
    for (const auto& s : live) {
      values[k + 1] = values[k] + s.increment;
      self(self, k + 1, weight * s.prob);
    }
  };
  dfs(dfs, 0, 1.0);

  double total = 0.0;
  for (const auto& a : atoms) total += a.weight;
  if (std::abs(total - 1.0) > 1e-13) {
    for (auto& a : atoms) a.weight /= total;
  }
  return DiscreteProcessLaw(Partition(std::move(grid)), std::move(atoms));
}

std::vector<double> uniform_grid(std::size_t n, double T) {
  std::vector<double> g(n + 1);
  for (std::size_t k = 0; k <= n; ++k) g[k] = static_cast<double>(k) * T / static_cast<double>(n);
  g.back() = T;
  return g;
}

DiscreteProcessLaw rebuild(const DiscreteProcessLaw& Q, std::vector<double> grid,
                           const std::function<double(std::size_t a, std::size_t k, std::size_t i)>& value,
                           const std::vector<double>& weights) {
  std::vector<Atom> atoms;
  for (std::size_t a = 0; a < Q.size(); ++a) {
    std::vector<StepCoordinate> coords(Q.dimension());
    for (std::size_t i = 0; i < Q.dimension(); ++i) {
      coords[i].breakpoints = grid;
      for (std::size_t k = 0; k < grid.size(); ++k) coords[i].values.push_back(value(a, k, i));
    }
    atoms.push_back({CadlagPath(Q.horizon(), std::move(coords)), weights[a]});
  }
  return DiscreteProcessLaw(Partition(std::move(grid)), std::move(atoms));
}

std::vector<double> base_weights(const DiscreteProcessLaw& Q) {
  std::vector<double> w;
  for (const auto& a : Q.atoms()) w.push_back(a.weight);
  return w;
}

struct LawVisitor {
  const GeneratorSpec& spec;

  DiscreteProcessLaw operator()(const ScaledRandomWalk& g) const {
    require(g.n_steps > 0, "generator.positive", "n_steps must be positive");
    require(g.T > 0 && std::isfinite(g.T), "generator.positive", "T must be positive");
    const double h = std::sqrt(g.T / static_cast<double>(g.n_steps));
    return build_tree(uniform_grid(g.n_steps, g.T), 0.0, {{h, 0.5}, {-h, 0.5}}, spec.atom_cap);
  }

  DiscreteProcessLaw operator()(const BinomialTree& g) const {
    require(g.depth > 0, "generator.positive", "depth must be positive");
    check_probability(g.p_up);
    const double T = g.T == 0.0 ? static_cast<double>(g.depth) : g.T;
    require(T > 0 && std::isfinite(T), "generator.positive", "T must be positive");
    return build_tree(uniform_grid(g.depth, T), g.x0, {{g.up, g.p_up}, {g.down, 1.0 - g.p_up}},
                      spec.atom_cap);
  }

  DiscreteProcessLaw operator()(const CompensatedJump& g) const {
    check_probability(g.jump_prob);
    require(g.grid.size() >= 2, "generator.grid", "grid needs at least two times");
    Partition check(g.grid);
    const double mean = g.jump_prob * g.jump_size;
    return build_tree(g.grid, 0.0, {{g.jump_size - mean, g.jump_prob}, {-mean, 1.0 - g.jump_prob}},
                      spec.atom_cap);
  }

  DiscreteProcessLaw operator()(const Drifted& g) const {
    require(g.base != nullptr, "generator.base", "drifted needs a base spec");
    const auto Q = generate_law(*g.base);
    const auto times = Q.times();
    return rebuild(
        Q, {times.begin(), times.end()},
        [&](std::size_t a, std::size_t k, std::size_t i) {
          return Q.value(a, k, i) + g.drift * static_cast<double>(k);
        },
        base_weights(Q));
  }

  DiscreteProcessLaw operator()(const PerturbedSequence&) const {
    throw ValidationError("generator.kind", "perturbed_sequence produces a list of laws");
  }
};

std::vector<DiscreteProcessLaw> jump_shifted(const PerturbedSequence& g) {
  require(g.base != nullptr, "generator.base", "perturbed_sequence needs a base spec");
  require(g.count > 0, "generator.positive", "count must be positive");
  require(g.scale > 0 && std::isfinite(g.scale), "generator.positive", "scale must be positive");
  const auto Q = generate_law(*g.base);
  const auto times = Q.times();
  const std::vector<double> w0 = base_weights(Q);
  const bool finite = Q.horizon().is_finite();
  const std::size_t last_interior = finite ? times.size() - 1 : times.size();

  if (finite && times.size() > 2) {
    require(times[times.size() - 2] + g.scale < times.back(), "generator.shift_scale",
            "jump shift must keep interior grid times before T");
  }
  std::vector<DiscreteProcessLaw> out;
  for (std::size_t k = 1; k <= g.count; ++k) {
    const double shift = g.scale / static_cast<double>(k);
    std::vector<double> grid(times.begin(), times.end());
    for (std::size_t j = 1; j < last_interior; ++j) grid[j] += shift;
    out.push_back(rebuild(
        Q, std::move(grid), [&](std::size_t a, std::size_t j, std::size_t i) { return Q.value(a, j, i); },
        w0));
  }
  return out;
}

}  // namespace

DiscreteProcessLaw generate_law(const GeneratorSpec& spec) { return std::visit(LawVisitor{spec}, spec.kind); }

std::vector<DiscreteProcessLaw> generate_sequence(const GeneratorSpec& spec) {
  const auto* g = std::get_if<PerturbedSequence>(&spec.kind);
  if (g == nullptr) throw ValidationError("generator.kind", "only perturbed_sequence produces a list of laws");
  if (g->perturbation == Perturbation::jump_shift) return jump_shifted(*g);

  require(g->base != nullptr, "generator.base", "perturbed_sequence needs a base spec");
  require(g->count > 0, "generator.positive", "count must be positive");
  require(g->scale > 0 && g->scale < 1.0, "generator.weight_scale", "weight shift scale must lie in (0,1)");
  const auto Q = generate_law(*g->base);
  const auto times = Q.times();
  std::mt19937_64 rng(spec.seed);
  std::vector<double> signs(Q.size());
  for (double& s : signs) s = (rng() & 1u) ? 1.0 : -1.0;

  std::vector<DiscreteProcessLaw> out;
  for (std::size_t k = 1; k <= g->count; ++k) {
    const double eps = g->scale / static_cast<double>(k);
    std::vector<double> w(Q.size());
    double total = 0.0;
    for (std::size_t a = 0; a < Q.size(); ++a) {
      w[a] = Q.weight(a) * (1.0 + signs[a] * eps);
      total += w[a];
    }
    for (double& x : w) x /= total;
    out.push_back(rebuild(
        Q, {times.begin(), times.end()},
        [&](std::size_t a, std::size_t j, std::size_t i) { return Q.value(a, j, i); }, w));
  }
  return out;
}

Generated generate(const GeneratorSpec& spec) {
  if (std::holds_alternative<PerturbedSequence>(spec.kind)) return generate_sequence(spec);
  return generate_law(spec);
}

}  // namespace cadlag
