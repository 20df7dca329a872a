#pragma once

// Seeded, exhaustive constructions of the synthetic laws used by tests and the CLI.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <variant>
#include <vector>

#include "cadlag/laws.hpp"

namespace cadlag {

struct GeneratorSpec;

struct ScaledRandomWalk {
  std::size_t n_steps;
  double T = 1.0;
};

/// Additive steps x -> x + up (prob p_up) or x + down on the grid k*T/depth.
/// T = 0 means unit steps (T = depth).
struct BinomialTree {
  std::size_t depth;
  double up;
  double down;
  double p_up;
  double x0 = 0.0;
  double T = 0.0;
};

/// Increment J - E[J] at each grid step, J = jump_size with probability jump_prob else 0.
struct CompensatedJump {
  double jump_size;
  double jump_prob;
  std::vector<double> grid;
};

/// Base law plus drift * k at grid index k.
struct Drifted {
  std::shared_ptr<const GeneratorSpec> base;
  double drift;
};

enum class Perturbation { jump_shift, weight_shift };

/// count laws; the k-th moves interior grid times by scale/k (jump_shift) or
/// reweights atoms by 1 +- scale/k with seeded signs (weight_shift).
struct PerturbedSequence {
  std::shared_ptr<const GeneratorSpec> base;
  std::size_t count;
  Perturbation perturbation;
  double scale;
};

struct GeneratorSpec {
  std::variant<ScaledRandomWalk, BinomialTree, CompensatedJump, Drifted, PerturbedSequence> kind;
  std::uint64_t seed = 0;
  std::size_t atom_cap = std::size_t{1} << 16;
};

using Generated = std::variant<DiscreteProcessLaw, std::vector<DiscreteProcessLaw>>;

/// Throws ValidationError ("generator.*") for invalid parameters or an exceeded atom cap.
Generated generate(const GeneratorSpec& spec);
DiscreteProcessLaw generate_law(const GeneratorSpec& spec);
std::vector<DiscreteProcessLaw> generate_sequence(const GeneratorSpec& spec);

}  // namespace cadlag
