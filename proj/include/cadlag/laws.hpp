#pragma once

// Finitely supported laws on the canonical space of step paths.
//
// All atoms jump only at times of a common grid, so the raw canonical
// filtration at a grid time t_k is generated by the grid values up to t_k and
// is represented exactly by prefix classes: atoms whose grid values agree on
// t_0..t_k. Conditional expectations are class-wise weighted averages.

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "cadlag/paths.hpp"

namespace cadlag {

struct Atom {
  CadlagPath path;
  double weight;
};

/// Real values per (atom, grid index, coordinate).
class GridProcess {
 public:
  GridProcess() = default;
  GridProcess(std::size_t atoms, std::size_t times, std::size_t dim)
      : atoms_(atoms), times_(times), dim_(dim), data_(atoms * times * dim, 0.0) {}

  double& operator()(std::size_t a, std::size_t k, std::size_t i) {
    return data_[(a * times_ + k) * dim_ + i];
  }
  double operator()(std::size_t a, std::size_t k, std::size_t i) const {
    return data_[(a * times_ + k) * dim_ + i];
  }
  std::size_t atoms() const noexcept { return atoms_; }
  std::size_t times() const noexcept { return times_; }
  std::size_t dimension() const noexcept { return dim_; }

 private:
  std::size_t atoms_ = 0, times_ = 0, dim_ = 0;
  std::vector<double> data_;
};

class DiscreteProcessLaw {
 public:
  /// Throws ValidationError naming the violated invariant.
  DiscreteProcessLaw(Partition grid, std::vector<Atom> atoms);

  const Partition& grid() const noexcept { return grid_; }
  std::span<const double> times() const noexcept { return grid_.times(); }
  std::size_t n_times() const noexcept { return grid_.size(); }
  /// Grid index of t; DomainError when t is not a grid time.
  std::size_t grid_index(double t) const;

  std::size_t dimension() const noexcept { return atoms_.front().path.dimension(); }
  const TimeHorizon& horizon() const noexcept { return atoms_.front().path.horizon(); }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  std::size_t size() const noexcept { return atoms_.size(); }
  double weight(std::size_t a) const { return atoms_[a].weight; }

  /// X^i_{t_k} on atom a.
  double value(std::size_t a, std::size_t k, std::size_t i) const { return values_(a, k, i); }
  const GridProcess& values() const noexcept { return values_; }

  /// Prefix classes at grid index k, each listed by ascending atom index and
  /// ordered by first member.
  const std::vector<std::vector<std::size_t>>& classes(std::size_t k) const { return classes_.at(k); }
  std::size_t class_of(std::size_t k, std::size_t a) const { return class_of_[k][a]; }

 private:
  Partition grid_;
  std::vector<Atom> atoms_;
  GridProcess values_;
  std::vector<std::vector<std::vector<std::size_t>>> classes_;
  std::vector<std::vector<std::size_t>> class_of_;
};

struct PrefixClass {
  std::size_t k;
  std::vector<std::size_t> members;
};

std::vector<PrefixClass> prefix_classes(const DiscreteProcessLaw& Q, std::size_t k);

/// Class-wise conditional mean of per-atom values Z, indexed like Q.classes(k).
std::vector<double> conditional_expectation(const DiscreteProcessLaw& Q, std::span<const double> Z,
                                            std::size_t k);

/// Coefficient used on the grid interval ]from, to].
struct IntegrandLeg {
  double from;
  double to;
  std::vector<double> coefficient;  ///< per atom
};

struct IntegrandCoordinate {
  std::vector<double> h0;  ///< per atom
  std::vector<IntegrandLeg> legs;
};

/// Elementary predictable integrand bounded by 1. Legs of a coordinate form a
/// chain 0 = t_0 <= t_1 <= ... on the grid; a leg's coefficient must be
/// constant on the prefix classes at its left endpoint.
class ElementaryIntegrand {
 public:
  /// Throws DomainError for off-grid leg times or malformed shapes and
  /// PredictabilityError for coefficients that are not class-measurable or exceed 1.
  ElementaryIntegrand(const DiscreteProcessLaw& Q, std::vector<IntegrandCoordinate> coords);
  static ElementaryIntegrand zero(const DiscreteProcessLaw& Q);

  const std::vector<IntegrandCoordinate>& coordinates() const noexcept { return coords_; }
  std::size_t atoms() const noexcept { return atoms_; }

 private:
  std::vector<IntegrandCoordinate> coords_;
  std::size_t atoms_;
};

/// (H o X)_t per atom, including the H_0 X_0 term.
std::vector<double> elementary_integral(const DiscreteProcessLaw& Q, const ElementaryIntegrand& H,
                                        double t);

/// The same sum against arbitrary grid values Y (e.g. the parts of a Doob decomposition).
std::vector<double> elementary_integral(const DiscreteProcessLaw& Q, const ElementaryIntegrand& H,
                                        const GridProcess& Y, double t);

struct DoobDecomposition {
  GridProcess M;
  GridProcess A;
};

DoobDecomposition doob_decomposition(const DiscreteProcessLaw& Q);

/// Every conditional increment mean of Y under Q's filtration is within tol of 0.
bool martingale_check(const DiscreteProcessLaw& Q, const GridProcess& Y, double tol);

/// Var_t of coordinate i: E|X_0| + sum of E|E[increment | F_left]| over the cells
/// of pi (0 and t are added when missing), or over the grid when pi is absent.
double conditional_variation(const DiscreteProcessLaw& Q, std::size_t i, double t,
                             const std::optional<Partition>& pi = std::nullopt);

/// Finest-grid Var up to grid index k of coordinate i of arbitrary grid values Y,
/// using Q's filtration.
double conditional_variation(const DiscreteProcessLaw& Q, const GridProcess& Y, std::size_t i,
                             std::size_t k);

/// H_0 = sign(X_0), legs = sign of the conditional increment means up to t; sign(0) = 0.
ElementaryIntegrand sign_integrand(const DiscreteProcessLaw& Q, double t);

/// 1_{[0, tau ^ t]} for coordinate i, tau the first grid time with |X^i| > c.
/// Then (H o X^i)_t = X^i_{tau ^ t}.
ElementaryIntegrand hitting_integrand(const DiscreteProcessLaw& Q, std::size_t i, double t, double c);

struct Classification {
  bool martingale;
  std::vector<bool> supermartingale;  ///< per coordinate
  double quasimartingale_statistic;   ///< sup_t E|X_t| + sum_i Var_t(X^i)
  double statistic_time;              ///< a grid time attaining the sup
};

Classification classify(const DiscreteProcessLaw& Q, double tol);

/// E_Q|X_{t_k}| with |x| the l1 norm over coordinates.
double mean_abs(const DiscreteProcessLaw& Q, std::size_t k);

/// The law of -X.
DiscreteProcessLaw negate(const DiscreteProcessLaw& Q);

// ---------------------------------------------------------------------------
// Extreme-point integrands on the grid.
//
// Every elementary integrand with grid leg times is, on [0, t_k], a finest-grid
// integrand whose coefficient per (coordinate, leg, class) is free in [-1,1],
// plus H_0 per (coordinate, class at 0). These helpers index that coefficient
// cube and walk its vertices.

/// Number of free +-1 coefficients for integrands restricted to [0, t_k].
std::size_t extreme_bits(const DiscreteProcessLaw& Q, std::size_t k);

/// Integrand whose j-th free coefficient is signs[j] (in {-1, 1}).
ElementaryIntegrand extreme_integrand(const DiscreteProcessLaw& Q, std::size_t k,
                                      std::span<const int> signs);

/// Visits (H o X)_{t_k} per atom for every vertex of the coefficient cube, in
/// Gray-code order (2^bits visits). Throws DomainError above `max_bits`.
void for_each_extreme_integral(const DiscreteProcessLaw& Q, std::size_t k, std::size_t max_bits,
                               const std::function<void(std::span<const double>)>& visit);

struct Norms {
  double lp_sup;
  double hardy;
  double emery_lower;       ///< lower bound on the Emery pseudonorm
  bool emery_exhaustive;    ///< extreme points were enumerated, so emery_lower is exact on the grid
  std::size_t library_size;
};

/// Library: sign integrands at every grid time, hitting integrands at every
/// grid time and level |X| value, the constant +1 integrand, plus `extra`.
/// Extreme points are enumerated when extreme_bits <= max_bits.
Norms norms(const DiscreteProcessLaw& Q, double p, std::span<const ElementaryIntegrand> extra = {},
            std::size_t max_bits = 16);

}  // namespace cadlag
