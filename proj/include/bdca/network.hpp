#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Sparse>

#include "bdca/problem.hpp"

namespace bdca {

/// Nonzero stoichiometric coefficient (species, reaction, value).
struct StoichEntry {
  int species = 0;
  int reaction = 0;
  int value = 0;
  friend bool operator==(const StoichEntry&, const StoichEntry&) = default;
};

/// Reversible elementary reaction network with forward (F) and reverse (R)
/// stoichiometry and log kinetic parameters w = [ln k_f; ln k_r].
struct ReactionNetwork {
  std::string name;
  int m = 0;  // species
  int n = 0;  // reactions
  std::vector<StoichEntry> forward;
  std::vector<StoichEntry> reverse;
  Vector w;

  friend bool operator==(const ReactionNetwork& a, const ReactionNetwork& b);
};

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Thrown when an exponent w + Bx exceeds the overflow guard.
class OverflowError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Exponent cap for exp(w + Bx); exp overflows near 709.8 in double.
inline constexpr double kExponentCap = 700.0;

struct Rates {
  Vector e;  // exp(w + Bx), length 2n
  Vector p;  // production
  Vector c;  // consumption
  Vector f;  // p - c
};

struct NetworkParts {
  double f1 = 0.0;
  Vector grad_f1;
  Matrix hess_f1;
  double f2 = 0.0;
  Vector grad_f2;
  Matrix hess_f2;
};

/// Immutable evaluator of the steady-state objective |f(x)|^2 = f1 - f2 with
///   f1 = 2(|p|^2 + |c|^2),  f2 = |p + c|^2,
///   p = [F,R] exp(w + Bx),  c = [R,F] exp(w + Bx),  B = [F,R]^T.
class NetworkObjective {
 public:
  explicit NetworkObjective(ReactionNetwork network);

  const ReactionNetwork& network() const { return network_; }
  int species() const { return network_.m; }

  /// Throws OverflowError when a component of w + Bx exceeds kExponentCap.
  Rates eval_rates(const Vector& x) const;

  /// f1, f2 and derivatives up to `order`; `part` selects which of the two
  /// are computed. Throws OverflowError.
  NetworkParts eval_parts(const Vector& x, Order order, Part part = Part::Both) const;

  /// Jacobian of f(x) = p(x) - c(x).
  Matrix jacobian_f(const Vector& x) const;

 private:
  ReactionNetwork network_;
  SparseMatrix M_;     // [F, R], m x 2n
  SparseMatrix N_;     // [R, F], m x 2n
  SparseMatrix B_;     // M^T, 2n x m
  SparseMatrix MpN_;   // M + N
};

Rates eval_rates(const ReactionNetwork& network, const Vector& x);
NetworkParts eval_f1_f2(const ReactionNetwork& network, const Vector& x);

/// DcProblem view of a network objective; overflow maps to a non-finite
/// evaluation.
DcProblem make_network_problem(std::shared_ptr<const NetworkObjective> objective, double rho);
DcProblem make_network_problem(const ReactionNetwork& network, double rho);

struct ConservationCheck {
  double residual = 0.0;  // |(R - F)^T l|_inf
  Vector l_used;
};

/// Throws std::invalid_argument if l has a nonpositive entry or wrong length.
ConservationCheck check_mass_conservation(const ReactionNetwork& network,
                                          const std::optional<Vector>& l = std::nullopt);

/// Structural problems that do not make a network unusable: empty rows of
/// F or R, net-stoichiometry columns with fewer than two nonzeros.
std::vector<std::string> structural_warnings(const ReactionNetwork& network);

struct GeneratorConfig {
  int min_species_per_reaction = 2;
  int max_species_per_reaction = 4;
  int max_stoich = 3;
  double w_bound = 1.0;
  int max_attempts = 200;
};

class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Random mass-conserving network: every column of F and R has the same
/// sum, so (R - F)^T 1 = 0 exactly. Deterministic in seed.
ReactionNetwork generate_network(int m, int n, std::uint64_t seed, const GeneratorConfig& cfg = {});

/// Schema violation in a model file.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

ReactionNetwork network_from_json_text(const std::string& text);
std::string network_to_json_text(const ReactionNetwork& network);
ReactionNetwork load_network(const std::string& path);
void save_network(const ReactionNetwork& network, const std::string& path);

}  // namespace bdca
