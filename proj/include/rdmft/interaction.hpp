#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rdmft/adapted.hpp"
#include "rdmft/operator.hpp"
#include "rdmft/sector.hpp"

namespace rdmft {

enum class InteractionKind { Hubbard, DensityDensity, Explicit };

/// Spin-independent, translation-invariant interaction.
///  - Hubbard: U sum_i n_{i up} n_{i down}.
///  - DensityDensity: sum_r couplings[r-1] sum_axes sum_i n_i n_{i + r e_axis}.
///  - Explicit: user terms in the plane-wave orbital basis; every term must
///    conserve momentum and Mz, and the sum must be Hermitian.
struct InteractionSpec {
  InteractionKind kind = InteractionKind::Hubbard;
  double hubbard_u = 0.0;
  std::vector<double> couplings;
  std::vector<OperatorTerm> terms;

  static InteractionSpec hubbard(double u);
  static InteractionSpec density_density(std::vector<double> couplings);
  static InteractionSpec explicit_terms(std::vector<OperatorTerm> terms);

  /// p of the p-body interaction.
  int body_count() const;
  std::string kind_name() const;
};

/// One unit-coupling operator per coupling constant, so that
/// V = sum_i coupling(i) * component(i).
struct InteractionComponents {
  std::vector<double> couplings;
  std::vector<std::vector<OperatorTerm>> operators;
};

InteractionComponents expand_interaction(const InteractionSpec& spec, const LatticeSpec& lattice);

struct InteractionMatrix {
  Eigen::MatrixXd values;
  std::vector<double> couplings;
  std::vector<Eigen::MatrixXd> components;

  int size() const { return static_cast<int>(values.rows()); }
};

/// V_rr' = <r|V|r'> on a determinant basis; Hermiticity is checked.
InteractionMatrix build_interaction_matrix(const InteractionSpec& spec, const SectorBasis& basis);
/// C V C^T through the adapted coefficients.
InteractionMatrix build_interaction_matrix(const InteractionSpec& spec, const AdaptedBasis& basis);

/// Diagonal kinetic matrix sum_{q in r} eps_q on a determinant basis.
Eigen::MatrixXd kinetic_matrix(const SectorBasis& basis);
Eigen::MatrixXd kinetic_matrix(const AdaptedBasis& basis);

}  // namespace rdmft
