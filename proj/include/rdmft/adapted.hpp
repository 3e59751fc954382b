#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "rdmft/sector.hpp"

namespace rdmft {

/// Real orthonormal recombination of a determinant basis. Row a of
/// `coefficients` holds the amplitudes of adapted state a over the parent
/// determinants.
struct AdaptedBasis {
  SectorBasis parent;
  Eigen::MatrixXd coefficients;
  std::optional<int> twice_s;
  std::optional<int> parity;

  int size() const { return static_cast<int>(coefficients.rows()); }
  bool empty() const { return coefficients.rows() == 0; }

  /// Wraps user-supplied rows after checking orthonormality and, for the given
  /// labels, the S^2 / parity eigenvalue equations (tolerance 1e-12).
  static AdaptedBasis from_rows(SectorBasis parent, Eigen::MatrixXd rows, std::optional<int> twice_s,
                                std::optional<int> parity);
};

/// S^2 = S^- S^+ + Sz (Sz + 1) on the determinant basis.
Eigen::MatrixXd spin_squared_matrix(const SectorBasis& basis);

/// Reflection nu -> -nu (mod L) with the determinant reordering sign. Throws
/// PreconditionError if the basis is not closed under it.
Eigen::MatrixXd parity_matrix(const SectorBasis& basis);

/// Orthonormal basis of the joint (S, p) eigenspace. Rows are canonical:
/// Gram-Schmidt on the block projector's columns in parent order, largest
/// |coefficient| positive (first index wins ties), sorted by support size and
/// then by first supported determinant.
AdaptedBasis adapt_symmetry(const SectorBasis& basis, std::optional<int> twice_s, std::optional<int> parity);

/// Occupation map M (d x R): n = M x with x_r = |alpha_r|^2.
Eigen::MatrixXd occupation_map(const SectorBasis& basis);
/// Column a holds <a|n_q|a>. Throws NotDiagonalError if some <a|n_q|b> with
/// a != b is nonzero, since then n is not a function of |alpha|^2 alone.
Eigen::MatrixXd occupation_map(const AdaptedBasis& basis);

}  // namespace rdmft
