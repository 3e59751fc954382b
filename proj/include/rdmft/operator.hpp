#pragma once

#include <Eigen/Dense>
#include <vector>

#include "rdmft/configuration.hpp"
#include "rdmft/sector.hpp"

namespace rdmft {

/// coefficient * (ops[0] ops[1] ... ops[k-1]); the rightmost operator acts first.
struct OperatorTerm {
  double coefficient = 1.0;
  std::vector<LadderOp> ops;
};

/// Matrix <r'|O|r> of a sum of terms on a determinant basis. Images that fall
/// outside the basis are dropped, which is the sector restriction.
Eigen::MatrixXd operator_matrix(const std::vector<OperatorTerm>& terms, const SectorBasis& basis);

/// Throws ConsistencyError unless |A - A^T| <= tol * max(1, |A|) entrywise.
void require_symmetric(const Eigen::MatrixXd& a, const char* what, double tol = 1e-12);

}  // namespace rdmft
