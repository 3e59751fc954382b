#include "rdmft/operator.hpp"

#include <string>
#include <unordered_map>

#include "rdmft/errors.hpp"

namespace rdmft {

Eigen::MatrixXd operator_matrix(const std::vector<OperatorTerm>& terms, const SectorBasis& basis) {
  const int n = basis.size();
  std::unordered_map<Occupation, int> index;
  index.reserve(n * 2);
  for (int r = 0; r < n; ++r) index.emplace(basis.configurations[r], r);

  const int d = basis.lattice.orbitals();
  for (const auto& term : terms) {
    for (const auto& op : term.ops) {
      if (op.orbital < 0 || op.orbital >= d) {
        throw InvalidOrbitalError("operator acts on orbital " + std::to_string(op.orbital) +
                                  " outside the one-particle dimension " + std::to_string(d));
      }
    }
  }

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int r = 0; r < n; ++r) {
    for (const auto& term : terms) {
      if (term.coefficient == 0.0) continue;
      auto out = apply_ops(term.ops, basis.configurations[r]);
      if (!out) continue;
      auto it = index.find(out->state);
      if (it == index.end()) continue;
      m(it->second, r) += term.coefficient * out->sign;
    }
  }
  return m;
}

void require_symmetric(const Eigen::MatrixXd& a, const char* what, double tol) {
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  const double asym = a.rows() ? (a - a.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > tol * scale) {
    throw ConsistencyError(std::string(what) + " is not Hermitian (max |A - A^T| = " + std::to_string(asym) + ")");
  }
}

}  // namespace rdmft
