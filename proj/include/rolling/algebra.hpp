#ifndef ROLLING_ALGEBRA_HPP
#define ROLLING_ALGEBRA_HPP

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "rolling/errors.hpp"

namespace rolling {

// Coefficient vector in the Lie algebra with respect to the fixed basis
// {X_1..X_dim}. The basis is declared orthonormal, so the inner product is
// the Euclidean dot of coefficients.
using AlgebraVector = Eigen::VectorXd;

// One declared bracket relation [X_i, X_j] = sum_k c * X_k with i < j
// (1-based indices as they appear in definition files).
struct BracketEntry {
  int i = 0;
  int j = 0;
  int k = 0;
  double c = 0.0;
};

// Finite-dimensional nilpotent Lie algebra given by structure constants.
// `step` is an upper bound on the nilpotency step: all (step+1)-fold
// brackets vanish. structure_check() measures the actual step.
class LieAlgebraSpec {
public:
  // Builds the full antisymmetric structure tensor from entries with i < j.
  // Throws ContractViolation on out-of-range indices, i >= j, or non-finite
  // coefficients.
  LieAlgebraSpec(int dim, int step, const std::vector<BracketEntry>& brackets);

  int dim() const { return dim_; }
  int step() const { return step_; }

  // c_{ij}^k with 0-based indices.
  double structure_constant(int i, int j, int k) const {
    return c_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k];
  }

  // ad_{X_i} as a dim x dim matrix (column j = [X_i, X_j]).
  const Eigen::MatrixXd& ad_basis(int i) const { return ad_basis_[i]; }

private:
  int dim_;
  int step_;
  std::vector<double> c_;                // flattened [i][j][k]
  std::vector<Eigen::MatrixXd> ad_basis_;
};

// [x, y] in basis coordinates.
AlgebraVector bracket(const LieAlgebraSpec& alg, const AlgebraVector& x,
                      const AlgebraVector& y);

// Matrix of ad_x = [x, .] acting on coordinates.
Eigen::MatrixXd ad_matrix(const LieAlgebraSpec& alg, const AlgebraVector& x);

// exp(ad_x) as the finite sum sum_{j=0}^{step} ad_x^j / j! (exact by
// nilpotency; the j = step term is already zero and is kept for symmetry
// with the declared bound).
Eigen::MatrixXd exp_ad(const LieAlgebraSpec& alg, const AlgebraVector& x);

// log(exp(x) exp(y)) via the Baker-Campbell-Hausdorff sum truncated at the
// algebra's step, exact for step <= 4:
//   z = x + y + (1/2)[x,y]
//       + (1/12)([x,[x,y]] + [y,[y,x]])
//       - (1/24)[y,[x,[x,y]]].
// Throws ContractViolation when step > 4 (unsupported truncation order) or
// on dimension mismatch.
AlgebraVector bch_log_product(const LieAlgebraSpec& alg, const AlgebraVector& x,
                              const AlgebraVector& y);

struct StructureCheckReport {
  double antisymmetry_residual = 0.0;  // max_k |c_ij^k + c_ji^k|
  double jacobi_residual = 0.0;        // max over (i,j,k,l) of the cyclic sum
  int verified_step = 0;               // smallest s with all s-fold ad products zero
  bool nilpotent = false;              // a zero product level was found at all
  bool pass = false;                   // residuals small and verified_step <= declared
};

// Verifies antisymmetry, the Jacobi identity, and nilpotency of the
// structure tensor. The nilpotency scan multiplies spanning sets of ad-matrix
// products level by level until a level vanishes identically.
StructureCheckReport structure_check(const LieAlgebraSpec& alg,
                                     double tolerance = 1e-12);

// Parsed algebra definition file: the algebra plus the driving directions
// (0-based basis indices d_1..d_k of the noise). "generators" is optional in
// the file (1-based there) and defaults to all basis indices.
struct AlgebraDefinition {
  LieAlgebraSpec algebra;
  std::vector<int> generators;
};

// Loads {"dim": n, "step": s, "brackets": [{"i":..,"j":..,"k":..,"c":..}...],
// "generators": [..]? } from a JSON file. Unknown keys are rejected.
// Throws ConfigError on unreadable or malformed input.
AlgebraDefinition load_algebra_definition(const std::string& path);

}  // namespace rolling

#endif
