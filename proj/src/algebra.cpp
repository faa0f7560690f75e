#include "rolling/algebra.hpp"

#include <cmath>
#include <fstream>

#include "json.hpp"

namespace rolling {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw ContractViolation(msg);
}

}  // namespace

LieAlgebraSpec::LieAlgebraSpec(int dim, int step,
                               const std::vector<BracketEntry>& brackets)
    : dim_(dim), step_(step) {
  require(dim >= 1, "algebra dimension must be >= 1");
  require(step >= 1, "nilpotency step must be >= 1");
  c_.assign(static_cast<std::size_t>(dim) * dim * dim, 0.0);
  for (const BracketEntry& b : brackets) {
    require(b.i >= 1 && b.i <= dim && b.j >= 1 && b.j <= dim && b.k >= 1 &&
                b.k <= dim,
            "bracket entry index out of range");
    require(b.i < b.j, "bracket entries must have i < j (lower triangle is "
                       "synthesized by antisymmetry)");
    require(std::isfinite(b.c), "bracket coefficient must be finite");
    const int i = b.i - 1, j = b.j - 1, k = b.k - 1;
    c_[(static_cast<std::size_t>(i) * dim + j) * dim + k] += b.c;
    c_[(static_cast<std::size_t>(j) * dim + i) * dim + k] -= b.c;
  }
  ad_basis_.reserve(dim);
  for (int i = 0; i < dim; ++i) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim, dim);
    for (int j = 0; j < dim; ++j)
      for (int k = 0; k < dim; ++k) m(k, j) = structure_constant(i, j, k);
    ad_basis_.push_back(std::move(m));
  }
}

AlgebraVector bracket(const LieAlgebraSpec& alg, const AlgebraVector& x,
                      const AlgebraVector& y) {
  require(x.size() == alg.dim() && y.size() == alg.dim(),
          "bracket: vector dimension mismatch");
  AlgebraVector z = AlgebraVector::Zero(alg.dim());
  for (int i = 0; i < alg.dim(); ++i) {
    if (x[i] != 0.0) z.noalias() += x[i] * (alg.ad_basis(i) * y);
  }
  return z;
}

Eigen::MatrixXd ad_matrix(const LieAlgebraSpec& alg, const AlgebraVector& x) {
  require(x.size() == alg.dim(), "ad_matrix: vector dimension mismatch");
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(alg.dim(), alg.dim());
  for (int i = 0; i < alg.dim(); ++i) {
    if (x[i] != 0.0) m.noalias() += x[i] * alg.ad_basis(i);
  }
  return m;
}

Eigen::MatrixXd exp_ad(const LieAlgebraSpec& alg, const AlgebraVector& x) {
  Eigen::MatrixXd ad = ad_matrix(alg, x);
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(alg.dim(), alg.dim());
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(alg.dim(), alg.dim());
  double factorial = 1.0;
  for (int j = 1; j <= alg.step(); ++j) {
    power = power * ad;
    factorial *= j;
    result.noalias() += power / factorial;
  }
  return result;
}

AlgebraVector bch_log_product(const LieAlgebraSpec& alg, const AlgebraVector& x,
                              const AlgebraVector& y) {
  require(x.size() == alg.dim() && y.size() == alg.dim(),
          "bch_log_product: vector dimension mismatch");
  require(alg.step() <= 4,
          "bch_log_product: truncation only exact up to nilpotency step 4");
  AlgebraVector z = x + y;
  if (alg.step() < 2) return z;
  const AlgebraVector xy = bracket(alg, x, y);
  z += 0.5 * xy;
  if (alg.step() < 3) return z;
  const AlgebraVector xxy = bracket(alg, x, xy);
  z += (xxy + bracket(alg, y, bracket(alg, y, x))) / 12.0;
  if (alg.step() < 4) return z;
  z -= bracket(alg, y, xxy) / 24.0;
  return z;
}

namespace {

// Keeps a linearly independent spanning subset of vectorized matrices so the
// level-by-level nilpotency scan cannot grow combinatorially.
class MatrixSpan {
public:
  explicit MatrixSpan(double tol) : tol_(tol) {}

  // Returns true when m enlarged the span.
  bool insert(const Eigen::MatrixXd& m) {
    Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
    for (const Eigen::VectorXd& b : basis_) v -= b.dot(v) * b;
    const double norm = v.norm();
    if (norm <= tol_) return false;
    basis_.push_back(v / norm);
    return true;
  }

private:
  double tol_;
  std::vector<Eigen::VectorXd> basis_;
};

}  // namespace

StructureCheckReport structure_check(const LieAlgebraSpec& alg,
                                     double tolerance) {
  StructureCheckReport report;
  const int d = alg.dim();

  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        const double r = std::abs(alg.structure_constant(i, j, k) +
                                  alg.structure_constant(j, i, k));
        report.antisymmetry_residual = std::max(report.antisymmetry_residual, r);
      }

  // Jacobi: [[X_i,X_j],X_k] + [[X_j,X_k],X_i] + [[X_k,X_i],X_j] = 0,
  // expressed through the structure tensor and checked on every basis triple.
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          double sum = 0.0;
          for (int m = 0; m < d; ++m) {
            sum += alg.structure_constant(i, j, m) * alg.structure_constant(m, k, l);
            sum += alg.structure_constant(j, k, m) * alg.structure_constant(m, i, l);
            sum += alg.structure_constant(k, i, m) * alg.structure_constant(m, j, l);
          }
          report.jacobi_residual = std::max(report.jacobi_residual, std::abs(sum));
        }

  // Nilpotency: find the smallest s such that every product of s ad-matrices
  // of basis elements is the zero matrix (equivalently, all (s+1)-fold
  // brackets vanish). Levels are pruned to spanning subsets.
  std::vector<Eigen::MatrixXd> level;
  for (int i = 0; i < d; ++i) level.push_back(alg.ad_basis(i));
  for (int s = 1; s <= d + 1; ++s) {
    double level_max = 0.0;
    for (const Eigen::MatrixXd& m : level)
      level_max = std::max(level_max, m.cwiseAbs().maxCoeff());
    if (level_max <= tolerance) {
      report.verified_step = s;
      report.nilpotent = true;
      break;
    }
    MatrixSpan span(tolerance);
    std::vector<Eigen::MatrixXd> next;
    for (const Eigen::MatrixXd& m : level) {
      for (int i = 0; i < d; ++i) {
        Eigen::MatrixXd p = alg.ad_basis(i) * m;
        if (span.insert(p)) next.push_back(std::move(p));
      }
    }
    level = std::move(next);
  }

  report.pass = report.nilpotent &&
                report.antisymmetry_residual <= tolerance &&
                report.jacobi_residual <= tolerance &&
                report.verified_step <= alg.step();
  return report;
}

AlgebraDefinition load_algebra_definition(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open algebra definition file: " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("algebra definition " + path + ": " + e.what());
  }
  if (!doc.is_object())
    throw ConfigError("algebra definition " + path + ": expected a JSON object");
  for (const auto& item : doc.items()) {
    const std::string& key = item.key();
    if (key != "dim" && key != "step" && key != "brackets" && key != "generators")
      throw ConfigError("algebra definition " + path + ": unknown key \"" + key +
                        "\"");
  }
  if (!doc.contains("dim") || !doc.contains("step") || !doc.contains("brackets"))
    throw ConfigError("algebra definition " + path +
                      ": required keys are dim, step, brackets");
  if (!doc["dim"].is_number_integer() || !doc["step"].is_number_integer())
    throw ConfigError("algebra definition " + path +
                      ": dim and step must be integers");
  const int dim = doc["dim"].get<int>();
  const int step = doc["step"].get<int>();
  std::vector<BracketEntry> entries;
  if (!doc["brackets"].is_array())
    throw ConfigError("algebra definition " + path + ": brackets must be an array");
  for (const auto& b : doc["brackets"]) {
    if (!b.is_object() || !b.contains("i") || !b.contains("j") ||
        !b.contains("k") || !b.contains("c"))
      throw ConfigError("algebra definition " + path +
                        ": each bracket entry needs i, j, k, c");
    for (const auto& item : b.items())
      if (item.key() != "i" && item.key() != "j" && item.key() != "k" &&
          item.key() != "c")
        throw ConfigError("algebra definition " + path +
                          ": unknown bracket entry key \"" + item.key() + "\"");
    entries.push_back(BracketEntry{b["i"].get<int>(), b["j"].get<int>(),
                                   b["k"].get<int>(), b["c"].get<double>()});
  }
  std::vector<int> generators;
  if (doc.contains("generators")) {
    if (!doc["generators"].is_array())
      throw ConfigError("algebra definition " + path +
                        ": generators must be an array of basis indices");
    for (const auto& g : doc["generators"]) {
      const int idx = g.get<int>();
      if (idx < 1 || idx > dim)
        throw ConfigError("algebra definition " + path +
                          ": generator index out of range");
      generators.push_back(idx - 1);
    }
    if (generators.empty())
      throw ConfigError("algebra definition " + path +
                        ": generators must not be empty");
  } else {
    for (int i = 0; i < dim; ++i) generators.push_back(i);
  }
  try {
    return AlgebraDefinition{LieAlgebraSpec(dim, step, entries),
                             std::move(generators)};
  } catch (const ContractViolation& e) {
    throw ConfigError("algebra definition " + path + ": " + e.what());
  }
}

}  // namespace rolling
