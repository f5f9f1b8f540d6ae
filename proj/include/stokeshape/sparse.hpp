#ifndef STOKESHAPE_SPARSE_HPP
#define STOKESHAPE_SPARSE_HPP

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <cstdio>
#include <fstream>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace stokeshape {

struct SparseSystem {
  Eigen::SparseMatrix<double> A;
  Eigen::VectorXd b;
  bool symmetric = false;
};

/// Factorization failure or residual-contract violation. Distinct from
/// logic errors so that callers probing a throwaway system (e.g. a line
/// search trial) can reject the state instead of aborting.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Homogeneous/inhomogeneous Dirichlet conditions applied at the triplet
/// level: constrained rows and columns are dropped, the diagonal gets a 1,
/// the rhs absorbs the column contribution. Keeps symmetric problems
/// symmetric.
inline void eliminate_dirichlet(std::vector<Eigen::Triplet<double>>& trips, Eigen::VectorXd& rhs,
                                const std::vector<char>& constrained,
                                const Eigen::VectorXd& values) {
  const auto n = rhs.size();
  if (static_cast<Eigen::Index>(constrained.size()) != n || values.size() != n)
    throw std::invalid_argument("eliminate_dirichlet: size mismatch");
  std::size_t keep = 0;
  for (const auto& t : trips) {
    if (constrained[t.row()]) continue;
    if (constrained[t.col()]) {
      rhs[t.row()] -= t.value() * values[t.col()];
      continue;
    }
    trips[keep++] = t;
  }
  trips.resize(keep);
  for (Eigen::Index i = 0; i < n; ++i)
    if (constrained[i]) {
      trips.emplace_back(i, i, 1.0);
      rhs[i] = values[i];
    }
}

/// Direct sparse factorization with a reusable solve. Deterministic: the
/// ordering and pivoting depend only on the matrix.
class SparseFactor {
 public:
  explicit SparseFactor(Eigen::SparseMatrix<double> A) : A_(std::move(A)) {
    A_.makeCompressed();
    lu_.analyzePattern(A_);
    lu_.factorize(A_);
    if (lu_.info() != Eigen::Success)
      throw SolverError("sparse factorization failed: " +
                        std::string(lu_.info() == Eigen::NumericalIssue
                                        ? "numerical issue (singular system?)"
                                        : "invalid input"));
  }

  /// Residual-checked solve: ‖Ax − b‖ ≤ 1e-10 (1 + ‖b‖) or throws.
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const {
    Eigen::VectorXd x = lu_.solve(b);
    if (lu_.info() != Eigen::Success) throw SolverError("sparse solve failed");
    const double resid = (A_ * x - b).norm();
    if (!(resid <= 1e-10 * (1.0 + b.norm()))) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "%.3e", resid);
      throw SolverError("sparse solve residual " + std::string(buf) + " exceeds contract");
    }
    return x;
  }

  const Eigen::SparseMatrix<double>& matrix() const { return A_; }

 private:
  Eigen::SparseMatrix<double> A_;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu_;
};

inline Eigen::VectorXd solve(const SparseSystem& sys) {
  if (sys.A.rows() != sys.A.cols() || sys.A.rows() != sys.b.size())
    throw std::invalid_argument("solve: system dimensions inconsistent");
  return SparseFactor(sys.A).solve(sys.b);
}

/// MatrixMarket coordinate export for debugging with external tools.
inline void write_matrix_market(const Eigen::SparseMatrix<double>& A, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_matrix_market: cannot open '" + path + "'");
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nonZeros() << '\n';
  for (int k = 0; k < A.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(A, k); it; ++it)
      out << (it.row() + 1) << ' ' << (it.col() + 1) << ' ' << it.value() << '\n';
}

}  // namespace stokeshape

#endif  // STOKESHAPE_SPARSE_HPP
