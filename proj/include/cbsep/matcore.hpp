#pragma once

// Dense complex linear algebra shared by every other module: Hermitian
// eigendecomposition, norms, Kronecker products, partial transpose and
// partial trace over a declared bipartite factorization C^n (x) C^m.
//
// Index convention for C^n (x) C^m: the basis vector e_i (x) f_r sits at
// position i * m + r.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>

#include "cbsep/errors.hpp"

namespace cbsep {

using Complex = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr double kHermitianTol = 1e-12;
inline constexpr Index kDefaultDimCap = 4096;

enum class Leg { first, second };

/// Factor dimensions of a bipartite space C^first (x) C^second.
struct Dims {
  Index first = 1;
  Index second = 1;

  [[nodiscard]] constexpr Index total() const { return first * second; }
  friend constexpr bool operator==(const Dims&, const Dims&) = default;
};

inline std::string to_string(Dims d) {
  return std::to_string(d.first) + "x" + std::to_string(d.second);
}

// ---------------------------------------------------------------------------
// Hermiticity

/// max_{i,j} |m(i,j) - conj(m(j,i))|; +inf for non-square input.
inline double hermiticity_defect(const CMatrix& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  double worst = 0.0;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = j; i < m.rows(); ++i)
      worst = std::max(worst, std::abs(m(i, j) - std::conj(m(j, i))));
  return worst;
}

inline bool is_hermitian(const CMatrix& m, double rel_tol = kHermitianTol) {
  return hermiticity_defect(m) <= rel_tol * std::max(1.0, m.norm());
}

/// Validates Hermiticity and returns the exactly Hermitian part (M + M*)/2.
inline CMatrix hermitian_checked(const CMatrix& m, std::string_view what = "matrix") {
  if (m.rows() != m.cols()) {
    std::ostringstream os;
    os << what << ": expected a square matrix, got " << m.rows() << "x" << m.cols();
    throw ShapeError(os.str());
  }
  const double defect = hermiticity_defect(m);
  const double bound = kHermitianTol * std::max(1.0, m.norm());
  if (defect > bound) {
    Index wi = 0, wj = 0;
    double worst = -1.0;
    for (Index j = 0; j < m.cols(); ++j)
      for (Index i = 0; i < m.rows(); ++i) {
        const double d = std::abs(m(i, j) - std::conj(m(j, i)));
        if (d > worst) {
          worst = d;
          wi = i;
          wj = j;
        }
      }
    std::ostringstream os;
    os << what << ": symmetry violation " << defect << " at (" << wi << "," << wj
       << ") exceeds tolerance " << bound;
    throw SymmetryError(os.str());
  }
  return (m + m.adjoint()) * 0.5;
}

inline CMatrix hermitian_part(const CMatrix& m) { return (m + m.adjoint()) * 0.5; }

// ---------------------------------------------------------------------------
// Spectral routines

struct EigenDecomposition {
  RVector values;   // ascending
  CMatrix vectors;  // unitary, columns are eigenvectors
};

/// Tridiagonalization followed by implicit symmetric QL/QR iterations.
inline EigenDecomposition eig_hermitian(const CMatrix& m) {
  const CMatrix h = hermitian_checked(m, "eig_hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("eig_hermitian: QL iteration limit reached");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline RVector eigenvalues_hermitian(const CMatrix& m) {
  const CMatrix h = hermitian_checked(m, "eigenvalues_hermitian");
  Eigen::SelfAdjointEigenSolver<CMatrix> solver(h, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success)
    throw ConvergenceError("eigenvalues_hermitian: QL iteration limit reached");
  return solver.eigenvalues();
}

inline double lambda_min(const CMatrix& m) { return eigenvalues_hermitian(m)(0); }

inline double lambda_max(const CMatrix& m) {
  const RVector v = eigenvalues_hermitian(m);
  return v(v.size() - 1);
}

/// Largest singular value.
inline double operator_norm(const CMatrix& m) {
  if (m.size() == 0) return 0.0;
  Eigen::JacobiSVD<CMatrix> svd(m);
  return svd.singularValues()(0);
}

/// Unitary polar factor U V* of m = U S V*.
inline CMatrix polar_unitary(const CMatrix& m) {
  Eigen::JacobiSVD<CMatrix> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  return svd.matrixU() * svd.matrixV().adjoint();
}

/// Function of a Hermitian matrix through its spectrum.
template <typename F>
CMatrix spectral_apply(const CMatrix& m, F&& f) {
  const EigenDecomposition e = eig_hermitian(m);
  RVector fv(e.values.size());
  for (Index i = 0; i < fv.size(); ++i) fv(i) = f(e.values(i));
  CMatrix out = e.vectors * fv.cast<Complex>().asDiagonal() * e.vectors.adjoint();
  return hermitian_part(out);
}

/// Nearest PSD matrix in Frobenius norm (negative eigenvalues clipped).
inline CMatrix project_psd(const CMatrix& m) {
  return spectral_apply(m, [](double v) { return std::max(v, 0.0); });
}

inline CMatrix psd_inverse_sqrt(const CMatrix& m, double floor = 1e-300) {
  const EigenDecomposition e = eig_hermitian(m);
  if (e.values(0) <= floor)
    throw SingularityError("psd_inverse_sqrt: smallest eigenvalue " +
                           std::to_string(e.values(0)) + " is not positive");
  RVector fv = e.values.array().rsqrt();
  return hermitian_part(e.vectors * fv.cast<Complex>().asDiagonal() * e.vectors.adjoint());
}

// ---------------------------------------------------------------------------
// Tensor structure

inline CMatrix kron(const CMatrix& a, const CMatrix& b, Index cap = kDefaultDimCap) {
  const Index rows = a.rows() * b.rows();
  const Index cols = a.cols() * b.cols();
  if (rows > cap || cols > cap)
    throw SizeError("kron: product dimension " + std::to_string(rows) + "x" +
                    std::to_string(cols) + " exceeds cap " + std::to_string(cap));
  CMatrix out(rows, cols);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline void require_bipartite(const CMatrix& x, Dims dims, std::string_view what) {
  if (dims.first <= 0 || dims.second <= 0 || x.rows() != dims.total() ||
      x.cols() != dims.total()) {
    std::ostringstream os;
    os << what << ": matrix is " << x.rows() << "x" << x.cols() << " but declared factors "
       << to_string(dims) << " require " << dims.total() << "x" << dims.total();
    throw ShapeError(os.str());
  }
}

inline CMatrix partial_transpose(const CMatrix& x, Dims dims, Leg leg) {
  require_bipartite(x, dims, "partial_transpose");
  const Index n = dims.first, m = dims.second;
  CMatrix out(x.rows(), x.cols());
  for (Index i = 0; i < n; ++i)
    for (Index r = 0; r < m; ++r)
      for (Index j = 0; j < n; ++j)
        for (Index s = 0; s < m; ++s) {
          const Complex v = x(i * m + r, j * m + s);
          if (leg == Leg::second)
            out(i * m + s, j * m + r) = v;
          else
            out(j * m + r, i * m + s) = v;
        }
  return out;
}

/// Traces out the chosen leg: Leg::first yields an m x m matrix.
inline CMatrix partial_trace(const CMatrix& x, Dims dims, Leg leg) {
  require_bipartite(x, dims, "partial_trace");
  const Index n = dims.first, m = dims.second;
  if (leg == Leg::first) {
    CMatrix out = CMatrix::Zero(m, m);
    for (Index i = 0; i < n; ++i) out += x.block(i * m, i * m, m, m);
    return out;
  }
  CMatrix out(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) out(i, j) = x.block(i * m, j * m, m, m).trace();
  return out;
}

inline CMatrix matrix_unit(Index n, Index i, Index j) {
  CMatrix e = CMatrix::Zero(n, n);
  e(i, j) = 1.0;
  return e;
}

/// Swap operator F = sum_{k,l} e_kl (x) e_lk on C^d (x) C^d.
inline CMatrix swap_operator(Index d) {
  CMatrix f = CMatrix::Zero(d * d, d * d);
  for (Index k = 0; k < d; ++k)
    for (Index l = 0; l < d; ++l) f(k * d + l, l * d + k) = 1.0;
  return f;
}

/// P = sum_{k,l} e_kl (x) e_kl, the unnormalized maximally entangled projector.
inline CMatrix max_entangled(Index d) {
  CMatrix p = CMatrix::Zero(d * d, d * d);
  for (Index k = 0; k < d; ++k)
    for (Index l = 0; l < d; ++l) p(k * d + k, l * d + l) = 1.0;
  return p;
}

/// Isometry C^d -> C^n onto the first d coordinates.
inline CMatrix corner_isometry(Index n, Index d) {
  CMatrix v = CMatrix::Zero(n, d);
  for (Index i = 0; i < d; ++i) v(i, i) = 1.0;
  return v;
}

}  // namespace cbsep
