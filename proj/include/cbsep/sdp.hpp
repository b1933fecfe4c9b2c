#pragma once

// Dense primal-dual interior-point solver for block-structured complex
// Hermitian semidefinite programs in standard form
//
//   minimize   <C, X>
//   subject to <A_i, X> = b_i,  i = 1..m,   X = diag(X_1, ..., X_B) >= 0,
//
// with dual  maximize b^T y  s.t.  S = C - sum_i y_i A_i >= 0.
//
// Infeasible start from scaled identities, Nesterov-Todd scaling computed
// as in Todd-Toh-Tutuncu (X = L L*, S = R R*, R* L = U D K*), Mehrotra
// predictor-corrector, fixed step fraction. Complex blocks are handled
// natively; <A, X> = Re tr(A X).

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "cbsep/matcore.hpp"
#include "cbsep/random.hpp"

namespace cbsep::sdp {

/// Entry (row, col, value) of a Hermitian coefficient matrix; both triangles
/// are stored explicitly.
struct Entry {
  Index row = 0;
  Index col = 0;
  Complex value;
};

/// Part of a constraint matrix living in one block.
struct Term {
  std::size_t block = 0;
  std::vector<Entry> entries;
};

struct Constraint {
  double rhs = 0.0;
  std::vector<Term> terms;
};

class SdpProblem {
 public:
  SdpProblem() = default;

  explicit SdpProblem(std::vector<Index> block_sizes) : blocks_(std::move(block_sizes)) {
    for (Index n : blocks_)
      if (n <= 0) throw PreconditionError("SdpProblem: block sizes must be positive");
    for (Index n : blocks_) objective_.push_back(CMatrix::Zero(n, n));
  }

  [[nodiscard]] const std::vector<Index>& blocks() const { return blocks_; }
  [[nodiscard]] const std::vector<CMatrix>& objective() const { return objective_; }
  [[nodiscard]] const std::vector<Constraint>& constraints() const { return constraints_; }
  [[nodiscard]] std::size_t num_constraints() const { return constraints_.size(); }

  [[nodiscard]] Index total_dimension() const {
    Index t = 0;
    for (Index n : blocks_) t += n;
    return t;
  }

  void set_objective(std::size_t block, const CMatrix& c) {
    check_block(block);
    if (c.rows() != blocks_[block] || c.cols() != blocks_[block])
      throw ShapeError("SdpProblem: objective block has wrong size");
    objective_[block] = hermitian_checked(c, "SdpProblem objective");
  }

  /// C(i,j) += v and C(j,i) += conj(v) for i != j.
  void add_objective_entry(std::size_t block, Index i, Index j, Complex v) {
    check_entry(block, i, j, v);
    objective_[block](i, j) += v;
    if (i != j) objective_[block](j, i) += std::conj(v);
  }

  std::size_t add_constraint(double rhs) {
    constraints_.push_back({rhs, {}});
    return constraints_.size() - 1;
  }

  void set_rhs(std::size_t c, double rhs) { constraints_.at(c).rhs = rhs; }

  /// A_c(i,j) += v and A_c(j,i) += conj(v) for i != j; diagonal values must be real.
  void add_term(std::size_t c, std::size_t block, Index i, Index j, Complex v) {
    check_entry(block, i, j, v);
    auto& terms = constraints_.at(c).terms;
    auto it = std::find_if(terms.begin(), terms.end(), [&](const Term& t) { return t.block == block; });
    if (it == terms.end()) {
      terms.push_back({block, {}});
      it = terms.end() - 1;
    }
    it->entries.push_back({i, j, v});
    if (i != j) it->entries.push_back({j, i, std::conj(v)});
  }

  /// Adds a whole Hermitian matrix as the constraint's coefficient on `block`.
  void add_dense_term(std::size_t c, std::size_t block, const CMatrix& a) {
    check_block(block);
    const CMatrix h = hermitian_checked(a, "SdpProblem constraint");
    for (Index j = 0; j < h.cols(); ++j)
      for (Index i = j; i < h.rows(); ++i)
        if (h(i, j) != Complex(0.0)) add_term(c, block, i, j, i == j ? Complex(h(i, i).real()) : h(i, j));
  }

  /// Dense form of constraint c on `block` (zero if absent).
  [[nodiscard]] CMatrix coefficient(std::size_t c, std::size_t block) const {
    CMatrix a = CMatrix::Zero(blocks_.at(block), blocks_.at(block));
    for (const Term& t : constraints_.at(c).terms)
      if (t.block == block)
        for (const Entry& e : t.entries) a(e.row, e.col) += e.value;
    return a;
  }

 private:
  void check_block(std::size_t block) const {
    if (block >= blocks_.size()) throw ShapeError("SdpProblem: block index out of range");
  }
  void check_entry(std::size_t block, Index i, Index j, Complex v) const {
    check_block(block);
    if (i < 0 || j < 0 || i >= blocks_[block] || j >= blocks_[block])
      throw ShapeError("SdpProblem: entry index out of range");
    if (i == j && std::abs(v.imag()) > 0) throw SymmetryError("SdpProblem: diagonal entry must be real");
  }

  std::vector<Index> blocks_;
  std::vector<CMatrix> objective_;
  std::vector<Constraint> constraints_;
};

enum class Status { optimal, infeasible, unbounded, maxiter, breakdown };

inline const char* to_string(Status s) {
  switch (s) {
    case Status::optimal: return "optimal";
    case Status::infeasible: return "infeasible";
    case Status::unbounded: return "unbounded";
    case Status::maxiter: return "maxiter";
    case Status::breakdown: return "breakdown";
  }
  return "unknown";
}

/// Search-direction constants; fixed, exposed read-only.
inline constexpr double kStepFraction = 0.98;
inline constexpr double kCorrectorExponent = 3.0;

/// Acceptance bounds for status == optimal.
inline constexpr double kOptimalGapTol = 1e-7;
inline constexpr double kOptimalFeasTol = 1e-8;

struct SolveOptions {
  int max_iterations = 200;
  double gap_tol = 1e-10;   // relative gap targeted before stopping
  double feas_tol = 1e-11;  // relative feasibility targeted before stopping
  Index dim_cap = kDefaultDimCap;
  bool record_history = false;
};

struct Residuals {
  double primal = 0;  // ||b - A(X)|| / (1 + ||b||)
  double dual = 0;    // ||C - A^T y - S||_F / (1 + ||C||_F)
  double gap = 0;     // |primalObj - dualObj|
};

struct IterateRecord {
  int iteration = 0;
  double primal_obj = 0, dual_obj = 0;
  double primal_infeas = 0, dual_infeas = 0;
  double mu = 0;
};

struct SdpSolution {
  std::vector<CMatrix> X;
  std::vector<CMatrix> S;
  RVector y;
  double primal_obj = 0;
  double dual_obj = 0;
  Status status = Status::maxiter;
  Residuals residuals;
  int iterations = 0;
  std::vector<std::string> warnings;
  std::vector<IterateRecord> history;
  /// status == infeasible: y with b^T y = 1 and sum y_i A_i <= 0.
  RVector infeasibility_ray;
  /// status == unbounded: X >= 0 with A(X) = 0 and <C, X> = -1.
  std::vector<CMatrix> unbounded_ray;
};

namespace detail {

struct BlockEntries {
  std::size_t constraint;
  std::vector<Entry> entries;  // coalesced
};

inline double real_trace_product(const CMatrix& a, const CMatrix& b) {
  // Re tr(A B) for Hermitian A, B: sum_{pq} A(p,q) conj(B(p,q)).
  return (a.array() * b.conjugate().array()).sum().real();
}

inline double sparse_inner(const std::vector<Entry>& entries, const CMatrix& x) {
  Complex acc = 0;
  for (const Entry& e : entries) acc += e.value * x(e.col, e.row);
  return acc.real();
}

class Workspace {
 public:
  explicit Workspace(const SdpProblem& p) : problem(p), nblocks(p.blocks().size()) {
    per_block.resize(nblocks);
    for (std::size_t c = 0; c < p.num_constraints(); ++c) {
      std::map<std::size_t, std::map<std::pair<Index, Index>, Complex>> acc;
      for (const Term& t : p.constraints()[c].terms)
        for (const Entry& e : t.entries) acc[t.block][{e.row, e.col}] += e.value;
      for (auto& [block, entries] : acc) {
        BlockEntries be{c, {}};
        for (auto& [rc, v] : entries)
          if (v != Complex(0.0)) be.entries.push_back({rc.first, rc.second, v});
        if (!be.entries.empty()) per_block[block].push_back(std::move(be));
      }
    }
  }

  const SdpProblem& problem;
  std::size_t nblocks;
  std::vector<std::vector<BlockEntries>> per_block;
  std::vector<std::size_t> active;  // constraint indices kept after dependency check
  std::vector<long> position;       // constraint -> row in reduced system, -1 if dropped

  [[nodiscard]] RVector apply_a(const std::vector<CMatrix>& x) const {
    RVector out = RVector::Zero(static_cast<Index>(problem.num_constraints()));
    for (std::size_t b = 0; b < nblocks; ++b)
      for (const BlockEntries& be : per_block[b]) out(static_cast<Index>(be.constraint)) += sparse_inner(be.entries, x[b]);
    return out;
  }

  [[nodiscard]] std::vector<CMatrix> apply_at(const RVector& y) const {
    std::vector<CMatrix> out;
    for (Index n : problem.blocks()) out.push_back(CMatrix::Zero(n, n));
    for (std::size_t b = 0; b < nblocks; ++b)
      for (const BlockEntries& be : per_block[b]) {
        const double yi = y(static_cast<Index>(be.constraint));
        if (yi == 0.0) continue;
        for (const Entry& e : be.entries) out[b](e.row, e.col) += yi * e.value;
      }
    return out;
  }
};

/// Greedy pivoted Cholesky on the constraint Gram matrix; returns kept indices.
inline std::vector<std::size_t> independent_constraints(const Workspace& ws, const RVector& b,
                                                        std::vector<std::string>& warnings,
                                                        bool& inconsistent) {
  const std::size_t m = ws.problem.num_constraints();
  inconsistent = false;
  if (m == 0) return {};
  // Row lookup: constraint -> list of (block, entries*)
  Eigen::MatrixXd gram(static_cast<Index>(m), static_cast<Index>(m));
  std::vector<std::vector<std::pair<std::size_t, const std::vector<Entry>*>>> rows(m);
  for (std::size_t blk = 0; blk < ws.nblocks; ++blk)
    for (const BlockEntries& be : ws.per_block[blk]) rows[be.constraint].push_back({blk, &be.entries});
  auto dot = [&](std::size_t i, std::size_t j) {
    double acc = 0;
    for (const auto& [bi, ei] : rows[i])
      for (const auto& [bj, ej] : rows[j]) {
        if (bi != bj) continue;
        auto it = ej->begin();
        for (const Entry& e : *ei) {
          while (it != ej->end() && std::tie(it->row, it->col) < std::tie(e.row, e.col)) ++it;
          if (it != ej->end() && it->row == e.row && it->col == e.col)
            acc += (e.value * std::conj(it->value)).real();
        }
      }
    return acc;
  };
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j <= i; ++j) gram(static_cast<Index>(i), static_cast<Index>(j)) = gram(static_cast<Index>(j), static_cast<Index>(i)) = dot(i, j);

  const double max_diag = gram.diagonal().maxCoeff();
  const double tol = 1e-12 * std::max(max_diag, 1e-300);
  Eigen::MatrixXd work = gram;
  std::vector<std::size_t> order(m);
  for (std::size_t i = 0; i < m; ++i) order[i] = i;
  std::vector<std::size_t> kept;
  // Right-looking pivoted Cholesky on a permuted copy.
  const Index mm = static_cast<Index>(m);
  Index k = 0;
  for (; k < mm; ++k) {
    Index piv = k;
    for (Index t = k + 1; t < mm; ++t)
      if (work(t, t) > work(piv, piv)) piv = t;
    if (work(piv, piv) <= tol) break;
    if (piv != k) {
      work.row(k).swap(work.row(piv));
      work.col(k).swap(work.col(piv));
      std::swap(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(piv)]);
    }
    const double lkk = std::sqrt(work(k, k));
    work(k, k) = lkk;
    for (Index t = k + 1; t < mm; ++t) work(t, k) /= lkk;
    for (Index t = k + 1; t < mm; ++t)
      for (Index s = k + 1; s <= t; ++s) {
        work(t, s) -= work(t, k) * work(s, k);
        work(s, t) = work(t, s);
      }
  }
  for (Index t = 0; t < k; ++t) kept.push_back(order[static_cast<std::size_t>(t)]);
  std::sort(kept.begin(), kept.end());
  if (kept.size() < m) {
    // Dropped rows are combinations of kept rows; their right-hand sides must agree.
    const Index r = static_cast<Index>(kept.size());
    Eigen::MatrixXd gkk(r, r);
    for (Index a = 0; a < r; ++a)
      for (Index c = 0; c < r; ++c) gkk(a, c) = gram(static_cast<Index>(kept[a]), static_cast<Index>(kept[c]));
    Eigen::LDLT<Eigen::MatrixXd> ldlt(gkk);
    RVector bk(r);
    for (Index a = 0; a < r; ++a) bk(a) = b(static_cast<Index>(kept[a]));
    for (std::size_t d = 0; d < m; ++d) {
      if (std::binary_search(kept.begin(), kept.end(), d)) continue;
      RVector g(r);
      for (Index a = 0; a < r; ++a) g(a) = gram(static_cast<Index>(kept[a]), static_cast<Index>(d));
      const RVector coef = ldlt.solve(g);
      const double predicted = coef.dot(bk);
      const double bd = b(static_cast<Index>(d));
      warnings.push_back("constraint " + std::to_string(d) + " is linearly dependent and was dropped");
      if (std::abs(predicted - bd) > 1e-8 * (1.0 + std::abs(bd))) inconsistent = true;
    }
  }
  return kept;
}

/// Largest alpha with X + alpha dX >= 0, given X = L L*; +inf if unbounded.
inline double max_step(const Eigen::LLT<CMatrix>& chol_x, const CMatrix& dx) {
  const Index n = dx.rows();
  CMatrix z = chol_x.matrixL().solve(dx);
  z = chol_x.matrixL().solve(z.adjoint().eval()).adjoint();
  z = hermitian_part(z);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(z, Eigen::EigenvaluesOnly);
  const double lmin = n > 0 ? es.eigenvalues()(0) : 0.0;
  if (lmin >= 0) return std::numeric_limits<double>::infinity();
  return -1.0 / lmin;
}

}  // namespace detail

/// Solves the SDP. Deterministic: no randomness, single-threaded.
inline SdpSolution solve(const SdpProblem& problem, const SolveOptions& opts = {}) {
  using detail::real_trace_product;
  const std::size_t nb = problem.blocks().size();
  if (nb == 0) throw PreconditionError("sdp::solve: problem has no blocks");
  if (problem.total_dimension() > opts.dim_cap)
    throw SizeError("sdp::solve: total block dimension " + std::to_string(problem.total_dimension()) +
                    " exceeds cap " + std::to_string(opts.dim_cap));
  for (const CMatrix& c : problem.objective()) (void)hermitian_checked(c, "sdp objective");

  detail::Workspace ws(problem);
  const std::size_t m_all = problem.num_constraints();
  RVector b(static_cast<Index>(m_all));
  for (std::size_t i = 0; i < m_all; ++i) b(static_cast<Index>(i)) = problem.constraints()[i].rhs;

  SdpSolution sol;
  bool inconsistent = false;
  ws.active = detail::independent_constraints(ws, b, sol.warnings, inconsistent);
  ws.position.assign(m_all, -1);
  for (std::size_t r = 0; r < ws.active.size(); ++r) ws.position[ws.active[r]] = static_cast<long>(r);
  const Index m = static_cast<Index>(ws.active.size());

  const double norm_b = b.norm();
  double norm_c = 0;
  for (const CMatrix& c : problem.objective()) norm_c += c.squaredNorm();
  norm_c = std::sqrt(norm_c);
  Index ntot = problem.total_dimension();

  // Starting point: scaled identities.
  std::vector<CMatrix> X, S;
  for (std::size_t bl = 0; bl < nb; ++bl) {
    const Index n = problem.blocks()[bl];
    const double sqn = std::sqrt(static_cast<double>(n));
    double xi = std::max(10.0, sqn), eta = std::max(10.0, sqn);
    for (const detail::BlockEntries& be : ws.per_block[bl]) {
      double na = 0;
      for (const Entry& e : be.entries) na += std::norm(e.value);
      na = std::sqrt(na);
      xi = std::max(xi, static_cast<double>(n) * (1.0 + std::abs(b(static_cast<Index>(be.constraint)))) / (1.0 + na));
      eta = std::max(eta, na);
    }
    eta = std::max(eta, problem.objective()[bl].norm());
    X.push_back(xi * CMatrix::Identity(n, n));
    S.push_back(eta * CMatrix::Identity(n, n));
  }
  RVector y = RVector::Zero(static_cast<Index>(m_all));

  const std::vector<CMatrix>& C = problem.objective();
  auto primal_obj = [&](const std::vector<CMatrix>& x) {
    double v = 0;
    for (std::size_t bl = 0; bl < nb; ++bl) v += real_trace_product(C[bl], x[bl]);
    return v;
  };

  auto evaluate = [&](const std::vector<CMatrix>& x, const RVector& yy, const std::vector<CMatrix>& s,
                      RVector& rp, std::vector<CMatrix>& rd, Residuals& res, double& pobj, double& dobj) {
    rp = b - ws.apply_a(x);
    rd = ws.apply_at(yy);
    double rdn = 0;
    for (std::size_t bl = 0; bl < nb; ++bl) {
      rd[bl] = C[bl] - rd[bl] - s[bl];
      rdn += rd[bl].squaredNorm();
    }
    pobj = primal_obj(x);
    dobj = b.dot(yy);
    res.primal = rp.norm() / (1.0 + norm_b);
    res.dual = std::sqrt(rdn) / (1.0 + norm_c);
    res.gap = std::abs(pobj - dobj);
  };

  auto is_optimal = [&](const Residuals& r, double pobj) {
    return r.gap <= kOptimalGapTol * (1.0 + std::abs(pobj)) && r.primal <= kOptimalFeasTol &&
           r.dual <= kOptimalFeasTol;
  };

  RVector rp;
  std::vector<CMatrix> rd;
  Residuals res;
  double pobj = 0, dobj = 0;
  bool finished = false;
  int stall = 0;

  // Best iterate seen so far by merit max(rel gap, primal, dual).
  struct Snapshot {
    std::vector<CMatrix> X, S;
    RVector y;
    double merit = std::numeric_limits<double>::infinity();
    int iteration = 0;
  } best;
  int no_progress = 0;

  if (inconsistent) {
    sol.status = Status::infeasible;
    sol.warnings.push_back("dependent constraints have inconsistent right-hand sides");
    finished = true;
  }

  int iter = 0;
  for (; !finished && iter < opts.max_iterations; ++iter) {
    evaluate(X, y, S, rp, rd, res, pobj, dobj);
    double xs = 0;
    for (std::size_t bl = 0; bl < nb; ++bl) xs += real_trace_product(X[bl], S[bl]);
    const double mu = xs / static_cast<double>(ntot);
    if (opts.record_history) sol.history.push_back({iter, pobj, dobj, res.primal, res.dual, mu});

    const double scale = 1.0 + std::abs(pobj) + std::abs(dobj);
    if (res.gap / scale <= opts.gap_tol && xs / scale <= opts.gap_tol && res.primal <= opts.feas_tol &&
        res.dual <= opts.feas_tol) {
      sol.status = Status::optimal;
      finished = true;
      break;
    }
    const double merit = std::max({res.gap / (1.0 + std::abs(pobj)), res.primal, res.dual});
    if (merit < 0.5 * best.merit) {
      no_progress = 0;
    } else if (++no_progress >= 4 && best.merit <= kOptimalGapTol * 1e-1 && is_optimal(res, pobj)) {
      // Accuracy has saturated well inside the reported bounds.
      sol.warnings.push_back("stopped at iteration " + std::to_string(iter) + ": no further progress");
      finished = true;
      break;
    }
    if (merit < best.merit) best = {X, S, y, merit, iter};
    // Infeasibility certificates.
    if (dobj > 1e4) {
      double ray = 0;
      const std::vector<CMatrix> aty = ws.apply_at(y);
      for (std::size_t bl = 0; bl < nb; ++bl) ray += (aty[bl] + S[bl]).squaredNorm();
      if (std::sqrt(ray) / dobj <= 1e-8) {
        sol.status = Status::infeasible;
        sol.infeasibility_ray = y / dobj;
        finished = true;
        break;
      }
    }
    if (pobj < -1e4) {
      const RVector ax = ws.apply_a(X);
      if (ax.norm() / std::abs(pobj) <= 1e-8) {
        sol.status = Status::unbounded;
        for (const CMatrix& xb : X) sol.unbounded_ray.push_back(xb / std::abs(pobj));
        finished = true;
        break;
      }
    }

    // Nesterov-Todd scaling per block.
    std::vector<CMatrix> G(nb), Ginv(nb), W(nb);
    std::vector<RVector> D(nb);
    std::vector<Eigen::LLT<CMatrix>> chol_x(nb), chol_s(nb);
    bool chol_ok = true;
    for (std::size_t bl = 0; bl < nb; ++bl) {
      chol_x[bl].compute(X[bl]);
      chol_s[bl].compute(S[bl]);
      if (chol_x[bl].info() != Eigen::Success || chol_s[bl].info() != Eigen::Success) {
        chol_ok = false;
        break;
      }
      const CMatrix L = chol_x[bl].matrixL();
      const CMatrix R = chol_s[bl].matrixL();
      Eigen::JacobiSVD<CMatrix> svd(R.adjoint() * L, Eigen::ComputeFullU | Eigen::ComputeFullV);
      D[bl] = svd.singularValues();
      const CMatrix& K = svd.matrixV();
      const RVector dmh = D[bl].array().rsqrt();
      const RVector dph = D[bl].array().sqrt();
      G[bl] = L * K * dmh.cast<Complex>().asDiagonal();
      const Index n = L.rows();
      const CMatrix linv = chol_x[bl].matrixL().solve(CMatrix::Identity(n, n));
      Ginv[bl] = dph.cast<Complex>().asDiagonal() * K.adjoint() * linv;
      W[bl] = hermitian_part(G[bl] * G[bl].adjoint());
    }
    if (!chol_ok) {
      sol.warnings.push_back("iterate lost positive definiteness");
      break;
    }

    // Schur complement M_ij = <A_i, W A_j W>.
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(m, m);
    for (std::size_t bl = 0; bl < nb; ++bl) {
      const CMatrix& w = W[bl];
      const Index n = w.rows();
      const auto& list = ws.per_block[bl];
      std::size_t total_nnz = 0;
      for (const auto& be : list) total_nnz += be.entries.size();
      for (const auto& bj : list) {
        const long pj = ws.position[bj.constraint];
        if (pj < 0) continue;
        const double dense_cost = static_cast<double>(n) * n * n + static_cast<double>(total_nnz);
        const double sparse_cost = static_cast<double>(bj.entries.size()) * static_cast<double>(total_nnz);
        if (dense_cost < sparse_cost) {
          CMatrix aw = CMatrix::Zero(n, n);
          for (const Entry& e : bj.entries) aw.row(e.row) += e.value * w.row(e.col);
          const CMatrix t = w * aw;
          for (const auto& bi : list) {
            const long pi = ws.position[bi.constraint];
            if (pi < 0) continue;
            M(pi, pj) += detail::sparse_inner(bi.entries, t);
          }
        } else {
          for (const auto& bi : list) {
            const long pi = ws.position[bi.constraint];
            if (pi < 0) continue;
            Complex acc = 0;
            for (const Entry& ei : bi.entries)
              for (const Entry& ej : bj.entries) acc += ei.value * w(ei.col, ej.row) * ej.value * w(ej.col, ei.row);
            M(pi, pj) += acc.real();
          }
        }
      }
    }
    M = (M + M.transpose()).eval() * 0.5;
    Eigen::LLT<Eigen::MatrixXd> chol_m(M);
    double reg = 0;
    const double mdiag = m > 0 ? M.diagonal().cwiseAbs().maxCoeff() : 1.0;
    for (int attempt = 0; attempt < 4 && chol_m.info() != Eigen::Success; ++attempt) {
      reg = (reg == 0 ? 1e-14 : reg * 100) * std::max(mdiag, 1e-300);
      chol_m.compute(M + reg * Eigen::MatrixXd::Identity(m, m));
      sol.warnings.push_back("Schur complement regularized by " + std::to_string(reg) + " at iteration " +
                             std::to_string(iter));
    }
    if (chol_m.info() != Eigen::Success) {
      sol.warnings.push_back("Schur complement not positive definite at iteration " + std::to_string(iter));
      sol.status = Status::breakdown;
      break;
    }

    // Direction for a given complementarity right-hand side (scaled space).
    auto direction = [&](const std::vector<CMatrix>& rc_scaled, std::vector<CMatrix>& dX, RVector& dy,
                         std::vector<CMatrix>& dS) {
      std::vector<CMatrix> rc(nb), z(nb);
      for (std::size_t bl = 0; bl < nb; ++bl) {
        rc[bl] = G[bl] * rc_scaled[bl] * G[bl].adjoint();
        z[bl] = rc[bl] - W[bl] * rd[bl] * W[bl];
      }
      const RVector az = ws.apply_a(z);
      RVector h(m);
      for (Index r = 0; r < m; ++r) {
        const auto c = static_cast<Index>(ws.active[static_cast<std::size_t>(r)]);
        h(r) = rp(c) - az(c);
      }
      const RVector dyr = chol_m.solve(h);
      dy = RVector::Zero(static_cast<Index>(m_all));
      for (Index r = 0; r < m; ++r) dy(static_cast<Index>(ws.active[static_cast<std::size_t>(r)])) = dyr(r);
      const std::vector<CMatrix> atdy = ws.apply_at(dy);
      dS.resize(nb);
      dX.resize(nb);
      for (std::size_t bl = 0; bl < nb; ++bl) {
        dS[bl] = hermitian_part(rd[bl] - atdy[bl]);
        dX[bl] = hermitian_part(rc[bl] - W[bl] * dS[bl] * W[bl]);
      }
    };

    auto steps = [&](const std::vector<CMatrix>& dX, const std::vector<CMatrix>& dS, double& ap, double& ad) {
      double mp = std::numeric_limits<double>::infinity(), md = mp;
      for (std::size_t bl = 0; bl < nb; ++bl) {
        mp = std::min(mp, detail::max_step(chol_x[bl], dX[bl]));
        md = std::min(md, detail::max_step(chol_s[bl], dS[bl]));
      }
      ap = std::min(1.0, kStepFraction * mp);
      ad = std::min(1.0, kStepFraction * md);
    };

    auto lyap_inverse = [](const RVector& d, const CMatrix& y_) {
      CMatrix out(y_.rows(), y_.cols());
      for (Index i = 0; i < y_.rows(); ++i)
        for (Index j = 0; j < y_.cols(); ++j) out(i, j) = 2.0 * y_(i, j) / (d(i) + d(j));
      return out;
    };

    // Predictor.
    std::vector<CMatrix> rhs(nb);
    for (std::size_t bl = 0; bl < nb; ++bl) rhs[bl] = (-D[bl]).cast<Complex>().asDiagonal();
    std::vector<CMatrix> dXp, dSp;
    RVector dyp;
    direction(rhs, dXp, dyp, dSp);
    double ap = 0, ad = 0;
    steps(dXp, dSp, ap, ad);
    double xs_aff = 0;
    for (std::size_t bl = 0; bl < nb; ++bl)
      xs_aff += real_trace_product(X[bl] + ap * dXp[bl], S[bl] + ad * dSp[bl]);
    const double mu_aff = xs_aff / static_cast<double>(ntot);
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, kCorrectorExponent), 0.0, 1.0);

    // Corrector.
    for (std::size_t bl = 0; bl < nb; ++bl) {
      const CMatrix dxs = Ginv[bl] * dXp[bl] * Ginv[bl].adjoint();
      const CMatrix dss = G[bl].adjoint() * dSp[bl] * G[bl];
      CMatrix target = -(dxs * dss + dss * dxs) * 0.5;
      target.diagonal().array() += Complex(sigma * mu);
      target.diagonal() -= D[bl].array().square().matrix().cast<Complex>();
      rhs[bl] = lyap_inverse(D[bl], target);
    }
    std::vector<CMatrix> dX, dS;
    RVector dy;
    direction(rhs, dX, dy, dS);
    steps(dX, dS, ap, ad);

    for (std::size_t bl = 0; bl < nb; ++bl) {
      X[bl] = hermitian_part(X[bl] + ap * dX[bl]);
      S[bl] = hermitian_part(S[bl] + ad * dS[bl]);
    }
    y += ad * dy;

    if (std::max(ap, ad) < 1e-10) {
      if (++stall >= 3) {
        sol.warnings.push_back("step lengths stalled");
        ++iter;
        break;
      }
    } else {
      stall = 0;
    }
  }

  evaluate(X, y, S, rp, rd, res, pobj, dobj);
  if (sol.status != Status::infeasible && sol.status != Status::unbounded && !best.X.empty()) {
    const double merit = std::max({res.gap / (1.0 + std::abs(pobj)), res.primal, res.dual});
    if (best.merit < merit) {
      sol.warnings.push_back("returning best iterate from iteration " + std::to_string(best.iteration));
      X = std::move(best.X);
      S = std::move(best.S);
      y = std::move(best.y);
      evaluate(X, y, S, rp, rd, res, pobj, dobj);
    }
  }
  sol.X = std::move(X);
  sol.S = std::move(S);
  sol.y = std::move(y);
  sol.primal_obj = pobj;
  sol.dual_obj = dobj;
  sol.residuals = res;
  sol.iterations = iter;
  if (sol.status != Status::infeasible && sol.status != Status::unbounded) {
    if (is_optimal(res, pobj))
      sol.status = Status::optimal;
    else if (sol.status != Status::breakdown)
      sol.status = iter >= opts.max_iterations ? Status::maxiter : Status::breakdown;
  }
  return sol;
}

/// Strictly feasible problem: b = A(X0), C = A^T y0 + S0 with X0, S0 > 0.
inline SdpProblem random_feasible_problem(const std::vector<Index>& blocks, std::size_t num_constraints, Rng& rng) {
  SdpProblem p(blocks);
  std::vector<CMatrix> x0, s0;
  for (Index n : blocks) {
    x0.push_back(random_psd(n, n, rng) + 0.1 * CMatrix::Identity(n, n));
    s0.push_back(random_psd(n, n, rng) + 0.1 * CMatrix::Identity(n, n));
  }
  std::vector<CMatrix> c = s0;
  std::normal_distribution<double> normal;
  for (std::size_t i = 0; i < num_constraints; ++i) {
    double rhs = 0;
    const double yi = normal(rng);
    const auto idx = p.add_constraint(0.0);
    for (std::size_t k = 0; k < blocks.size(); ++k) {
      const CMatrix a = random_gue(blocks[k], rng);
      p.add_dense_term(idx, k, a);
      rhs += (a * x0[k]).trace().real();
      c[k] += yi * a;
    }
    p.set_rhs(idx, rhs);
  }
  for (std::size_t k = 0; k < blocks.size(); ++k) p.set_objective(k, hermitian_part(c[k]));
  return p;
}

struct KktReport {
  double primal = 0;       // ||A(X) - b|| / (1 + ||b||)
  double dual = 0;         // ||C - A^T y - S|| / (1 + ||C||)
  double complement = 0;   // <X, S> / (1 + |pobj|)
  double min_eig_x = 0;
  double min_eig_s = 0;
};

inline KktReport kkt_residuals(const sdp::SdpProblem& p, const sdp::SdpSolution& s) {
  KktReport r;
  const std::size_t nb = p.blocks().size();
  RVector ax(static_cast<Index>(p.num_constraints())), b(ax.size());
  std::vector<CMatrix> aty;
  for (std::size_t k = 0; k < nb; ++k) aty.push_back(CMatrix::Zero(p.blocks()[k], p.blocks()[k]));
  for (std::size_t i = 0; i < p.num_constraints(); ++i) {
    double v = 0;
    for (std::size_t k = 0; k < nb; ++k) {
      const CMatrix a = p.coefficient(i, k);
      v += (a * s.X[k]).trace().real();
      aty[k] += s.y(static_cast<Index>(i)) * a;
    }
    ax(static_cast<Index>(i)) = v;
    b(static_cast<Index>(i)) = p.constraints()[i].rhs;
  }
  r.primal = (ax - b).norm() / (1 + b.norm());
  double dres = 0, cnorm = 0, comp = 0, pobj = 0;
  r.min_eig_x = r.min_eig_s = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < nb; ++k) {
    dres += (p.objective()[k] - aty[k] - s.S[k]).squaredNorm();
    cnorm += p.objective()[k].squaredNorm();
    comp += (s.X[k] * s.S[k]).trace().real();
    pobj += (p.objective()[k] * s.X[k]).trace().real();
    r.min_eig_x = std::min(r.min_eig_x, lambda_min(hermitian_part(s.X[k])));
    r.min_eig_s = std::min(r.min_eig_s, lambda_min(hermitian_part(s.S[k])));
  }
  r.dual = std::sqrt(dres) / (1 + std::sqrt(cnorm));
  r.complement = std::abs(comp) / (1 + std::abs(pobj));
  return r;
}

}  // namespace cbsep::sdp
