#pragma once

// Operators and density operators tied to a HilbertSpace, plus the small
// set of structural operations the rest of the library is built from:
// tensor products, embeddings, partial trace, fidelity and state checks.

#include <algorithm>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "entsim/hilbert.hpp"
#include "entsim/types.hpp"

namespace entsim {

// A (not necessarily Hermitian) linear operator on a declared space.
struct Operator {
  HilbertSpace space;
  Matrix mat;

  Operator(HilbertSpace s, Matrix m) : space(std::move(s)), mat(std::move(m)) {
    if (mat.rows() != mat.cols())
      throw std::invalid_argument("Operator: matrix not square");
    if (mat.rows() != space.dim())
      throw std::invalid_argument("Operator: matrix/space dimension mismatch");
  }
};

inline Operator identity_op(const HilbertSpace& space) {
  return Operator(space, Matrix::Identity(space.dim(), space.dim()));
}

inline Operator adjoint(const Operator& a) {
  return Operator(a.space, a.mat.adjoint());
}

// Basis ket |state> as a dense column vector.
inline Vector basis_ket(const HilbertSpace& space,
                        const std::vector<std::string>& state) {
  Vector v = Vector::Zero(space.dim());
  v(space.basis_index(state)) = 1.0;
  return v;
}

// |ket><bra| between named basis states.
inline Operator ket_bra(const HilbertSpace& space,
                        const std::vector<std::string>& ket,
                        const std::vector<std::string>& bra) {
  Matrix m = Matrix::Zero(space.dim(), space.dim());
  m(space.basis_index(ket), space.basis_index(bra)) = 1.0;
  return Operator(space, m);
}

// Tensor product of operators; the result lives on the concatenation of
// the factor spaces (first argument slowest, matching HilbertSpace).
inline Operator tensor(const std::vector<Operator>& ops) {
  if (ops.empty()) throw std::invalid_argument("tensor: no factors");
  std::vector<HilbertSpace> spaces;
  spaces.reserve(ops.size());
  Matrix m = ops.front().mat;
  spaces.push_back(ops.front().space);
  for (std::size_t k = 1; k < ops.size(); ++k) {
    m = Eigen::kroneckerProduct(m, ops[k].mat).eval();
    spaces.push_back(ops[k].space);
  }
  return Operator(HilbertSpace::join(spaces), std::move(m));
}

// Tensor product with an explicitly declared joint space; the factor
// spaces must compose to it.
inline Operator tensor(const std::vector<Operator>& ops,
                       const HilbertSpace& joint) {
  Operator out = tensor(ops);
  if (out.space != joint)
    throw std::invalid_argument("tensor: factors do not compose to joint space");
  return Operator(joint, std::move(out.mat));
}

// Single-factor operator embedded into a joint space (identity elsewhere).
inline Operator embed(const Operator& local, const HilbertSpace& joint,
                      int factor) {
  if (factor < 0 || factor >= joint.factor_count())
    throw std::invalid_argument("embed: no such factor");
  if (local.space.dim() != joint.factor_dim(factor))
    throw std::invalid_argument("embed: operator does not fit factor");
  std::vector<Operator> factors;
  factors.reserve(static_cast<std::size_t>(joint.factor_count()));
  for (int k = 0; k < joint.factor_count(); ++k) {
    if (k == factor) {
      factors.push_back(local);
    } else {
      factors.push_back(identity_op(
          HilbertSpace({joint.factor_dim(k)}, {joint.factor_labels(k)})));
    }
  }
  Operator out = tensor(factors);
  return Operator(joint, std::move(out.mat));
}

// Normalization status carried by a DensityOperator.
enum class Normalization { normalized, subnormalized };

// Hermitian positive-semidefinite state matrix.  Construction validates
// hermiticity, positivity (eigenvalue floor) and the trace: a normalized
// state has unit trace, a subnormalized one has trace in (0, 1].
class DensityOperator {
 public:
  DensityOperator(HilbertSpace space, Matrix mat,
                  Normalization norm = Normalization::normalized)
      : space_(std::move(space)), mat_(std::move(mat)), norm_(norm) {
    if (mat_.rows() != mat_.cols() || mat_.rows() != space_.dim())
      throw std::invalid_argument("DensityOperator: matrix/space mismatch");
    const double herm_dev = (mat_ - mat_.adjoint()).cwiseAbs().maxCoeff();
    if (herm_dev > tol::structural)
      throw std::invalid_argument("DensityOperator: not Hermitian");
    mat_ = 0.5 * (mat_ + mat_.adjoint().eval());  // symmetrize roundoff
    const double tr = mat_.trace().real();
    if (norm_ == Normalization::normalized) {
      if (std::abs(tr - 1.0) > tol::structural)
        throw std::invalid_argument("DensityOperator: trace != 1");
    } else {
      if (tr <= 0.0 || tr > 1.0 + tol::structural)
        throw std::invalid_argument("DensityOperator: trace outside (0, 1]");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(mat_, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol::structural)
      throw std::invalid_argument("DensityOperator: negative eigenvalue");
  }

  static DensityOperator from_ket(const HilbertSpace& space, const Vector& psi) {
    if (psi.size() != space.dim())
      throw std::invalid_argument("from_ket: ket/space mismatch");
    if (std::abs(psi.norm() - 1.0) > tol::structural)
      throw std::invalid_argument("from_ket: ket not normalized");
    return DensityOperator(space, psi * psi.adjoint());
  }

  const HilbertSpace& space() const { return space_; }
  const Matrix& matrix() const { return mat_; }
  double trace() const { return mat_.trace().real(); }
  bool is_normalized() const { return norm_ == Normalization::normalized; }

  // Explicitly normalized copy (divides by the trace).
  DensityOperator normalized() const {
    const double tr = trace();
    if (tr < 1e-15) throw NullEventError("normalized: vanishing trace");
    return DensityOperator(space_, mat_ / tr, Normalization::normalized);
  }

 private:
  HilbertSpace space_;
  Matrix mat_;
  Normalization norm_;
};

// Partial trace keeping the listed factors (ascending, non-empty); the
// kept factors retain their order and labels.
inline DensityOperator partial_trace(const DensityOperator& rho,
                                     const std::vector<int>& keep) {
  const HilbertSpace& space = rho.space();
  if (keep.empty()) throw std::invalid_argument("partial_trace: keep empty");
  for (std::size_t k = 0; k < keep.size(); ++k) {
    if (keep[k] < 0 || keep[k] >= space.factor_count())
      throw std::invalid_argument("partial_trace: factor out of range");
    if (k > 0 && keep[k] <= keep[k - 1])
      throw std::invalid_argument("partial_trace: keep not ascending");
  }
  std::vector<int> traced;
  for (int k = 0; k < space.factor_count(); ++k)
    if (std::find(keep.begin(), keep.end(), k) == keep.end())
      traced.push_back(k);

  std::vector<int> keep_dims, traced_dims;
  std::vector<std::vector<std::string>> keep_labels;
  for (int k : keep) {
    keep_dims.push_back(space.factor_dim(k));
    keep_labels.push_back(space.factor_labels(k));
  }
  for (int k : traced) traced_dims.push_back(space.factor_dim(k));
  HilbertSpace out_space(keep_dims, keep_labels);
  const int dk = out_space.dim();
  int dt = 1;
  for (int d : traced_dims) dt *= d;

  // Joint index from (kept tuple, traced tuple).
  auto joint_index = [&](const std::vector<int>& ki, const std::vector<int>& ti) {
    std::vector<int> full(static_cast<std::size_t>(space.factor_count()));
    for (std::size_t a = 0; a < keep.size(); ++a)
      full[static_cast<std::size_t>(keep[a])] = ki[a];
    for (std::size_t a = 0; a < traced.size(); ++a)
      full[static_cast<std::size_t>(traced[a])] = ti[a];
    return space.basis_index(full);
  };
  auto unpack = [](int joint, const std::vector<int>& dims) {
    std::vector<int> idx(dims.size());
    for (std::size_t k = dims.size(); k-- > 0;) {
      idx[k] = joint % dims[k];
      joint /= dims[k];
    }
    return idx;
  };

  Matrix out = Matrix::Zero(dk, dk);
  for (int r = 0; r < dk; ++r) {
    const auto ri = unpack(r, keep_dims);
    for (int c = 0; c < dk; ++c) {
      const auto ci = unpack(c, keep_dims);
      Complex sum = 0.0;
      for (int t = 0; t < dt; ++t) {
        const auto ti = unpack(t, traced_dims);
        sum += rho.matrix()(joint_index(ri, ti), joint_index(ci, ti));
      }
      out(r, c) = sum;
    }
  }
  return DensityOperator(out_space, std::move(out),
                         rho.is_normalized() ? Normalization::normalized
                                             : Normalization::subnormalized);
}

// Fidelity F = <psi_T| rho_M |psi_T> of a normalized measured state with a
// pure target, passed as a rank-one density operator.  Mixed targets and
// unnormalized measured states are rejected: callers must normalize
// explicitly so conditioning probabilities stay visible.
inline double fidelity(const DensityOperator& target,
                       const DensityOperator& measured) {
  if (target.space() != measured.space())
    throw std::invalid_argument("fidelity: space mismatch");
  if (!measured.is_normalized() ||
      std::abs(measured.trace() - 1.0) > tol::structural)
    throw std::invalid_argument("fidelity: measured state not normalized");
  if (!target.is_normalized())
    throw std::invalid_argument("fidelity: target not normalized");
  const double purity = (target.matrix() * target.matrix()).trace().real();
  if (std::abs(purity - 1.0) > tol::structural)
    throw std::invalid_argument("fidelity: target not pure");
  const Complex f = (target.matrix() * measured.matrix()).trace();
  if (std::abs(f.imag()) > tol::structural)
    throw std::invalid_argument("fidelity: non-real overlap");
  // Clamp roundoff excursions just outside [0, 1].
  return std::min(1.0, std::max(0.0, f.real()));
}

inline double fidelity(const Vector& target_ket, const DensityOperator& measured) {
  return fidelity(DensityOperator::from_ket(measured.space(), target_ket),
                  measured);
}

// Diagnostic report for a candidate state matrix.
struct DensityReport {
  double hermiticity_deviation = 0.0;
  double min_eigenvalue = 0.0;
  double trace_real = 0.0;
  double trace_imag = 0.0;
  bool ok = false;

  std::string str() const {
    std::ostringstream os;
    os << "herm_dev=" << hermiticity_deviation << " min_eig=" << min_eigenvalue
       << " trace=" << trace_real << (ok ? " [ok]" : " [FAIL]");
    return os.str();
  }
};

// Validates a raw matrix as a (sub)normalized state without throwing.
inline DensityReport check_density(const Matrix& mat,
                                   bool require_unit_trace = true) {
  DensityReport rep;
  if (mat.rows() != mat.cols()) return rep;
  rep.hermiticity_deviation = (mat - mat.adjoint()).cwiseAbs().maxCoeff();
  const Complex tr = mat.trace();
  rep.trace_real = tr.real();
  rep.trace_imag = tr.imag();
  const Matrix sym = 0.5 * (mat + mat.adjoint());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  rep.min_eigenvalue = es.eigenvalues().minCoeff();
  const bool trace_ok = require_unit_trace
                            ? std::abs(rep.trace_real - 1.0) <= tol::structural
                            : (rep.trace_real > 0.0 &&
                               rep.trace_real <= 1.0 + tol::structural);
  rep.ok = rep.hermiticity_deviation <= tol::structural &&
           std::abs(rep.trace_imag) <= tol::structural &&
           rep.min_eigenvalue >= -tol::structural && trace_ok;
  return rep;
}

inline DensityReport check_density(const DensityOperator& rho) {
  return check_density(rho.matrix(), rho.is_normalized());
}

}  // namespace entsim
