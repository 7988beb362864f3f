#pragma once

// Superoperators as d^2 x d^2 matrices acting on column-stacked density
// matrices, with the standard identities
//
//   vec(A rho B) = (B^T (x) A) vec(rho),
//
// so  left multiplication  A rho   -> kron(I, A)
//     right multiplication rho B   -> kron(B^T, I)
//     sandwich             A rho A^dag -> kron(conj(A), A).
//
// Two exponential routes are provided: a full matrix exponential (for
// small generators and for returning propagators as objects) and a
// scaled-Taylor action exp(G t) v that never forms exp(G t), which is what
// the evolution engine uses on larger spaces.

#include <functional>
#include <utility>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include "entsim/operators.hpp"

namespace entsim {

// Column-stacking (column-major) vectorization and its inverse.
inline Vector vec(const Matrix& rho) {
  return Eigen::Map<const Vector>(rho.data(), rho.size());
}

inline Matrix unvec(const Vector& v, int d) {
  if (v.size() != static_cast<Eigen::Index>(d) * d)
    throw std::invalid_argument("unvec: size mismatch");
  return Eigen::Map<const Matrix>(v.data(), d, d);
}

// Linear map on operators over a declared space, stored densely.
struct Superoperator {
  HilbertSpace space;
  Matrix mat;  // (d^2) x (d^2)

  Superoperator(HilbertSpace s, Matrix m)
      : space(std::move(s)), mat(std::move(m)) {
    const Eigen::Index d2 =
        static_cast<Eigen::Index>(space.dim()) * space.dim();
    if (mat.rows() != d2 || mat.cols() != d2)
      throw std::invalid_argument("Superoperator: matrix/space mismatch");
  }

  Matrix apply(const Matrix& rho) const {
    if (rho.rows() != space.dim() || rho.cols() != space.dim())
      throw std::invalid_argument("Superoperator::apply: operand mismatch");
    return unvec(mat * vec(rho), space.dim());
  }
};

inline Superoperator zero_super(const HilbertSpace& space) {
  const Eigen::Index d2 = static_cast<Eigen::Index>(space.dim()) * space.dim();
  return Superoperator(space, Matrix::Zero(d2, d2));
}

inline Superoperator identity_super(const HilbertSpace& space) {
  const Eigen::Index d2 = static_cast<Eigen::Index>(space.dim()) * space.dim();
  return Superoperator(space, Matrix::Identity(d2, d2));
}

// rho -> A rho
inline Superoperator left_mult(const Operator& a) {
  const Matrix id = Matrix::Identity(a.space.dim(), a.space.dim());
  return Superoperator(a.space, Eigen::kroneckerProduct(id, a.mat));
}

// rho -> rho B
inline Superoperator right_mult(const Operator& b) {
  const Matrix id = Matrix::Identity(b.space.dim(), b.space.dim());
  return Superoperator(b.space,
                       Eigen::kroneckerProduct(b.mat.transpose().eval(), id));
}

// rho -> A rho A^dag
inline Superoperator sandwich(const Operator& a) {
  return Superoperator(a.space,
                       Eigen::kroneckerProduct(a.mat.conjugate().eval(), a.mat));
}

inline Superoperator compose(const Superoperator& outer,
                             const Superoperator& inner) {
  if (outer.space != inner.space)
    throw std::invalid_argument("compose: space mismatch");
  return Superoperator(outer.space, outer.mat * inner.mat);
}

// Full matrix exponential exp(S t), scaling-and-squaring under the hood.
inline Superoperator expm(const Superoperator& s, double t) {
  if (t < 0.0) throw std::invalid_argument("expm: negative time");
  Matrix m = (s.mat * t).exp();
  return Superoperator(s.space, std::move(m));
}

namespace detail {

inline double one_norm(const Matrix& m) {
  return m.cwiseAbs().colwise().sum().maxCoeff();
}

// One scaled-Taylor sweep: y <- exp(G dt) y, truncating when the running
// term is negligible against the accumulated sum.  `mv` applies G.
template <typename Apply, typename Vec>
void taylor_segment(const Apply& mv, double dt, Vec& y, double rel_tol) {
  Vec term = y;
  constexpr int max_terms = 300;
  for (int k = 1; k <= max_terms; ++k) {
    term = mv(term);
    term *= (dt / k);
    y += term;
    if (term.norm() <= rel_tol * y.norm()) return;
  }
  throw ConvergenceError("taylor_segment: series did not converge");
}

}  // namespace detail

// Action y = exp(G t) v computed without forming exp(G t): the interval is
// split so that ||G||_1 * t per segment stays moderate, then each segment
// is summed as a truncated Taylor series.
inline Vector expm_apply(const Matrix& gen, double t, Vector v,
                         double rel_tol = 1e-15) {
  if (gen.rows() != gen.cols() || gen.rows() != v.size())
    throw std::invalid_argument("expm_apply: dimension mismatch");
  if (t == 0.0) return v;
  const double scaled = detail::one_norm(gen) * std::abs(t);
  const int segments = std::max(1, static_cast<int>(std::ceil(scaled / 2.0)));
  const double dt = t / segments;
  auto mv = [&gen](const Vector& x) -> Vector { return gen * x; };
  for (int s = 0; s < segments; ++s)
    detail::taylor_segment(mv, dt, v, rel_tol);
  return v;
}

// Block lower-bidiagonal generator for click counting: sector n holds the
// (unnormalized) state conditioned on exactly n detector clicks so far.
// The diagonal block K propagates within a sector; feed[n] injects sector
// n -> n+1 (one more click).  exp(G t) applied to a state concentrated in
// sector 0 then yields, per sector, the time-ordered integrals
//
//   sector 0: exp(K t) rho
//   sector 1: int_0^t exp(K (t-s)) F exp(K s) rho ds            (F = feed)
//   sector 2: the doubly ordered integral with two insertions of F,
//
// which are exactly the no-click / one-click / two-click branch states.
struct CountingGenerator {
  Matrix diag;                // K, applied within every sector
  std::vector<Matrix> feed;   // feed[n]: sector n -> n+1

  int sectors() const { return static_cast<int>(feed.size()) + 1; }

  double one_norm_bound() const {
    double feed_norm = 0.0;
    for (const auto& f : feed)
      feed_norm = std::max(feed_norm, detail::one_norm(f));
    return detail::one_norm(diag) + feed_norm;
  }
};

using SectorVector = std::vector<Vector>;

namespace detail {

inline SectorVector counting_apply(const CountingGenerator& g,
                                   const SectorVector& v) {
  SectorVector out(v.size());
  for (std::size_t n = 0; n < v.size(); ++n) {
    out[n] = g.diag * v[n];
    if (n > 0) out[n] += g.feed[n - 1] * v[n - 1];
  }
  return out;
}

struct SectorArith {
  SectorVector data;
  SectorArith& operator*=(double a) {
    for (auto& v : data) v *= a;
    return *this;
  }
  SectorArith& operator+=(const SectorArith& o) {
    for (std::size_t n = 0; n < data.size(); ++n) data[n] += o.data[n];
    return *this;
  }
  double norm() const {
    double s = 0.0;
    for (const auto& v : data) s += v.squaredNorm();
    return std::sqrt(s);
  }
};

}  // namespace detail

// exp(G t) applied to sector-stacked vectors (see CountingGenerator).
inline SectorVector counting_expm_apply(const CountingGenerator& g, double t,
                                        SectorVector v,
                                        double rel_tol = 1e-15) {
  if (t == 0.0) return v;
  if (v.size() != static_cast<std::size_t>(g.sectors()))
    throw std::invalid_argument("counting_expm_apply: sector count mismatch");
  const double scaled = g.one_norm_bound() * std::abs(t);
  const int segments = std::max(1, static_cast<int>(std::ceil(scaled / 2.0)));
  const double dt = t / segments;
  detail::SectorArith y{std::move(v)};
  auto mv = [&g](const detail::SectorArith& x) -> detail::SectorArith {
    return detail::SectorArith{detail::counting_apply(g, x.data)};
  };
  for (int s = 0; s < segments; ++s)
    detail::taylor_segment(mv, dt, y, rel_tol);
  return std::move(y.data);
}

// Adaptive-Simpson quadrature for matrix-valued integrands, used as an
// independent cross-check of the counting-generator integrals.  The error
// estimate is entrywise; refinement stops when the standard Richardson
// estimate meets rel_tol against the running scale of the result.
namespace detail {

inline Matrix simpson_recurse(const std::function<Matrix(double)>& f, double a,
                              double b, const Matrix& fa, const Matrix& fm,
                              const Matrix& fb, const Matrix& whole,
                              double rel_tol, double scale, int depth) {
  const double m = 0.5 * (a + b);
  const double h = b - a;
  const Matrix fl = f(0.5 * (a + m));
  const Matrix fr = f(0.5 * (m + b));
  const Matrix left = (h / 12.0) * (fa + 4.0 * fl + fm);
  const Matrix right = (h / 12.0) * (fm + 4.0 * fr + fb);
  const Matrix err = left + right - whole;
  if (err.cwiseAbs().maxCoeff() <= 15.0 * rel_tol * scale)
    return left + right + err / 15.0;
  if (depth >= 48)
    throw ConvergenceError("integrate_adaptive: recursion depth exhausted");
  return simpson_recurse(f, a, m, fa, fl, fm, left, rel_tol, scale, depth + 1) +
         simpson_recurse(f, m, b, fm, fr, fb, right, rel_tol, scale, depth + 1);
}

}  // namespace detail

inline Matrix integrate_adaptive(const std::function<Matrix(double)>& f,
                                 double a, double b,
                                 double rel_tol = tol::quadrature) {
  if (!(b >= a)) throw std::invalid_argument("integrate_adaptive: bad interval");
  const Matrix fa = f(a);
  const Matrix fb = f(b);
  const Matrix fm = f(0.5 * (a + b));
  const Matrix whole = ((b - a) / 6.0) * (fa + 4.0 * fm + fb);
  double scale = whole.cwiseAbs().maxCoeff();
  if (scale == 0.0) scale = 1.0;
  return detail::simpson_recurse(f, a, b, fa, fm, fb, whole, rel_tol, scale, 0);
}

}  // namespace entsim
