#pragma once

// Finite-dimensional tensor-product Hilbert space with named basis states.
//
// Convention: the joint basis is ordered with the FIRST factor slowest
// (row-major over factor indices), i.e. for dims {d0, d1} the joint index
// of (i0, i1) is i0 * d1 + i1.  This matches the Kronecker-product order
// kron(A0, A1) for operators acting on factors 0 and 1.

#include <initializer_list>
#include <numeric>
#include <string>
#include <vector>

#include "entsim/types.hpp"

namespace entsim {

class HilbertSpace {
 public:
  // dims: local dimension of each tensor factor (each >= 2).
  // labels: optional basis-state names per factor; when given, labels[k]
  // must have exactly dims[k] entries.  Factors without labels fall back
  // to "0", "1", ... for formatting.
  explicit HilbertSpace(std::vector<int> dims,
                        std::vector<std::vector<std::string>> labels = {})
      : dims_(std::move(dims)), labels_(std::move(labels)) {
    if (dims_.empty()) throw std::invalid_argument("HilbertSpace: no factors");
    for (int d : dims_) {
      if (d < 2) throw std::invalid_argument("HilbertSpace: factor dim < 2");
    }
    if (!labels_.empty()) {
      if (labels_.size() != dims_.size())
        throw std::invalid_argument("HilbertSpace: labels/dims length mismatch");
      for (std::size_t k = 0; k < dims_.size(); ++k) {
        if (static_cast<int>(labels_[k].size()) != dims_[k])
          throw std::invalid_argument("HilbertSpace: wrong label count for factor");
      }
    }
    dim_ = 1;
    for (int d : dims_) dim_ *= d;
  }

  int factor_count() const { return static_cast<int>(dims_.size()); }
  int factor_dim(int k) const { return dims_.at(static_cast<std::size_t>(k)); }
  const std::vector<int>& dims() const { return dims_; }
  int dim() const { return dim_; }

  // Joint basis index of a per-factor index tuple.
  int basis_index(const std::vector<int>& idx) const {
    if (idx.size() != dims_.size())
      throw std::invalid_argument("basis_index: wrong tuple length");
    int joint = 0;
    for (std::size_t k = 0; k < dims_.size(); ++k) {
      if (idx[k] < 0 || idx[k] >= dims_[k])
        throw std::invalid_argument("basis_index: index out of range");
      joint = joint * dims_[k] + idx[k];
    }
    return joint;
  }

  // Per-factor index tuple of a joint basis index (inverse of basis_index).
  std::vector<int> unpack_index(int joint) const {
    if (joint < 0 || joint >= dim_)
      throw std::invalid_argument("unpack_index: out of range");
    std::vector<int> idx(dims_.size());
    for (std::size_t k = dims_.size(); k-- > 0;) {
      idx[k] = joint % dims_[k];
      joint /= dims_[k];
    }
    return idx;
  }

  // Index of a named basis state within one factor.
  int label_index(int factor, const std::string& label) const {
    const auto& names = factor_labels(factor);
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == label) return static_cast<int>(i);
    throw std::invalid_argument("label_index: unknown label '" + label + "'");
  }

  // Joint basis index of a per-factor label tuple.
  int basis_index(const std::vector<std::string>& state) const {
    if (state.size() != dims_.size())
      throw std::invalid_argument("basis_index: wrong tuple length");
    std::vector<int> idx(state.size());
    for (std::size_t k = 0; k < state.size(); ++k)
      idx[k] = label_index(static_cast<int>(k), state[k]);
    return basis_index(idx);
  }

  // Brace-list conveniences; without these, {0, 1} is ambiguous because a
  // literal 0 also converts to const char*.
  int basis_index(std::initializer_list<int> idx) const {
    return basis_index(std::vector<int>(idx));
  }
  int basis_index(std::initializer_list<const char*> labels) const {
    return basis_index(std::vector<std::string>(labels.begin(), labels.end()));
  }

  std::vector<std::string> factor_labels(int factor) const {
    if (factor < 0 || factor >= factor_count())
      throw std::invalid_argument("factor_labels: no such factor");
    if (!labels_.empty() && !labels_[static_cast<std::size_t>(factor)].empty())
      return labels_[static_cast<std::size_t>(factor)];
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(dims_[static_cast<std::size_t>(factor)]));
    for (int i = 0; i < dims_[static_cast<std::size_t>(factor)]; ++i)
      names.push_back(std::to_string(i));
    return names;
  }

  // Human-readable name "|a,b,...>" of a joint basis index.
  std::string basis_label(int joint) const {
    const auto idx = unpack_index(joint);
    std::string out = "|";
    for (std::size_t k = 0; k < idx.size(); ++k) {
      if (k > 0) out += ",";
      out += factor_labels(static_cast<int>(k))[static_cast<std::size_t>(idx[k])];
    }
    return out + ">";
  }

  // Spaces are interchangeable for operator algebra when their factor
  // dimensions agree; labels are presentation metadata only.
  friend bool operator==(const HilbertSpace& a, const HilbertSpace& b) {
    return a.dims_ == b.dims_;
  }
  friend bool operator!=(const HilbertSpace& a, const HilbertSpace& b) {
    return !(a == b);
  }

  // Concatenation of the factor lists of several spaces (labels kept).
  static HilbertSpace join(const std::vector<HilbertSpace>& parts) {
    std::vector<int> dims;
    std::vector<std::vector<std::string>> labels;
    for (const auto& s : parts) {
      for (int k = 0; k < s.factor_count(); ++k) {
        dims.push_back(s.factor_dim(k));
        labels.push_back(s.factor_labels(k));
      }
    }
    return HilbertSpace(std::move(dims), std::move(labels));
  }

 private:
  std::vector<int> dims_;
  std::vector<std::vector<std::string>> labels_;
  int dim_ = 0;
};

// Two qubits with excited/ground labels; the workhorse space for emitter
// pairs and distributed Bell states.
inline HilbertSpace two_qubit_space() {
  return HilbertSpace({2, 2}, {{"e", "g"}, {"e", "g"}});
}

}  // namespace entsim
