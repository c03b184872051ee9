#pragma once

// Dense tensors over a single index range 0..dim-1, templated on scalar.
// Forms are stored as fully antisymmetric arrays; wedge products use the
// determinant convention (e^1 ^ e^2)(e_1, e_2) = 1.

#include <algorithm>
#include <array>
#include <cassert>
#include <complex>
#include <functional>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ahg/jet.hpp"

namespace ahg {

template <class T>
class Tensor {
 public:
  Tensor() = default;
  Tensor(int dim, int rank, const T& fill = T(0.0)) : dim_(dim), rank_(rank) {
    std::size_t n = 1;
    for (int i = 0; i < rank; ++i) n *= static_cast<std::size_t>(dim);
    data_.assign(n, fill);
  }

  int dim() const { return dim_; }
  int rank() const { return rank_; }
  std::size_t size() const { return data_.size(); }
  std::vector<T>& data() { return data_; }
  const std::vector<T>& data() const { return data_; }

  std::size_t offset(std::span<const int> idx) const {
    std::size_t o = 0;
    for (int i : idx) o = o * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
    return o;
  }
  T& at(std::span<const int> idx) { return data_[offset(idx)]; }
  const T& at(std::span<const int> idx) const { return data_[offset(idx)]; }

  T& operator()() { return data_[0]; }
  const T& operator()() const { return data_[0]; }
  T& operator()(int a) { return data_[a]; }
  const T& operator()(int a) const { return data_[a]; }
  T& operator()(int a, int b) { return data_[a * dim_ + b]; }
  const T& operator()(int a, int b) const { return data_[a * dim_ + b]; }
  T& operator()(int a, int b, int c) { return data_[(a * dim_ + b) * dim_ + c]; }
  const T& operator()(int a, int b, int c) const { return data_[(a * dim_ + b) * dim_ + c]; }
  T& operator()(int a, int b, int c, int d) { return data_[((a * dim_ + b) * dim_ + c) * dim_ + d]; }
  const T& operator()(int a, int b, int c, int d) const { return data_[((a * dim_ + b) * dim_ + c) * dim_ + d]; }

  /// Index tuple for flat position k.
  void unflatten(std::size_t k, std::span<int> idx) const {
    for (int i = rank_ - 1; i >= 0; --i) {
      idx[i] = static_cast<int>(k % static_cast<std::size_t>(dim_));
      k /= static_cast<std::size_t>(dim_);
    }
  }

  Tensor& operator+=(const Tensor& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  template <class S>
  Tensor& operator*=(const S& s) {
    for (auto& v : data_) v *= s;
    return *this;
  }
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  template <class S>
  friend Tensor operator*(Tensor a, const S& s) {
    return a *= s;
  }
  template <class S>
  friend Tensor operator*(const S& s, Tensor a) {
    return a *= s;
  }

  template <class F>
  auto map(F&& f) const -> Tensor<decltype(f(std::declval<const T&>()))> {
    using U = decltype(f(std::declval<const T&>()));
    Tensor<U> r(dim_, rank_, U{});
    for (std::size_t k = 0; k < data_.size(); ++k) r.data()[k] = f(data_[k]);
    return r;
  }

 private:
  void check_same(const Tensor& o) const {
    if (o.dim_ != dim_ || o.rank_ != rank_) throw std::invalid_argument("tensor shape mismatch");
  }
  int dim_ = 0;
  int rank_ = 0;
  std::vector<T> data_;
};

using TensorD = Tensor<double>;
using TensorC = Tensor<std::complex<double>>;
using TensorJ = Tensor<Jet>;

inline double value_of(double x) { return x; }
inline double value_of(const Jet& j) { return j.value(); }

/// Point values of a jet tensor.
inline TensorD values(const TensorJ& t) {
  return t.map([](const Jet& j) { return j.value(); });
}
inline TensorJ truncate(const TensorJ& t, int order) {
  return t.map([order](const Jet& j) { return j.truncated(order); });
}

enum class FrameTag { Coordinate, Orthonormal, Unitary };

/// A tensor at a point with its frame and variance, e.g. "ddd" for a 3-form.
struct TensorValue {
  TensorD components;
  std::string variance;
  FrameTag frame = FrameTag::Orthonormal;
  std::vector<double> point;
};

// ---------------------------------------------------------------------------
// Permutations and antisymmetric algebra

/// Sign of the permutation sorting `idx`; 0 if there is a repeated entry.
inline int permutation_sign(std::span<const int> idx) {
  int sign = 1;
  const std::size_t k = idx.size();
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) {
      if (idx[i] == idx[j]) return 0;
      if (idx[i] > idx[j]) sign = -sign;
    }
  return sign;
}

/// All strictly increasing index tuples of length k from 0..dim-1.
inline std::vector<std::vector<int>> increasing_tuples(int dim, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (static_cast<int>(cur.size()) == k) {
      out.push_back(cur);
      return;
    }
    for (int i = start; i < dim; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

/// Fill a form from its increasing-index components via antisymmetry.
template <class T>
void antisymmetrize_from_increasing(Tensor<T>& t) {
  const int k = t.rank();
  std::vector<int> idx(k), sorted(k);
  for (std::size_t f = 0; f < t.size(); ++f) {
    t.unflatten(f, idx);
    sorted = idx;
    const int s = permutation_sign(idx);
    if (s == 0) {
      t.data()[f] = T(0.0);
      continue;
    }
    std::sort(sorted.begin(), sorted.end());
    if (sorted == idx) continue;
    t.data()[f] = t.at(sorted) * static_cast<double>(s);
  }
}

/// Wedge product of a p-form and a q-form (shuffle sum, no factorial weights).
template <class T>
Tensor<T> wedge(const Tensor<T>& a, const Tensor<T>& b) {
  const int p = a.rank(), q = b.rank(), m = a.dim();
  Tensor<T> r(m, p + q, T(0.0));
  if (p == 0 || q == 0) {
    const Tensor<T>& form = p == 0 ? b : a;
    const T s = p == 0 ? a() : b();
    for (std::size_t k = 0; k < form.size(); ++k) r.data()[k] = form.data()[k] * s;
    return r;
  }
  const auto shuffles = increasing_tuples(p + q, p);
  std::vector<int> idx(p + q), ia(p), ib(q), perm(p + q);
  for (const auto& out : increasing_tuples(m, p + q)) {
    T acc(0.0);
    for (const auto& sh : shuffles) {
      int na = 0, nb = 0;
      for (int i = 0, j = 0; i < p + q; ++i) {
        if (j < p && sh[j] == i) {
          ia[na++] = out[i];
          perm[j] = i;
          ++j;
        } else {
          ib[nb++] = out[i];
        }
      }
      int pos = p;
      for (int i = 0; i < p + q; ++i)
        if (std::find(sh.begin(), sh.end(), i) == sh.end()) perm[pos++] = i;
      const double s = permutation_sign(perm);
      acc += a.at(ia) * b.at(ib) * s;
    }
    r.at(out) = acc;
  }
  antisymmetrize_from_increasing(r);
  return r;
}

/// |form|^2 summed over strictly increasing index tuples; `free_slots` leading
/// indices are summed over all values (TM-valued forms).
template <class T>
double form_norm2(const Tensor<T>& t, int free_slots = 0) {
  const int k = t.rank() - free_slots;
  double acc = 0.0;
  std::vector<int> idx(t.rank());
  for (std::size_t f = 0; f < t.size(); ++f) {
    t.unflatten(f, idx);
    bool inc = true;
    for (int i = free_slots + 1; i < free_slots + k; ++i)
      if (idx[i] <= idx[i - 1]) inc = false;
    if (!inc) continue;
    const double v = value_of(t.data()[f]);
    acc += v * v;
  }
  return acc;
}

inline double sup_norm(const TensorD& t) {
  double m = 0.0;
  for (double v : t.data()) m = std::max(m, std::abs(v));
  return m;
}
inline double sup_norm(const TensorJ& t) {
  double m = 0.0;
  for (const auto& v : t.data()) m = std::max(m, std::abs(v.value()));
  return m;
}

/// out(a1..ak) = sum M(a1,A1)...M(ak,Ak) t(A1..Ak): applies M to every slot.
template <class S, class T, class Mat>
Tensor<S> transform_all(const Tensor<T>& t, const Mat& M) {
  const int k = t.rank();
  const int mo = static_cast<int>(M.rows());
  const int mi = t.dim();
  std::vector<S> cur(t.data().begin(), t.data().end());
  // cur has shape [out]^s x [in]^(k-s) after s passes; apply slot s.
  std::size_t outer = 1, inner = 1;
  for (int i = 1; i < k; ++i) inner *= static_cast<std::size_t>(mi);
  for (int s = 0; s < k; ++s) {
    std::vector<S> nxt(outer * static_cast<std::size_t>(mo) * inner, S(0.0));
    for (std::size_t o = 0; o < outer; ++o)
      for (int a = 0; a < mo; ++a)
        for (int A = 0; A < mi; ++A) {
          const S w = S(M(a, A));
          if (w == S(0.0)) continue;
          const S* src = &cur[(o * mi + A) * inner];
          S* dst = &nxt[(o * mo + a) * inner];
          for (std::size_t r = 0; r < inner; ++r) dst[r] += w * src[r];
        }
    cur.swap(nxt);
    outer *= static_cast<std::size_t>(mo);
    if (s + 1 < k) inner /= static_cast<std::size_t>(mi);
  }
  Tensor<S> r(mo, k, S(0.0));
  r.data() = std::move(cur);
  return r;
}

/// Complex unitary-style basis change for type decompositions: row a of W holds
/// the components of w_a in the current basis; rows 0..n-1 span type (1,0).
struct TypeBasis {
  Eigen::MatrixXcd W;
  Eigen::MatrixXcd Winv;
  int n = 0;
  explicit TypeBasis(Eigen::MatrixXcd w) : W(std::move(w)), Winv(W.inverse()), n(static_cast<int>(W.rows()) / 2) {}
};

/// Keep only components with p vectors of type (1,0), p in `keep_p`.
inline TensorD type_project(const TensorD& form, const TypeBasis& B, std::initializer_list<int> keep_p) {
  const int k = form.rank();
  TensorC c = transform_all<std::complex<double>>(form, B.W);
  std::vector<int> idx(k);
  for (std::size_t f = 0; f < c.size(); ++f) {
    c.unflatten(f, idx);
    int p = 0;
    for (int i : idx) p += i < B.n;
    if (std::find(keep_p.begin(), keep_p.end(), p) == keep_p.end()) c.data()[f] = 0.0;
  }
  TensorC r = transform_all<std::complex<double>>(c, B.Winv);
  return r.map([](const std::complex<double>& z) { return z.real(); });
}

/// Complex version returning the full (p,q) component tensor in the W basis.
inline TensorC type_components(const TensorC& form, const TypeBasis& B) {
  return transform_all<std::complex<double>>(form, B.W);
}

}  // namespace ahg
