#pragma once

#include "ptycho/types.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <vector>

namespace ptycho {

// ---------------------------------------------------------------------------
// DFT
// ---------------------------------------------------------------------------

///@brief Cached length-n discrete Fourier transform.
///
/// Radix-2 for powers of two, Bluestein's chirp-z otherwise. The raw transforms
/// are unnormalized; apply_F / apply_Fadj are the unitary pair where
/// (F_n)_{jk} = w^{jk} / sqrt(n), w = exp(2 pi i / n).
template <typename Real>
class DftPlan {
 public:
  using C = std::complex<Real>;
  using CV = Vec<C>;

  explicit DftPlan(Index n) : n_(n) {
    require(n >= 1, "DFT length must be positive");
    if (is_pow2(n)) {
      init_radix2(n, tw_, rev_);
    } else {
      m_ = 1;
      while (m_ < 2 * n - 1) m_ <<= 1;
      init_radix2(m_, tw_, rev_);
      chirp_.resize(n);
      const Real pi = std::numbers::pi_v<Real>;
      for (Index k = 0; k < n; ++k) {
        // k^2 mod 2n keeps the angle small
        Index kk = (k * k) % (2 * n);
        chirp_[k] = std::polar<Real>(Real(1), -pi * Real(kk) / Real(n));
      }
      for (int dir = 0; dir < 2; ++dir) {
        std::vector<C> b(m_, C(0));
        for (Index k = 0; k < n; ++k) {
          C c = dir == 0 ? std::conj(chirp_[k]) : chirp_[k];
          b[k] = c;
          if (k) b[m_ - k] = c;
        }
        radix2(b.data(), -1);
        bhat_[dir] = std::move(b);
      }
    }
  }

  Index size() const { return n_; }

  /// y_k = sum_j x_j exp(-2 pi i jk/n), in place.
  void forward(C* x) const { run(x, -1); }
  /// y_k = sum_j x_j exp(+2 pi i jk/n), in place, no 1/n.
  void backward(C* x) const { run(x, +1); }

  CV forward(const CV& v) const {
    check(v);
    CV w = v;
    forward(w.data());
    return w;
  }
  CV backward(const CV& v) const {
    check(v);
    CV w = v;
    backward(w.data());
    return w;
  }
  /// F_n v
  CV apply_F(const CV& v) const { return backward(v) / std::sqrt(Real(n_)); }
  /// F_n^* v
  CV apply_Fadj(const CV& v) const { return forward(v) / std::sqrt(Real(n_)); }

  /// Dense F_n; test helper.
  Mat<C> matrix() const {
    Mat<C> F(n_, n_);
    const Real pi = std::numbers::pi_v<Real>;
    for (Index j = 0; j < n_; ++j)
      for (Index k = 0; k < n_; ++k)
        F(k, j) = std::polar<Real>(Real(1) / std::sqrt(Real(n_)),
                                   Real(2) * pi * Real((j * k) % n_) / Real(n_));
    return F;
  }

 private:
  static bool is_pow2(Index n) { return (n & (n - 1)) == 0; }

  void check(const CV& v) const {
    require_dims(v.size() == n_, "DFT length mismatch");
  }

  static void init_radix2(Index n, std::vector<C>& tw, std::vector<Index>& rev) {
    const Real pi = std::numbers::pi_v<Real>;
    tw.resize(n / 2 > 0 ? n / 2 : 1);
    for (Index k = 0; k < n / 2; ++k)
      tw[k] = std::polar<Real>(Real(1), -Real(2) * pi * Real(k) / Real(n));
    rev.assign(n, 0);
    int bits = 0;
    while ((Index(1) << bits) < n) ++bits;
    for (Index i = 0; i < n; ++i) {
      Index r = 0;
      for (int b = 0; b < bits; ++b)
        if (i & (Index(1) << b)) r |= Index(1) << (bits - 1 - b);
      rev[i] = r;
    }
  }

  void radix2(C* x, int sign) const {
    const Index n = Index(rev_.size());
    for (Index i = 0; i < n; ++i)
      if (i < rev_[i]) std::swap(x[i], x[rev_[i]]);
    for (Index len = 2; len <= n; len <<= 1) {
      Index half = len / 2, step = n / len;
      for (Index i = 0; i < n; i += len) {
        for (Index k = 0; k < half; ++k) {
          C w = sign < 0 ? tw_[k * step] : std::conj(tw_[k * step]);
          C u = x[i + k], t = w * x[i + k + half];
          x[i + k] = u + t;
          x[i + k + half] = u - t;
        }
      }
    }
  }

  void run(C* x, int sign) const {
    if (n_ == 1) return;
    if (chirp_.empty()) {
      radix2(x, sign);
      return;
    }
    const int dir = sign < 0 ? 0 : 1;
    std::vector<C> a(m_, C(0));
    for (Index k = 0; k < n_; ++k)
      a[k] = x[k] * (dir == 0 ? chirp_[k] : std::conj(chirp_[k]));
    radix2(a.data(), -1);
    const auto& b = bhat_[dir];
    for (Index k = 0; k < m_; ++k) a[k] *= b[k];
    radix2(a.data(), +1);
    const Real inv_m = Real(1) / Real(m_);
    for (Index k = 0; k < n_; ++k)
      x[k] = a[k] * inv_m * (dir == 0 ? chirp_[k] : std::conj(chirp_[k]));
  }

  Index n_;
  Index m_ = 0;
  std::vector<C> tw_;
  std::vector<Index> rev_;
  std::vector<C> chirp_;
  std::vector<C> bhat_[2];
};

/// Shared plan for length n; thread-safe.
template <typename Real = double>
std::shared_ptr<const DftPlan<Real>> dft_plan(Index n) {
  static std::mutex mu;
  static std::map<Index, std::shared_ptr<const DftPlan<Real>>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  auto p = std::make_shared<const DftPlan<Real>>(n);
  cache.emplace(n, p);
  return p;
}

/// Dense unitary F_n.
inline CMat dft_matrix(Index n) { return DftPlan<double>(n).matrix(); }

// ---------------------------------------------------------------------------
// Permutations
// ---------------------------------------------------------------------------

/// Interleaving permutation P^{(d,N)} on C^{dN}: w[i*N + j] = v[j*d + i].
struct InterleavePerm {
  Index d;
  Index N;

  Index size() const { return d * N; }
  /// Source index feeding output position k.
  Index source(Index k) const { return (k % N) * d + k / N; }
  InterleavePerm inverse() const { return {N, d}; }
};

template <typename Derived>
auto apply_interleave(const InterleavePerm& p, const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  require_dims(v.rows() == p.size(), "interleave: length must equal d*N");
  Mat<S> w(v.rows(), v.cols());
  for (Index k = 0; k < p.size(); ++k) w.row(k) = v.row(p.source(k));
  return w;
}

template <typename Scalar = cplx>
Mat<Scalar> interleave_matrix(const InterleavePerm& p) {
  Mat<Scalar> P = Mat<Scalar>::Zero(p.size(), p.size());
  for (Index k = 0; k < p.size(); ++k) P(k, p.source(k)) = Scalar(1);
  return P;
}

/// w_i = v_{-i mod d}.
template <typename Derived>
auto reversal(const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  const Index d = v.rows();
  Mat<S> w(d, v.cols());
  for (Index i = 0; i < d; ++i) w.row(i) = v.row(wrap(-i, d));
  return w;
}

template <typename Scalar = cplx>
Mat<Scalar> reversal_matrix(Index d) {
  Mat<Scalar> R = Mat<Scalar>::Zero(d, d);
  for (Index i = 0; i < d; ++i) R(i, wrap(-i, d)) = Scalar(1);
  return R;
}

/// Circular down-shift by k rows: (S^k v)_i = v_{i-k}.
template <typename Derived>
auto shift(const Eigen::MatrixBase<Derived>& v, Index k) {
  using S = typename Derived::Scalar;
  const Index n = v.rows();
  Mat<S> w(n, v.cols());
  for (Index i = 0; i < n; ++i) w.row(i) = v.row(wrap(i - k, n));
  return w;
}

/// Blockwise permutation: output block i is input block perm[i].
template <typename Derived>
auto block_perm(const std::vector<Index>& perm, const std::vector<Index>& sizes,
                const Eigen::MatrixBase<Derived>& v) {
  using S = typename Derived::Scalar;
  require_dims(perm.size() == sizes.size(), "block_perm: one size per block");
  std::vector<Index> off(sizes.size() + 1, 0);
  for (std::size_t i = 0; i < sizes.size(); ++i) off[i + 1] = off[i] + sizes[i];
  require_dims(v.rows() == off.back(), "block_perm: length must equal sum of block sizes");
  Mat<S> w(v.rows(), v.cols());
  Index at = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    Index src = perm[i];
    require(src >= 0 && src < Index(sizes.size()), "block_perm: index out of range");
    w.middleRows(at, sizes[src]) = v.middleRows(off[src], sizes[src]);
    at += sizes[src];
  }
  require(at == v.rows(), "block_perm: not a permutation");
  return w;
}

template <typename Scalar = cplx>
Mat<Scalar> block_perm_matrix(const std::vector<Index>& perm, const std::vector<Index>& sizes) {
  Index n = 0;
  for (Index s : sizes) n += s;
  return block_perm(perm, sizes, Mat<Scalar>::Identity(n, n));
}

/// Mapping i -> j with P e_i = e_j for a permutation matrix P.
template <typename Derived>
std::vector<Index> perm_of(const Eigen::MatrixBase<Derived>& P) {
  std::vector<Index> pi(P.cols(), -1);
  for (Index i = 0; i < P.cols(); ++i) {
    Index j;
    P.col(i).cwiseAbs().maxCoeff(&j);
    pi[i] = j;
  }
  return pi;
}

// ---------------------------------------------------------------------------
// Circulants
// ---------------------------------------------------------------------------

/// Block-circulant [V, S^N V, ..., S^{(k-1)N} V]; k defaults to rows/N.
template <typename Derived>
auto circ_block(const Eigen::MatrixBase<Derived>& V, Index N, Index blocks = -1,
                Index max_rows = kDenseRowLimit) {
  using S = typename Derived::Scalar;
  require(N >= 1, "circ_block: stride must be positive");
  require_dims(V.rows() % N == 0, "circ_block: row count not divisible by stride");
  require(V.rows() <= max_rows, "circ_block: dense size guard exceeded");
  const Index L = V.rows() / N, m = V.cols();
  const Index k = blocks < 0 ? L : blocks;
  Mat<S> out(V.rows(), k * m);
  for (Index b = 0; b < k; ++b) out.middleCols(b * m, m) = shift(V, b * N);
  return out;
}

/// Column k is S^k v.
template <typename Derived>
auto circ(const Eigen::MatrixBase<Derived>& v, Index max_rows = kDenseRowLimit) {
  return circ_block(v, 1, -1, max_rows);
}

/// Stacks the conjugate transposes of the N-row blocks of V.
template <typename Derived>
auto block_transpose(const Eigen::MatrixBase<Derived>& V, Index N) {
  using S = typename Derived::Scalar;
  require(N >= 1, "block_transpose: block height must be positive");
  require_dims(V.rows() % N == 0, "block_transpose: row count not divisible by N");
  const Index L = V.rows() / N, m = V.cols();
  Mat<S> out(L * m, N);
  for (Index b = 0; b < L; ++b) out.middleRows(b * m, m) = V.middleRows(b * N, N).adjoint();
  return out;
}

// ---------------------------------------------------------------------------
// Kronecker helpers
// ---------------------------------------------------------------------------

template <typename DA, typename DB>
auto kron(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& B) {
  using S = typename Eigen::ScalarBinaryOpTraits<typename DA::Scalar, typename DB::Scalar>::ReturnType;
  Mat<S> K(A.rows() * B.rows(), A.cols() * B.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j)
      K.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return K;
}

/// Column-major vectorization.
template <typename Derived>
auto vec(const Eigen::MatrixBase<Derived>& M) {
  using S = typename Derived::Scalar;
  Mat<S> tmp = M;
  return Vec<S>(Eigen::Map<const Vec<S>>(tmp.data(), tmp.size()));
}

/// vec(A B C).
template <typename DA, typename DB, typename DC>
auto kron_vec(const Eigen::MatrixBase<DA>& A, const Eigen::MatrixBase<DB>& B,
              const Eigen::MatrixBase<DC>& C) {
  require_dims(A.cols() == B.rows() && B.cols() == C.rows(), "kron_vec: inner dimensions");
  return vec(A * B * C);
}

/// Block diagonal of a list of matrices.
template <typename Scalar>
Mat<Scalar> block_diag(const std::vector<Mat<Scalar>>& blocks) {
  Index r = 0, c = 0;
  for (const auto& b : blocks) r += b.rows(), c += b.cols();
  Mat<Scalar> out = Mat<Scalar>::Zero(r, c);
  r = c = 0;
  for (const auto& b : blocks) {
    out.block(r, c, b.rows(), b.cols()) = b;
    r += b.rows();
    c += b.cols();
  }
  return out;
}

}  // namespace ptycho
