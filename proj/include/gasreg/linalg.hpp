#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <limits>
#include <vector>

#include "gasreg/errors.hpp"

namespace gasreg::lin {

using cplx = std::complex<double>;

// Dense row-major matrix sized for state-space work with a handful of
// states. PDE fields live in plain std::vector<double>; this type only
// carries generator-sized operators.
class Mat {
 public:
  Mat() = default;

  Mat(int rows, int cols)
      : r_(rows), c_(cols), a_(static_cast<std::size_t>(rows) * cols, 0.0) {
    if (rows < 0 || cols < 0) throw invalid_input("matrix dimensions must be nonnegative");
  }

  Mat(std::initializer_list<std::initializer_list<double>> rows) {
    r_ = static_cast<int>(rows.size());
    c_ = r_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
    a_.reserve(static_cast<std::size_t>(r_) * c_);
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != c_) throw invalid_input("ragged matrix initializer");
      a_.insert(a_.end(), row.begin(), row.end());
    }
  }

  static Mat identity(int n) {
    Mat m(n, n);
    for (int i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  int rows() const { return r_; }
  int cols() const { return c_; }

  double& operator()(int i, int j) { return a_[static_cast<std::size_t>(i) * c_ + j]; }
  double operator()(int i, int j) const { return a_[static_cast<std::size_t>(i) * c_ + j]; }

  const std::vector<double>& data() const { return a_; }

 private:
  int r_ = 0, c_ = 0;
  std::vector<double> a_;
};

inline Mat operator*(const Mat& x, const Mat& y) {
  if (x.cols() != y.rows()) throw invalid_input("matrix product dimension mismatch");
  Mat z(x.rows(), y.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int k = 0; k < x.cols(); ++k) {
      const double xik = x(i, k);
      if (xik == 0.0) continue;
      for (int j = 0; j < y.cols(); ++j) z(i, j) += xik * y(k, j);
    }
  return z;
}

inline std::vector<double> operator*(const Mat& x, const std::vector<double>& v) {
  if (x.cols() != static_cast<int>(v.size())) throw invalid_input("matrix-vector dimension mismatch");
  std::vector<double> out(x.rows(), 0.0);
  for (int i = 0; i < x.rows(); ++i) {
    double acc = 0.0;
    for (int j = 0; j < x.cols(); ++j) acc += x(i, j) * v[j];
    out[i] = acc;
  }
  return out;
}

inline Mat operator+(const Mat& x, const Mat& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw invalid_input("matrix sum dimension mismatch");
  Mat z(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) z(i, j) = x(i, j) + y(i, j);
  return z;
}

inline Mat operator-(const Mat& x, const Mat& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) throw invalid_input("matrix difference dimension mismatch");
  Mat z(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) z(i, j) = x(i, j) - y(i, j);
  return z;
}

inline Mat scale(const Mat& x, double s) {
  Mat z(x.rows(), x.cols());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) z(i, j) = s * x(i, j);
  return z;
}

inline Mat transpose(const Mat& x) {
  Mat z(x.cols(), x.rows());
  for (int i = 0; i < x.rows(); ++i)
    for (int j = 0; j < x.cols(); ++j) z(j, i) = x(i, j);
  return z;
}

inline double inf_norm(const Mat& x) {
  double best = 0.0;
  for (int i = 0; i < x.rows(); ++i) {
    double row = 0.0;
    for (int j = 0; j < x.cols(); ++j) row += std::abs(x(i, j));
    best = std::max(best, row);
  }
  return best;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw invalid_input("dot product dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm2(const std::vector<double>& a) {
  double acc = 0.0;
  for (double x : a) acc += x * x;
  return std::sqrt(acc);
}

// Solves a x = b by Gaussian elimination with partial pivoting.
inline std::vector<double> solve(Mat a, std::vector<double> b) {
  const int n = a.rows();
  if (a.cols() != n || static_cast<int>(b.size()) != n) throw invalid_input("solve needs a square system");
  double scale_max = 0.0;
  for (double x : a.data()) scale_max = std::max(scale_max, std::abs(x));
  for (int k = 0; k < n; ++k) {
    int piv = k;
    for (int i = k + 1; i < n; ++i)
      if (std::abs(a(i, k)) > std::abs(a(piv, k))) piv = i;
    if (std::abs(a(piv, k)) <= 1e-14 * std::max(scale_max, 1e-300))
      throw numeric_failure("linear solve hit a (near) singular matrix");
    if (piv != k) {
      for (int j = k; j < n; ++j) std::swap(a(piv, j), a(k, j));
      std::swap(b[piv], b[k]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      if (f == 0.0) continue;
      for (int j = k; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }
  std::vector<double> x(n, 0.0);
  for (int i = n - 1; i >= 0; --i) {
    double acc = b[i];
    for (int j = i + 1; j < n; ++j) acc -= a(i, j) * x[j];
    x[i] = acc / a(i, i);
  }
  return x;
}

namespace detail {

// Diagonal balancing with powers of two: rescales b in place so that row
// and column norms roughly agree, returning the scale factors. Exact in
// floating point, so it costs no accuracy and tames badly scaled
// generators (position/velocity pairs differing by orders of magnitude).
inline std::vector<double> balance(Mat& b) {
  const int n = b.rows();
  std::vector<double> d(static_cast<std::size_t>(n), 1.0);
  bool again = true;
  for (int pass = 0; pass < 32 && again; ++pass) {
    again = false;
    for (int i = 0; i < n; ++i) {
      double r = 0.0, c = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        r += std::abs(b(i, j));
        c += std::abs(b(j, i));
      }
      if (r == 0.0 || c == 0.0) continue;
      double f = 1.0;
      while (c < r / 2.0) {
        c *= 2.0;
        r /= 2.0;
        f *= 2.0;
      }
      while (c >= r * 2.0) {
        c /= 2.0;
        r *= 2.0;
        f /= 2.0;
      }
      if (f != 1.0) {
        again = true;
        d[static_cast<std::size_t>(i)] *= f;
        for (int j = 0; j < n; ++j) {
          b(i, j) /= f;
          b(j, i) *= f;
        }
      }
    }
  }
  return d;
}

}  // namespace detail

// e^{a t} by balancing, scaling and squaring around a truncated power
// series. The series is summed until terms fall below 1e-16 of the running
// sum, so the result is accurate to rounding for the small generators used
// here.
inline Mat matrix_exp(const Mat& a, double t = 1.0) {
  if (a.rows() != a.cols()) throw invalid_input("matrix exponential needs a square matrix");
  const int n = a.rows();
  Mat b = scale(a, t);
  const auto d = detail::balance(b);
  const double nrm = inf_norm(b);
  if (!std::isfinite(nrm)) throw invalid_input("matrix exponential of a non-finite matrix");
  int squarings = 0;
  if (nrm > 0.5) {
    squarings = static_cast<int>(std::ceil(std::log2(nrm / 0.5)));
    b = scale(b, std::ldexp(1.0, -squarings));
  }
  Mat sum = Mat::identity(n);
  Mat term = Mat::identity(n);
  for (int k = 1; k <= 120; ++k) {
    term = scale(term * b, 1.0 / k);
    sum = sum + term;
    if (inf_norm(term) <= 1e-16 * (1.0 + inf_norm(sum))) break;
  }
  for (int k = 0; k < squarings; ++k) sum = sum * sum;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sum(i, j) *= d[static_cast<std::size_t>(i)] / d[static_cast<std::size_t>(j)];
  return sum;
}

namespace detail {

// Rotation G = [[c, s], [-conj(s), c]] with G [f; g] = [r; 0].
inline void make_rot(cplx f, cplx g, double& c, cplx& s) {
  const double af = std::abs(f);
  const double ag = std::abs(g);
  if (ag == 0.0) {
    c = 1.0;
    s = 0.0;
    return;
  }
  if (af == 0.0) {
    c = 0.0;
    s = std::conj(g) / ag;
    return;
  }
  const double r = std::hypot(af, ag);
  c = af / r;
  s = (f / af) * std::conj(g) / r;
}

inline std::pair<cplx, cplx> eig2(cplx a, cplx b, cplx c, cplx d) {
  const cplx half_tr = 0.5 * (a + d);
  const cplx disc = std::sqrt(half_tr * half_tr - (a * d - b * c));
  return {half_tr + disc, half_tr - disc};
}

}  // namespace detail

// All eigenvalues of a small real matrix: Givens reduction to complex
// Hessenberg form, then the explicitly shifted QR iteration with Wilkinson
// shifts and 2x2 deflation. Intended for generator sizes (n up to ~10).
inline std::vector<cplx> eigenvalues(const Mat& a) {
  if (a.rows() != a.cols()) throw invalid_input("eigenvalues need a square matrix");
  const int n = a.rows();
  std::vector<cplx> out;
  if (n == 0) return out;
  out.reserve(n);

  Mat ab = a;
  detail::balance(ab);
  std::vector<cplx> hdata(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) hdata[static_cast<std::size_t>(i) * n + j] = ab(i, j);
  auto H = [&](int i, int j) -> cplx& { return hdata[static_cast<std::size_t>(i) * n + j]; };

  double overall = 1e-300;
  for (const auto& z : hdata) overall = std::max(overall, std::abs(z));
  if (!std::isfinite(overall)) throw invalid_input("eigenvalues of a non-finite matrix");

  const auto apply_left = [&](int p, int q, double c, cplx s) {
    for (int j = 0; j < n; ++j) {
      const cplx tp = H(p, j), tq = H(q, j);
      H(p, j) = c * tp + s * tq;
      H(q, j) = -std::conj(s) * tp + c * tq;
    }
  };
  const auto apply_right = [&](int p, int q, double c, cplx s) {
    for (int i = 0; i < n; ++i) {
      const cplx tp = H(i, p), tq = H(i, q);
      H(i, p) = c * tp + std::conj(s) * tq;
      H(i, q) = -s * tp + c * tq;
    }
  };

  // Hessenberg reduction by similarity rotations.
  for (int k = 0; k + 2 < n; ++k)
    for (int i = k + 2; i < n; ++i)
      if (std::abs(H(i, k)) != 0.0) {
        double c;
        cplx s;
        detail::make_rot(H(k + 1, k), H(i, k), c, s);
        apply_left(k + 1, i, c, s);
        apply_right(k + 1, i, c, s);
        H(i, k) = 0.0;
      }

  const double eps = std::numeric_limits<double>::epsilon();
  int hi = n - 1;
  int iter = 0;
  while (hi >= 0) {
    if (hi == 0) {
      out.push_back(H(0, 0));
      --hi;
      continue;
    }
    // Top of the trailing unreduced block.
    int lo = hi;
    while (lo > 0) {
      double t = std::abs(H(lo - 1, lo - 1)) + std::abs(H(lo, lo));
      if (t == 0.0) t = overall;
      if (std::abs(H(lo, lo - 1)) <= 16.0 * eps * t) {
        H(lo, lo - 1) = 0.0;
        break;
      }
      --lo;
    }
    if (lo == hi) {
      out.push_back(H(hi, hi));
      --hi;
      iter = 0;
      continue;
    }
    if (lo == hi - 1) {
      const auto [l1, l2] = detail::eig2(H(hi - 1, hi - 1), H(hi - 1, hi), H(hi, hi - 1), H(hi, hi));
      out.push_back(l1);
      out.push_back(l2);
      hi -= 2;
      iter = 0;
      continue;
    }
    if (++iter > 60 * n) throw numeric_failure("eigenvalue iteration failed to converge");

    const auto [l1, l2] = detail::eig2(H(hi - 1, hi - 1), H(hi - 1, hi), H(hi, hi - 1), H(hi, hi));
    cplx mu = (std::abs(l1 - H(hi, hi)) < std::abs(l2 - H(hi, hi))) ? l1 : l2;
    if (iter % 20 == 0) mu = H(hi, hi) + cplx(0.75 * std::abs(H(hi, hi - 1)), 0.0);

    // One explicit shifted QR sweep on [lo..hi]: triangularize H - mu I
    // with row rotations, then recombine from the right.
    for (int i = lo; i <= hi; ++i) H(i, i) -= mu;
    std::vector<double> cs(static_cast<std::size_t>(hi - lo));
    std::vector<cplx> sn(static_cast<std::size_t>(hi - lo));
    for (int k = lo; k < hi; ++k) {
      double c;
      cplx s;
      detail::make_rot(H(k, k), H(k + 1, k), c, s);
      cs[static_cast<std::size_t>(k - lo)] = c;
      sn[static_cast<std::size_t>(k - lo)] = s;
      apply_left(k, k + 1, c, s);
      H(k + 1, k) = 0.0;
    }
    for (int k = lo; k < hi; ++k)
      apply_right(k, k + 1, cs[static_cast<std::size_t>(k - lo)], sn[static_cast<std::size_t>(k - lo)]);
    for (int i = lo; i <= hi; ++i) H(i, i) += mu;
  }
  return out;
}

}  // namespace gasreg::lin
