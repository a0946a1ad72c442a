#pragma once

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

#include "gasreg/errors.hpp"
#include "gasreg/linalg.hpp"

namespace gasreg {

// Autonomous finite-dimensional signal generator. The predictable part of
// the outlet flux disturbance is s(t) = c . x(t) with xdot = a x.
struct Exosystem {
  lin::Mat a;
  std::vector<double> c;
  std::vector<double> x0;

  int dim() const { return a.rows(); }
};

inline Exosystem make_exosystem(lin::Mat a, std::vector<double> c, std::vector<double> x0) {
  if (a.rows() != a.cols()) throw invalid_input("exosystem: state matrix must be square");
  if (a.rows() < 1) throw invalid_input("exosystem: state dimension must be at least 1");
  if (static_cast<int>(c.size()) != a.rows())
    throw invalid_input("exosystem: output row c must match the state dimension");
  if (static_cast<int>(x0.size()) != a.rows())
    throw invalid_input("exosystem: initial state x0 must match the state dimension");
  for (double v : a.data())
    if (!std::isfinite(v)) throw invalid_input("exosystem: state matrix has non-finite entries");
  for (double v : c)
    if (!std::isfinite(v)) throw invalid_input("exosystem: output row has non-finite entries");
  for (double v : x0)
    if (!std::isfinite(v)) throw invalid_input("exosystem: initial state has non-finite entries");
  return Exosystem{std::move(a), std::move(c), std::move(x0)};
}

inline lin::Mat exo_flow(const Exosystem& e, double dt) { return lin::matrix_exp(e.a, dt); }

// One exact flow step. Time-stepping loops should cache exo_flow(e, dt)
// once and multiply; this convenience recomputes the exponential.
inline std::vector<double> step_exo(const Exosystem& e, const std::vector<double>& x, double dt) {
  if (static_cast<int>(x.size()) != e.dim()) throw invalid_input("exosystem: state size mismatch");
  return exo_flow(e, dt) * x;
}

inline double s_of(const Exosystem& e, const std::vector<double>& x) { return lin::dot(e.c, x); }

enum class UncertaintyKind { None, CubicOfS, Samples };

// Unpredictable part of the outlet flux disturbance, always bounded.
struct Uncertainty {
  UncertaintyKind kind = UncertaintyKind::None;
  // Hard bound on |eps|; sampled series are clamped to it.
  double bound = 0.0;
  // CubicOfS: eps = cubic_coeff * s^3.
  double cubic_coeff = 1e-3;
  // Samples: (t, eps) knots, strictly increasing in t, linear in between,
  // held constant outside the knot range.
  std::vector<std::pair<double, double>> series;
};

inline void validate_uncertainty(const Uncertainty& u) {
  if (!(u.bound >= 0.0) || !std::isfinite(u.bound))
    throw invalid_input("uncertainty: bound must be finite and nonnegative");
  if (u.kind == UncertaintyKind::CubicOfS && !std::isfinite(u.cubic_coeff))
    throw invalid_input("uncertainty: cubic coefficient must be finite");
  if (u.kind == UncertaintyKind::Samples) {
    if (u.series.empty()) throw invalid_input("uncertainty: sample series is empty");
    for (std::size_t i = 0; i < u.series.size(); ++i) {
      if (!std::isfinite(u.series[i].first) || !std::isfinite(u.series[i].second))
        throw invalid_input("uncertainty: sample series has non-finite entries");
      if (i > 0 && !(u.series[i].first > u.series[i - 1].first))
        throw invalid_input("uncertainty: sample times must be strictly increasing");
    }
  }
}

inline double epsilon_of(const Uncertainty& u, double t, double s) {
  switch (u.kind) {
    case UncertaintyKind::None:
      return 0.0;
    case UncertaintyKind::CubicOfS:
      return u.cubic_coeff * s * s * s;
    case UncertaintyKind::Samples: {
      const auto& ts = u.series;
      double val;
      if (t <= ts.front().first) {
        val = ts.front().second;
      } else if (t >= ts.back().first) {
        val = ts.back().second;
      } else {
        auto it = std::upper_bound(ts.begin(), ts.end(), t,
                                   [](double lhs, const std::pair<double, double>& knot) {
                                     return lhs < knot.first;
                                   });
        const auto& hi = *it;
        const auto& lo = *(it - 1);
        const double f = (t - lo.first) / (hi.first - lo.first);
        val = lo.second + f * (hi.second - lo.second);
      }
      return std::clamp(val, -u.bound, u.bound);
    }
  }
  return 0.0;
}

// Observer poles used when a scenario does not pin them: real, spread left
// of the generator's fastest oscillation frequency.
inline std::vector<lin::cplx> default_observer_poles(const Exosystem& e) {
  const auto ev = lin::eigenvalues(e.a);
  double w = 0.0;
  for (const auto& z : ev) w = std::max(w, std::abs(z.imag()));
  if (w == 0.0)
    for (const auto& z : ev) w = std::max(w, std::abs(z));
  if (w == 0.0)
    throw invalid_input(
        "default observer poles need a generator with a nonzero eigenvalue; pass poles explicitly");
  std::vector<lin::cplx> poles;
  poles.reserve(e.dim());
  for (int k = 0; k < e.dim(); ++k) poles.emplace_back(-static_cast<double>(k + 3) * w, 0.0);
  return poles;
}

// Output injection gain h placing spec(a + h c / sigma) at the requested
// poles, computed with Ackermann's formula on the transposed pair. Poles
// must have negative real parts and come in conjugate pairs.
inline std::vector<double> place_injection_gain(const Exosystem& e, double sigma,
                                                const std::vector<lin::cplx>& poles) {
  const int n = e.dim();
  if (!(sigma > 0.0)) throw invalid_input("pole placement: sigma must be positive");
  if (static_cast<int>(poles.size()) != n)
    throw invalid_input("pole placement: pole count must match the generator dimension");
  for (const auto& p : poles)
    if (!(p.real() < 0.0)) throw invalid_input("pole placement: poles must have negative real parts");

  // Observability rows c, cA, ..., cA^{n-1}.
  lin::Mat ob(n, n);
  std::vector<double> row = e.c;
  for (int r = 0; r < n; ++r) {
    for (int j = 0; j < n; ++j) ob(r, j) = row[j];
    if (r + 1 < n) {
      std::vector<double> next(n, 0.0);
      for (int j = 0; j < n; ++j) {
        double acc = 0.0;
        for (int i = 0; i < n; ++i) acc += row[i] * e.a(i, j);
        next[j] = acc;
      }
      row = std::move(next);
    }
  }

  // Desired characteristic polynomial, ascending coefficients, monic.
  std::vector<lin::cplx> coef{1.0};
  for (const auto& p : poles) {
    std::vector<lin::cplx> next(coef.size() + 1, 0.0);
    for (std::size_t k = 0; k < coef.size(); ++k) {
      next[k + 1] += coef[k];
      next[k] -= p * coef[k];
    }
    coef = std::move(next);
  }
  std::vector<double> cr(coef.size(), 0.0);
  for (std::size_t k = 0; k < coef.size(); ++k) {
    if (std::abs(coef[k].imag()) > 1e-9 * (1.0 + std::abs(coef[k])))
      throw invalid_input("pole placement: complex poles must come in conjugate pairs");
    cr[k] = coef[k].real();
  }

  // chi(A^T) by Horner.
  const lin::Mat at = transpose(e.a);
  lin::Mat chi = lin::Mat::identity(n);
  for (int k = n - 1; k >= 0; --k) {
    chi = chi * at;
    for (int i = 0; i < n; ++i) chi(i, i) += cr[static_cast<std::size_t>(k)];
  }

  std::vector<double> en(n, 0.0);
  en[n - 1] = 1.0;
  std::vector<double> y;
  try {
    y = lin::solve(ob, en);
  } catch (const numeric_failure&) {
    throw unobservable_pair("pole placement: the (a, c) pair is not observable");
  }

  std::vector<double> h(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += y[j] * chi(j, i);
    h[i] = -sigma * acc;
  }
  return h;
}

// Stability margin of a + h c / sigma: smallest distance of its spectrum
// from the imaginary axis, positive iff the matrix is Hurwitz.
inline double hurwitz_margin(const Exosystem& e, double sigma, const std::vector<double>& h) {
  if (static_cast<int>(h.size()) != e.dim()) throw invalid_input("hurwitz margin: gain size mismatch");
  if (!(sigma > 0.0)) throw invalid_input("hurwitz margin: sigma must be positive");
  lin::Mat m = e.a;
  for (int i = 0; i < e.dim(); ++i)
    for (int j = 0; j < e.dim(); ++j) m(i, j) += h[i] * e.c[j] / sigma;
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& z : lin::eigenvalues(m)) worst = std::max(worst, z.real());
  return -worst;
}

}  // namespace gasreg
