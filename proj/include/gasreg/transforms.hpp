#pragma once

#include <vector>

#include "gasreg/errors.hpp"
#include "gasreg/kernels.hpp"

namespace gasreg {

struct FieldPair {
  std::vector<double> first, second;
};

namespace detail {

inline void check_fields(int n, const std::vector<double>& a, const std::vector<double>& b) {
  if (static_cast<int>(a.size()) != n + 1 || static_cast<int>(b.size()) != n + 1)
    throw invalid_input("transform: field size must match the kernel grid");
}

}  // namespace detail

// Lower-triangular Volterra map used by the state-feedback design:
// out1 = v - int_0^xbar (k11 v + k12 w), out2 = w - int_0^xbar (k21 v + k22 w),
// trapezoid rule on the kernel grid.
inline FieldPair apply_control_transform(const ControllerKernels& k, const std::vector<double>& v,
                                         const std::vector<double>& w) {
  const int n = k.k11.n;
  detail::check_fields(n, v, w);
  const double h = k.k11.h();
  FieldPair out;
  out.first.resize(static_cast<std::size_t>(n) + 1);
  out.second.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    double acc1 = 0.0, acc2 = 0.0;
    for (int j = 0; j <= i && i > 0; ++j) {
      const double wgt = (j == 0 || j == i) ? 0.5 : 1.0;
      acc1 += wgt * h * (k.k11.at(i, j) * v[static_cast<std::size_t>(j)] +
                         k.k12.at(i, j) * w[static_cast<std::size_t>(j)]);
      acc2 += wgt * h * (k.k21.at(i, j) * v[static_cast<std::size_t>(j)] +
                         k.k22.at(i, j) * w[static_cast<std::size_t>(j)]);
    }
    out.first[static_cast<std::size_t>(i)] = v[static_cast<std::size_t>(i)] - acc1;
    out.second[static_cast<std::size_t>(i)] = w[static_cast<std::size_t>(i)] - acc2;
  }
  return out;
}

// Upper-triangular Volterra map of the observer error design:
// out1 = a - int_xbar^1 (p11 a + p12 b), out2 = b - int_xbar^1 (p21 a + p22 b).
inline FieldPair apply_observer_transform(const ObserverKernels& k, const std::vector<double>& a,
                                          const std::vector<double>& b) {
  const int n = k.p11.n;
  detail::check_fields(n, a, b);
  const double h = k.p11.h();
  FieldPair out;
  out.first.resize(static_cast<std::size_t>(n) + 1);
  out.second.resize(static_cast<std::size_t>(n) + 1);
  for (int i = 0; i <= n; ++i) {
    double acc1 = 0.0, acc2 = 0.0;
    for (int j = i; j <= n && i < n; ++j) {
      const double wgt = (j == i || j == n) ? 0.5 : 1.0;
      acc1 += wgt * h * (k.p11.at(i, j) * a[static_cast<std::size_t>(j)] +
                         k.p12.at(i, j) * b[static_cast<std::size_t>(j)]);
      acc2 += wgt * h * (k.p21.at(i, j) * a[static_cast<std::size_t>(j)] +
                         k.p22.at(i, j) * b[static_cast<std::size_t>(j)]);
    }
    out.first[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] - acc1;
    out.second[static_cast<std::size_t>(i)] = b[static_cast<std::size_t>(i)] - acc2;
  }
  return out;
}

// Exact discrete inverse of apply_observer_transform: back-substitution
// from xbar = 1, solving the 2x2 diagonal block at each node.
inline FieldPair invert_observer_transform(const ObserverKernels& k, const std::vector<double>& f1,
                                           const std::vector<double>& f2) {
  const int n = k.p11.n;
  detail::check_fields(n, f1, f2);
  const double h = k.p11.h();
  FieldPair out;
  out.first.resize(static_cast<std::size_t>(n) + 1);
  out.second.resize(static_cast<std::size_t>(n) + 1);
  for (int i = n; i >= 0; --i) {
    double acc1 = 0.0, acc2 = 0.0;
    for (int j = i + 1; j <= n && i < n; ++j) {
      const double wgt = (j == n) ? 0.5 : 1.0;
      acc1 += wgt * h * (k.p11.at(i, j) * out.first[static_cast<std::size_t>(j)] +
                         k.p12.at(i, j) * out.second[static_cast<std::size_t>(j)]);
      acc2 += wgt * h * (k.p21.at(i, j) * out.first[static_cast<std::size_t>(j)] +
                         k.p22.at(i, j) * out.second[static_cast<std::size_t>(j)]);
    }
    if (i == n) {
      out.first[static_cast<std::size_t>(i)] = f1[static_cast<std::size_t>(i)];
      out.second[static_cast<std::size_t>(i)] = f2[static_cast<std::size_t>(i)];
      continue;
    }
    // (1 - h/2 p11) a - h/2 p12 b = f1 + acc1, likewise for the second row
    const double m11 = 1.0 - 0.5 * h * k.p11.at(i, i);
    const double m12 = -0.5 * h * k.p12.at(i, i);
    const double m21 = -0.5 * h * k.p21.at(i, i);
    const double m22 = 1.0 - 0.5 * h * k.p22.at(i, i);
    const double det = m11 * m22 - m12 * m21;
    if (det == 0.0) throw numeric_failure("observer transform inversion hit a singular block");
    const double r1 = f1[static_cast<std::size_t>(i)] + acc1;
    const double r2 = f2[static_cast<std::size_t>(i)] + acc2;
    out.first[static_cast<std::size_t>(i)] = (m22 * r1 - m12 * r2) / det;
    out.second[static_cast<std::size_t>(i)] = (-m21 * r1 + m11 * r2) / det;
  }
  return out;
}

}  // namespace gasreg
