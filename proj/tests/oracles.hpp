// Independent oracles for the machine feasibility checks. Everything here
// rebuilds the residual matrix from scratch with explicit loops (no library
// gram/kron helpers) so the verdicts cross-check the implementation path.

#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

inline double min_eigenvalue(const Eigen::MatrixXcd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

// Residual for two states with real overlap s at uniform probability p,
// written out entry by entry. Input order (00), (01), (10), (11).
inline Eigen::Matrix4d residual_two_state(double s, double p) {
  Eigen::Matrix4d r;
  r << 1 - p,         s,     s, s * s - p * s,
       s,             1,     s * s, s,
       s,             s * s, 1,     s,
       s * s - p * s, s,     s,     1 - p;
  return r;
}

inline bool feasible_two_state(double s, double p) {
  return min_eigenvalue(residual_two_state(s, p).cast<std::complex<double>>()) >= -1e-10;
}

// Closed form for the largest feasible uniform p of a real-overlap pair.
// The residual splits into symmetric/antisymmetric 2x2 blocks
//   [[1-p+s^2-ps, 2s], [2s, 1+s^2]]   and   diag(1-p-s^2+ps, 1-s^2);
// the symmetric block's determinant is the binding constraint, giving
//   p*(s) = (1-s)^2 (1+s) / (1+s^2).
inline double pstar_closed_form(double s) {
  return (1 - s) * (1 - s) * (1 + s) / (1 + s * s);
}

// Brute-force eigenvalue scan at step 1e-6. Feasibility is monotone in
// uniform p (the residual gains a PSD term as p decreases), so a coarse scan
// brackets the boundary and the fine scan inside the bracket is equivalent
// to scanning the whole interval. Returns the last feasible grid point.
inline double pstar_grid_scan(double s) {
  const double coarse = 1e-3, fine = 1e-6;
  double bracket_lo = 0.0, bracket_hi = 1.0;
  bool found = false;
  for (double p = coarse; p <= 1.0 + 1e-12; p += coarse) {
    if (!feasible_two_state(s, p)) {
      bracket_hi = p;
      bracket_lo = p - coarse;
      found = true;
      break;
    }
  }
  if (!found) return 1.0;
  double last_feasible = bracket_lo;
  for (double p = bracket_lo; p <= bracket_hi + 1e-12; p += fine) {
    if (feasible_two_state(s, p)) last_feasible = p;
    else break;
  }
  return last_feasible;
}

// General residual from raw state vectors, explicit conjugate sums only.
inline Eigen::MatrixXcd residual_general(const std::vector<Eigen::VectorXcd>& states,
                                         const std::vector<double>& p,
                                         const Eigen::VectorXcd& blank) {
  const int n = static_cast<int>(states.size());
  auto ip = [](const Eigen::VectorXcd& a, const Eigen::VectorXcd& b) {
    std::complex<double> acc = 0.0;
    for (long i = 0; i < a.size(); ++i) acc += std::conj(a[i]) * b[i];
    return acc;
  };
  Eigen::MatrixXcd r(n * n, n * n);
  for (int k = 0; k < n; ++k)
    for (int l = 0; l < n; ++l)
      for (int kp = 0; kp < n; ++kp)
        for (int lp = 0; lp < n; ++lp) {
          std::complex<double> value = ip(states[k], states[kp]) * ip(states[l], states[lp]);
          if (k == l && kp == lp) {
            value -= std::sqrt(p[k] * p[kp]) * ip(states[k], states[kp]) * ip(blank, blank);
          }
          r(k * n + l, kp * n + lp) = value;
        }
  return r;
}

inline bool feasible_general(const std::vector<Eigen::VectorXcd>& states,
                             const std::vector<double>& p, const Eigen::VectorXcd& blank) {
  return min_eigenvalue(residual_general(states, p, blank)) >= -1e-10;
}

// The four-state basis-pair family at rotation angle theta.
inline std::vector<Eigen::VectorXcd> basis_pair_family(double theta) {
  auto vec = [](double x, double y) {
    Eigen::VectorXcd v(2);
    v << x, y;
    return v;
  };
  return {vec(1, 0), vec(0, 1), vec(std::cos(theta), std::sin(theta)),
          vec(std::sin(theta), -std::cos(theta))};
}

}  // namespace oracle
