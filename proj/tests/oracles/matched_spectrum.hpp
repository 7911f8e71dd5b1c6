#pragma once

// Closed-form spectrum of the ten-moment drift matrix when filter and system
// are identical apart from classical noise on the filter's signal (tau = 0,
// d_omega_f = 0). The filter variances carry eta -> eta (1 + nu).
//
// Note the 4 in front of sqrt(kappa) in zeta: without it the set does not
// match the matrix it is meant to diagonalise.

#include <array>
#include <cmath>
#include <complex>

namespace oracle {

using cplx = std::complex<double>;

inline std::array<cplx, 10> matched_spectrum(double alpha, double eta, double nu, double k) {
  const double ep = eta * (1.0 + nu);
  const double xi = std::sqrt(1.0 + 4.0 * alpha * alpha * ep);
  const double vxx = std::sqrt(xi - 1.0) / (2.0 * std::sqrt(2.0) * alpha * ep);
  const double vxp = (xi - 1.0) / (4.0 * alpha * ep);
  const double ae = alpha * eta;
  const double c = k + 4.0 * ae * vxx;

  std::array<cplx, 10> l;
  const cplx root_k = std::sqrt(cplx(k * k - 4.0, 0.0));
  l[0] = -k;
  l[1] = -k - root_k;
  l[2] = -k + root_k;
  l[3] = -4.0 * ae * vxx;
  const cplx root5 = std::sqrt(cplx(4.0 * ae * (ae * vxx * vxx - vxp) - 1.0, 0.0));
  l[4] = -4.0 * ae * vxx - 2.0 * root5;
  l[5] = -4.0 * ae * vxx + 2.0 * root5;
  const double kappa = (4.0 - k * k) * (1.0 + 4.0 * ae * (vxp - ae * vxx * vxx));
  const cplx sk = std::sqrt(cplx(kappa, 0.0));
  const cplx base = c * c - 8.0 * (1.0 + ae * (k * vxx + 2.0 * vxp));
  const cplx zp = base + 4.0 * sk;
  const cplx zm = base - 4.0 * sk;
  l[6] = 0.5 * (-c - std::sqrt(zm));
  l[7] = 0.5 * (-c + std::sqrt(zm));
  l[8] = 0.5 * (-c - std::sqrt(zp));
  l[9] = 0.5 * (-c + std::sqrt(zp));
  return l;
}

}  // namespace oracle
