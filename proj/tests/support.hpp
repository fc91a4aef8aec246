#pragma once

// Independent oracles for the test suites. Everything here recomputes results
// through a different route than the library code under test: eigenvalues via
// power iteration instead of Jacobi, CHSH maxima via angle search instead of
// closed forms, Eve's spectrum via explicit purification instead of the
// two-line formula.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

#include "diqkd/chsh.hpp"
#include "diqkd/qmath.hpp"
#include "diqkd/rng.hpp"

namespace testsupport {

using diqkd::CounterRng;
using diqkd::chsh::BellDiagonalState;
using diqkd::qmath::Complex;
using diqkd::qmath::ComplexMatrix;
using diqkd::qmath::DensityMatrix;

inline ComplexMatrix random_hermitian(std::size_t dim, CounterRng& rng) {
  ComplexMatrix g(dim);
  for (std::size_t i = 0; i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j)
      g(i, j) = Complex(rng.next_gaussian(), rng.next_gaussian());
  ComplexMatrix h = g.adjoint();
  h += g;
  h *= Complex(0.5, 0.0);
  return h;
}

// Eigenvalues (descending) by shifted power iteration with deflation. The
// shift makes the spectrum positive so the dominant eigenvalue of the
// deflated matrix is always the largest remaining one.
inline std::vector<double> eigenvalues_power_oracle(const ComplexMatrix& m) {
  const std::size_t d = m.dim();
  const double scale = std::max(1.0, m.max_abs());
  const double shift = static_cast<double>(d) * scale + 1.0;
  ComplexMatrix b = m;
  for (std::size_t i = 0; i < d; ++i) b(i, i) += shift;

  std::vector<double> out;
  CounterRng rng(0x9d5au, 17);
  for (std::size_t k = 0; k < d; ++k) {
    std::vector<Complex> v(d);
    for (auto& x : v) x = Complex(rng.next_gaussian(), rng.next_gaussian());
    auto normalize = [&] {
      double n = 0.0;
      for (const auto& x : v) n += std::norm(x);
      n = std::sqrt(n);
      for (auto& x : v) x /= n;
    };
    normalize();

    double theta = 0.0;
    for (int it = 0; it < 50000; ++it) {
      std::vector<Complex> w(d);
      for (std::size_t i = 0; i < d; ++i) {
        Complex s = 0.0;
        for (std::size_t j = 0; j < d; ++j) s += b(i, j) * v[j];
        w[i] = s;
      }
      Complex ray = 0.0;
      for (std::size_t i = 0; i < d; ++i) ray += std::conj(v[i]) * w[i];
      theta = ray.real();
      double resid = 0.0;
      for (std::size_t i = 0; i < d; ++i) resid += std::norm(w[i] - theta * v[i]);
      v = std::move(w);
      normalize();
      if (std::sqrt(resid) <= 1e-13 * shift) break;
    }
    out.push_back(theta - shift);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        b(i, j) -= theta * v[i] * std::conj(v[j]);
  }
  std::sort(out.begin(), out.end(), std::greater<double>());
  return out;
}

// Pauli correlation matrix T_ij = tr(rho sigma_i x sigma_j).
inline std::array<std::array<double, 3>, 3> pauli_correlations(const DensityMatrix& rho) {
  using diqkd::qmath::sigma_x;
  using diqkd::qmath::sigma_y;
  using diqkd::qmath::sigma_z;
  const std::array<const ComplexMatrix*, 3> sig{&sigma_x(), &sigma_y(), &sigma_z()};
  std::array<std::array<double, 3>, 3> t{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const ComplexMatrix op = ComplexMatrix::kron(*sig[i], *sig[j]);
      Complex tr = 0.0;
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c) tr += rho.mat()(r, c) * op(c, r);
      t[i][j] = tr.real();
    }
  return t;
}

// Largest CHSH value found by a coarse grid over Bob's two measurement axes
// followed by coordinate ascent, with Alice's axes set to their closed-form
// optimum given Bob's. Every evaluation is an achievable S, so the result
// never exceeds the true maximum.
inline double chsh_search_oracle(const DensityMatrix& rho) {
  const auto t = pauli_correlations(rho);
  auto tv = [&](const std::array<double, 3>& v) {
    std::array<double, 3> w{};
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) w[i] += t[i][j] * v[j];
    return w;
  };
  auto axis = [](double th, double ph) {
    return std::array<double, 3>{std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph),
                                 std::cos(th)};
  };
  auto score = [&](const std::array<double, 4>& p) {
    const std::array<double, 3> b1 = axis(p[0], p[1]);
    const std::array<double, 3> b2 = axis(p[2], p[3]);
    std::array<double, 3> sum{}, diff{};
    for (int i = 0; i < 3; ++i) {
      sum[i] = b1[i] + b2[i];
      diff[i] = b1[i] - b2[i];
    }
    const std::array<double, 3> ts = tv(sum), td = tv(diff);
    auto len = [](const std::array<double, 3>& v) {
      return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    };
    return len(ts) + len(td);
  };

  constexpr double kPi = 3.14159265358979323846;
  std::array<double, 4> best{};
  double best_s = -1.0;
  const int nth = 13, nph = 20;
  for (int i1 = 0; i1 < nth; ++i1)
    for (int j1 = 0; j1 < nph; ++j1)
      for (int i2 = 0; i2 < nth; ++i2)
        for (int j2 = 0; j2 < nph; ++j2) {
          const std::array<double, 4> p{kPi * i1 / (nth - 1), 2.0 * kPi * j1 / nph,
                                        kPi * i2 / (nth - 1), 2.0 * kPi * j2 / nph};
          const double s = score(p);
          if (s > best_s) {
            best_s = s;
            best = p;
          }
        }

  double step = kPi / (nth - 1);
  for (int round = 0; round < 60; ++round) {
    for (int c = 0; c < 4; ++c) {
      double lo = best[c] - step, hi = best[c] + step;
      for (int it = 0; it < 30; ++it) {
        const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
        std::array<double, 4> p1 = best, p2 = best;
        p1[c] = m1;
        p2[c] = m2;
        if (score(p1) < score(p2))
          lo = m1;
        else
          hi = m2;
      }
      best[c] = 0.5 * (lo + hi);
      best_s = std::max(best_s, score(best));
    }
    step *= 0.7;
  }
  return best_s;
}

// Eve's conditional spectrum by the long route: purify the Bell-diagonal
// state, project Bob's qubit on the outcome of the phi measurement,
// trace out Alice and Bob, diagonalize. Returns (eigenvalues, outcome prob).
struct ConstructiveSpectrum {
  std::vector<double> values;
  double outcome_prob = 0.0;
};

inline ConstructiveSpectrum eve_spectrum_constructive(const BellDiagonalState& lam, double phi,
                                                      int b_outcome) {
  using diqkd::qmath::partial_trace_keep;
  using diqkd::qmath::purify;

  const DensityMatrix rho_ab = lam.to_density_matrix();
  const std::vector<Complex> psi = purify(rho_ab);
  const std::size_t r = psi.size() / 4;

  const ComplexMatrix pb = diqkd::chsh::XZMeasurement{phi}.projector(b_outcome);
  std::vector<Complex> proj(psi.size());
  for (std::size_t a = 0; a < 2; ++a)
    for (std::size_t bp = 0; bp < 2; ++bp)
      for (std::size_t e = 0; e < r; ++e) {
        Complex s = 0.0;
        for (std::size_t bq = 0; bq < 2; ++bq) s += pb(bp, bq) * psi[(a * 2 + bq) * r + e];
        proj[(a * 2 + bp) * r + e] = s;
      }
  double p = 0.0;
  for (const auto& x : proj) p += std::norm(x);
  const double inv = 1.0 / std::sqrt(p);
  for (auto& x : proj) x *= inv;

  const DensityMatrix joint = DensityMatrix::pure(proj);
  const DensityMatrix eve = partial_trace_keep(joint, {2, 2, r}, {2});
  ConstructiveSpectrum out;
  out.values = diqkd::qmath::hermitian_eigensystem(eve.mat()).values;
  out.outcome_prob = p;
  return out;
}

// Concurrence through the spin-flip route. rho * rho_tilde is Hermitian for
// the Bell-diagonal inputs this is used on.
inline double concurrence_matrix_oracle(const DensityMatrix& rho) {
  using diqkd::qmath::sigma_y;
  const ComplexMatrix yy = ComplexMatrix::kron(sigma_y(), sigma_y());
  const ComplexMatrix tilde = yy * rho.mat().conjugate() * yy;
  ComplexMatrix prod = rho.mat() * tilde;
  ComplexMatrix h = prod.adjoint();
  prod += h;
  prod *= Complex(0.5, 0.0);
  const auto eg = diqkd::qmath::hermitian_eigensystem(prod);
  std::array<double, 4> s{};
  for (std::size_t i = 0; i < 4; ++i) s[i] = std::sqrt(std::max(eg.values[i], 0.0));
  return std::max(0.0, s[0] - s[1] - s[2] - s[3]);
}

}  // namespace testsupport
