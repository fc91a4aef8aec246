#include "diqkd/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "diqkd/bounds.hpp"

namespace diqkd::verify {

using qmath::binary_entropy;
using qmath::kEntropyClamp;
using qmath::NumericError;

namespace {

constexpr double kPi = 3.14159265358979323846;

void check_involution(const ComplexMatrix& a, const char* name) {
  if (!a.is_hermitian()) throw std::domain_error(std::string(name) + ": not Hermitian");
  ComplexMatrix sq = a * a;
  sq -= ComplexMatrix::identity(a.dim());
  if (sq.max_abs() > 1e-10)
    throw std::domain_error(std::string(name) + ": does not square to the identity");
}

}  // namespace

ObservablePair::ObservablePair(ComplexMatrix m1, ComplexMatrix m2)
    : a1(std::move(m1)), a2(std::move(m2)) {
  if (a1.dim() != a2.dim() || a1.dim() == 0)
    throw std::domain_error("ObservablePair: dimension mismatch");
  check_involution(a1, "ObservablePair A1");
  check_involution(a2, "ObservablePair A2");
}

ComplexMatrix BlockDecomposition::projector(std::size_t block_index) const {
  const Block& b = blocks.at(block_index);
  ComplexMatrix p(dim);
  for (std::size_t c = 0; c < b.rank; ++c)
    for (std::size_t i = 0; i < dim; ++i)
      for (std::size_t j = 0; j < dim; ++j)
        p(i, j) += b.basis[c * dim + i] * std::conj(b.basis[c * dim + j]);
  return p;
}

ComplexMatrix BlockDecomposition::reconstruct(int which) const {
  ComplexMatrix out(dim);
  for (std::size_t bi = 0; bi < blocks.size(); ++bi) {
    const Block& b = blocks[bi];
    if (b.rank == 1) {
      const double s = (which == 1) ? b.a1_scalar : b.a2_scalar;
      for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = 0; j < dim; ++j)
          out(i, j) += s * b.basis[i] * std::conj(b.basis[j]);
      continue;
    }
    const std::array<double, 3>& n = (which == 1) ? b.a1_bloch : b.a2_bloch;
    const ComplexMatrix local = chsh::bloch_observable(n);
    for (std::size_t r = 0; r < 2; ++r)
      for (std::size_t c = 0; c < 2; ++c) {
        const Complex v = local(r, c);
        if (v == Complex{}) continue;
        for (std::size_t i = 0; i < dim; ++i)
          for (std::size_t j = 0; j < dim; ++j)
            out(i, j) += v * b.basis[r * dim + i] * std::conj(b.basis[c * dim + j]);
      }
  }
  return out;
}

BlockDecomposition decompose_observable_pair(const ObservablePair& p) {
  const std::size_t d = p.dim();
  const ComplexMatrix& a1 = p.a1;
  const ComplexMatrix& a2 = p.a2;

  // K = (A1 A2 + A2 A1)/2 is Hermitian and commutes with both observables;
  // its eigenvalue kappa on a block is the real part of the A2 A1 eigenphase.
  ComplexMatrix k = a1 * a2;
  k += a2 * a1;
  k *= Complex(0.5, 0.0);
  {
    ComplexMatrix kh = k.adjoint();
    k += kh;
    k *= Complex(0.5, 0.0);
  }
  const qmath::Eigensystem ek = qmath::hermitian_eigensystem(k);

  // Group eigenvalues by gap clustering.
  std::vector<std::pair<std::size_t, std::size_t>> groups;  // [begin, end)
  std::size_t begin = 0;
  for (std::size_t i = 1; i <= d; ++i) {
    if (i == d || ek.values[i - 1] - ek.values[i] > 1e-8) {
      groups.emplace_back(begin, i);
      begin = i;
    }
  }

  BlockDecomposition out;
  out.dim = d;

  auto column = [&](const ComplexMatrix& m, std::size_t c) {
    std::vector<Complex> v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = m(i, c);
    return v;
  };
  auto apply = [&](const ComplexMatrix& m, const std::vector<Complex>& v) {
    std::vector<Complex> w(d);
    for (std::size_t i = 0; i < d; ++i) {
      Complex s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += m(i, j) * v[j];
      w[i] = s;
    }
    return w;
  };
  auto inner = [&](const std::vector<Complex>& u, const std::vector<Complex>& v) {
    Complex s = 0.0;
    for (std::size_t i = 0; i < d; ++i) s += std::conj(u[i]) * v[i];
    return s;
  };

  for (const auto& [g0, g1] : groups) {
    const std::size_t g = g1 - g0;
    const double kappa = ek.values[g0];

    if (std::abs(kappa - 1.0) <= 1e-8 || std::abs(kappa + 1.0) <= 1e-8) {
      // Degenerate sector: A2 A1 = +-1, so A1 = +-A2 here and both restrict to
      // a common eigenbasis. Diagonalize A1 within the group.
      ComplexMatrix a1g(g);
      for (std::size_t r = 0; r < g; ++r) {
        const std::vector<Complex> av = apply(a1, column(ek.vectors, g0 + r));
        for (std::size_t c = 0; c < g; ++c)
          a1g(c, r) = inner(column(ek.vectors, g0 + c), av);
      }
      {
        ComplexMatrix h = a1g.adjoint();
        a1g += h;
        a1g *= Complex(0.5, 0.0);
      }
      const qmath::Eigensystem es = qmath::hermitian_eigensystem(a1g);
      for (std::size_t c = 0; c < g; ++c) {
        Block b;
        b.rank = 1;
        b.basis.assign(d, Complex{});
        for (std::size_t r = 0; r < g; ++r) {
          const std::vector<Complex> col = column(ek.vectors, g0 + r);
          for (std::size_t i = 0; i < d; ++i) b.basis[i] += es.vectors(r, c) * col[i];
        }
        const std::vector<Complex> a1u = apply(a1, b.basis);
        const std::vector<Complex> a2u = apply(a2, b.basis);
        b.a1_scalar = inner(b.basis, a1u).real();
        b.a2_scalar = inner(b.basis, a2u).real();
        out.blocks.push_back(std::move(b));
      }
      continue;
    }

    // Non-degenerate sector: split via the anti-Hermitian part of W = A2 A1
    // restricted to the group. Positive eigenvectors of Im(W) carry the
    // eigenphase with positive sine; their A2-images complete the blocks.
    ComplexMatrix wg(g);
    for (std::size_t r = 0; r < g; ++r) {
      const std::vector<Complex> wv = apply(a2, apply(a1, column(ek.vectors, g0 + r)));
      for (std::size_t c = 0; c < g; ++c) wg(c, r) = inner(column(ek.vectors, g0 + c), wv);
    }
    ComplexMatrix dmat(g);
    for (std::size_t r = 0; r < g; ++r)
      for (std::size_t c = 0; c < g; ++c)
        dmat(r, c) = (wg(r, c) - std::conj(wg(c, r))) / Complex(0.0, 2.0);
    const qmath::Eigensystem es = qmath::hermitian_eigensystem(dmat);
    if (g % 2 != 0) throw NumericError("decompose_observable_pair: odd non-degenerate sector");

    for (std::size_t c = 0; c < g / 2; ++c) {
      Block b;
      b.rank = 2;
      std::vector<Complex> u(d, Complex{});
      for (std::size_t r = 0; r < g; ++r) {
        const std::vector<Complex> col = column(ek.vectors, g0 + r);
        for (std::size_t i = 0; i < d; ++i) u[i] += es.vectors(r, c) * col[i];
      }
      std::vector<Complex> v = apply(a2, u);
      // Orthonormalize v against u (exact up to round-off already).
      const Complex overlap = inner(u, v);
      for (std::size_t i = 0; i < d; ++i) v[i] -= overlap * u[i];
      double n2 = 0.0;
      for (std::size_t i = 0; i < d; ++i) n2 += std::norm(v[i]);
      if (n2 < 1e-20) throw NumericError("decompose_observable_pair: collapsed block basis");
      const double inv = 1.0 / std::sqrt(n2);
      for (std::size_t i = 0; i < d; ++i) v[i] *= inv;

      b.basis.resize(2 * d);
      std::copy(u.begin(), u.end(), b.basis.begin());
      std::copy(v.begin(), v.end(), b.basis.begin() + static_cast<std::ptrdiff_t>(d));

      auto bloch_of = [&](const ComplexMatrix& a) {
        const std::vector<Complex> au = apply(a, u);
        const std::vector<Complex> av = apply(a, v);
        const Complex m00 = inner(u, au), m01 = inner(u, av), m11 = inner(v, av);
        std::array<double, 3> n{};
        n[0] = m01.real();
        n[1] = -m01.imag();
        n[2] = 0.5 * (m00.real() - m11.real());
        return n;
      };
      b.a1_bloch = bloch_of(a1);
      b.a2_bloch = bloch_of(a2);
      out.blocks.push_back(std::move(b));
    }
  }
  return out;
}

namespace {

ComplexMatrix to_bell(const ComplexMatrix& m) {
  const ComplexMatrix& b = chsh::bell_basis();
  return b.adjoint() * m * b;
}

ComplexMatrix ry_pair(double alpha, double beta) {
  auto ry = [](double t) {
    ComplexMatrix r(2);
    r(0, 0) = std::cos(t / 2.0);
    r(0, 1) = std::sin(t / 2.0);
    r(1, 0) = -std::sin(t / 2.0);
    r(1, 1) = std::cos(t / 2.0);
    return r;
  };
  return ComplexMatrix::kron(ry(alpha), ry(beta));
}

double sector_angle(double off_real, double gap) {
  if (std::abs(off_real) < 1e-15 && std::abs(gap) < 1e-15) return 0.0;
  return std::atan2(off_real, gap);  // callers pass the signed numerator
}

}  // namespace

ReductionTrace symmetrize_to_belldiag(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw std::domain_error("symmetrize_to_belldiag: needs a two-qubit state");

  const ComplexMatrix yy = ComplexMatrix::kron(qmath::sigma_y(), qmath::sigma_y());
  ComplexMatrix bar = yy * rho.mat() * yy;
  bar += rho.mat();
  bar *= Complex(0.5, 0.0);
  DensityMatrix rho_bar(bar);

  const ComplexMatrix bb = to_bell(bar);
  const double l0 = bb(0, 0).real(), l1 = bb(1, 1).real();
  const double l2 = bb(2, 2).real(), l3 = bb(3, 3).real();
  const Complex z1 = bb(0, 1), z2 = bb(2, 3);

  // Rotation angles that null the real parts of the sector off-diagonals.
  const double two_t1 = sector_angle(-2.0 * z1.real(), l0 - l1);
  const double two_t2 = sector_angle(2.0 * z2.real(), l2 - l3);
  const double alpha = 0.5 * (two_t1 + two_t2);
  const double beta = 0.5 * (two_t2 - two_t1);

  const ComplexMatrix u = ry_pair(alpha, beta);
  ComplexMatrix rot = u * bar * u.adjoint();
  ComplexMatrix sym = rot.conjugate();
  sym += rot;
  sym *= Complex(0.5, 0.0);

  const ComplexMatrix sb = to_bell(sym);
  double off = 0.0;
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 4; ++j)
      if (i != j) off = std::max(off, std::abs(sb(i, j)));
  if (off > 1e-10)
    throw NumericError("symmetrize_to_belldiag: residual Bell off-diagonals");

  double diag[4] = {sb(0, 0).real(), sb(1, 1).real(), sb(2, 2).real(), sb(3, 3).real()};
  std::array<int, 4> perm{0, 1, 2, 3};
  if (diag[0] < diag[1]) {
    std::swap(diag[0], diag[1]);
    std::swap(perm[0], perm[1]);
  }
  if (diag[2] < diag[3]) {
    std::swap(diag[2], diag[3]);
    std::swap(perm[2], perm[3]);
  }
  for (double& x : diag) x = std::max(x, 0.0);

  ReductionTrace trace{rho,
                       std::move(rho_bar),
                       alpha,
                       beta,
                       DensityMatrix(sym),
                       BellDiagonalState(qmath::ProbabilityVector({diag[0], diag[1], diag[2], diag[3]})),
                       perm};
  return trace;
}

void Report::write_csv(std::ostream& os) const {
  os << "check,param_json,value,bound,margin\n";
  char buf[96];
  for (const CheckRow& r : failures) {
    std::string quoted = "\"";
    for (char c : r.param_json) {
      if (c == '"') quoted += "\"\"";
      else quoted += c;
    }
    quoted += '"';
    std::snprintf(buf, sizeof(buf), ",%.15g,%.15g,%.15g\n", r.value, r.bound, r.margin);
    os << r.check << ',' << quoted << buf;
  }
}

namespace {

struct Lam {
  double l[4];
};

Lam sample_lam(CounterRng& rng) {
  Lam x;
  double sum = 0.0;
  for (double& v : x.l) {
    v = rng.next_exponential();
    sum += v;
  }
  for (double& v : x.l) v /= sum;
  if (x.l[0] < x.l[1]) std::swap(x.l[0], x.l[1]);
  if (x.l[2] < x.l[3]) std::swap(x.l[2], x.l[3]);
  return x;
}

double entropy4(const Lam& x) {
  double h = 0.0;
  for (double v : x.l)
    if (v > kEntropyClamp) h -= v * std::log2(v);
  return h;
}

double lemma5_bound(double r2) {
  if (r2 <= 0.5) return 1.0;
  return binary_entropy((1.0 + std::sqrt(2.0 * r2 - 1.0)) / 2.0);
}

double f_of_lam(const Lam& x) {
  return entropy4(x) - binary_entropy(x.l[0] + x.l[2]);
}

double s_of_lam(const Lam& x) {
  const double g1 = x.l[0] - x.l[1];
  const double g2 = x.l[2] - x.l[3];
  const double h1 = x.l[0] - x.l[3];
  const double h2 = x.l[2] - x.l[1];
  return chsh::tsirelson_bound *
         std::sqrt(std::max(g1 * g1 + g2 * g2, h1 * h1 + h2 * h2));
}

double chi_of_lam(const Lam& x, double phi) {
  const double g1 = x.l[0] - x.l[1];
  const double g2 = x.l[2] - x.l[3];
  double rad = g1 * g1 + g2 * g2 + 2.0 * std::cos(2.0 * phi) * g1 * g2;
  rad = std::clamp(rad, 0.0, 1.0);
  const double lp = 0.5 * (1.0 + std::sqrt(rad));
  return std::max(entropy4(x) - binary_entropy(lp), 0.0);
}

std::string lam_json(const Lam& x, const char* extra_key = nullptr, double extra = 0.0) {
  char buf[256];
  if (extra_key)
    std::snprintf(buf, sizeof(buf),
                  "{\"lambda\":[%.17g,%.17g,%.17g,%.17g],\"%s\":%.17g}", x.l[0], x.l[1], x.l[2],
                  x.l[3], extra_key, extra);
  else
    std::snprintf(buf, sizeof(buf), "{\"lambda\":[%.17g,%.17g,%.17g,%.17g]}", x.l[0], x.l[1],
                  x.l[2], x.l[3]);
  return buf;
}

// Shared driver: per-index kernel fills margins[i]; flagged indices are
// re-evaluated serially to build failure rows in deterministic order.
template <typename Kernel, typename Collect>
Report run_sweep(const char* suite, std::size_t samples, Exec exec, Kernel&& kernel,
                 Collect&& collect) {
  Report rep;
  rep.suite = suite;
  rep.samples = samples;
  std::vector<double> margins(samples, std::numeric_limits<double>::infinity());
  for_each_index(samples, exec, [&](std::size_t i) { margins[i] = kernel(i); });
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < samples; ++i) {
    worst = std::min(worst, margins[i]);
    if (margins[i] < 0.0) collect(i, rep.failures);
  }
  rep.worst_margin = samples ? worst : 0.0;
  return rep;
}

}  // namespace

BellDiagonalState sample_ordered_simplex(CounterRng& rng) {
  const Lam x = sample_lam(rng);
  return BellDiagonalState(qmath::ProbabilityVector({x.l[0], x.l[1], x.l[2], x.l[3]}));
}

Report lemma5_inequality_sweep(std::size_t samples, std::uint64_t seed, Exec exec) {
  // Per sample: slack margin of the bound, equality on the two-branch family,
  // and a strict margin away from it. The reported margin is the worst of the
  // three (each shifted so that negative means failure).
  auto eval = [seed](std::size_t i, double out[3], Lam& x, double& a) {
    CounterRng rng(seed, i);
    x = sample_lam(rng);
    a = rng.next_double();

    const double g1 = x.l[0] - x.l[1];
    const double g2 = x.l[2] - x.l[3];
    const double r2 = g1 * g1 + g2 * g2;
    const double f = f_of_lam(x);
    const double bound = lemma5_bound(r2);
    out[0] = bound - f + 1e-9;

    Lam fam{{std::max(a, 1.0 - a), 0.0, std::min(a, 1.0 - a), 0.0}};
    const double rf2 = fam.l[0] * fam.l[0] + fam.l[2] * fam.l[2];
    out[1] = 1e-9 - std::abs(lemma5_bound(rf2) - f_of_lam(fam));

    if (r2 >= 0.51 && x.l[1] + x.l[3] >= 0.01)
      out[2] = (bound - f) - 1e-6;
    else
      out[2] = std::numeric_limits<double>::infinity();
  };

  auto kernel = [&eval](std::size_t i) {
    double m[3];
    Lam x;
    double a;
    eval(i, m, x, a);
    return std::min({m[0], m[1], m[2]});
  };
  auto collect = [&eval](std::size_t i, std::vector<CheckRow>& rows) {
    double m[3];
    Lam x;
    double a;
    eval(i, m, x, a);
    if (m[0] < 0.0) {
      const double g1 = x.l[0] - x.l[1], g2 = x.l[2] - x.l[3];
      const double r2 = g1 * g1 + g2 * g2;
      rows.push_back({"lemma5_bound", lam_json(x), f_of_lam(x), lemma5_bound(r2), m[0]});
    }
    if (m[1] < 0.0) {
      Lam fam{{std::max(a, 1.0 - a), 0.0, std::min(a, 1.0 - a), 0.0}};
      rows.push_back({"lemma5_equality_family", lam_json(fam), f_of_lam(fam),
                      lemma5_bound(fam.l[0] * fam.l[0] + fam.l[2] * fam.l[2]), m[1]});
    }
    if (m[2] < 0.0) {
      const double g1 = x.l[0] - x.l[1], g2 = x.l[2] - x.l[3];
      rows.push_back({"lemma5_strict_margin", lam_json(x), f_of_lam(x),
                      lemma5_bound(g1 * g1 + g2 * g2) - 1e-6, m[2]});
    }
  };
  return run_sweep("lemma5", samples, exec, kernel, collect);
}

Report theorem1_sweep(std::size_t samples, std::size_t phi_grid, std::uint64_t seed, Exec exec) {
  if (phi_grid == 0) throw std::domain_error("theorem1_sweep: empty phi grid");

  auto phi_at = [phi_grid](std::size_t g) {
    return phi_grid == 1 ? 0.0
                         : kPi * static_cast<double>(g) / static_cast<double>(phi_grid - 1);
  };

  // Pointwise: chi(lambda, phi) <= F(S_lambda) for every grid phi. Every 10th
  // sample additionally exercises the mixture chain with up to 5 branches.
  auto eval = [=](std::size_t i, double& point_m, double& mix_conc_m, double& mix_chain_m,
                  Lam& x) {
    CounterRng rng(seed, i);
    x = sample_lam(rng);
    const double f = bounds::holevo_bound_di(s_of_lam(x));
    point_m = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < phi_grid; ++g)
      point_m = std::min(point_m, f - chi_of_lam(x, phi_at(g)) + 1e-9);

    mix_conc_m = std::numeric_limits<double>::infinity();
    mix_chain_m = std::numeric_limits<double>::infinity();
    if (i % 10 == 0) {
      const std::size_t k = 2 + rng.next_below(4);
      double w[5], wsum = 0.0;
      Lam comp[5];
      for (std::size_t j = 0; j < k; ++j) {
        w[j] = rng.next_exponential();
        wsum += w[j];
        comp[j] = sample_lam(rng);
      }
      double chi_mix = 0.0, f_mix = 0.0, s_mix = 0.0;
      for (std::size_t j = 0; j < k; ++j) {
        const double pj = w[j] / wsum;
        const double sj = s_of_lam(comp[j]);
        chi_mix += pj * chi_of_lam(comp[j], 0.0);
        f_mix += pj * bounds::holevo_bound_di(sj);
        s_mix += pj * sj;
      }
      const double f_avg = bounds::holevo_bound_di(s_mix);
      mix_conc_m = f_avg - f_mix + 1e-9;
      mix_chain_m = f_avg - chi_mix + 1e-9;
    }
  };

  auto kernel = [&eval](std::size_t i) {
    double a, b, c;
    Lam x;
    eval(i, a, b, c, x);
    return std::min({a, b, c});
  };
  auto collect = [&eval](std::size_t i, std::vector<CheckRow>& rows) {
    double a, b, c;
    Lam x;
    eval(i, a, b, c, x);
    if (a < 0.0)
      rows.push_back({"theorem1_pointwise", lam_json(x), chi_of_lam(x, 0.0),
                      bounds::holevo_bound_di(s_of_lam(x)), a});
    if (b < 0.0)
      rows.push_back({"theorem1_mixture_concavity", lam_json(x), 0.0, 0.0, b});
    if (c < 0.0) rows.push_back({"theorem1_mixture_chain", lam_json(x), 0.0, 0.0, c});
  };
  return run_sweep("theorem1", samples, exec, kernel, collect);
}

Report blocks_roundtrip_sweep(std::size_t samples, std::uint64_t seed, Exec exec) {
  constexpr std::size_t kDim = 8;

  auto build = [seed](std::size_t i) {
    CounterRng rng(seed, i);
    ComplexMatrix a1(kDim), a2(kDim);
    for (std::size_t blk = 0; blk < kDim / 2; ++blk) {
      auto unit = [&rng] {
        std::array<double, 3> n{rng.next_gaussian(), rng.next_gaussian(), rng.next_gaussian()};
        const double len = std::sqrt(n[0] * n[0] + n[1] * n[1] + n[2] * n[2]);
        for (double& v : n) v /= len;
        return n;
      };
      const ComplexMatrix o1 = chsh::bloch_observable(unit());
      const ComplexMatrix o2 = chsh::bloch_observable(unit());
      for (std::size_t r = 0; r < 2; ++r)
        for (std::size_t c = 0; c < 2; ++c) {
          a1(2 * blk + r, 2 * blk + c) = o1(r, c);
          a2(2 * blk + r, 2 * blk + c) = o2(r, c);
        }
    }
    const ComplexMatrix u = qmath::random_unitary(kDim, rng);
    auto conj_sym = [&u](const ComplexMatrix& m) {
      ComplexMatrix r = u * m * u.adjoint();
      ComplexMatrix h = r.adjoint();
      r += h;
      r *= Complex(0.5, 0.0);
      return r;
    };
    return ObservablePair(conj_sym(a1), conj_sym(a2));
  };

  auto eval = [&build](std::size_t i) {
    const ObservablePair pair = build(i);
    const BlockDecomposition dec = decompose_observable_pair(pair);

    double worst = 1e-10;  // margin = tol - residual
    ComplexMatrix psum(kDim);
    for (std::size_t b = 0; b < dec.blocks.size(); ++b) psum += dec.projector(b);
    psum -= ComplexMatrix::identity(kDim);
    worst = std::min(worst, 1e-10 - psum.max_abs());

    for (std::size_t b = 0; b < dec.blocks.size(); ++b)
      for (std::size_t c = b + 1; c < dec.blocks.size(); ++c) {
        const ComplexMatrix prod = dec.projector(b) * dec.projector(c);
        worst = std::min(worst, 1e-10 - prod.max_abs());
      }

    for (int which : {1, 2}) {
      ComplexMatrix rec = dec.reconstruct(which);
      rec -= (which == 1) ? pair.a1 : pair.a2;
      worst = std::min(worst, 1e-10 - rec.max_abs());
    }
    if (dec.blocks.size() != kDim / 2) worst = std::min(worst, -1.0);
    return worst;
  };

  auto collect = [&eval](std::size_t i, std::vector<CheckRow>& rows) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "{\"sample\":%zu}", i);
    rows.push_back({"blocks_roundtrip", buf, -eval(i), 1e-10, eval(i)});
  };
  return run_sweep("blocks", samples, exec, eval, collect);
}

Report reduction_sweep(std::size_t samples, std::uint64_t seed, Exec exec) {
  auto eval = [seed](std::size_t i) {
    CounterRng rng(seed, i);
    double worst = std::numeric_limits<double>::infinity();
    try {
      const DensityMatrix rho = qmath::random_density_matrix(4, rng);
      const ReductionTrace tr = symmetrize_to_belldiag(rho);

      // sigma_y x sigma_y averaging preserves the Bell diagonal of the input.
      const ComplexMatrix in_b = to_bell(rho.mat());
      const ComplexMatrix bar_b = to_bell(tr.rho_bar.mat());
      for (std::size_t k = 0; k < 4; ++k)
        worst = std::min(worst, 1e-12 - std::abs(in_b(k, k) - bar_b(k, k)));

      // Conjugation averaging preserves the diagonal of the rotated state.
      const ComplexMatrix u = ry_pair(tr.alpha, tr.beta);
      const ComplexMatrix rot_b = to_bell(u * tr.rho_bar.mat() * u.adjoint());
      const ComplexMatrix diag_b = to_bell(tr.rho_diag.mat());
      for (std::size_t k = 0; k < 4; ++k)
        worst = std::min(worst, 1e-12 - std::abs(rot_b(k, k) - diag_b(k, k)));

      // Off-diagonals gone, ordering holds, weights form a state.
      double off = 0.0;
      for (std::size_t r = 0; r < 4; ++r)
        for (std::size_t c = 0; c < 4; ++c)
          if (r != c) off = std::max(off, std::abs(diag_b(r, c)));
      worst = std::min(worst, 1e-10 - off);
      worst = std::min(worst, tr.final_state.is_ordered() ? worst : -1.0);

      // The relabel permutation matches the recorded diagonal.
      for (std::size_t k = 0; k < 4; ++k) {
        const double want = diag_b(static_cast<std::size_t>(tr.permutation[k]),
                                   static_cast<std::size_t>(tr.permutation[k]))
                                .real();
        worst = std::min(worst, 1e-12 - std::abs(tr.final_state.lambda[k] - want));
      }
    } catch (const std::exception&) {
      worst = -1.0;
    }
    return worst;
  };

  auto collect = [&eval](std::size_t i, std::vector<CheckRow>& rows) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "{\"sample\":%zu}", i);
    rows.push_back({"reduction_invariants", buf, -eval(i), 0.0, eval(i)});
  };
  return run_sweep("reduction", samples, exec, eval, collect);
}

namespace {

double f_param(double r, double theta, double delta) {
  const double c = std::cos(theta), s = std::sin(theta);
  Lam x{{0.25 + 0.5 * r * c + delta, 0.25 - 0.5 * r * c + delta,
         0.25 + 0.5 * r * s - delta, 0.25 - 0.5 * r * s - delta}};
  for (double& v : x.l) {
    if (v < -1e-12) throw std::domain_error("delta_star: lambda outside the simplex");
    v = std::max(v, 0.0);
  }
  return f_of_lam(x);
}

}  // namespace

DeltaStarReport delta_star_maximality_check(double r, double theta) {
  if (!(r > 0.0 && r <= 1.0)) throw std::domain_error("delta_star: R must lie in (0, 1]");
  const double ac = std::abs(std::cos(theta)), as = std::abs(std::sin(theta));
  if (ac + as > 1.0 / r + 1e-12)
    throw std::domain_error("delta_star: theta outside the solvable domain for this R");

  const double lo = -0.25 + 0.5 * r * ac;
  const double hi = 0.25 - 0.5 * r * as;
  const double c = std::cos(theta), s = std::sin(theta);

  DeltaStarReport rep;
  rep.r = r;
  rep.theta = theta;
  rep.delta_star = 0.25 * r * r * (c * c - s * s);
  const double dstar = std::clamp(rep.delta_star, lo, hi);
  rep.f_at_star = f_param(r, theta, dstar);

  const double room = std::min(dstar - lo, hi - dstar);
  if (room > 1e-9) {
    const double h = std::min(1e-6, 0.5 * room);
    const double fp = f_param(r, theta, dstar + h);
    const double fm = f_param(r, theta, dstar - h);
    rep.derivative_checked = true;
    rep.derivative = (fp - fm) / (2.0 * h);
    rep.second_difference = (fp - 2.0 * rep.f_at_star + fm) / (h * h);
  }
  return rep;
}

}  // namespace diqkd::verify
