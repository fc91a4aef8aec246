#include "diqkd/chsh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

namespace diqkd::chsh {

using qmath::Subsystem;

ComplexMatrix XZMeasurement::observable() const {
  ComplexMatrix m(2);
  m(0, 0) = std::cos(phi);
  m(1, 1) = -std::cos(phi);
  m(0, 1) = std::sin(phi);
  m(1, 0) = std::sin(phi);
  return m;
}

ComplexMatrix XZMeasurement::projector(int outcome) const {
  if (outcome != 1 && outcome != -1) throw std::domain_error("projector: outcome must be +-1");
  ComplexMatrix p = observable();  // (I + outcome * O)/2
  p *= Complex(0.5 * outcome, 0.0);
  ComplexMatrix id = qmath::identity2();
  id *= Complex(0.5, 0.0);
  p += id;
  return p;
}

MeasurementSet MeasurementSet::from_angles(double a0_phi, double a1_phi, double a2_phi,
                                           double b1_phi, double b2_phi) {
  MeasurementSet m;
  m.a0.phi = a0_phi;
  m.a1.phi = a1_phi;
  m.a2.phi = a2_phi;
  m.b1.phi = b1_phi;
  m.b2.phi = b2_phi;
  return m;
}

MeasurementSet MeasurementSet::protocol_ideal() {
  const double q = 4.0 * std::atan(1.0);  // pi
  return from_angles(0.0, q / 4.0, -q / 4.0, 0.0, q / 2.0);
}

BellDiagonalState::BellDiagonalState(qmath::ProbabilityVector l) : lambda(std::move(l)) {
  if (lambda.size() != 4) throw std::domain_error("BellDiagonalState: needs 4 weights");
}

bool BellDiagonalState::is_ordered(double tol) const {
  return lambda[0] >= lambda[1] - tol && lambda[2] >= lambda[3] - tol;
}

const ComplexMatrix& bell_basis() {
  static const ComplexMatrix b = [] {
    const double s = 1.0 / std::sqrt(2.0);
    ComplexMatrix m(4);
    // columns: Phi+ = (|00>+|11>)/s2, Psi- = (|01>-|10>)/s2,
    //          Phi- = (|00>-|11>)/s2, Psi+ = (|01>+|10>)/s2
    m(0, 0) = s;  m(3, 0) = s;
    m(1, 1) = s;  m(2, 1) = -s;
    m(0, 2) = s;  m(3, 2) = -s;
    m(1, 3) = s;  m(2, 3) = s;
    return m;
  }();
  return b;
}

DensityMatrix BellDiagonalState::to_density_matrix() const {
  const ComplexMatrix& b = bell_basis();
  ComplexMatrix rho(4);
  for (std::size_t k = 0; k < 4; ++k) {
    std::vector<Complex> col(4);
    for (std::size_t i = 0; i < 4; ++i) col[i] = b(i, k);
    ComplexMatrix proj = ComplexMatrix::outer(col, col);
    proj *= Complex(lambda[k], 0.0);
    rho += proj;
  }
  return DensityMatrix(std::move(rho));
}

std::vector<Complex> phi_plus() {
  const double s = 1.0 / std::sqrt(2.0);
  return {s, 0.0, 0.0, s};
}

DensityMatrix werner_state(double p) {
  if (p < 0.0 || p > 1.0) throw std::domain_error("werner_state: p outside [0,1]");
  ComplexMatrix rho = ComplexMatrix::outer(phi_plus(), phi_plus());
  rho *= Complex(p, 0.0);
  ComplexMatrix id = ComplexMatrix::identity(4);
  id *= Complex((1.0 - p) / 4.0, 0.0);
  rho += id;
  return DensityMatrix(std::move(rho));
}

CorrelationTable::CorrelationTable() = default;

std::size_t CorrelationTable::idx(int x, int y, int a, int b) {
  if (x < 0 || x > 2 || y < 1 || y > 2) throw std::domain_error("CorrelationTable: bad setting");
  if ((a != 1 && a != -1) || (b != 1 && b != -1))
    throw std::domain_error("CorrelationTable: outcomes must be +-1");
  const std::size_t ia = (a == 1) ? 0 : 1;
  const std::size_t ib = (b == 1) ? 0 : 1;
  return ((static_cast<std::size_t>(x) * kNumY + static_cast<std::size_t>(y - 1)) * 2 + ia) * 2 +
         ib;
}

double& CorrelationTable::p(int x, int y, int a, int b) { return p_[idx(x, y, a, b)]; }
double CorrelationTable::p(int x, int y, int a, int b) const { return p_[idx(x, y, a, b)]; }

std::uint64_t& CorrelationTable::count(int x, int y) {
  return count_[static_cast<std::size_t>(x) * kNumY + static_cast<std::size_t>(y - 1)];
}
std::uint64_t CorrelationTable::count(int x, int y) const {
  return count_[static_cast<std::size_t>(x) * kNumY + static_cast<std::size_t>(y - 1)];
}
bool& CorrelationTable::covered(int x, int y) {
  return covered_[static_cast<std::size_t>(x) * kNumY + static_cast<std::size_t>(y - 1)];
}
bool CorrelationTable::covered(int x, int y) const {
  return covered_[static_cast<std::size_t>(x) * kNumY + static_cast<std::size_t>(y - 1)];
}

void CorrelationTable::validate(double tol) const {
  for (int x = 0; x <= 2; ++x)
    for (int y = 1; y <= 2; ++y) {
      if (!covered(x, y)) continue;
      double s = 0.0;
      for (int a : {1, -1})
        for (int b : {1, -1}) {
          const double v = p(x, y, a, b);
          if (v < -tol) throw std::domain_error("CorrelationTable: negative probability");
          s += v;
        }
      if (std::abs(s - 1.0) > tol)
        throw std::domain_error("CorrelationTable: pair distribution not normalized");
    }
}

double CorrelationTable::correlator(int x, int y) const {
  if (!covered(x, y)) throw std::domain_error("CorrelationTable: setting pair not covered");
  return p(x, y, 1, 1) - p(x, y, 1, -1) - p(x, y, -1, 1) + p(x, y, -1, -1);
}

double CorrelationTable::marginal_a(int x) const {
  double wsum = 0.0, acc = 0.0;
  for (int y = 1; y <= 2; ++y) {
    if (!covered(x, y)) continue;
    const double w = count(x, y) > 0 ? static_cast<double>(count(x, y)) : 1.0;
    acc += w * (p(x, y, 1, 1) + p(x, y, 1, -1) - p(x, y, -1, 1) - p(x, y, -1, -1));
    wsum += w;
  }
  if (wsum == 0.0) throw std::domain_error("CorrelationTable: no coverage for Alice setting");
  return acc / wsum;
}

double CorrelationTable::marginal_b(int y) const {
  double wsum = 0.0, acc = 0.0;
  for (int x = 0; x <= 2; ++x) {
    if (!covered(x, y)) continue;
    const double w = count(x, y) > 0 ? static_cast<double>(count(x, y)) : 1.0;
    acc += w * (p(x, y, 1, 1) - p(x, y, 1, -1) + p(x, y, -1, 1) - p(x, y, -1, -1));
    wsum += w;
  }
  if (wsum == 0.0) throw std::domain_error("CorrelationTable: no coverage for Bob setting");
  return acc / wsum;
}

void CorrelationTable::write_csv(std::ostream& os) const {
  os << "X,Y,a,b,p,count\n";
  char buf[64];
  for (int x = 0; x <= 2; ++x)
    for (int y = 1; y <= 2; ++y) {
      if (!covered(x, y)) continue;
      for (int a : {1, -1})
        for (int b : {1, -1}) {
          std::snprintf(buf, sizeof(buf), "%.15g", p(x, y, a, b));
          os << x << ',' << y << ',' << (a == 1 ? "+1" : "-1") << ',' << (b == 1 ? "+1" : "-1")
             << ',' << buf << ',' << count(x, y) << '\n';
        }
    }
}

std::string CorrelationTable::to_csv() const {
  std::ostringstream os;
  write_csv(os);
  return os.str();
}

double correlator(const DensityMatrix& rho, const ComplexMatrix& a, const ComplexMatrix& b) {
  const ComplexMatrix ab = ComplexMatrix::kron(a, b);
  Complex t = 0.0;
  const std::size_t d = rho.dim();
  if (ab.dim() != d) throw std::domain_error("correlator: dimension mismatch");
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t k = 0; k < d; ++k) t += rho.mat()(i, k) * ab(k, i);
  if (std::abs(t.imag()) > 1e-9) throw std::domain_error("correlator: non-real expectation");
  return t.real();
}

double correlator(const DensityMatrix& rho, const XZMeasurement& a, const XZMeasurement& b) {
  return correlator(rho, a.observable(), b.observable());
}

double chsh_value(const DensityMatrix& rho, const ComplexMatrix& a1, const ComplexMatrix& a2,
                  const ComplexMatrix& b1, const ComplexMatrix& b2) {
  return correlator(rho, a1, b1) + correlator(rho, a1, b2) + correlator(rho, a2, b1) -
         correlator(rho, a2, b2);
}

double chsh_value(const DensityMatrix& rho, const MeasurementSet& m) {
  return chsh_value(rho, m.a1.observable(), m.a2.observable(), m.b1.observable(),
                    m.b2.observable());
}

ComplexMatrix bloch_observable(const std::array<double, 3>& n) {
  ComplexMatrix m(2);
  m(0, 0) = n[2];
  m(1, 1) = -n[2];
  m(0, 1) = Complex(n[0], -n[1]);
  m(1, 0) = Complex(n[0], n[1]);
  return m;
}

namespace {

const ComplexMatrix& pauli(int i) {
  switch (i) {
    case 0: return qmath::sigma_x();
    case 1: return qmath::sigma_y();
    default: return qmath::sigma_z();
  }
}

}  // namespace

ChshMax chsh_max_horodecki(const DensityMatrix& rho) {
  if (rho.dim() != 4) throw std::domain_error("chsh_max_horodecki: needs a two-qubit state");

  double t[3][3];
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) t[i][j] = correlator(rho, pauli(i), pauli(j));

  ComplexMatrix m(3);  // T^t T, real symmetric
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += t[k][i] * t[k][j];
      m(i, j) = s;
    }
  const qmath::Eigensystem es = qmath::hermitian_eigensystem(m);

  ChshMax out;
  out.tau1 = std::max(es.values[0], 0.0);
  out.tau2 = std::max(es.values[1], 0.0);
  out.s_max = 2.0 * std::sqrt(out.tau1 + out.tau2);
  std::array<double, 3> c{}, cp{};
  for (int i = 0; i < 3; ++i) {
    c[i] = es.vectors(i, 0).real();
    cp[i] = es.vectors(i, 1).real();
  }
  auto image = [&](const std::array<double, 3>& v) {
    std::array<double, 3> w{};
    for (int i = 0; i < 3; ++i)
      for (int k = 0; k < 3; ++k) w[i] += t[i][k] * v[k];
    return w;
  };
  auto normalize_or = [&](std::array<double, 3> v, const std::array<double, 3>& fallback) {
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    if (n < 1e-12) return fallback;
    for (double& x : v) x /= n;
    return v;
  };
  // Alice measures along the images of the two principal directions; Bob mixes
  // the principal directions so that B1 + B2 points along c and B1 - B2 along
  // c'.  Then <A1(B1+B2)> = 2 cos(theta) sqrt(tau1) and <A2(B1-B2)> =
  // 2 sin(theta) sqrt(tau2), and tan(theta) = sqrt(tau2/tau1) attains the
  // maximum 2 sqrt(tau1 + tau2).
  out.alice_axis1 = normalize_or(image(c), {0.0, 0.0, 1.0});
  // Fallback for rank-deficient T: any direction orthogonal to axis1.
  std::array<double, 3> perp{-out.alice_axis1[2], 0.0, out.alice_axis1[0]};
  if (std::abs(perp[0]) + std::abs(perp[2]) < 1e-6) perp = {1.0, 0.0, 0.0};
  out.alice_axis2 = normalize_or(image(cp), normalize_or(perp, {1.0, 0.0, 0.0}));
  const double theta = std::atan2(std::sqrt(out.tau2), std::sqrt(out.tau1));
  const double ct = std::cos(theta), st = std::sin(theta);
  for (int i = 0; i < 3; ++i) {
    out.bob_axis1[i] = ct * c[i] + st * cp[i];
    out.bob_axis2[i] = ct * c[i] - st * cp[i];
  }
  return out;
}

double chsh_max_belldiag(const BellDiagonalState& s) {
  if (!s.is_ordered())
    throw std::domain_error("chsh_max_belldiag: weights must be sector-ordered");
  const double g1 = s.lambda[0] - s.lambda[1];
  const double g2 = s.lambda[2] - s.lambda[3];
  const double h1 = s.lambda[0] - s.lambda[3];
  const double h2 = s.lambda[2] - s.lambda[1];
  const double b1 = std::sqrt(g1 * g1 + g2 * g2);
  const double b2 = std::sqrt(h1 * h1 + h2 * h2);
  return tsirelson_bound * std::max(b1, b2);
}

CorrelationTable table_from_state(const DensityMatrix& rho, const MeasurementSet& m) {
  if (rho.dim() != 4) throw std::domain_error("table_from_state: needs a two-qubit state");
  CorrelationTable t;
  const XZMeasurement* ax[3] = {&m.a0, &m.a1, &m.a2};
  const XZMeasurement* by[2] = {&m.b1, &m.b2};
  for (int x = 0; x <= 2; ++x)
    for (int y = 1; y <= 2; ++y) {
      if (x == 0 && y == 2) continue;  // unused by the protocol
      t.covered(x, y) = true;
      t.count(x, y) = 0;
      for (int a : {1, -1})
        for (int b : {1, -1}) {
          const ComplexMatrix proj =
              ComplexMatrix::kron(ax[x]->projector(a), by[y - 1]->projector(b));
          Complex v = 0.0;
          for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t k = 0; k < 4; ++k) v += rho.mat()(i, k) * proj(k, i);
          t.p(x, y, a, b) = std::max(v.real(), 0.0);
        }
    }
  t.validate();
  return t;
}

TableStatistics table_statistics(const CorrelationTable& t) {
  for (int x = 0; x <= 2; ++x)
    for (int y = 1; y <= 2; ++y) {
      if (x == 0 && y == 2) continue;
      if (!t.covered(x, y)) {
        char msg[64];
        std::snprintf(msg, sizeof(msg), "table_statistics: setting pair (%d,%d) missing", x, y);
        throw std::domain_error(msg);
      }
    }
  TableStatistics s;
  s.qber = t.p(0, 1, 1, -1) + t.p(0, 1, -1, 1);
  s.chsh = t.correlator(1, 1) + t.correlator(1, 2) + t.correlator(2, 1) - t.correlator(2, 2);
  for (int x = 0; x <= 2; ++x) s.bias_a[static_cast<std::size_t>(x)] = t.marginal_a(x);
  for (int y = 1; y <= 2; ++y) s.bias_b[static_cast<std::size_t>(y - 1)] = t.marginal_b(y);
  return s;
}

Bb84Counterexample bb84_counterexample() {
  // rho_ABE = 1/4 sum_{z0,z1} |z0 z1><z0 z1| x |z0 z1><z0 z1| x |z0 z1><z0 z1|
  ComplexMatrix rho(64);
  for (int z = 0; z < 4; ++z) {
    const std::size_t i = static_cast<std::size_t>(z) * 16 + static_cast<std::size_t>(z) * 4 +
                          static_cast<std::size_t>(z);
    rho(i, i) = 0.25;
  }

  const ComplexMatrix za = ComplexMatrix::kron(qmath::sigma_z(), qmath::identity2());
  const ComplexMatrix zb = ComplexMatrix::kron(qmath::identity2(), qmath::sigma_z());

  Bb84Counterexample c{DensityMatrix(std::move(rho)), {za, zb}, {za, zb}, CorrelationTable{}};

  const DensityMatrix rho_ab =
      qmath::partial_trace(c.rho_abe, Subsystem::b, 16, 4);  // trace Eve
  auto proj4 = [](const ComplexMatrix& obs, int outcome) {
    ComplexMatrix p = obs;
    p *= Complex(0.5 * outcome, 0.0);
    ComplexMatrix id = ComplexMatrix::identity(4);
    id *= Complex(0.5, 0.0);
    p += id;
    return p;
  };
  for (int x = 0; x <= 1; ++x)
    for (int y = 1; y <= 2; ++y) {
      c.table.covered(x, y) = true;
      for (int a : {1, -1})
        for (int b : {1, -1}) {
          const ComplexMatrix proj =
              ComplexMatrix::kron(proj4(c.alice[static_cast<std::size_t>(x)], a),
                                  proj4(c.bob[static_cast<std::size_t>(y - 1)], b));
          Complex v = 0.0;
          for (std::size_t i = 0; i < 16; ++i)
            for (std::size_t k = 0; k < 16; ++k) v += rho_ab.mat()(i, k) * proj(k, i);
          c.table.p(x, y, a, b) = v.real();
        }
    }
  c.table.validate();
  return c;
}

double max_chsh_over_assignments(const CorrelationTable& t) {
  const double e[2][2] = {{t.correlator(0, 1), t.correlator(0, 2)},
                          {t.correlator(1, 1), t.correlator(1, 2)}};
  double best = 0.0;
  // All CHSH facets: one term carries the minus sign, both signs via |.|.
  for (int mi = 0; mi < 2; ++mi)
    for (int mj = 0; mj < 2; ++mj) {
      double s = 0.0;
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) s += (i == mi && j == mj) ? -e[i][j] : e[i][j];
      best = std::max(best, std::abs(s));
    }
  return best;
}

double bb84_eve_conditional_entropy(const Bb84Counterexample& c, bool alice_side, int setting) {
  if (setting != 0 && setting != 1) throw std::domain_error("bb84: setting must be 0 or 1");
  const ComplexMatrix& obs =
      alice_side ? c.alice[static_cast<std::size_t>(setting)] : c.bob[static_cast<std::size_t>(setting)];

  // p(e, outcome) with Eve measured in her computational basis.
  double h = 0.0;
  for (int e = 0; e < 4; ++e) {
    double pe = 0.0;
    double p_out[2] = {0.0, 0.0};
    for (int out : {1, -1}) {
      ComplexMatrix proj_side = obs;
      proj_side *= Complex(0.5 * out, 0.0);
      ComplexMatrix id4 = ComplexMatrix::identity(4);
      id4 *= Complex(0.5, 0.0);
      proj_side += id4;

      ComplexMatrix pe_mat(4);
      pe_mat(static_cast<std::size_t>(e), static_cast<std::size_t>(e)) = 1.0;

      const ComplexMatrix full =
          alice_side
              ? ComplexMatrix::kron(ComplexMatrix::kron(proj_side, ComplexMatrix::identity(4)),
                                    pe_mat)
              : ComplexMatrix::kron(ComplexMatrix::kron(ComplexMatrix::identity(4), proj_side),
                                    pe_mat);
      Complex v = 0.0;
      for (std::size_t i = 0; i < 64; ++i)
        for (std::size_t k = 0; k < 64; ++k) v += c.rho_abe.mat()(i, k) * full(k, i);
      p_out[out == 1 ? 0 : 1] = v.real();
      pe += v.real();
    }
    if (pe <= qmath::kEntropyClamp) continue;
    h += pe * qmath::binary_entropy(p_out[0] / pe);
  }
  return h;
}

}  // namespace diqkd::chsh
