#include "tnvqe/mps.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include <fmt/format.h>

#include "tnvqe/errors.hpp"
#include "tnvqe/linalg.hpp"

namespace tnvqe {

namespace {

constexpr char kMagic[8] = {'T', 'N', 'V', 'Q', 'E', 'M', 'P', 'S'};
constexpr std::uint32_t kCheckpointVersion = 1;
constexpr double kUnitarityTolerance = 1e-12;

// Rows s*left + l, columns r.
Eigen::MatrixXcd stack_rows(const SiteTensor& t) {
  Eigen::MatrixXcd m(2 * t.left(), t.right());
  m.topRows(t.left()) = t.m[0];
  m.bottomRows(t.left()) = t.m[1];
  return m;
}

// Rows l, columns s*right + r.
Eigen::MatrixXcd stack_cols(const SiteTensor& t) {
  Eigen::MatrixXcd m(t.left(), 2 * t.right());
  m.leftCols(t.right()) = t.m[0];
  m.rightCols(t.right()) = t.m[1];
  return m;
}

template <typename Matrix>
bool is_unitary(const Matrix& g) {
  const auto prod = (g.adjoint() * g).eval();
  return (prod - Matrix::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff() < kUnitarityTolerance;
}

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ConfigError("truncated MPS checkpoint");
  return v;
}

}  // namespace

int full_bond_dimension(int n_qubits) {
  if (n_qubits < 1 || n_qubits > 60) throw DomainError("unsupported qubit count");
  return 1 << std::min(n_qubits / 2, 30);
}

MpsState MpsState::product_state(const Occupation& occupations, int chi_max, double cutoff) {
  if (occupations.empty()) throw DomainError("empty occupation");
  if (chi_max < 1) throw DomainError("chi_max must be positive");
  MpsState s;
  s.chi_max_ = chi_max;
  s.cutoff_ = cutoff;
  s.sites_.resize(occupations.size());
  for (std::size_t i = 0; i < occupations.size(); ++i) {
    const int b = occupations[i] ? 1 : 0;
    s.sites_[i].m[b] = Eigen::MatrixXcd::Ones(1, 1);
    s.sites_[i].m[1 - b] = Eigen::MatrixXcd::Zero(1, 1);
  }
  s.center_ = 0;
  return s;
}

MpsState MpsState::from_dense(const Eigen::VectorXcd& amplitudes, int chi_max, double cutoff) {
  const auto dim = amplitudes.size();
  int n = 0;
  while ((Eigen::Index{1} << n) < dim) ++n;
  if (n < 1 || (Eigen::Index{1} << n) != dim) throw DomainError("amplitude vector is not 2^n long");
  MpsState s;
  s.chi_max_ = chi_max;
  s.cutoff_ = cutoff;
  s.sites_.resize(n);
  // rest: rows = (bond, current qubit), cols = remaining qubits.
  Eigen::MatrixXcd rest = amplitudes.transpose();  // 1 x 2^n
  Eigen::Index left = 1;
  for (int q = 0; q < n - 1; ++q) {
    const Eigen::Index remaining = rest.cols() / 2;
    // Reshape (left, 2*remaining) -> (2*left, remaining) with row s*left + l.
    Eigen::MatrixXcd m(2 * left, remaining);
    for (int b = 0; b < 2; ++b) {
      m.middleRows(b * left, left) = rest.middleCols(b * remaining, remaining);
    }
    auto svd = truncated_svd(m, chi_max, cutoff);
    s.truncation_error_ += svd.discarded_weight;
    const Eigen::Index k = svd.s.size();
    s.sites_[q].m[0] = svd.u.topRows(left);
    s.sites_[q].m[1] = svd.u.bottomRows(left);
    rest = svd.s.asDiagonal() * svd.v.adjoint();
    left = k;
  }
  s.sites_[n - 1].m[0] = rest.col(0);
  s.sites_[n - 1].m[1] = rest.col(1);
  s.center_ = n - 1;
  return s;
}

MpsState MpsState::from_tensors(std::vector<SiteTensor> tensors, int chi_max, double cutoff) {
  if (tensors.empty()) throw DomainError("no tensors");
  if (tensors.front().left() != 1 || tensors.back().right() != 1) {
    throw DomainError("boundary bonds must have dimension 1");
  }
  for (std::size_t i = 0; i + 1 < tensors.size(); ++i) {
    if (tensors[i].right() != tensors[i + 1].left()) throw DomainError("bond dimension mismatch");
  }
  MpsState s;
  s.chi_max_ = chi_max;
  s.cutoff_ = cutoff;
  s.sites_ = std::move(tensors);
  s.center_ = 0;
  // The left edge is not yet an isometry; a full QR sweep fixes that.
  for (int i = 0; i + 1 < s.n_qubits(); ++i) {
    s.center_ = i;
    s.move_center(i + 1);
  }
  s.center_ = s.n_qubits() - 1;
  return s;
}

std::vector<int> MpsState::bond_dimensions() const {
  std::vector<int> dims;
  dims.reserve(sites_.size() + 1);
  dims.push_back(static_cast<int>(sites_.front().left()));
  for (const auto& t : sites_) dims.push_back(static_cast<int>(t.right()));
  return dims;
}

int MpsState::max_bond_dimension() const {
  auto d = bond_dimensions();
  return *std::max_element(d.begin(), d.end());
}

void MpsState::move_center(int site) {
  if (site < 0 || site >= n_qubits()) throw DomainError("center out of range");
  while (center_ < site) {
    auto& a = sites_[center_];
    auto& b = sites_[center_ + 1];
    Eigen::MatrixXcd m = stack_rows(a);
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    const Eigen::Index k = std::min(m.rows(), m.cols());
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), k);
    Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    const Eigen::Index left = a.left();
    a.m[0] = q.topRows(left);
    a.m[1] = q.bottomRows(left);
    b.m[0] = r * b.m[0];
    b.m[1] = r * b.m[1];
    ++center_;
  }
  while (center_ > site) {
    auto& a = sites_[center_ - 1];
    auto& b = sites_[center_];
    Eigen::MatrixXcd m = stack_cols(b).adjoint();  // (2*right) x left
    Eigen::HouseholderQR<Eigen::MatrixXcd> qr(m);
    const Eigen::Index k = std::min(m.rows(), m.cols());
    Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(m.rows(), k);
    Eigen::MatrixXcd r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    // b = r^H q^H: q^H is the new right-isometric site, r^H moves left.
    Eigen::MatrixXcd qh = q.adjoint();  // k x (2*right)
    const Eigen::Index right = b.right();
    b.m[0] = qh.leftCols(right);
    b.m[1] = qh.rightCols(right);
    Eigen::MatrixXcd rh = r.adjoint();  // left x k
    a.m[0] = a.m[0] * rh;
    a.m[1] = a.m[1] * rh;
    --center_;
  }
}

void MpsState::apply_one_qubit_operator(int qubit, const Eigen::Matrix2cd& op) {
  if (qubit < 0 || qubit >= n_qubits()) throw DomainError("qubit out of range");
  auto& t = sites_[qubit];
  Eigen::MatrixXcd m0 = op(0, 0) * t.m[0] + op(0, 1) * t.m[1];
  Eigen::MatrixXcd m1 = op(1, 0) * t.m[0] + op(1, 1) * t.m[1];
  t.m[0] = std::move(m0);
  t.m[1] = std::move(m1);
}

void MpsState::apply_one_qubit_gate(int qubit, const Eigen::Matrix2cd& gate) {
  if (!is_unitary(gate)) throw DomainError("single-qubit gate is not unitary");
  apply_one_qubit_operator(qubit, gate);
}

void MpsState::apply_two_qubit_gate(int q1, int q2, const Eigen::Matrix4cd& gate) {
  if (!is_unitary(gate)) throw DomainError("two-qubit gate is not unitary");
  apply_two_site(q1, q2, gate, true);
}

void MpsState::apply_two_qubit_operator(int q1, int q2, const Eigen::Matrix4cd& op) {
  apply_two_site(q1, q2, op, false);
}

void MpsState::apply_two_site(int q1, int q2, const Eigen::Matrix4cd& op_in, bool renormalize) {
  if (q1 < 0 || q2 < 0 || q1 >= n_qubits() || q2 >= n_qubits() || std::abs(q1 - q2) != 1) {
    throw DomainError(fmt::format("qubits ({}, {}) are not chain-adjacent", q1, q2));
  }
  Eigen::Matrix4cd op = op_in;
  if (q1 > q2) {
    // Reorder the basis |b1 b2> -> |b2 b1>.
    Eigen::Matrix4cd p = Eigen::Matrix4cd::Zero();
    p(0, 0) = p(1, 2) = p(2, 1) = p(3, 3) = 1.0;
    op = p * op_in * p;
    std::swap(q1, q2);
  }
  const int i = q1;
  move_center(i);
  auto& a = sites_[i];
  auto& b = sites_[i + 1];
  const Eigen::Index left = a.left();
  const Eigen::Index right = b.right();
  std::array<Eigen::MatrixXcd, 4> theta;
  for (int s1 = 0; s1 < 2; ++s1) {
    for (int s2 = 0; s2 < 2; ++s2) theta[2 * s1 + s2] = a.m[s1] * b.m[s2];
  }
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * left, 2 * right);
  for (int out = 0; out < 4; ++out) {
    auto block = m.block((out / 2) * left, (out % 2) * right, left, right);
    for (int in = 0; in < 4; ++in) {
      if (op(out, in) != cplx(0.0)) block += op(out, in) * theta[in];
    }
  }
  auto svd = truncated_svd(m, chi_max_, cutoff_);
  truncation_error_ += svd.discarded_weight;
  Eigen::VectorXd s = svd.s;
  if (renormalize && svd.discarded_weight > 0.0) {
    // Restore the pre-truncation norm of the two-site block.
    const double kept = s.squaredNorm();
    if (kept > 0.0) s *= std::sqrt((kept + svd.discarded_weight) / kept);
  }
  a.m[0] = svd.u.topRows(left);
  a.m[1] = svd.u.bottomRows(left);
  Eigen::MatrixXcd sv = s.asDiagonal() * svd.v.adjoint();
  b.m[0] = sv.leftCols(right);
  b.m[1] = sv.rightCols(right);
  center_ = i + 1;
  if (a.right() > chi_max_) throw NumericalError("bond dimension exceeded chi_max");
}

void MpsState::truncate(int chi, double cutoff) {
  const int n = n_qubits();
  move_center(n - 1);
  for (int i = n - 1; i > 0; --i) {
    auto& a = sites_[i - 1];
    auto& b = sites_[i];
    Eigen::MatrixXcd m = stack_cols(b);
    auto svd = truncated_svd(m, chi, cutoff);
    truncation_error_ += svd.discarded_weight;
    Eigen::MatrixXcd vh = svd.v.adjoint();
    const Eigen::Index right = b.right();
    b.m[0] = vh.leftCols(right);
    b.m[1] = vh.rightCols(right);
    Eigen::MatrixXcd us = svd.u * svd.s.asDiagonal();
    a.m[0] = a.m[0] * us;
    a.m[1] = a.m[1] * us;
    center_ = i - 1;
  }
  chi_max_ = std::max(chi_max_, 1);
}

void MpsState::scale(cplx factor) {
  auto& t = sites_[center_];
  t.m[0] *= factor;
  t.m[1] *= factor;
}

double MpsState::norm_squared() const {
  const auto& t = sites_[center_];
  return t.m[0].squaredNorm() + t.m[1].squaredNorm();
}

void MpsState::normalize() {
  const double n2 = norm_squared();
  if (n2 <= 0.0) throw NumericalError("cannot normalize a zero state");
  scale(1.0 / std::sqrt(n2));
}

cplx MpsState::amplitude(const Occupation& bits) const {
  if (static_cast<int>(bits.size()) != n_qubits()) throw DomainError("bitstring length mismatch");
  Eigen::MatrixXcd acc = sites_[0].m[bits[0] ? 1 : 0];
  for (int i = 1; i < n_qubits(); ++i) acc = acc * sites_[i].m[bits[i] ? 1 : 0];
  return acc(0, 0);
}

Eigen::VectorXcd MpsState::to_dense() const {
  if (n_qubits() > 26) throw CapabilityError("dense conversion limited to 26 qubits");
  // rows: configurations of qubits processed so far (first qubit most significant).
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Ones(1, 1);
  for (const auto& t : sites_) {
    Eigen::MatrixXcd next(acc.rows() * 2, t.right());
    for (Eigen::Index r = 0; r < acc.rows(); ++r) {
      next.row(2 * r) = acc.row(r) * t.m[0];
      next.row(2 * r + 1) = acc.row(r) * t.m[1];
    }
    acc = std::move(next);
  }
  return acc.col(0);
}

double MpsState::entanglement_entropy(int bond) const {
  if (bond < 1 || bond >= n_qubits()) throw DomainError("bond out of range");
  MpsState copy = *this;
  copy.move_center(bond - 1);
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(stack_rows(copy.sites_[bond - 1]));
  const Eigen::VectorXd& s = svd.singularValues();
  const double total = s.squaredNorm();
  double ent = 0.0;
  for (Eigen::Index k = 0; k < s.size(); ++k) {
    const double p = s(k) * s(k) / total;
    if (p > 1e-300) ent -= p * std::log(p);
  }
  return ent;
}

cplx inner_product(const MpsState& a, const MpsState& b) {
  if (a.n_qubits() != b.n_qubits()) {
    throw DomainError(fmt::format("inner product of {}- and {}-qubit states", a.n_qubits(), b.n_qubits()));
  }
  Eigen::MatrixXcd env = Eigen::MatrixXcd::Ones(1, 1);
  for (int i = 0; i < a.n_qubits(); ++i) {
    const auto& ta = a.site(i);
    const auto& tb = b.site(i);
    Eigen::MatrixXcd next = ta.m[0].adjoint() * env * tb.m[0];
    next.noalias() += ta.m[1].adjoint() * env * tb.m[1];
    env = std::move(next);
  }
  return env(0, 0);
}

void MpsState::save(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  write_pod(out, kCheckpointVersion);
  write_pod(out, static_cast<std::uint32_t>(n_qubits()));
  write_pod(out, static_cast<std::uint32_t>(chi_max_));
  write_pod(out, static_cast<std::int32_t>(center_));
  write_pod(out, cutoff_);
  write_pod(out, truncation_error_);
  for (const auto& t : sites_) {
    write_pod(out, static_cast<std::uint32_t>(t.left()));
    write_pod(out, static_cast<std::uint32_t>(t.right()));
    for (const auto& m : t.m) {
      out.write(reinterpret_cast<const char*>(m.data()),
                static_cast<std::streamsize>(m.size() * sizeof(cplx)));
    }
  }
  if (!out) throw NumericalError("failed to write MPS checkpoint");
}

MpsState MpsState::load(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw ConfigError("not an MPS checkpoint");
  }
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCheckpointVersion) {
    throw ConfigError(fmt::format("unsupported MPS checkpoint version {}", version));
  }
  MpsState s;
  const auto n = read_pod<std::uint32_t>(in);
  s.chi_max_ = static_cast<int>(read_pod<std::uint32_t>(in));
  s.center_ = read_pod<std::int32_t>(in);
  s.cutoff_ = read_pod<double>(in);
  s.truncation_error_ = read_pod<double>(in);
  if (n == 0 || s.center_ < 0 || s.center_ >= static_cast<int>(n)) {
    throw ConfigError("corrupt MPS checkpoint header");
  }
  s.sites_.resize(n);
  for (auto& t : s.sites_) {
    const auto rows = read_pod<std::uint32_t>(in);
    const auto cols = read_pod<std::uint32_t>(in);
    for (auto& m : t.m) {
      m.resize(rows, cols);
      in.read(reinterpret_cast<char*>(m.data()), static_cast<std::streamsize>(m.size() * sizeof(cplx)));
      if (!in) throw ConfigError("truncated MPS checkpoint");
    }
  }
  return s;
}

void MpsState::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write '{}'", path));
  save(out);
}

MpsState MpsState::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read '{}'", path));
  return load(in);
}

bool operator==(const MpsState& a, const MpsState& b) {
  if (a.n_qubits() != b.n_qubits() || a.chi_max_ != b.chi_max_ || a.center_ != b.center_ ||
      std::memcmp(&a.cutoff_, &b.cutoff_, sizeof(double)) != 0) {
    return false;
  }
  for (int i = 0; i < a.n_qubits(); ++i) {
    for (int s = 0; s < 2; ++s) {
      const auto& x = a.sites_[i].m[s];
      const auto& y = b.sites_[i].m[s];
      if (x.rows() != y.rows() || x.cols() != y.cols()) return false;
      if (std::memcmp(x.data(), y.data(), x.size() * sizeof(cplx)) != 0) return false;
    }
  }
  return true;
}

}  // namespace tnvqe
