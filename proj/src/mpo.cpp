#include "tnvqe/mpo.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>

#include <fmt/format.h>

#include "tnvqe/errors.hpp"
#include "tnvqe/linalg.hpp"

namespace tnvqe {

namespace {

constexpr double kCompressCutoff = 1e-13;

Eigen::Matrix2cd pauli_matrix(char p) {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  switch (p) {
    case 'I': m(0, 0) = 1.0; m(1, 1) = 1.0; break;
    case 'X': m(0, 1) = 1.0; m(1, 0) = 1.0; break;
    case 'Y': m(0, 1) = cplx(0, -1); m(1, 0) = cplx(0, 1); break;
    case 'Z': m(0, 0) = 1.0; m(1, 1) = -1.0; break;
    default: throw DomainError(fmt::format("invalid Pauli symbol '{}'", p));
  }
  return m;
}

// Automaton state of one term at one bond.
std::string state_key(const std::string& ops, int first, int last, int bond) {
  if (bond <= first) return "S";
  if (bond > last) return "E";
  return fmt::format("P{}:{}", first, ops.substr(first, bond - first));
}

void compress_sweeps(std::vector<MpoSite>& sites) {
  const int n = static_cast<int>(sites.size());
  for (int j = 0; j + 1 < n; ++j) {
    auto& s = sites[j];
    const Eigen::Index wl = s.left(), wr = s.right();
    Eigen::MatrixXcd m(4 * wl, wr);
    for (int p = 0; p < 4; ++p) m.middleRows(p * wl, wl) = s.w[p];
    auto svd = truncated_svd(m, static_cast<int>(std::min(m.rows(), m.cols())), kCompressCutoff);
    for (int p = 0; p < 4; ++p) s.w[p] = svd.u.middleRows(p * wl, wl);
    Eigen::MatrixXcd carry = svd.s.asDiagonal() * svd.v.adjoint();
    for (auto& w : sites[j + 1].w) w = carry * w;
  }
  for (int j = n - 1; j > 0; --j) {
    auto& s = sites[j];
    const Eigen::Index wl = s.left(), wr = s.right();
    Eigen::MatrixXcd m(wl, 4 * wr);
    for (int p = 0; p < 4; ++p) m.middleCols(p * wr, wr) = s.w[p];
    auto svd = truncated_svd(m, static_cast<int>(std::min(m.rows(), m.cols())), kCompressCutoff);
    Eigen::MatrixXcd vh = svd.v.adjoint();
    for (int p = 0; p < 4; ++p) s.w[p] = vh.middleCols(p * wr, wr);
    Eigen::MatrixXcd carry = svd.u * svd.s.asDiagonal();
    for (auto& w : sites[j - 1].w) w = w * carry;
  }
}

}  // namespace

MpoOperator::MpoOperator(std::vector<MpoSite> sites) : sites_(std::move(sites)) {
  if (sites_.empty()) throw DomainError("MPO needs at least one site");
  if (sites_.front().left() != 1 || sites_.back().right() != 1) {
    throw DomainError("MPO boundary bonds must have dimension 1");
  }
  for (std::size_t i = 0; i + 1 < sites_.size(); ++i) {
    if (sites_[i].right() != sites_[i + 1].left()) throw DomainError("MPO bond mismatch");
  }
}

std::vector<int> MpoOperator::bond_dimensions() const {
  std::vector<int> dims{static_cast<int>(sites_.front().left())};
  for (const auto& s : sites_) dims.push_back(static_cast<int>(s.right()));
  return dims;
}

int MpoOperator::max_bond_dimension() const {
  const auto d = bond_dimensions();
  return *std::max_element(d.begin(), d.end());
}

MpoOperator mpo_from_pauli_sum(const PauliSum& h, bool compress) {
  const int n = h.n_qubits();
  struct Term {
    const std::string* ops;
    double coefficient;
    int first, last;
  };
  std::vector<Term> terms;
  for (const auto& [ops, c] : h.terms()) {
    int first = 0, last = 0;
    const auto f = ops.find_first_not_of('I');
    if (f != std::string::npos) {
      first = static_cast<int>(f);
      last = static_cast<int>(ops.find_last_not_of('I'));
    }
    terms.push_back({&ops, c, first, last});
  }
  // Number the automaton states at every bond in order of first appearance.
  std::vector<std::map<std::string, int>> states(n + 1);
  states[0]["S"] = 0;
  states[n]["E"] = 0;
  for (int k = 1; k < n; ++k) {
    for (const auto& t : terms) {
      const auto key = state_key(*t.ops, t.first, t.last, k);
      states[k].try_emplace(key, static_cast<int>(states[k].size()));
    }
  }
  std::vector<MpoSite> sites(n);
  for (int j = 0; j < n; ++j) {
    const auto wl = static_cast<Eigen::Index>(states[j].size());
    const auto wr = static_cast<Eigen::Index>(states[j + 1].size());
    for (auto& w : sites[j].w) w = Eigen::MatrixXcd::Zero(wl, wr);
    std::set<std::pair<int, int>> fixed;
    for (const auto& t : terms) {
      const int a = states[j].at(state_key(*t.ops, t.first, t.last, j));
      const int b = states[j + 1].at(state_key(*t.ops, t.first, t.last, j + 1));
      const Eigen::Matrix2cd p = pauli_matrix((*t.ops)[j]);
      if (j == t.last && (j >= t.first)) {
        // Closing transition carries the coefficient; distinct terms add.
        for (int o = 0; o < 2; ++o) {
          for (int i = 0; i < 2; ++i) sites[j].w[2 * o + i](a, b) += t.coefficient * p(o, i);
        }
      } else if (fixed.insert({a, b}).second) {
        for (int o = 0; o < 2; ++o) {
          for (int i = 0; i < 2; ++i) sites[j].w[2 * o + i](a, b) = p(o, i);
        }
      }
    }
  }
  if (compress && n > 1) compress_sweeps(sites);
  return MpoOperator(std::move(sites));
}

Eigen::MatrixXcd to_dense(const MpoOperator& op) {
  const int n = op.n_qubits();
  if (n > 14) throw CapabilityError("dense MPO reconstruction limited to 14 qubits");
  // blocks[b] is the partial operator on qubits processed so far, for right
  // virtual index b.
  std::vector<Eigen::MatrixXcd> blocks(1, Eigen::MatrixXcd::Ones(1, 1));
  for (int j = 0; j < n; ++j) {
    const auto& s = op.site(j);
    const Eigen::Index dim = blocks[0].rows();
    std::vector<Eigen::MatrixXcd> next(s.right(), Eigen::MatrixXcd::Zero(2 * dim, 2 * dim));
    for (Eigen::Index a = 0; a < s.left(); ++a) {
      for (Eigen::Index b = 0; b < s.right(); ++b) {
        for (int o = 0; o < 2; ++o) {
          for (int i = 0; i < 2; ++i) {
            const cplx w = s.at(o, i)(a, b);
            if (w == cplx(0.0)) continue;
            // New qubit is the least significant digit so far.
            for (Eigen::Index r = 0; r < dim; ++r) {
              for (Eigen::Index c = 0; c < dim; ++c) {
                next[b](2 * r + o, 2 * c + i) += w * blocks[a](r, c);
              }
            }
          }
        }
      }
    }
    blocks = std::move(next);
  }
  return blocks[0];
}

cplx matrix_element(const MpsState& bra, const MpoOperator& op, const MpsState& ket) {
  if (bra.n_qubits() != op.n_qubits() || ket.n_qubits() != op.n_qubits()) {
    throw DomainError("MPO and MPS sizes differ");
  }
  std::vector<Eigen::MatrixXcd> env(1, Eigen::MatrixXcd::Ones(1, 1));
  for (int j = 0; j < op.n_qubits(); ++j) {
    const auto& w = op.site(j);
    const auto& a = bra.site(j);
    const auto& b = ket.site(j);
    std::vector<Eigen::MatrixXcd> next(w.right(), Eigen::MatrixXcd::Zero(a.right(), b.right()));
    for (Eigen::Index l = 0; l < w.left(); ++l) {
      for (int in = 0; in < 2; ++in) {
        bool any = false;
        for (int out = 0; out < 2 && !any; ++out) any = w.at(out, in).row(l).cwiseAbs().maxCoeff() > 0.0;
        if (!any) continue;
        const Eigen::MatrixXcd x = env[l] * b.m[in];
        for (int out = 0; out < 2; ++out) {
          const auto row = w.at(out, in).row(l);
          if (row.cwiseAbs().maxCoeff() == 0.0) continue;
          const Eigen::MatrixXcd y = a.m[out].adjoint() * x;
          for (Eigen::Index r = 0; r < w.right(); ++r) {
            if (row(r) != cplx(0.0)) next[r] += row(r) * y;
          }
        }
      }
    }
    env = std::move(next);
  }
  return env[0](0, 0);
}

double expectation(const MpsState& psi, const MpoOperator& op) {
  const cplx e = matrix_element(psi, op, psi);
  if (std::abs(e.imag()) > 1e-9) {
    throw NumericalError(fmt::format("expectation value has imaginary part {:.3e}", e.imag()));
  }
  return e.real();
}

MpsState apply_mpo(const MpoOperator& op, const MpsState& psi, int chi_max, double cutoff) {
  if (psi.n_qubits() != op.n_qubits()) throw DomainError("MPO and MPS sizes differ");
  std::vector<SiteTensor> out(op.n_qubits());
  for (int j = 0; j < op.n_qubits(); ++j) {
    const auto& w = op.site(j);
    const auto& a = psi.site(j);
    const Eigen::Index cl = a.left(), cr = a.right();
    for (int o = 0; o < 2; ++o) {
      Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(w.left() * cl, w.right() * cr);
      for (int i = 0; i < 2; ++i) {
        const auto& wm = w.at(o, i);
        for (Eigen::Index l = 0; l < w.left(); ++l) {
          for (Eigen::Index r = 0; r < w.right(); ++r) {
            if (wm(l, r) != cplx(0.0)) m.block(l * cl, r * cr, cl, cr) += wm(l, r) * a.m[i];
          }
        }
      }
      out[j].m[o] = std::move(m);
    }
  }
  auto result = MpsState::from_tensors(std::move(out), chi_max, cutoff);
  result.truncate(chi_max, cutoff);
  return result;
}

}  // namespace tnvqe
