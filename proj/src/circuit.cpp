#include "tnvqe/circuit.hpp"

#include <algorithm>
#include <sstream>

#include <fmt/format.h>

#include "tnvqe/errors.hpp"
#include "tnvqe/gates.hpp"

namespace tnvqe {

std::string to_string(GateKind kind) {
  switch (kind) {
    case GateKind::RZ: return "RZ";
    case GateKind::NP: return "NP";
    case GateKind::EP: return "EP";
    case GateKind::FSWAP: return "FSWAP";
    case GateKind::UCC_FACTOR: return "UCC_FACTOR";
  }
  return "?";
}

std::string to_string(AnsatzFamily family) {
  switch (family) {
    case AnsatzFamily::NP: return "np";
    case AnsatzFamily::EP: return "ep";
    case AnsatzFamily::UCCSD: return "uccsd";
  }
  return "?";
}

AnsatzFamily ansatz_family_from_string(const std::string& name) {
  if (name == "np" || name == "NP") return AnsatzFamily::NP;
  if (name == "ep" || name == "EP") return AnsatzFamily::EP;
  if (name == "uccsd" || name == "UCCSD") return AnsatzFamily::UCCSD;
  throw ConfigError(fmt::format("unknown ansatz family '{}'", name));
}

Circuit::Circuit(int n_qubits, std::vector<GateOp> ops, int n_parameters, AnsatzDescriptor descriptor)
    : n_qubits_(n_qubits), ops_(std::move(ops)), n_parameters_(n_parameters), descriptor_(descriptor) {
  if (n_qubits < 1 || n_parameters < 0) throw DomainError("invalid circuit dimensions");
  std::vector<int> uses(n_parameters, 0);
  for (const auto& op : ops_) {
    std::size_t expected_qubits = 2, expected_slots = 2;
    switch (op.kind) {
      case GateKind::RZ: expected_qubits = 1; expected_slots = 1; break;
      case GateKind::FSWAP: expected_slots = 0; break;
      case GateKind::UCC_FACTOR: expected_qubits = op.qubits.size(); expected_slots = 1; break;
      default: break;
    }
    if (op.qubits.size() != expected_qubits || op.slots.size() != expected_slots) {
      throw DomainError(fmt::format("malformed {} gate", to_string(op.kind)));
    }
    for (int q : op.qubits) {
      if (q < 0 || q >= n_qubits) throw DomainError("gate qubit out of range");
    }
    if (expected_qubits == 2 && op.kind != GateKind::UCC_FACTOR &&
        std::abs(op.qubits[0] - op.qubits[1]) != 1) {
      throw DomainError(fmt::format("{} gate on non-adjacent qubits", to_string(op.kind)));
    }
    for (int s : op.slots) {
      if (s < 0 || s >= n_parameters) throw DomainError("parameter slot out of range");
      ++uses[s];
    }
  }
  if (std::find(uses.begin(), uses.end(), 0) != uses.end()) {
    throw DomainError("unused parameter slot");
  }
}

int np_parameter_count(int nx, int ny, int layers) {
  return 2 * nx * ny + layers * (10 * nx * ny - 4 * nx - 4 * ny);
}

int ep_parameter_count(int nx, int ny, int layers) {
  const int nq = 2 * nx * ny;
  return 2 * nq + layers * 2 * (nq - 1);
}

namespace {

class Builder {
 public:
  explicit Builder(int n_qubits) : n_qubits_(n_qubits) {}

  void rz(int q) { ops_.push_back({GateKind::RZ, {q}, {next_++}, {}}); }

  void pair(GateKind kind, int p, int q) {
    ops_.push_back({kind, {p, q}, {next_, next_ + 1}, {}});
    next_ += 2;
  }

  void fswap(int p, int q) { ops_.push_back({GateKind::FSWAP, {p, q}, {}, {}}); }

  void routed_np(int p, int q) {
    const int lo = std::min(p, q), hi = std::max(p, q);
    for (int k = lo; k + 1 < hi; ++k) fswap(k, k + 1);
    pair(GateKind::NP, hi - 1, hi);
    for (int k = hi - 2; k >= lo; --k) fswap(k, k + 1);
  }

  void ucc(const Excitation& ex) {
    std::vector<int> qubits = ex.occupied;
    qubits.insert(qubits.end(), ex.virtuals.begin(), ex.virtuals.end());
    ops_.push_back({GateKind::UCC_FACTOR, qubits, {next_++}, ex});
  }

  Circuit finish(AnsatzDescriptor d) { return Circuit(n_qubits_, std::move(ops_), next_, d); }

 private:
  int n_qubits_;
  int next_ = 0;
  std::vector<GateOp> ops_;
};

}  // namespace

Circuit build_np_ansatz(const LatticeGeometry& geometry, int layers) {
  if (layers < 1) throw DomainError("NP ansatz needs at least one layer");
  const QubitLayout layout(geometry.n_sites());
  Builder b(geometry.n_qubits());
  for (int q = 0; q < geometry.n_qubits(); ++q) b.rz(q);
  auto in_group = [&](const Bond& bond, BondDirection dir, int parity) {
    if (bond.direction != dir) return false;
    const auto [x, y] = geometry.coords(bond.first);
    return ((dir == BondDirection::Horizontal ? y : x) % 2) == parity;
  };
  const std::pair<BondDirection, int> groups[] = {{BondDirection::Horizontal, 1},
                                                  {BondDirection::Vertical, 1},
                                                  {BondDirection::Horizontal, 0},
                                                  {BondDirection::Vertical, 0}};
  for (int l = 0; l < layers; ++l) {
    for (int s = 0; s < geometry.n_sites(); ++s) {
      b.pair(GateKind::NP, layout.qubit(s, Spin::Up), layout.qubit(s, Spin::Down));
    }
    for (const auto& [dir, parity] : groups) {
      for (const auto& bond : geometry.bonds()) {
        if (!in_group(bond, dir, parity)) continue;
        for (Spin spin : {Spin::Up, Spin::Down}) {
          b.routed_np(layout.qubit(bond.first, spin), layout.qubit(bond.second, spin));
        }
      }
    }
  }
  return b.finish({AnsatzFamily::NP, layers, geometry.nx(), geometry.ny()});
}

Circuit build_ep_ansatz(const LatticeGeometry& geometry, int layers) {
  if (layers < 1) throw DomainError("EP ansatz needs at least one layer");
  const int nq = geometry.n_qubits();
  Builder b(nq);
  for (int q = 0; q < nq; ++q) b.rz(q);
  for (int l = 0; l < layers; ++l) {
    for (int q = 0; q + 1 < nq; ++q) b.pair(GateKind::EP, q, q + 1);
  }
  for (int q = 0; q < nq; ++q) b.rz(q);
  return b.finish({AnsatzFamily::EP, layers, geometry.nx(), geometry.ny()});
}

std::vector<Excitation> uccsd_excitations(const Occupation& reference, const QubitLayout& layout) {
  if (static_cast<int>(reference.size()) != layout.n_qubits()) {
    throw DomainError("reference length does not match layout");
  }
  std::vector<int> occ, virt;
  for (int q = 0; q < layout.n_qubits(); ++q) (reference[q] ? occ : virt).push_back(q);
  auto spin = [&](int q) { return static_cast<int>(layout.spin_of(q)); };
  std::vector<Excitation> out;
  for (int i : occ) {
    for (int a : virt) {
      if (spin(i) == spin(a)) out.push_back({{i}, {a}});
    }
  }
  for (std::size_t i = 0; i < occ.size(); ++i) {
    for (std::size_t j = i + 1; j < occ.size(); ++j) {
      const int so = spin(occ[i]) + spin(occ[j]);
      const int do_ = spin(occ[i]) * spin(occ[j]);
      for (std::size_t a = 0; a < virt.size(); ++a) {
        for (std::size_t c = a + 1; c < virt.size(); ++c) {
          // Same spin multiset: equal sum and product of 0/1 labels.
          if (spin(virt[a]) + spin(virt[c]) != so || spin(virt[a]) * spin(virt[c]) != do_) continue;
          out.push_back({{occ[i], occ[j]}, {virt[a], virt[c]}});
        }
      }
    }
  }
  return out;
}

int uccsd_parameter_count(const Occupation& reference, const QubitLayout& layout) {
  return static_cast<int>(uccsd_excitations(reference, layout).size());
}

Circuit build_uccsd_ansatz(const LatticeGeometry& geometry, const Occupation& reference) {
  if (geometry.n_qubits() > kUccQubitBudget) {
    throw CapabilityError(fmt::format("UCCSD limited to {} qubits, lattice needs {}", kUccQubitBudget,
                                      geometry.n_qubits()));
  }
  const QubitLayout layout(geometry.n_sites());
  Builder b(geometry.n_qubits());
  for (const auto& ex : uccsd_excitations(reference, layout)) b.ucc(ex);
  return b.finish({AnsatzFamily::UCCSD, 0, geometry.nx(), geometry.ny()});
}

Circuit build_ansatz(AnsatzFamily family, const LatticeGeometry& geometry, int layers) {
  switch (family) {
    case AnsatzFamily::NP: return build_np_ansatz(geometry, layers);
    case AnsatzFamily::EP: return build_ep_ansatz(geometry, layers);
    case AnsatzFamily::UCCSD:
      return build_uccsd_ansatz(geometry, checkerboard_occupation(geometry, QubitLayout(geometry.n_sites())));
  }
  throw DomainError("unknown ansatz family");
}

std::string to_text(const Circuit& circuit) {
  const auto& d = circuit.descriptor();
  std::ostringstream out;
  out << fmt::format("circuit {} layers={} lattice={}x{} qubits={} parameters={} gates={}\n",
                     to_string(d.family), d.layers, d.nx, d.ny, circuit.n_qubits(),
                     circuit.n_parameters(), circuit.ops().size());
  for (const auto& op : circuit.ops()) {
    out << to_string(op.kind);
    if (op.kind == GateKind::UCC_FACTOR) {
      out << " occ";
      for (int q : op.excitation.occupied) out << ' ' << q;
      out << " virt";
      for (int q : op.excitation.virtuals) out << ' ' << q;
    } else {
      for (int q : op.qubits) out << ' ' << q;
    }
    out << " |";
    for (int s : op.slots) out << ' ' << s;
    out << '\n';
  }
  return out.str();
}

namespace {

void check_params(const Circuit& c, const Eigen::VectorXd& params) {
  if (params.size() != c.n_parameters()) {
    throw DomainError(fmt::format("expected {} parameters, got {}", c.n_parameters(), params.size()));
  }
}

NpForm pair_form(const GateOp& op, const Eigen::VectorXd& p) {
  switch (op.kind) {
    case GateKind::NP: return np_form(p[op.slots[0]], p[op.slots[1]]);
    case GateKind::EP: return ep_form(p[op.slots[0]], p[op.slots[1]]);
    default: return fswap_form();
  }
}

// Derivative of a two-qubit gate with respect to its k-th slot.
NpForm pair_derivative(const GateOp& op, const Eigen::VectorXd& p, int k) {
  const double th = p[op.slots[0]], ph = p[op.slots[1]];
  if (op.kind == GateKind::NP) return k == 0 ? np_form_dtheta(th, ph) : np_form_dphi(th, ph);
  return k == 0 ? ep_form_dtheta(th, ph) : ep_form_dphi(th, ph);
}

}  // namespace

Eigen::VectorXcd evaluate_dense(const Circuit& circuit, const Eigen::VectorXd& params,
                                const Eigen::VectorXcd& initial) {
  check_params(circuit, params);
  const int n = circuit.n_qubits();
  Eigen::VectorXcd psi = initial;
  for (const auto& op : circuit.ops()) {
    switch (op.kind) {
      case GateKind::RZ: dense::apply_diagonal(psi, n, op.qubits[0], rz_diagonal(params[op.slots[0]])); break;
      case GateKind::UCC_FACTOR: dense::apply_excitation(psi, n, op.excitation, params[op.slots[0]]); break;
      default: dense::apply_np_form(psi, n, op.qubits[0], op.qubits[1], pair_form(op, params)); break;
    }
  }
  return psi;
}

MpsState evaluate(const Circuit& circuit, const Eigen::VectorXd& params, const MpsState& initial) {
  check_params(circuit, params);
  if (initial.n_qubits() != circuit.n_qubits()) throw DomainError("state and circuit sizes differ");
  const int n = circuit.n_qubits();
  MpsState psi = initial;
  const auto& ops = circuit.ops();
  for (std::size_t k = 0; k < ops.size(); ++k) {
    const auto& op = ops[k];
    switch (op.kind) {
      case GateKind::RZ: psi.apply_one_qubit_gate(op.qubits[0], rz(params[op.slots[0]])); break;
      case GateKind::UCC_FACTOR: {
        // Consecutive factors share one dense round trip.
        Eigen::VectorXcd v = psi.to_dense();
        for (; k < ops.size() && ops[k].kind == GateKind::UCC_FACTOR; ++k) {
          dense::apply_excitation(v, n, ops[k].excitation, params[ops[k].slots[0]]);
        }
        --k;
        psi = MpsState::from_dense(v, psi.chi_max(), psi.cutoff());
        break;
      }
      default: psi.apply_two_qubit_gate(op.qubits[0], op.qubits[1], pair_form(op, params).matrix()); break;
    }
  }
  return psi;
}

Eigen::VectorXd adjoint_gradient_dense(const Circuit& circuit, const Eigen::VectorXd& params,
                                       Eigen::VectorXcd psi, Eigen::VectorXcd lambda) {
  check_params(circuit, params);
  const int n = circuit.n_qubits();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(circuit.n_parameters());
  const auto& ops = circuit.ops();
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    const auto& op = *it;
    switch (op.kind) {
      case GateKind::RZ: {
        const int q = op.qubits[0];
        const double th = params[op.slots[0]];
        const Eigen::Vector2cd inv = rz_diagonal(th).conjugate();
        dense::apply_diagonal(psi, n, q, inv);
        grad[op.slots[0]] += 2.0 * dense::sandwich_diagonal(lambda, psi, n, q, rz_diagonal_dtheta(th)).real();
        dense::apply_diagonal(lambda, n, q, inv);
        break;
      }
      case GateKind::UCC_FACTOR: {
        const double th = params[op.slots[0]];
        // dU = K U, so the sandwich uses the state after the factor.
        grad[op.slots[0]] += 2.0 * dense::sandwich_excitation_generator(lambda, psi, n, op.excitation).real();
        dense::apply_excitation(psi, n, op.excitation, -th);
        dense::apply_excitation(lambda, n, op.excitation, -th);
        break;
      }
      default: {
        const int q1 = op.qubits[0], q2 = op.qubits[1];
        const NpForm inv = pair_form(op, params).adjoint();
        dense::apply_np_form(psi, n, q1, q2, inv);
        for (std::size_t k = 0; k < op.slots.size(); ++k) {
          const NpForm dg = pair_derivative(op, params, static_cast<int>(k));
          grad[op.slots[k]] += 2.0 * dense::sandwich_np_form(lambda, psi, n, q1, q2, dg).real();
        }
        dense::apply_np_form(lambda, n, q1, q2, inv);
        break;
      }
    }
  }
  return grad;
}

Eigen::VectorXd adjoint_gradient_mps(const Circuit& circuit, const Eigen::VectorXd& params,
                                     MpsState psi, MpsState lambda) {
  check_params(circuit, params);
  const int n = circuit.n_qubits();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(circuit.n_parameters());
  const auto& ops = circuit.ops();
  for (auto it = ops.rbegin(); it != ops.rend(); ++it) {
    const auto& op = *it;
    switch (op.kind) {
      case GateKind::RZ: {
        const int q = op.qubits[0];
        const double th = params[op.slots[0]];
        const Eigen::Matrix2cd inv = rz(th).adjoint();
        psi.apply_one_qubit_gate(q, inv);
        MpsState d = psi;
        d.apply_one_qubit_operator(q, rz_diagonal_dtheta(th).asDiagonal());
        grad[op.slots[0]] += 2.0 * inner_product(lambda, d).real();
        lambda.apply_one_qubit_gate(q, inv);
        break;
      }
      case GateKind::UCC_FACTOR: {
        const double th = params[op.slots[0]];
        Eigen::VectorXcd vp = psi.to_dense(), vl = lambda.to_dense();
        grad[op.slots[0]] += 2.0 * dense::sandwich_excitation_generator(vl, vp, n, op.excitation).real();
        dense::apply_excitation(vp, n, op.excitation, -th);
        dense::apply_excitation(vl, n, op.excitation, -th);
        psi = MpsState::from_dense(vp, psi.chi_max(), psi.cutoff());
        lambda = MpsState::from_dense(vl, lambda.chi_max(), lambda.cutoff());
        break;
      }
      default: {
        const int q1 = op.qubits[0], q2 = op.qubits[1];
        const Eigen::Matrix4cd inv = pair_form(op, params).adjoint().matrix();
        psi.apply_two_qubit_gate(q1, q2, inv);
        for (std::size_t k = 0; k < op.slots.size(); ++k) {
          MpsState d = psi;
          d.apply_two_qubit_operator(q1, q2, pair_derivative(op, params, static_cast<int>(k)).matrix());
          grad[op.slots[k]] += 2.0 * inner_product(lambda, d).real();
        }
        lambda.apply_two_qubit_gate(q1, q2, inv);
        break;
      }
    }
  }
  return grad;
}

}  // namespace tnvqe
