#include "tnvqe/dmrg.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <fmt/format.h>

#include "tnvqe/errors.hpp"
#include "tnvqe/linalg.hpp"
#include "tnvqe/pauli.hpp"

namespace tnvqe {

namespace {

// Charges are packed as count0 + kChargeRadix * count1.
constexpr int kChargeRadix = 4096;

using Env = std::vector<Eigen::MatrixXcd>;

struct Split {
  Eigen::MatrixXcd u;  // rows (s1, l), left part
  Eigen::VectorXd s;
  Eigen::MatrixXcd v;  // rows (s2, r), right part; theta ~ u s v^H
  std::vector<int> charges;
  double discarded = 0.0;
};

class Sweeper {
 public:
  Sweeper(const MpoOperator& op, const MpsState& initial, const DmrgOptions& opt)
      : op_(op), opt_(opt), n_(op.n_qubits()) {
    if (initial.n_qubits() != n_) throw DomainError("initial state size does not match MPO");
    inc_.assign(n_, 0);
    if (!opt.species.empty()) {
      if (static_cast<int>(opt.species.size()) != n_) throw DomainError("species labels do not match qubits");
      for (int q = 0; q < n_; ++q) {
        if (opt.species[q] != 0 && opt.species[q] != 1) throw DomainError("species label must be 0 or 1");
        inc_[q] = opt.species[q] == 0 ? 1 : kChargeRadix;
      }
    }
    MpsState start = initial;
    start.normalize();
    start.move_center(0);
    sites_.resize(n_);
    for (int i = 0; i < n_; ++i) sites_[i] = start.site(i);
    charges_.assign(n_ + 1, {});
    charges_[0] = {0};
    if (opt.species.empty()) {
      for (int k = 1; k <= n_; ++k) charges_[k].assign(sites_[k - 1].right(), 0);
    } else {
      for (int i = 0; i < n_; ++i) {
        const auto& t = sites_[i];
        if (t.left() != 1 || t.right() != 1) {
          throw DomainError("symmetric DMRG needs a computational basis initial state");
        }
        const bool zero0 = std::abs(t.m[0](0, 0)) == 0.0, zero1 = std::abs(t.m[1](0, 0)) == 0.0;
        if (zero0 == zero1) throw DomainError("symmetric DMRG needs a computational basis initial state");
        charges_[i + 1] = {charges_[i][0] + (zero0 ? inc_[i] : 0)};
      }
    }
    total_ = charges_[n_][0];
    for (int s = 0; s < 2; ++s) {
      left_count_[s].assign(n_ + 1, 0);
      for (int k = 0; k < n_; ++k) {
        left_count_[s][k + 1] = left_count_[s][k] + ((!opt.species.empty() && opt.species[k] == s) ? 1 : 0);
      }
    }
    left_env_.assign(n_ + 1, {});
    right_env_.assign(n_ + 1, {});
    left_env_[0] = {Eigen::MatrixXcd::Ones(1, 1)};
    right_env_[n_] = {Eigen::MatrixXcd::Ones(1, 1)};
    for (int k = n_ - 1; k >= 2; --k) update_right(k);
  }

  void run(DmrgResult& result) {
    double noise = opt_.noise;
    double previous = 0.0;
    for (int sweep = 0; sweep < opt_.max_sweeps; ++sweep) {
      const double chi_d = std::min<double>(opt_.chi_max, opt_.chi_start * std::pow(2.0, sweep));
      chi_ = std::max(1, static_cast<int>(chi_d));
      noise_ = noise < 1e-14 ? 0.0 : noise;
      max_discarded_ = 0.0;
      double energy = 0.0;
      for (int i = 0; i + 1 < n_; ++i) energy = step(i, true);
      for (int i = n_ - 2; i >= 0; --i) energy = step(i, false);
      result.sweep_energies.push_back(energy);
      result.sweeps = sweep + 1;
      result.discarded_weight = max_discarded_;
      const bool settled = noise_ == 0.0 && chi_ == opt_.chi_max;
      if (sweep > 0 && settled && std::abs(energy - previous) < opt_.energy_tol) {
        result.converged = true;
        break;
      }
      previous = energy;
      noise *= opt_.noise_decay;
    }
  }

  MpsState state() const {
    return MpsState::from_tensors(sites_, opt_.chi_max, opt_.cutoff);
  }

 private:
  bool feasible(int bond, int charge) const {
    if (opt_.species.empty()) return true;
    const int c0 = charge % kChargeRadix, c1 = charge / kChargeRadix;
    const int t0 = total_ % kChargeRadix, t1 = total_ / kChargeRadix;
    return c0 >= 0 && c1 >= 0 && c0 <= left_count_[0][bond] && c1 <= left_count_[1][bond] && t0 - c0 >= 0 &&
           t1 - c1 >= 0 && t0 - c0 <= left_count_[0][n_] - left_count_[0][bond] &&
           t1 - c1 <= left_count_[1][n_] - left_count_[1][bond];
  }

  void update_left(int k) {
    // Environment at bond k+1 from site k.
    const auto& w = op_.site(k);
    const auto& a = sites_[k];
    Env next(w.right(), Eigen::MatrixXcd::Zero(a.right(), a.right()));
    for (Eigen::Index l = 0; l < w.left(); ++l) {
      for (int in = 0; in < 2; ++in) {
        const Eigen::MatrixXcd x = left_env_[k][l] * a.m[in];
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
    left_env_[k + 1] = std::move(next);
  }

  void update_right(int k) {
    // Environment at bond k from site k.
    const auto& w = op_.site(k);
    const auto& b = sites_[k];
    Env next(w.left(), Eigen::MatrixXcd::Zero(b.left(), b.left()));
    for (Eigen::Index r = 0; r < w.right(); ++r) {
      for (int in = 0; in < 2; ++in) {
        const Eigen::MatrixXcd x = right_env_[k + 1][r] * b.m[in].transpose();
        for (int out = 0; out < 2; ++out) {
          const auto col = w.at(out, in).col(r);
          if (col.cwiseAbs().maxCoeff() == 0.0) continue;
          const Eigen::MatrixXcd y = b.m[out].conjugate() * x;
          for (Eigen::Index l = 0; l < w.left(); ++l) {
            if (col(l) != cplx(0.0)) next[l] += col(l) * y;
          }
        }
      }
    }
    right_env_[k] = std::move(next);
  }

  // H_eff on the two-site block of sites (i, i+1); blocks indexed 2*s1 + s2.
  void apply_heff(int i, const std::array<Eigen::MatrixXcd, 4>& theta, std::array<Eigen::MatrixXcd, 4>& out) const {
    const auto& w1 = op_.site(i);
    const auto& w2 = op_.site(i + 1);
    const auto& le = left_env_[i];
    const auto& re = right_env_[i + 2];
    const Eigen::Index rows = theta[0].rows(), cols = theta[0].cols();
    // t2[m][2*s1' + s2] = sum_{a,s1} W1(s1',s1)(a,m) L_a theta[s1 s2]
    std::vector<std::array<Eigen::MatrixXcd, 4>> t2(w1.right());
    for (auto& blk : t2) {
      for (auto& m : blk) m = Eigen::MatrixXcd::Zero(rows, cols);
    }
    for (Eigen::Index a = 0; a < w1.left(); ++a) {
      for (int s1 = 0; s1 < 2; ++s1) {
        bool used = false;
        for (int o = 0; o < 2 && !used; ++o) used = w1.at(o, s1).row(a).cwiseAbs().maxCoeff() > 0.0;
        if (!used) continue;
        for (int s2 = 0; s2 < 2; ++s2) {
          const Eigen::MatrixXcd t1 = le[a] * theta[2 * s1 + s2];
          for (int o = 0; o < 2; ++o) {
            const auto row = w1.at(o, s1).row(a);
            for (Eigen::Index m = 0; m < w1.right(); ++m) {
              if (row(m) != cplx(0.0)) t2[m][2 * o + s2] += row(m) * t1;
            }
          }
        }
      }
    }
    // t3[b][2*s1' + s2'] = sum_{m,s2} W2(s2',s2)(m,b) t2[m][s1' s2]
    std::vector<std::array<Eigen::MatrixXcd, 4>> t3(w2.right());
    for (auto& blk : t3) {
      for (auto& m : blk) m = Eigen::MatrixXcd::Zero(rows, cols);
    }
    for (Eigen::Index m = 0; m < w2.left(); ++m) {
      for (int s2 = 0; s2 < 2; ++s2) {
        for (int o = 0; o < 2; ++o) {
          const auto row = w2.at(o, s2).row(m);
          for (Eigen::Index b = 0; b < w2.right(); ++b) {
            if (row(b) == cplx(0.0)) continue;
            for (int s1 = 0; s1 < 2; ++s1) t3[b][2 * s1 + o] += row(b) * t2[m][2 * s1 + s2];
          }
        }
      }
    }
    for (int p = 0; p < 4; ++p) {
      out[p] = Eigen::MatrixXcd::Zero(rows, re[0].rows());
      for (Eigen::Index b = 0; b < w2.right(); ++b) out[p].noalias() += t3[b][p] * re[b].transpose();
    }
  }

  double step(int i, bool moving_right) {
    auto& a = sites_[i];
    auto& b = sites_[i + 1];
    const Eigen::Index cl = a.left(), cr = b.right();
    const auto& ql = charges_[i];
    const auto& qr = charges_[i + 2];
    std::array<Eigen::MatrixXd, 4> mask;
    for (int s1 = 0; s1 < 2; ++s1) {
      for (int s2 = 0; s2 < 2; ++s2) {
        auto& m = mask[2 * s1 + s2];
        m.resize(cl, cr);
        for (Eigen::Index l = 0; l < cl; ++l) {
          for (Eigen::Index r = 0; r < cr; ++r) {
            m(l, r) = (ql[l] + s1 * inc_[i] + s2 * inc_[i + 1] == qr[r]) ? 1.0 : 0.0;
          }
        }
      }
    }
    const Eigen::Index block = cl * cr;
    auto pack = [&](const std::array<Eigen::MatrixXcd, 4>& t) {
      Eigen::VectorXcd v(4 * block);
      for (int p = 0; p < 4; ++p) {
        v.segment(p * block, block) = Eigen::Map<const Eigen::VectorXcd>(t[p].data(), block);
      }
      return v;
    };
    auto unpack = [&](const Eigen::VectorXcd& v) {
      std::array<Eigen::MatrixXcd, 4> t;
      for (int p = 0; p < 4; ++p) {
        t[p] = Eigen::Map<const Eigen::MatrixXcd>(v.data() + p * block, cl, cr).cwiseProduct(mask[p].cast<cplx>());
      }
      return t;
    };
    std::array<Eigen::MatrixXcd, 4> theta;
    for (int s1 = 0; s1 < 2; ++s1) {
      for (int s2 = 0; s2 < 2; ++s2) theta[2 * s1 + s2] = (a.m[s1] * b.m[s2]).cwiseProduct(mask[2 * s1 + s2].cast<cplx>());
    }
    Eigen::VectorXcd start = pack(theta);
    if (start.norm() == 0.0) throw NumericalError("DMRG two-site block vanished");
    auto heff = [&](const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
      std::array<Eigen::MatrixXcd, 4> h;
      apply_heff(i, unpack(in), h);
      out = pack(unpack(pack(h)));
    };
    const auto eig = lanczos_lowest(heff, start, opt_.lanczos_tol, opt_.lanczos_krylov, 20);
    theta = unpack(eig.vector);

    // Matrix with rows (s1, l) and columns (s2, r).
    Eigen::MatrixXcd m(2 * cl, 2 * cr);
    for (int s1 = 0; s1 < 2; ++s1) {
      for (int s2 = 0; s2 < 2; ++s2) m.block(s1 * cl, s2 * cr, cl, cr) = theta[2 * s1 + s2];
    }
    std::vector<int> row_q(2 * cl), col_q(2 * cr);
    for (int s = 0; s < 2; ++s) {
      for (Eigen::Index l = 0; l < cl; ++l) row_q[s * cl + l] = ql[l] + s * inc_[i];
      for (Eigen::Index r = 0; r < cr; ++r) col_q[s * cr + r] = qr[r] - s * inc_[i + 1];
    }
    Split sp = split(m, row_q, col_q);
    max_discarded_ = std::max(max_discarded_, sp.discarded);
    if (noise_ > 0.0) enrich(sp, row_q, col_q, i + 1, moving_right);

    Eigen::MatrixXcd left, right;  // left: (2cl x k), right: (k x 2cr)
    if (moving_right) {
      left = sp.u;
      right = sp.s.asDiagonal() * sp.v.adjoint();
    } else {
      left = sp.u * sp.s.asDiagonal();
      right = sp.v.adjoint();
    }
    a.m[0] = left.topRows(cl);
    a.m[1] = left.bottomRows(cl);
    b.m[0] = right.leftCols(cr);
    b.m[1] = right.rightCols(cr);
    charges_[i + 1] = sp.charges;
    if (moving_right) {
      update_left(i);
    } else {
      update_right(i + 1);
    }
    return eig.value;
  }

  // Block-diagonal SVD by charge, truncated to (chi_, cutoff).
  Split split(const Eigen::MatrixXcd& m, const std::vector<int>& row_q, const std::vector<int>& col_q) const {
    std::map<int, std::vector<Eigen::Index>> rows, cols;
    for (Eigen::Index r = 0; r < m.rows(); ++r) rows[row_q[r]].push_back(r);
    for (Eigen::Index c = 0; c < m.cols(); ++c) cols[col_q[c]].push_back(c);
    struct Entry {
      double s;
      int charge;
      Eigen::Index k;
    };
    std::map<int, Eigen::BDCSVD<Eigen::MatrixXcd>> svds;
    std::vector<Entry> entries;
    for (const auto& [q, rs] : rows) {
      auto it = cols.find(q);
      if (it == cols.end()) continue;
      const auto& cs = it->second;
      Eigen::MatrixXcd sub(rs.size(), cs.size());
      for (std::size_t x = 0; x < rs.size(); ++x) {
        for (std::size_t y = 0; y < cs.size(); ++y) sub(x, y) = m(rs[x], cs[y]);
      }
      auto [pos, inserted] = svds.emplace(q, Eigen::BDCSVD<Eigen::MatrixXcd>(sub, Eigen::ComputeThinU | Eigen::ComputeThinV));
      const auto& sv = pos->second.singularValues();
      for (Eigen::Index k = 0; k < sv.size(); ++k) entries.push_back({sv(k), q, k});
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
      if (x.s != y.s) return x.s > y.s;
      if (x.charge != y.charge) return x.charge < y.charge;
      return x.k < y.k;
    });
    const double smax = entries.empty() ? 0.0 : entries.front().s;
    std::size_t keep = 0;
    while (keep < entries.size() && keep < static_cast<std::size_t>(chi_) && entries[keep].s > 0.0 &&
           entries[keep].s >= opt_.cutoff * smax) {
      ++keep;
    }
    keep = std::max<std::size_t>(keep, 1);
    Split out;
    out.u = Eigen::MatrixXcd::Zero(m.rows(), keep);
    out.v = Eigen::MatrixXcd::Zero(m.cols(), keep);
    out.s.resize(keep);
    for (std::size_t j = 0; j < entries.size(); ++j) {
      if (j >= keep) {
        out.discarded += entries[j].s * entries[j].s;
        continue;
      }
      const auto& e = entries[j];
      const auto& svd = svds.at(e.charge);
      const auto& rs = rows.at(e.charge);
      const auto& cs = cols.at(e.charge);
      const Eigen::MatrixXcd& u = svd.matrixU();
      const Eigen::MatrixXcd& v = svd.matrixV();
      for (std::size_t x = 0; x < rs.size(); ++x) out.u(rs[x], j) = u(x, e.k);
      for (std::size_t y = 0; y < cs.size(); ++y) out.v(cs[y], j) = v(y, e.k);
      out.s(j) = e.s;
      out.charges.push_back(e.charge);
    }
    canonicalize_phases(out.u, out.v);
    return out;
  }

  // Appends orthonormal complement directions on the isometric side so that
  // charge sectors absent from the current state can be explored later. The
  // other side receives weight noise_ * s_max on one compatible entry.
  void enrich(Split& sp, const std::vector<int>& row_q, const std::vector<int>& col_q, int bond,
              bool moving_right) const {
    Eigen::MatrixXcd& iso = moving_right ? sp.u : sp.v;
    const std::vector<int>& iso_q = moving_right ? row_q : col_q;
    const std::vector<int>& other_q = moving_right ? col_q : row_q;
    const Eigen::Index dim = iso.rows();
    const double weight = noise_ * (sp.s.size() > 0 ? sp.s(0) : 1.0);
    std::vector<Eigen::VectorXcd> added;
    std::vector<int> added_q;
    for (int pass = 0; pass < 2; ++pass) {
      for (Eigen::Index r = 0; r < dim; ++r) {
        if (static_cast<int>(sp.s.size() + added.size()) >= chi_) break;
        const int q = iso_q[r];
        if (!feasible(bond, q)) continue;
        const bool has_partner = std::find(other_q.begin(), other_q.end(), q) != other_q.end();
        // Directions with a compatible partner index first.
        if ((pass == 0) != has_partner) continue;
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(dim);
        e(r) = 1.0;
        for (int rep = 0; rep < 2; ++rep) {
          e -= iso * (iso.adjoint() * e);
          for (const auto& x : added) e -= x * x.dot(e);
        }
        const double nrm = e.norm();
        if (nrm < 1e-6) continue;
        added.push_back(e / nrm);
        added_q.push_back(q);
      }
    }
    if (added.empty()) return;
    const Eigen::Index k0 = sp.s.size(), k = k0 + static_cast<Eigen::Index>(added.size());
    Eigen::MatrixXcd iso_new(dim, k), other_new = Eigen::MatrixXcd::Zero(moving_right ? sp.v.rows() : sp.u.rows(), k);
    iso_new.leftCols(k0) = iso;
    other_new.leftCols(k0) = moving_right ? sp.v : sp.u;
    Eigen::VectorXd s_new(k);
    s_new.head(k0) = sp.s;
    for (std::size_t j = 0; j < added.size(); ++j) {
      iso_new.col(k0 + j) = added[j];
      const auto pos = std::find(other_q.begin(), other_q.end(), added_q[j]);
      s_new(k0 + j) = 0.0;
      if (pos != other_q.end()) {
        other_new(pos - other_q.begin(), k0 + j) = 1.0;
        s_new(k0 + j) = weight;
      }
      sp.charges.push_back(added_q[j]);
    }
    if (moving_right) {
      sp.u = std::move(iso_new);
      sp.v = std::move(other_new);
    } else {
      sp.v = std::move(iso_new);
      sp.u = std::move(other_new);
    }
    sp.s = std::move(s_new);
  }

  const MpoOperator& op_;
  DmrgOptions opt_;
  int n_;
  std::vector<int> inc_;
  std::vector<SiteTensor> sites_;
  std::vector<std::vector<int>> charges_;
  std::array<std::vector<int>, 2> left_count_;
  int total_ = 0;
  std::vector<Env> left_env_, right_env_;
  int chi_ = 1;
  double noise_ = 0.0;
  double max_discarded_ = 0.0;
};

}  // namespace

DmrgResult dmrg_ground_state(const MpoOperator& op, const MpsState& initial, const DmrgOptions& options) {
  if (options.chi_max < 1 || options.max_sweeps < 1 || options.chi_start < 1) {
    throw DomainError("invalid DMRG options");
  }
  if (op.n_qubits() < 2) throw DomainError("DMRG needs at least two qubits");
  DmrgResult result;
  MpsState start = initial;
  start.normalize();
  result.initial_energy = expectation(start, op);
  Sweeper sweeper(op, start, options);
  sweeper.run(result);
  result.state = sweeper.state();
  result.state.normalize();
  result.energy = expectation(result.state, op);
  return result;
}

DmrgResult dmrg_ground_state(const HubbardModel& model, DmrgOptions options) {
  const QubitLayout layout(model.geometry.n_sites());
  const auto h = jordan_wigner(model, layout);
  const auto mpo = mpo_from_pauli_sum(h);
  options.species = layout.species();
  const auto start = MpsState::product_state(checkerboard_occupation(model.geometry, layout), options.chi_max,
                                             options.cutoff);
  return dmrg_ground_state(mpo, start, options);
}

}  // namespace tnvqe
