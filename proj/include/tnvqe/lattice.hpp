#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace tnvqe {

enum class BondDirection { Horizontal, Vertical };

// Nearest-neighbour pair of 0-based linear site indices, first < second.
// Horizontal bonds join (x,y)-(x,y+1); vertical bonds join (x,y)-(x+1,y).
struct Bond {
  int first = 0;
  int second = 0;
  BondDirection direction = BondDirection::Horizontal;

  friend bool operator==(const Bond&, const Bond&) = default;
};

// 1-based linear index (x-1)*ny + y of lattice site (x, y).
int site_index(int x, int y, int ny);

// Open-boundary nx-by-ny square lattice.
class LatticeGeometry {
 public:
  LatticeGeometry(int nx, int ny);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  int n_sites() const { return nx_ * ny_; }
  int n_qubits() const { return 2 * nx_ * ny_; }

  // 1-based coordinates of 0-based site s.
  std::pair<int, int> coords(int s) const { return {s / ny_ + 1, s % ny_ + 1}; }

  // Canonical bond list: sites in linear order, for each site the horizontal
  // bond to (x, y+1) before the vertical bond to (x+1, y).
  const std::vector<Bond>& bonds() const { return bonds_; }

  friend bool operator==(const LatticeGeometry& a, const LatticeGeometry& b) {
    return a.nx_ == b.nx_ && a.ny_ == b.ny_;
  }

 private:
  int nx_;
  int ny_;
  std::vector<Bond> bonds_;
};

enum class Spin { Up = 0, Down = 1 };

// Maps (site, spin) to a qubit position in the Jordan-Wigner chain.
class QubitLayout {
 public:
  enum class Kind {
    Interleaved,  // (s,up) -> 2s, (s,down) -> 2s+1
    SpinBlocked,  // (s,up) -> s,  (s,down) -> N+s
  };

  explicit QubitLayout(int n_sites, Kind kind = Kind::Interleaved);

  int n_sites() const { return n_sites_; }
  int n_qubits() const { return 2 * n_sites_; }
  Kind kind() const { return kind_; }

  int qubit(int site, Spin spin) const;
  int site_of(int qubit) const;
  Spin spin_of(int qubit) const;

  // Per-qubit conserved-charge species (0 = up, 1 = down).
  std::vector<int> species() const;

 private:
  int n_sites_;
  Kind kind_;
};

// Occupation of each qubit, 0 or 1, indexed by qubit position.
using Occupation = std::vector<std::uint8_t>;

std::string to_string(const Occupation& occ);
Occupation occupation_from_string(std::string_view bits);

struct ModelConfig {
  int nx = 1;
  int ny = 2;
  double t = 1.0;
  double u = 0.0;
  double v = 0.0;
  double d = 0.0;
  std::uint64_t seed = 0;
};

// Parses "key = value" lines (keys nx, ny, t, u, v, d, seed). Blank lines and
// '#' comments are ignored; unknown keys raise ConfigError.
ModelConfig parse_model_config(std::string_view text);
ModelConfig load_model_config(const std::string& path);

// Realized single-band model. Hopping magnitudes t_RR' are stored per bond
// (aligned with geometry.bonds()); the Hamiltonian carries an explicit minus
// sign on hopping so that d = 0 gives the canonical -t convention.
struct HubbardModel {
  LatticeGeometry geometry{1, 2};
  double t = 1.0;
  double u = 0.0;
  double v = 0.0;
  double disorder = 0.0;
  std::uint64_t seed = 0;
  std::vector<double> hopping;             // per bond
  std::vector<double> chemical_potential;  // per site

  // Same geometry and hopping scale, U = V = d = 0, uniform tables.
  HubbardModel non_interacting() const;
};

// Hopping t + d*g_b for each bond, then chemical potential d*g_s for each
// site, g ~ N(0,1) from GaussianSource(seed). No draws when d == 0.
HubbardModel realize_model(const LatticeGeometry& geometry, double t, double u,
                           double v, double d, std::uint64_t seed);
HubbardModel realize_model(const ModelConfig& config);

nlohmann::json model_to_json(const HubbardModel& model);
HubbardModel model_from_json(const nlohmann::json& doc);

// Half-filled reference: site (x,y) holds an up electron when x+y is even,
// a down electron otherwise.
Occupation checkerboard_occupation(const LatticeGeometry& geometry,
                                   const QubitLayout& layout);

// (N_up, N_down) of an occupation under a layout.
std::pair<int, int> spin_sector(const Occupation& occ, const QubitLayout& layout);

}  // namespace tnvqe
