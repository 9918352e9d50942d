#include "tnvqe/lattice.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "tnvqe/errors.hpp"
#include "tnvqe/rng.hpp"

namespace tnvqe {

int site_index(int x, int y, int ny) {
  if (ny < 1 || x < 1 || y < 1 || y > ny) {
    throw DomainError(fmt::format("site ({}, {}) out of range for ny = {}", x, y, ny));
  }
  return (x - 1) * ny + y;
}

LatticeGeometry::LatticeGeometry(int nx, int ny) : nx_(nx), ny_(ny) {
  if (nx < 1 || ny < 1) {
    throw DomainError(fmt::format("lattice {}x{} is not positive", nx, ny));
  }
  if (nx * ny < 2) {
    throw DomainError("lattice must have at least two sites");
  }
  for (int s = 0; s < nx * ny; ++s) {
    const int x = s / ny;
    const int y = s % ny;
    if (y + 1 < ny) bonds_.push_back({s, s + 1, BondDirection::Horizontal});
    if (x + 1 < nx) bonds_.push_back({s, s + ny, BondDirection::Vertical});
  }
}

QubitLayout::QubitLayout(int n_sites, Kind kind) : n_sites_(n_sites), kind_(kind) {
  if (n_sites < 1) throw DomainError("layout needs at least one site");
}

int QubitLayout::qubit(int site, Spin spin) const {
  if (site < 0 || site >= n_sites_) {
    throw DomainError(fmt::format("site {} out of range", site));
  }
  const int s = static_cast<int>(spin);
  return kind_ == Kind::Interleaved ? 2 * site + s : s * n_sites_ + site;
}

int QubitLayout::site_of(int qubit) const {
  return kind_ == Kind::Interleaved ? qubit / 2 : qubit % n_sites_;
}

Spin QubitLayout::spin_of(int qubit) const {
  const int s = kind_ == Kind::Interleaved ? qubit % 2 : qubit / n_sites_;
  return static_cast<Spin>(s);
}

std::vector<int> QubitLayout::species() const {
  std::vector<int> out(n_qubits());
  for (int q = 0; q < n_qubits(); ++q) out[q] = static_cast<int>(spin_of(q));
  return out;
}

std::string to_string(const Occupation& occ) {
  std::string s;
  s.reserve(occ.size());
  for (auto b : occ) s.push_back(b ? '1' : '0');
  return s;
}

Occupation occupation_from_string(std::string_view bits) {
  Occupation occ;
  occ.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') throw DomainError(fmt::format("bad bitstring '{}'", bits));
    occ.push_back(c == '1');
  }
  return occ;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
T parse_number(std::string_view key, std::string_view value) {
  T out{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError(fmt::format("invalid value '{}' for key '{}'", value, key));
  }
  return out;
}

}  // namespace

ModelConfig parse_model_config(std::string_view text) {
  ModelConfig cfg;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    }
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    if (key == "nx") cfg.nx = parse_number<int>(key, value);
    else if (key == "ny") cfg.ny = parse_number<int>(key, value);
    else if (key == "t") cfg.t = parse_number<double>(key, value);
    else if (key == "u") cfg.u = parse_number<double>(key, value);
    else if (key == "v") cfg.v = parse_number<double>(key, value);
    else if (key == "d") cfg.d = parse_number<double>(key, value);
    else if (key == "seed") cfg.seed = parse_number<std::uint64_t>(key, value);
    else throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key));
  }
  return cfg;
}

ModelConfig load_model_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_model_config(buf.str());
}

HubbardModel HubbardModel::non_interacting() const {
  HubbardModel m = *this;
  m.u = 0.0;
  m.v = 0.0;
  m.disorder = 0.0;
  m.hopping.assign(geometry.bonds().size(), t);
  m.chemical_potential.assign(geometry.n_sites(), 0.0);
  return m;
}

HubbardModel realize_model(const LatticeGeometry& geometry, double t, double u,
                           double v, double d, std::uint64_t seed) {
  if (!(t > 0.0)) throw DomainError("hopping scale t must be positive");
  if (!(d >= 0.0)) throw DomainError("disorder d must be non-negative");
  if (!(v >= 0.0)) throw DomainError("nearest-neighbour V must be non-negative");
  HubbardModel m;
  m.geometry = geometry;
  m.t = t;
  m.u = u;
  m.v = v;
  m.disorder = d;
  m.seed = seed;
  m.hopping.assign(geometry.bonds().size(), t);
  m.chemical_potential.assign(geometry.n_sites(), 0.0);
  if (d > 0.0) {
    GaussianSource gauss(seed);
    for (auto& h : m.hopping) h = t + d * gauss.normal();
    for (auto& mu : m.chemical_potential) mu = d * gauss.normal();
  }
  return m;
}

HubbardModel realize_model(const ModelConfig& c) {
  return realize_model(LatticeGeometry(c.nx, c.ny), c.t, c.u, c.v, c.d, c.seed);
}

nlohmann::json model_to_json(const HubbardModel& m) {
  nlohmann::json bonds = nlohmann::json::array();
  for (std::size_t i = 0; i < m.geometry.bonds().size(); ++i) {
    const auto& b = m.geometry.bonds()[i];
    bonds.push_back({{"sites", {b.first, b.second}},
                     {"direction", b.direction == BondDirection::Horizontal ? "h" : "v"},
                     {"t", m.hopping[i]}});
  }
  return {{"nx", m.geometry.nx()},
          {"ny", m.geometry.ny()},
          {"t", m.t},
          {"u", m.u},
          {"v", m.v},
          {"d", m.disorder},
          {"seed", m.seed},
          {"generator", std::string(kGeneratorId)},
          {"bonds", bonds},
          {"chemical_potential", m.chemical_potential}};
}

HubbardModel model_from_json(const nlohmann::json& doc) {
  try {
    HubbardModel m;
    m.geometry = LatticeGeometry(doc.at("nx").get<int>(), doc.at("ny").get<int>());
    m.t = doc.at("t").get<double>();
    m.u = doc.at("u").get<double>();
    m.v = doc.at("v").get<double>();
    m.disorder = doc.at("d").get<double>();
    m.seed = doc.at("seed").get<std::uint64_t>();
    const auto& bonds = doc.at("bonds");
    if (bonds.size() != m.geometry.bonds().size()) {
      throw ConfigError("bond table does not match geometry");
    }
    for (std::size_t i = 0; i < bonds.size(); ++i) {
      const auto sites = bonds[i].at("sites").get<std::vector<int>>();
      const auto& b = m.geometry.bonds()[i];
      if (sites.size() != 2 || sites[0] != b.first || sites[1] != b.second) {
        throw ConfigError("bond table is not in canonical order");
      }
      m.hopping.push_back(bonds[i].at("t").get<double>());
    }
    m.chemical_potential = doc.at("chemical_potential").get<std::vector<double>>();
    if (static_cast<int>(m.chemical_potential.size()) != m.geometry.n_sites()) {
      throw ConfigError("chemical potential table does not match geometry");
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("malformed model document: {}", e.what()));
  }
}

Occupation checkerboard_occupation(const LatticeGeometry& geometry,
                                   const QubitLayout& layout) {
  if (layout.n_sites() != geometry.n_sites()) {
    throw DomainError("layout does not match geometry");
  }
  Occupation occ(geometry.n_qubits(), 0);
  for (int s = 0; s < geometry.n_sites(); ++s) {
    const auto [x, y] = geometry.coords(s);
    const Spin spin = (x + y) % 2 == 0 ? Spin::Up : Spin::Down;
    occ[layout.qubit(s, spin)] = 1;
  }
  return occ;
}

std::pair<int, int> spin_sector(const Occupation& occ, const QubitLayout& layout) {
  if (static_cast<int>(occ.size()) != layout.n_qubits()) {
    throw DomainError("occupation length does not match layout");
  }
  int up = 0, down = 0;
  for (int q = 0; q < layout.n_qubits(); ++q) {
    if (!occ[q]) continue;
    (layout.spin_of(q) == Spin::Up ? up : down) += 1;
  }
  return {up, down};
}

}  // namespace tnvqe
