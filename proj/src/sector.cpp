#include "rdmft/sector.hpp"

#include <map>

#include "rdmft/errors.hpp"

namespace rdmft {

namespace {

constexpr double kMaxEnumeration = 5e7;

double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

void check_particles(const LatticeSpec& lattice, int particles) {
  lattice.validate();
  if (particles <= 0 || particles > lattice.orbitals()) {
    throw PreconditionError("particle number must satisfy 0 < N <= d = " + std::to_string(lattice.orbitals()));
  }
  if (binomial(lattice.orbitals(), particles) > kMaxEnumeration) {
    throw CapacityError("C(d, N) exceeds the enumeration guard of 5e7 determinants");
  }
}

// Visits N-subsets of {0..d-1} in lexicographic order of sorted lists.
template <class F>
void for_each_combination(int d, int n, F&& f) {
  std::vector<int> idx(n);
  for (int i = 0; i < n; ++i) idx[i] = i;
  while (true) {
    Occupation s = 0;
    for (int q : idx) s |= Occupation{1} << q;
    f(s);
    int i = n - 1;
    while (i >= 0 && idx[i] == d - n + i) --i;
    if (i < 0) return;
    ++idx[i];
    for (int j = i + 1; j < n; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

std::string SectorLabel::to_string() const {
  std::string out = "K=";
  for (std::size_t i = 0; i < momentum.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(momentum[i]);
  }
  auto half = [](int twice) {
    if (twice % 2 == 0) return std::to_string(twice / 2);
    return std::to_string(twice) + "/2";
  };
  out += " Mz=" + half(twice_mz);
  if (twice_s) out += " S=" + half(*twice_s);
  if (parity) out += std::string(" p=") + (*parity > 0 ? "+1" : "-1");
  return out;
}

int SectorBasis::find(Occupation s) const {
  // Sector bases are sorted, hand-built ones need not be.
  for (int r = 0; r < size(); ++r) {
    if (configurations[r] == s) return r;
  }
  return -1;
}

int total_momentum(const LatticeSpec& lattice, Occupation s) {
  int k = 0;
  for (int q : occupied_orbitals(s)) k = momentum_add(lattice, k, momentum_index(lattice, q));
  return k;
}

int total_twice_mz(const LatticeSpec& lattice, Occupation s) {
  if (!lattice.spinful) return particle_count(s);
  int m = 0;
  for (int q : occupied_orbitals(s)) m += twice_spin_z(lattice, q);
  return m;
}

SectorBasis enumerate_sector(const LatticeSpec& lattice, int particles, const SectorLabel& sector) {
  check_particles(lattice, particles);
  if (static_cast<int>(sector.momentum.size()) != lattice.dimension) {
    throw DimensionMismatchError("sector momentum has " + std::to_string(sector.momentum.size()) +
                                 " components, lattice dimension is " + std::to_string(lattice.dimension));
  }
  for (int k : sector.momentum) {
    if (k < 0 || k >= lattice.length) throw PreconditionError("sector momentum component outside 0..L-1");
  }
  if (!lattice.spinful && sector.twice_mz != particles) {
    throw PreconditionError("spinless lattice: Mz is fixed at N/2");
  }
  if (std::abs(sector.twice_mz) > particles || (sector.twice_mz + particles) % 2 != 0) {
    throw PreconditionError("Mz incompatible with particle number");
  }
  SectorBasis basis;
  basis.lattice = lattice;
  basis.particles = particles;
  basis.label = SectorLabel{sector.momentum, sector.twice_mz, std::nullopt, std::nullopt};
  const int k = momentum_flat(lattice, sector.momentum);
  for_each_combination(lattice.orbitals(), particles, [&](Occupation s) {
    if (total_momentum(lattice, s) == k && total_twice_mz(lattice, s) == sector.twice_mz) {
      basis.configurations.push_back(s);
    }
  });
  return basis;
}

std::vector<SectorBasis> enumerate_all_sectors(const LatticeSpec& lattice, int particles) {
  check_particles(lattice, particles);
  std::map<std::pair<int, int>, std::vector<Occupation>> buckets;
  for_each_combination(lattice.orbitals(), particles, [&](Occupation s) {
    buckets[{total_twice_mz(lattice, s), total_momentum(lattice, s)}].push_back(s);
  });
  std::vector<SectorBasis> out;
  for (auto& [key, configs] : buckets) {
    SectorBasis b;
    b.lattice = lattice;
    b.particles = particles;
    b.label = SectorLabel{momentum_vector(lattice, key.second), key.first, std::nullopt, std::nullopt};
    b.configurations = std::move(configs);
    out.push_back(std::move(b));
  }
  return out;
}

SectorBasis basis_from_configurations(const LatticeSpec& lattice, int particles,
                                      std::vector<Occupation> configurations) {
  lattice.validate();
  const Occupation mask = lattice.orbitals() == 64 ? ~Occupation{0} : (Occupation{1} << lattice.orbitals()) - 1;
  for (Occupation s : configurations) {
    if (particle_count(s) != particles) throw PreconditionError("configuration has wrong particle number");
    if (s & ~mask) throw InvalidOrbitalError("configuration occupies an orbital outside the lattice");
  }
  SectorBasis b;
  b.lattice = lattice;
  b.particles = particles;
  b.configurations = std::move(configurations);
  return b;
}

std::vector<std::vector<int>> vertex_vectors(const SectorBasis& basis) {
  std::vector<std::vector<int>> rows;
  rows.reserve(basis.size());
  for (Occupation s : basis.configurations) rows.push_back(occupation_vector(s, basis.lattice.orbitals()));
  return rows;
}

}  // namespace rdmft
