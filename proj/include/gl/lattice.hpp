#pragma once

#include <cstdint>
#include <vector>

#include "gl/errors.hpp"

namespace gl {

// Oriented nearest-neighbor bond (origin, origin + e_dir).
struct Bond {
  std::int64_t origin = 0;
  int dir = 0;

  friend bool operator==(const Bond&, const Bond&) = default;
};

// Periodic torus (Z/NZ)^d. Sites are indexed 0..N^d-1 with coordinate 0
// fastest; bonds are enumerated site-major, direction-minor, so in d=1
// bond index i is exactly the bond (i, i+1).
class Lattice {
 public:
  Lattice(int side, int dim);

  int side() const { return side_; }
  int dim() const { return dim_; }
  std::int64_t num_sites() const { return num_sites_; }
  std::int64_t num_bonds() const { return static_cast<std::int64_t>(dim_) * num_sites_; }

  int coord(std::int64_t site, int axis) const;
  std::int64_t site_from_coords(const std::vector<int>& coords) const;

  // Neighbor of `site` at distance `offset` (any integer) along `axis`.
  std::int64_t neighbor(std::int64_t site, int axis, int offset) const;

  Bond bond(std::int64_t index) const;
  std::int64_t bond_index(const Bond& b) const;
  std::vector<Bond> bonds() const;

  // d=1 only: the bond (i+k, i+k+1) for b = (i, i+1), k in {-2,-1,1,2}.
  Bond bond_neighbor(const Bond& b, int k) const;

 private:
  int side_;
  int dim_;
  std::int64_t num_sites_;
  std::vector<std::int64_t> stride_;
};

Lattice make_torus(int side, int dim);

}  // namespace gl
