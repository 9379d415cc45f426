#include "gl/lattice.hpp"

#include <string>

namespace gl {

Lattice::Lattice(int side, int dim) : side_(side), dim_(dim) {
  if (side < 3) {
    throw InvalidGeometryError("torus side must be >= 3, got " +
                               std::to_string(side));
  }
  if (dim < 1) {
    throw InvalidGeometryError("torus dimension must be >= 1, got " +
                               std::to_string(dim));
  }
  num_sites_ = 1;
  stride_.resize(dim);
  for (int k = 0; k < dim; ++k) {
    stride_[k] = num_sites_;
    num_sites_ *= side;
  }
}

int Lattice::coord(std::int64_t site, int axis) const {
  return static_cast<int>((site / stride_[axis]) % side_);
}

std::int64_t Lattice::site_from_coords(const std::vector<int>& coords) const {
  std::int64_t site = 0;
  for (int k = 0; k < dim_; ++k) {
    int c = coords[k] % side_;
    if (c < 0) c += side_;
    site += stride_[k] * c;
  }
  return site;
}

std::int64_t Lattice::neighbor(std::int64_t site, int axis, int offset) const {
  int c = coord(site, axis);
  int shifted = (c + offset) % side_;
  if (shifted < 0) shifted += side_;
  return site + stride_[axis] * (shifted - c);
}

Bond Lattice::bond(std::int64_t index) const {
  return Bond{index / dim_, static_cast<int>(index % dim_)};
}

std::int64_t Lattice::bond_index(const Bond& b) const {
  return b.origin * dim_ + b.dir;
}

std::vector<Bond> Lattice::bonds() const {
  std::vector<Bond> out;
  out.reserve(static_cast<std::size_t>(num_bonds()));
  for (std::int64_t i = 0; i < num_bonds(); ++i) out.push_back(bond(i));
  return out;
}

Bond Lattice::bond_neighbor(const Bond& b, int k) const {
  if (dim_ != 1) {
    throw UnsupportedDimensionError("bond offsets are defined in d=1 only");
  }
  return Bond{neighbor(b.origin, 0, k), 0};
}

Lattice make_torus(int side, int dim) { return Lattice(side, dim); }

}  // namespace gl
