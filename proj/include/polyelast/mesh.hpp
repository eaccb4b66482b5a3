#pragma once

#include <Eigen/Dense>
#include <array>
#include <iosfwd>
#include <vector>

namespace polyelast {

// Uniform periodic Kuhn (6-tet) triangulation of the unit 3-torus.
// Element ordering is deterministic: cubes in lexicographic (ix,iy,iz)
// order, the 6 tets of a cube in lexicographic permutation order.

struct Element {
  std::array<int, 4> vertex_ids;   // periodic lattice vertex indices
  Eigen::Vector3d origin;          // physical corner (unwrapped)
  Eigen::Matrix3d jac;             // columns = edge vectors from origin
  Eigen::Matrix3d jac_inv_t;       // inverse transpose, for gradients
  double det_jac = 0.0;            // positive by construction
  double volume = 0.0;             // det_jac / 6
};

struct TorusMesh {
  int n = 0;       // cells per axis
  double h = 0.0;  // 1/n
  std::vector<Eigen::Vector3d> vertices;  // lattice points in [0,1)^3
  std::vector<Element> elements;          // 6 n^3 tets

  /// Build the uniform mesh; throws for n < 2 (periodic identification
  /// degenerates).
  static TorusMesh build_uniform(int n);

  /// Lexicographic vertex index of the lattice point (ix,iy,iz) mod n.
  int vertex_id(int ix, int iy, int iz) const;

  /// Element containing x (coordinates taken mod 1) and its reference
  /// coordinates.
  int locate(const Eigen::Vector3d& x, Eigen::Vector3d& ref) const;

  /// Plain-text element/vertex listing for debugging.
  void dump(std::ostream& os) const;
};

}  // namespace polyelast
