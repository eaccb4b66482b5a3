#include "polyelast/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace polyelast {

namespace {

constexpr int kPerms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                              {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};

int perm_sign(const int* p) {
  int s = 1;
  if (p[0] > p[1]) s = -s;
  if (p[0] > p[2]) s = -s;
  if (p[1] > p[2]) s = -s;
  return s;
}

}  // namespace

int TorusMesh::vertex_id(int ix, int iy, int iz) const {
  auto m = [this](int i) { return ((i % n) + n) % n; };
  return (m(ix) * n + m(iy)) * n + m(iz);
}

TorusMesh TorusMesh::build_uniform(int n) {
  if (n < 2) throw std::invalid_argument("mesh.n must be >= 2");
  TorusMesh mesh;
  mesh.n = n;
  mesh.h = 1.0 / n;
  mesh.vertices.reserve(n * n * n);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz)
        mesh.vertices.emplace_back(ix * mesh.h, iy * mesh.h, iz * mesh.h);

  mesh.elements.reserve(6 * n * n * n);
  for (int ix = 0; ix < n; ++ix)
    for (int iy = 0; iy < n; ++iy)
      for (int iz = 0; iz < n; ++iz) {
        const Eigen::Vector3d corner(ix * mesh.h, iy * mesh.h, iz * mesh.h);
        for (const auto& perm : kPerms) {
          // Kuhn tet along the main diagonal; reorder the last two
          // vertices when the permutation is odd to keep det positive.
          std::array<Eigen::Vector3d, 4> q;
          std::array<std::array<int, 3>, 4> qi;
          q[0] = corner;
          qi[0] = {ix, iy, iz};
          for (int s = 0; s < 3; ++s) {
            q[s + 1] = q[s];
            q[s + 1][perm[s]] += mesh.h;
            qi[s + 1] = qi[s];
            qi[s + 1][perm[s]] += 1;
          }
          if (perm_sign(perm) < 0) {
            std::swap(q[2], q[3]);
            std::swap(qi[2], qi[3]);
          }
          Element el;
          el.origin = q[0];
          for (int c = 0; c < 3; ++c) el.jac.col(c) = q[c + 1] - q[0];
          el.det_jac = el.jac.determinant();
          el.jac_inv_t = el.jac.inverse().transpose();
          el.volume = el.det_jac / 6.0;
          for (int v = 0; v < 4; ++v)
            el.vertex_ids[v] = mesh.vertex_id(qi[v][0], qi[v][1], qi[v][2]);
          mesh.elements.push_back(el);
        }
      }
  return mesh;
}

int TorusMesh::locate(const Eigen::Vector3d& x, Eigen::Vector3d& ref) const {
  Eigen::Vector3d y = x;
  for (int c = 0; c < 3; ++c) y[c] -= std::floor(y[c]);
  int cube[3];
  for (int c = 0; c < 3; ++c)
    cube[c] = std::min(static_cast<int>(std::floor(y[c] * n)), n - 1);
  const int base = 6 * ((cube[0] * n + cube[1]) * n + cube[2]);
  const double tol = 1e-12;
  for (int t = 0; t < 6; ++t) {
    const Element& el = elements[base + t];
    const Eigen::Vector3d lam = el.jac.inverse() * (y - el.origin);
    if (lam.minCoeff() >= -tol && lam.sum() <= 1.0 + tol) {
      ref = lam;
      return base + t;
    }
  }
  throw std::runtime_error("point location failed");
}

void TorusMesh::dump(std::ostream& os) const {
  os << "torus mesh n=" << n << " vertices=" << vertices.size()
     << " elements=" << elements.size() << "\n";
  for (std::size_t v = 0; v < vertices.size(); ++v)
    os << "v " << v << " " << vertices[v].transpose() << "\n";
  for (std::size_t e = 0; e < elements.size(); ++e) {
    os << "e " << e;
    for (int v : elements[e].vertex_ids) os << " " << v;
    os << "\n";
  }
}

}  // namespace polyelast
