#include "stflow/mesh.hpp"

#include <cassert>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <stdexcept>

namespace stflow {

double TriMesh::triangle_area(int t) const {
  const auto& tv = triangles[t];
  const auto& a = vertices[tv[0]];
  const auto& b = vertices[tv[1]];
  const auto& c = vertices[tv[2]];
  return 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]));
}

namespace {

double max_edge_length(const TriMesh& mesh) {
  double h = 0.0;
  for (const auto& t : mesh.triangles) {
    for (int e = 0; e < 3; ++e) {
      const auto& a = mesh.vertices[t[e]];
      const auto& b = mesh.vertices[t[(e + 1) % 3]];
      h = std::max(h, std::hypot(b[0] - a[0], b[1] - a[1]));
    }
  }
  return h;
}

}  // namespace

TriMesh unit_square_mesh(int r) {
  if (r < 0) throw std::invalid_argument("unit_square_mesh: r must be >= 0");
  const int n = 1 << r;
  TriMesh mesh;
  mesh.vertices.reserve(static_cast<std::size_t>(n + 1) * (n + 1));
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i)
      mesh.vertices.push_back({double(i) / n, double(j) / n});

  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }
  for (int i = 0; i < n; ++i)
    mesh.boundary_edges.push_back({vid(i, 0), vid(i + 1, 0), BoundaryTag::Wall});
  for (int j = 0; j < n; ++j)
    mesh.boundary_edges.push_back({vid(n, j), vid(n, j + 1), BoundaryTag::Wall});
  for (int i = n; i > 0; --i)
    mesh.boundary_edges.push_back({vid(i, n), vid(i - 1, n), BoundaryTag::Lid});
  for (int j = n; j > 0; --j)
    mesh.boundary_edges.push_back({vid(0, j), vid(0, j - 1), BoundaryTag::Wall});

  mesh.h = max_edge_length(mesh);
  return mesh;
}

TriMesh backstep_mesh(int r) {
  if (r < 0) throw std::invalid_argument("backstep_mesh: r must be >= 0");
  const int n = 1 << r;  // cells per unit length
  const int nx = 8 * n;  // columns over x in [0,8]
  const double s = 1.0 / n;

  // lattice (i,j) with x = i*s, y = -1 + j*s; j in [0, 2n]; the lower-left
  // block x < 1, y < 0 is outside the domain
  auto inside = [&](int i, int j) { return j >= n || i >= n; };

  TriMesh mesh;
  std::map<std::pair<int, int>, int> index;
  for (int j = 0; j <= 2 * n; ++j) {
    for (int i = 0; i <= nx; ++i) {
      if (!inside(i, j)) continue;
      index[{i, j}] = mesh.n_vertices();
      mesh.vertices.push_back({i * s, -1.0 + j * s});
    }
  }
  auto vid = [&](int i, int j) { return index.at({i, j}); };
  auto cell_inside = [&](int i, int j) {
    return inside(i, j) && inside(i + 1, j) && inside(i, j + 1) &&
           inside(i + 1, j + 1);
  };
  for (int j = 0; j < 2 * n; ++j) {
    for (int i = 0; i < nx; ++i) {
      if (!cell_inside(i, j)) continue;
      const int v00 = vid(i, j), v10 = vid(i + 1, j);
      const int v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.triangles.push_back({v00, v10, v11});
      mesh.triangles.push_back({v00, v11, v01});
    }
  }

  // boundary walk, counterclockwise from the step corner (1,0)
  auto add = [&](int i0, int j0, int i1, int j1, BoundaryTag tag) {
    mesh.boundary_edges.push_back({vid(i0, j0), vid(i1, j1), tag});
  };
  for (int i = n; i < nx; ++i) add(i, 0, i + 1, 0, BoundaryTag::Wall);  // y=-1
  for (int j = 0; j < 2 * n; ++j)
    add(nx, j, nx, j + 1, BoundaryTag::Outflow);  // x=8
  for (int i = nx; i > 0; --i) add(i, 2 * n, i - 1, 2 * n, BoundaryTag::Wall);  // y=1
  for (int j = 2 * n; j > n; --j)
    add(0, j, 0, j - 1, BoundaryTag::Inflow);  // x=0, 0<=y<=1
  for (int i = 0; i < n; ++i) add(i, n, i + 1, n, BoundaryTag::Wall);  // y=0, x<1
  for (int j = n; j > 0; --j) add(n, j, n, j - 1, BoundaryTag::Wall);  // step face

  mesh.h = max_edge_length(mesh);
  return mesh;
}

MeshStats mesh_stats(const TriMesh& mesh) {
  MeshStats st;
  st.n_vertices = mesh.n_vertices();
  st.n_triangles = mesh.n_triangles();
  st.h = mesh.h;
  for (int t = 0; t < mesh.n_triangles(); ++t) st.area += mesh.triangle_area(t);
  return st;
}

void write_vtk(const TriMesh& mesh, std::ostream& out) {
  out << "# vtk DataFile Version 3.0\n";
  out << "stflow mesh\nASCII\nDATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << mesh.n_vertices() << " double\n";
  for (const auto& v : mesh.vertices) out << v[0] << " " << v[1] << " 0\n";
  out << "CELLS " << mesh.n_triangles() << " " << 4 * mesh.n_triangles() << "\n";
  for (const auto& t : mesh.triangles)
    out << "3 " << t[0] << " " << t[1] << " " << t[2] << "\n";
  out << "CELL_TYPES " << mesh.n_triangles() << "\n";
  for (int t = 0; t < mesh.n_triangles(); ++t) out << "5\n";
}

void write_vtk(const TriMesh& mesh, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_vtk: cannot open " + path);
  write_vtk(mesh, f);
}

}  // namespace stflow
