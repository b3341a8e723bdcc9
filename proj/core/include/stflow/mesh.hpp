#ifndef STFLOW_MESH_HPP
#define STFLOW_MESH_HPP

#include <array>
#include <iosfwd>
#include <vector>

namespace stflow {

enum class BoundaryTag { Lid, Wall, Inflow, Outflow };

struct BoundaryEdge {
  int v0;
  int v1;
  BoundaryTag tag;
};

/// 2D triangulation with tagged boundary segments. Triangles are
/// counterclockwise; h is the maximum edge length.
struct TriMesh {
  std::vector<std::array<double, 2>> vertices;
  std::vector<std::array<int, 3>> triangles;
  std::vector<BoundaryEdge> boundary_edges;
  double h = 0.0;

  int n_vertices() const { return static_cast<int>(vertices.size()); }
  int n_triangles() const { return static_cast<int>(triangles.size()); }
  double triangle_area(int t) const;
};

/// Structured triangulation of [0,1]^2 with 2^r squares per side, each split
/// along the same diagonal. Top edge tagged Lid, the rest Wall.
TriMesh unit_square_mesh(int r);

/// Structured triangulation of the stretched L-shape
/// [0,8]x[0,1] u [1,8]x[-1,0] at spacing 2^-r. Inflow on {x=0, 0<=y<=1},
/// Outflow on {x=8}, Wall elsewhere.
TriMesh backstep_mesh(int r);

struct MeshStats {
  int n_vertices = 0;
  int n_triangles = 0;
  double h = 0.0;
  double area = 0.0;
};

MeshStats mesh_stats(const TriMesh& mesh);

/// Legacy VTK ASCII dump (POINTS/CELLS) for visual inspection.
void write_vtk(const TriMesh& mesh, std::ostream& out);
void write_vtk(const TriMesh& mesh, const std::string& path);

}  // namespace stflow

#endif  // STFLOW_MESH_HPP
