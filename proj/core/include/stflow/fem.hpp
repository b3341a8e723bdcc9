#ifndef STFLOW_FEM_HPP
#define STFLOW_FEM_HPP

#include <array>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "stflow/mesh.hpp"
#include "stflow/sparse.hpp"

namespace stflow {

using Vec2 = std::array<double, 2>;

/// Taylor-Hood P2/P1 spaces on a triangulation. Scalar P2 nodes are the
/// vertices followed by the edge midpoints; velocity dofs interleave the two
/// components (dof = 2*node + comp). Pressure dofs are the P1 vertices.
struct FESpaces {
  TriMesh mesh;
  std::vector<std::array<int, 3>> tri_edges;  // global edge ids, local order (01,12,20)
  int n_edges = 0;
  int n_scalar = 0;  // vertices + edges
  int Nu = 0;        // 2 * n_scalar
  int Np = 0;        // vertices

  struct BoundaryNode {
    int node;  // scalar P2 node
    BoundaryTag tag;
  };
  std::vector<BoundaryNode> boundary_nodes;  // tag resolved by priority at corners
  std::vector<int> outflow_pressure_dofs;    // P1 vertices on Outflow edges

  struct BoundaryEdgeInfo {
    int v0, v1;  // endpoint vertices
    int mid;     // midpoint scalar node
    BoundaryTag tag;
  };
  std::vector<BoundaryEdgeInfo> boundary_edge_info;

  Vec2 node_position(int node) const;
  int velocity_dof(int node, int comp) const { return 2 * node + comp; }
};

FESpaces build_spaces(const TriMesh& mesh);

/// Scalar P2 nodes of triangle t in local order [v0, v1, v2, e01, e12, e20].
std::array<int, 6> p2_nodes(const FESpaces& spaces, int t);

/// Advection field sampled at quadrature points during assembly.
class WindEvaluator {
public:
  virtual ~WindEvaluator() = default;
  virtual Vec2 at(int tri, int q, Vec2 x) const = 0;
};

/// Wind given as a closed-form function of position.
class AnalyticWind final : public WindEvaluator {
public:
  explicit AnalyticWind(std::function<Vec2(Vec2)> f) : f_(std::move(f)) {}
  Vec2 at(int, int, Vec2 x) const override { return f_(x); }

private:
  std::function<Vec2(Vec2)> f_;
};

/// Wind given by a P2 velocity coefficient vector (Picard linearisation):
/// evaluated by basis expansion at the quadrature points.
class FEWind final : public WindEvaluator {
public:
  FEWind(const FESpaces& spaces, std::vector<double> velocity);
  Vec2 at(int tri, int q, Vec2 x) const override;

private:
  const FESpaces& spaces_;
  std::vector<double> u_;
};

// --- Galerkin operators (no boundary conditions applied) ---

SparseMatrix assemble_velocity_mass(const FESpaces& spaces);
SparseMatrix assemble_velocity_stiffness(const FESpaces& spaces);
/// Negative divergence, Np x Nu.
SparseMatrix assemble_divergence(const FESpaces& spaces);
SparseMatrix assemble_velocity_advection(const FESpaces& spaces,
                                         const WindEvaluator& wind);
SparseMatrix assemble_pressure_mass(const FESpaces& spaces);
SparseMatrix assemble_pressure_advection(const FESpaces& spaces,
                                         const WindEvaluator& wind);

/// P1 stiffness with homogeneous Dirichlet rows/columns at the outflow
/// vertices and natural Neumann elsewhere. Singular (constant kernel) iff
/// there is no outflow.
SparseMatrix assemble_pressure_laplacian(const FESpaces& spaces);

struct PressureOperators {
  SparseMatrix Mp;
  SparseMatrix Ap_tilde;
  std::vector<SparseMatrix> Wp;  // one per requested wind sample
};

PressureOperators assemble_pressure_operators(
    const FESpaces& spaces, const std::vector<const WindEvaluator*>& winds);

/// L2 load vector: integral of f against the vector P2 basis.
std::vector<double> assemble_load(const FESpaces& spaces,
                                  const std::function<Vec2(Vec2)>& f);

/// Surface load on edges with the given tag: integral of g against the
/// velocity trace basis.
std::vector<double> assemble_boundary_load(const FESpaces& spaces,
                                           BoundaryTag tag,
                                           const std::function<Vec2(Vec2)>& g);

// --- Dirichlet handling (constrained dofs kept with identity rows) ---

struct VelocityDirichlet {
  std::vector<char> mask;  // size Nu, 1 = constrained
  struct Entry {
    int dof;
    int comp;
    BoundaryTag tag;
    Vec2 pos;
  };
  std::vector<Entry> entries;  // sorted by dof
};

/// All velocity dofs on non-Outflow boundary nodes.
VelocityDirichlet velocity_dirichlet(const FESpaces& spaces);

using DirichletData = std::function<Vec2(BoundaryTag, Vec2, double)>;

/// Boundary values embedded in a full-length velocity vector (zero at free
/// dofs), sampled at time t.
std::vector<double> dirichlet_vector(const VelocityDirichlet& bc,
                                     const DirichletData& data, double t,
                                     int Nu);

/// Zero the constrained rows and columns; constrained diagonal becomes 1
/// (identity_diag) or 0.
SparseMatrix eliminate_rows_cols(const SparseMatrix& A,
                                 const std::vector<char>& constrained,
                                 bool identity_diag);

/// Zero the constrained columns of a rectangular operator.
SparseMatrix eliminate_cols(const SparseMatrix& B,
                            const std::vector<char>& constrained);

}  // namespace stflow

#endif  // STFLOW_FEM_HPP
