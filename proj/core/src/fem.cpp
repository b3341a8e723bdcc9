#include "stflow/fem.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <map>
#include <stdexcept>

namespace stflow {

namespace {

// 7-point symmetric triangle rule, exact for degree 5. Weights are
// normalised to sum to 1 and scaled by the triangle area on use.
struct QuadRule {
  static constexpr int n = 7;
  std::array<double, n> w;
  std::array<double, n> xi;
  std::array<double, n> eta;
};

const QuadRule& quad_rule() {
  static const QuadRule rule = [] {
    QuadRule q{};
    const double s15 = std::sqrt(15.0);
    const double a = (6.0 + s15) / 21.0;
    const double b = (6.0 - s15) / 21.0;
    const double wa = (155.0 + s15) / 1200.0;
    const double wb = (155.0 - s15) / 1200.0;
    q.w = {9.0 / 40.0, wa, wa, wa, wb, wb, wb};
    q.xi = {1.0 / 3.0, a, 1.0 - 2.0 * a, a, b, 1.0 - 2.0 * b, b};
    q.eta = {1.0 / 3.0, a, a, 1.0 - 2.0 * a, b, b, 1.0 - 2.0 * b};
    return q;
  }();
  return rule;
}

struct ShapeTable {
  // values and barycentric-gradient weights at the quadrature points
  std::array<std::array<double, 6>, QuadRule::n> p2;      // N_a(q)
  std::array<std::array<double, 3>, QuadRule::n> p1;      // psi_i(q)
  // dN_a = sum_i coeff(a,i) * grad L_i; coefficients depend on the point
  std::array<std::array<std::array<double, 3>, 6>, QuadRule::n> dp2;
};

const ShapeTable& shape_table() {
  static const ShapeTable table = [] {
    ShapeTable t{};
    const QuadRule& q = quad_rule();
    for (int k = 0; k < QuadRule::n; ++k) {
      const double L[3] = {1.0 - q.xi[k] - q.eta[k], q.xi[k], q.eta[k]};
      for (int i = 0; i < 3; ++i) {
        t.p1[k][i] = L[i];
        t.p2[k][i] = L[i] * (2.0 * L[i] - 1.0);
      }
      t.p2[k][3] = 4.0 * L[0] * L[1];
      t.p2[k][4] = 4.0 * L[1] * L[2];
      t.p2[k][5] = 4.0 * L[2] * L[0];
      for (auto& row : t.dp2[k]) row = {0.0, 0.0, 0.0};
      for (int i = 0; i < 3; ++i) t.dp2[k][i][i] = 4.0 * L[i] - 1.0;
      t.dp2[k][3][0] = 4.0 * L[1];
      t.dp2[k][3][1] = 4.0 * L[0];
      t.dp2[k][4][1] = 4.0 * L[2];
      t.dp2[k][4][2] = 4.0 * L[1];
      t.dp2[k][5][2] = 4.0 * L[0];
      t.dp2[k][5][0] = 4.0 * L[2];
    }
    return t;
  }();
  return table;
}

struct ElemGeom {
  double area;
  std::array<Vec2, 3> grad_bary;  // constant gradients of L0, L1, L2
  std::array<Vec2, 3> corners;
};

ElemGeom elem_geom(const TriMesh& mesh, int t) {
  ElemGeom g{};
  const auto& tv = mesh.triangles[t];
  for (int i = 0; i < 3; ++i) g.corners[i] = mesh.vertices[tv[i]];
  const Vec2& p0 = g.corners[0];
  const Vec2& p1 = g.corners[1];
  const Vec2& p2 = g.corners[2];
  const double twoA =
      (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p1[1] - p0[1]) * (p2[0] - p0[0]);
  g.area = 0.5 * twoA;
  g.grad_bary[0] = {(p1[1] - p2[1]) / twoA, (p2[0] - p1[0]) / twoA};
  g.grad_bary[1] = {(p2[1] - p0[1]) / twoA, (p0[0] - p2[0]) / twoA};
  g.grad_bary[2] = {(p0[1] - p1[1]) / twoA, (p1[0] - p0[0]) / twoA};
  return g;
}

Vec2 quad_point(const ElemGeom& g, int q) {
  const QuadRule& rule = quad_rule();
  const double L0 = 1.0 - rule.xi[q] - rule.eta[q];
  return {L0 * g.corners[0][0] + rule.xi[q] * g.corners[1][0] +
              rule.eta[q] * g.corners[2][0],
          L0 * g.corners[0][1] + rule.xi[q] * g.corners[1][1] +
              rule.eta[q] * g.corners[2][1]};
}

// physical gradient of P2 shape a at quadrature point q
Vec2 p2_grad(const ElemGeom& g, int q, int a) {
  const auto& c = shape_table().dp2[q][a];
  return {c[0] * g.grad_bary[0][0] + c[1] * g.grad_bary[1][0] +
              c[2] * g.grad_bary[2][0],
          c[0] * g.grad_bary[0][1] + c[1] * g.grad_bary[1][1] +
              c[2] * g.grad_bary[2][1]};
}

int tag_priority(BoundaryTag tag) {
  switch (tag) {
    case BoundaryTag::Wall: return 3;
    case BoundaryTag::Inflow: return 2;
    case BoundaryTag::Lid: return 1;
    case BoundaryTag::Outflow: return 0;
  }
  return -1;
}

}  // namespace

Vec2 FESpaces::node_position(int node) const {
  if (node < mesh.n_vertices()) return mesh.vertices[node];
  // edge midpoint; recover endpoints from any triangle containing the edge
  const int e = node - mesh.n_vertices();
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    for (int le = 0; le < 3; ++le) {
      if (tri_edges[t][le] == e) {
        const int a = mesh.triangles[t][le];
        const int b = mesh.triangles[t][(le + 1) % 3];
        return {0.5 * (mesh.vertices[a][0] + mesh.vertices[b][0]),
                0.5 * (mesh.vertices[a][1] + mesh.vertices[b][1])};
      }
    }
  }
  throw std::out_of_range("node_position: unknown node");
}

FESpaces build_spaces(const TriMesh& mesh) {
  FESpaces sp;
  sp.mesh = mesh;
  sp.Np = mesh.n_vertices();

  std::map<std::pair<int, int>, int> edge_ids;
  sp.tri_edges.resize(mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tv = mesh.triangles[t];
    for (int le = 0; le < 3; ++le) {
      const int a = tv[le];
      const int b = tv[(le + 1) % 3];
      const auto key = std::minmax(a, b);
      auto [it, inserted] = edge_ids.try_emplace(key, sp.n_edges);
      if (inserted) ++sp.n_edges;
      sp.tri_edges[t][le] = it->second;
    }
  }
  sp.n_scalar = mesh.n_vertices() + sp.n_edges;
  sp.Nu = 2 * sp.n_scalar;

  // resolve one tag per boundary node; Dirichlet-type tags win at corners
  std::map<int, BoundaryTag> node_tag;
  auto visit = [&](int node, BoundaryTag tag) {
    auto [it, inserted] = node_tag.try_emplace(node, tag);
    if (!inserted && tag_priority(tag) > tag_priority(it->second))
      it->second = tag;
  };
  std::vector<int> outflow;
  for (const auto& be : mesh.boundary_edges) {
    const auto key = std::minmax(be.v0, be.v1);
    const auto it = edge_ids.find(key);
    if (it == edge_ids.end())
      throw std::runtime_error("build_spaces: boundary edge not in mesh");
    const int mid = mesh.n_vertices() + it->second;
    visit(be.v0, be.tag);
    visit(be.v1, be.tag);
    visit(mid, be.tag);
    sp.boundary_edge_info.push_back({be.v0, be.v1, mid, be.tag});
    if (be.tag == BoundaryTag::Outflow) {
      outflow.push_back(be.v0);
      outflow.push_back(be.v1);
    }
  }
  for (const auto& [node, tag] : node_tag) sp.boundary_nodes.push_back({node, tag});
  std::sort(outflow.begin(), outflow.end());
  outflow.erase(std::unique(outflow.begin(), outflow.end()), outflow.end());
  sp.outflow_pressure_dofs = std::move(outflow);
  return sp;
}

std::array<int, 6> p2_nodes(const FESpaces& sp, int t) {
  const auto& tv = sp.mesh.triangles[t];
  const int nv = sp.mesh.n_vertices();
  return {tv[0], tv[1], tv[2], nv + sp.tri_edges[t][0], nv + sp.tri_edges[t][1],
          nv + sp.tri_edges[t][2]};
}

FEWind::FEWind(const FESpaces& spaces, std::vector<double> velocity)
    : spaces_(spaces), u_(std::move(velocity)) {
  if (static_cast<int>(u_.size()) != spaces_.Nu)
    throw std::invalid_argument("FEWind: velocity size mismatch");
}

Vec2 FEWind::at(int tri, int q, Vec2) const {
  const auto nodes = p2_nodes(spaces_, tri);
  const auto& N = shape_table().p2[q];
  Vec2 w{0.0, 0.0};
  for (int a = 0; a < 6; ++a) {
    w[0] += u_[2 * nodes[a]] * N[a];
    w[1] += u_[2 * nodes[a] + 1] * N[a];
  }
  return w;
}

SparseMatrix assemble_velocity_mass(const FESpaces& sp) {
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(static_cast<std::size_t>(sp.mesh.n_triangles()) * 72);
  const QuadRule& rule = quad_rule();
  const ShapeTable& st = shape_table();
  for (int t = 0; t < sp.mesh.n_triangles(); ++t) {
    const ElemGeom g = elem_geom(sp.mesh, t);
    const auto nodes = p2_nodes(sp, t);
    double m[6][6] = {};
    for (int q = 0; q < QuadRule::n; ++q) {
      const double w = rule.w[q] * g.area;
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b) m[a][b] += w * st.p2[q][a] * st.p2[q][b];
    }
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        for (int c = 0; c < 2; ++c)
          trip.push_back({2 * nodes[a] + c, 2 * nodes[b] + c, m[a][b]});
  }
  return SparseMatrix::from_triplets(sp.Nu, sp.Nu, std::move(trip));
}

SparseMatrix assemble_velocity_stiffness(const FESpaces& sp) {
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(static_cast<std::size_t>(sp.mesh.n_triangles()) * 72);
  const QuadRule& rule = quad_rule();
  for (int t = 0; t < sp.mesh.n_triangles(); ++t) {
    const ElemGeom g = elem_geom(sp.mesh, t);
    const auto nodes = p2_nodes(sp, t);
    double k[6][6] = {};
    for (int q = 0; q < QuadRule::n; ++q) {
      const double w = rule.w[q] * g.area;
      Vec2 grads[6];
      for (int a = 0; a < 6; ++a) grads[a] = p2_grad(g, q, a);
      for (int a = 0; a < 6; ++a)
        for (int b = 0; b < 6; ++b)
          k[a][b] += w * (grads[a][0] * grads[b][0] + grads[a][1] * grads[b][1]);
    }
    for (int a = 0; a < 6; ++a)
      for (int b = 0; b < 6; ++b)
        for (int c = 0; c < 2; ++c)
          trip.push_back({2 * nodes[a] + c, 2 * nodes[b] + c, k[a][b]});
  }
  return SparseMatrix::from_triplets(sp.Nu, sp.Nu, std::move(trip));
}

SparseMatrix assemble_divergence(const FESpaces& sp) {
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(static_cast<std::size_t>(sp.mesh.n_triangles()) * 36);
  const QuadRule& rule = quad_rule();
  const ShapeTable& st = shape_table();
  for (int t = 0; t < sp.mesh.n_triangles(); ++t) {
    const ElemGeom g = elem_geom(sp.mesh, t);
    const auto nodes = p2_nodes(sp, t);
    const auto& tv = sp.mesh.triangles[t];
    double b[3][6][2] = {};
    for (int q = 0; q < QuadRule::n; ++q) {
      const double w = rule.w[q] * g.area;
      for (int n = 0; n < 6; ++n) {
        const Vec2 grad = p2_grad(g, q, n);
        for (int m = 0; m < 3; ++m) {
          b[m][n][0] -= w * st.p1[q][m] * grad[0];
          b[m][n][1] -= w * st.p1[q][m] * grad[1];
        }
      }
    }
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 6; ++n)
        for (int c = 0; c < 2; ++c)
          trip.push_back({tv[m], 2 * nodes[n] + c, b[m][n][c]});
  }
  return SparseMatrix::from_triplets(sp.Np, sp.Nu, std::move(trip));
}

SparseMatrix assemble_velocity_advection(const FESpaces& sp,
                                         const WindEvaluator& wind) {
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(static_cast<std::size_t>(sp.mesh.n_triangles()) * 72);
  const QuadRule& rule = quad_rule();
  const ShapeTable& st = shape_table();
  for (int t = 0; t < sp.mesh.n_triangles(); ++t) {
    const ElemGeom g = elem_geom(sp.mesh, t);
    const auto nodes = p2_nodes(sp, t);
    double wmat[6][6] = {};
    for (int q = 0; q < QuadRule::n; ++q) {
      const double w = rule.w[q] * g.area;
      const Vec2 wv = wind.at(t, q, quad_point(g, q));
      for (int n = 0; n < 6; ++n) {
        const Vec2 grad = p2_grad(g, q, n);
        const double adv = wv[0] * grad[0] + wv[1] * grad[1];
        for (int m = 0; m < 6; ++m) wmat[m][n] += w * adv * st.p2[q][m];
      }
    }
    for (int m = 0; m < 6; ++m)
      for (int n = 0; n < 6; ++n)
        for (int c = 0; c < 2; ++c)
          trip.push_back({2 * nodes[m] + c, 2 * nodes[n] + c, wmat[m][n]});
  }
  return SparseMatrix::from_triplets(sp.Nu, sp.Nu, std::move(trip));
}

SparseMatrix assemble_pressure_mass(const FESpaces& sp) {
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(static_cast<std::size_t>(sp.mesh.n_triangles()) * 9);
  const QuadRule& rule = quad_rule();
  const ShapeTable& st = shape_table();
  for (int t = 0; t < sp.mesh.n_triangles(); ++t) {
    const ElemGeom g = elem_geom(sp.mesh, t);
    const auto& tv = sp.mesh.triangles[t];
    for (int q = 0; q < QuadRule::n; ++q) {
      const double w = rule.w[q] * g.area;
      for (int m = 0; m < 3; ++m)
        for (int n = 0; n < 3; ++n)
          trip.push_back({tv[m], tv[n], w * st.p1[q][m] * st.p1[q][n]});
    }
  }
  return SparseMatrix::from_triplets(sp.Np, sp.Np, std::move(trip));
}

SparseMatrix assemble_pressure_advection(const FESpaces& sp,
                                         const WindEvaluator& wind) {
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(static_cast<std::size_t>(sp.mesh.n_triangles()) * 9);
  const QuadRule& rule = quad_rule();
  const ShapeTable& st = shape_table();
  for (int t = 0; t < sp.mesh.n_triangles(); ++t) {
    const ElemGeom g = elem_geom(sp.mesh, t);
    const auto& tv = sp.mesh.triangles[t];
    for (int q = 0; q < QuadRule::n; ++q) {
      const double w = rule.w[q] * g.area;
      const Vec2 wv = wind.at(t, q, quad_point(g, q));
      for (int n = 0; n < 3; ++n) {
        const double adv = wv[0] * g.grad_bary[n][0] + wv[1] * g.grad_bary[n][1];
        for (int m = 0; m < 3; ++m)
          trip.push_back({tv[m], tv[n], w * adv * st.p1[q][m]});
      }
    }
  }
  return SparseMatrix::from_triplets(sp.Np, sp.Np, std::move(trip));
}

SparseMatrix assemble_pressure_laplacian(const FESpaces& sp) {
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(static_cast<std::size_t>(sp.mesh.n_triangles()) * 9);
  for (int t = 0; t < sp.mesh.n_triangles(); ++t) {
    const ElemGeom g = elem_geom(sp.mesh, t);
    const auto& tv = sp.mesh.triangles[t];
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 3; ++n)
        trip.push_back({tv[m], tv[n],
                        g.area * (g.grad_bary[m][0] * g.grad_bary[n][0] +
                                  g.grad_bary[m][1] * g.grad_bary[n][1])});
  }
  SparseMatrix Ap = SparseMatrix::from_triplets(sp.Np, sp.Np, std::move(trip));
  if (sp.outflow_pressure_dofs.empty()) return Ap;
  std::vector<char> constrained(sp.Np, 0);
  for (int d : sp.outflow_pressure_dofs) constrained[d] = 1;
  return eliminate_rows_cols(Ap, constrained, /*identity_diag=*/true);
}

PressureOperators assemble_pressure_operators(
    const FESpaces& sp, const std::vector<const WindEvaluator*>& winds) {
  PressureOperators ops;
  ops.Mp = assemble_pressure_mass(sp);
  ops.Ap_tilde = assemble_pressure_laplacian(sp);
  ops.Wp.reserve(winds.size());
  for (const WindEvaluator* w : winds)
    ops.Wp.push_back(assemble_pressure_advection(sp, *w));
  return ops;
}

std::vector<double> assemble_load(const FESpaces& sp,
                                  const std::function<Vec2(Vec2)>& f) {
  std::vector<double> rhs(sp.Nu, 0.0);
  const QuadRule& rule = quad_rule();
  const ShapeTable& st = shape_table();
  for (int t = 0; t < sp.mesh.n_triangles(); ++t) {
    const ElemGeom g = elem_geom(sp.mesh, t);
    const auto nodes = p2_nodes(sp, t);
    for (int q = 0; q < QuadRule::n; ++q) {
      const double w = rule.w[q] * g.area;
      const Vec2 fv = f(quad_point(g, q));
      for (int a = 0; a < 6; ++a) {
        rhs[2 * nodes[a]] += w * fv[0] * st.p2[q][a];
        rhs[2 * nodes[a] + 1] += w * fv[1] * st.p2[q][a];
      }
    }
  }
  return rhs;
}

std::vector<double> assemble_boundary_load(const FESpaces& sp, BoundaryTag tag,
                                           const std::function<Vec2(Vec2)>& g) {
  std::vector<double> rhs(sp.Nu, 0.0);
  // 3-point Gauss on each edge; quadratic trace basis (v0, mid, v1)
  const double gx[3] = {0.5 * (1.0 - std::sqrt(3.0 / 5.0)), 0.5,
                        0.5 * (1.0 + std::sqrt(3.0 / 5.0))};
  const double gw[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
  for (const auto& be : sp.boundary_edge_info) {
    if (be.tag != tag) continue;
    const Vec2 p0 = sp.mesh.vertices[be.v0];
    const Vec2 p1 = sp.mesh.vertices[be.v1];
    const double len = std::hypot(p1[0] - p0[0], p1[1] - p0[1]);
    const int nodes[3] = {be.v0, be.mid, be.v1};
    for (int q = 0; q < 3; ++q) {
      const double s = gx[q];
      const double shape[3] = {(1.0 - s) * (1.0 - 2.0 * s), 4.0 * s * (1.0 - s),
                               s * (2.0 * s - 1.0)};
      const Vec2 x = {p0[0] + s * (p1[0] - p0[0]), p0[1] + s * (p1[1] - p0[1])};
      const Vec2 gv = g(x);
      for (int a = 0; a < 3; ++a) {
        rhs[2 * nodes[a]] += gw[q] * len * gv[0] * shape[a];
        rhs[2 * nodes[a] + 1] += gw[q] * len * gv[1] * shape[a];
      }
    }
  }
  return rhs;
}

VelocityDirichlet velocity_dirichlet(const FESpaces& sp) {
  VelocityDirichlet bc;
  bc.mask.assign(sp.Nu, 0);
  for (const auto& bn : sp.boundary_nodes) {
    if (bn.tag == BoundaryTag::Outflow) continue;
    const Vec2 pos = sp.node_position(bn.node);
    for (int c = 0; c < 2; ++c) {
      const int dof = sp.velocity_dof(bn.node, c);
      bc.mask[dof] = 1;
      bc.entries.push_back({dof, c, bn.tag, pos});
    }
  }
  std::sort(bc.entries.begin(), bc.entries.end(),
            [](const auto& a, const auto& b) { return a.dof < b.dof; });
  return bc;
}

std::vector<double> dirichlet_vector(const VelocityDirichlet& bc,
                                     const DirichletData& data, double t,
                                     int Nu) {
  std::vector<double> g(Nu, 0.0);
  for (const auto& e : bc.entries) g[e.dof] = data(e.tag, e.pos, t)[e.comp];
  return g;
}

SparseMatrix eliminate_rows_cols(const SparseMatrix& A,
                                 const std::vector<char>& constrained,
                                 bool identity_diag) {
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(A.nnz());
  for (int r = 0; r < A.rows(); ++r) {
    if (constrained[r]) {
      if (identity_diag) trip.push_back({r, r, 1.0});
      continue;
    }
    for (int k = A.row_offsets()[r]; k < A.row_offsets()[r + 1]; ++k) {
      const int c = A.col_indices()[k];
      if (!constrained[c]) trip.push_back({r, c, A.values()[k]});
    }
  }
  return SparseMatrix::from_triplets(A.rows(), A.cols(), std::move(trip));
}

SparseMatrix eliminate_cols(const SparseMatrix& B,
                            const std::vector<char>& constrained) {
  std::vector<SparseMatrix::Triplet> trip;
  trip.reserve(B.nnz());
  for (int r = 0; r < B.rows(); ++r) {
    for (int k = B.row_offsets()[r]; k < B.row_offsets()[r + 1]; ++k) {
      const int c = B.col_indices()[k];
      if (!constrained[c]) trip.push_back({r, c, B.values()[k]});
    }
  }
  return SparseMatrix::from_triplets(B.rows(), B.cols(), std::move(trip));
}

}  // namespace stflow
