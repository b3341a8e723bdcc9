#include <benchmark/benchmark.h>

#include "stflow/fem.hpp"
#include "stflow/mesh.hpp"
#include "stflow/problems.hpp"
#include "stflow/spacetime.hpp"

using namespace stflow;

static void BM_BuildSpaces(benchmark::State& state) {
  const TriMesh mesh = unit_square_mesh(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    FESpaces sp = build_spaces(mesh);
    benchmark::DoNotOptimize(sp.Nu);
  }
}
BENCHMARK(BM_BuildSpaces)->Arg(3)->Arg(4)->Arg(5);

static void BM_AssembleVelocityStiffness(benchmark::State& state) {
  const FESpaces sp =
      build_spaces(unit_square_mesh(static_cast<int>(state.range(0))));
  for (auto _ : state) {
    SparseMatrix A = assemble_velocity_stiffness(sp);
    benchmark::DoNotOptimize(A.nnz());
  }
}
BENCHMARK(BM_AssembleVelocityStiffness)->Arg(3)->Arg(4)->Arg(5);

static void BM_AssembleSystem(benchmark::State& state) {
  const ProblemSpec prob = make_problem(ProblemId::Cavity);
  const int r = static_cast<int>(state.range(0));
  const SpatialDiscretisation disc = discretise(prob, r);
  for (auto _ : state) {
    SpaceTimeSystem sys = assemble_system(prob, disc, 3);
    benchmark::DoNotOptimize(sys.Nt);
  }
}
BENCHMARK(BM_AssembleSystem)->Arg(3)->Arg(4);
