#include <benchmark/benchmark.h>

#include "stflow/problems.hpp"
#include "stflow/spacetime.hpp"

using namespace stflow;

static void BM_PreconditionerApply(benchmark::State& state) {
  const ProblemSpec prob = make_problem(ProblemId::Cavity);
  const int r = static_cast<int>(state.range(0));
  const SpaceTimeSystem sys = assemble_system(prob, r, 3);
  const PTPreconditioner PT(sys, PrecondConfig::ideal());
  SpaceTimeVector v = sys.zero_vector();
  for (std::size_t i = 0; i < v.size(); ++i)
    v.data[i] = std::sin(0.1 * static_cast<double>(i));
  SpaceTimeVector out = sys.zero_vector();
  for (auto _ : state) {
    PT.apply(v, out);
    benchmark::DoNotOptimize(out.data.data());
  }
}
BENCHMARK(BM_PreconditionerApply)->Arg(3)->Arg(4);

static void BM_SpaceTimeMatVec(benchmark::State& state) {
  const ProblemSpec prob = make_problem(ProblemId::Cavity);
  const int r = static_cast<int>(state.range(0));
  const SpaceTimeSystem sys = assemble_system(prob, r, 4);
  SpaceTimeVector v = sys.zero_vector();
  for (std::size_t i = 0; i < v.size(); ++i)
    v.data[i] = std::cos(0.01 * static_cast<double>(i));
  SpaceTimeVector out = sys.zero_vector();
  for (auto _ : state) {
    apply_spacetime_operator(sys, v, out);
    benchmark::DoNotOptimize(out.data.data());
  }
}
BENCHMARK(BM_SpaceTimeMatVec)->Arg(3)->Arg(4)->Arg(5);

static void BM_AllAtOnceSolve(benchmark::State& state) {
  const ProblemSpec prob = make_problem(ProblemId::Cavity);
  const int r = static_cast<int>(state.range(0));
  const SpaceTimeSystem sys = assemble_system(prob, r, 3);
  KrylovConfig kc;
  kc.tol = 1e-10;
  for (auto _ : state) {
    AllAtOnceResult res = solve_all_at_once(sys, PrecondConfig::ideal(), kc);
    benchmark::DoNotOptimize(res.report.iterations);
  }
}
BENCHMARK(BM_AllAtOnceSolve)->Arg(2)->Arg(3)->Unit(benchmark::kMillisecond);
