#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "memincl/solver.hpp"

using namespace memincl;

namespace {

State random_state(std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  State v(static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = normal(rng);
  return v;
}

std::vector<State> random_path(std::size_t n, std::size_t nodes) {
  std::mt19937_64 rng(1);
  std::vector<State> v;
  for (std::size_t j = 0; j < nodes; ++j) v.push_back(random_state(n, rng));
  return v;
}

void BM_MemoryRecurrence(benchmark::State& state) {
  const auto steps = static_cast<std::size_t>(state.range(0));
  const TimeMesh mesh = TimeMesh::make(1.0, steps);
  const MemoryParams mp{1.0, State::Zero(32), 1.0};
  const auto v = random_path(32, mesh.nodes());
  for (auto _ : state) benchmark::DoNotOptimize(apply_k_recurrence(v, mp, mesh));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MemoryRecurrence)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oN);

void BM_MemoryDirect(benchmark::State& state) {
  const auto steps = static_cast<std::size_t>(state.range(0));
  const TimeMesh mesh = TimeMesh::make(1.0, steps);
  const MemoryParams mp{1.0, State::Zero(32), 1.0};
  const auto v = random_path(32, mesh.nodes());
  for (auto _ : state) benchmark::DoNotOptimize(apply_k_direct(v, mp, mesh));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_MemoryDirect)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNSquared);

void BM_ImplicitStep(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const double p = static_cast<double>(state.range(1));
  const Grid g = Grid::make(n, 1.0);
  const OperatorA a = OperatorA::p_laplacian(g, p);
  std::mt19937_64 rng(2);
  const State rhs = random_state(n, rng);
  const ImplicitStepper stepper(a, 1e-3, 1e-12, 200);
  for (auto _ : state) benchmark::DoNotOptimize(stepper.solve(rhs, rhs));
}
BENCHMARK(BM_ImplicitStep)->ArgsProduct({{64, 256, 1024}, {2, 3, 4}});

void BM_MarchingSolve(benchmark::State& state) {
  const Grid g = Grid::make(64, 1.0);
  const auto steps = static_cast<std::size_t>(state.range(0));
  State v0(64);
  for (std::size_t i = 0; i < 64; ++i) v0[static_cast<Eigen::Index>(i)] = std::sin(M_PI * g.x(i));
  const ProblemData d{g,
                      TimeMesh::make(1.0, steps),
                      1.0,
                      State::Zero(64),
                      v0,
                      OperatorA::p_laplacian(g, 3.0),
                      OperatorB::fractional_laplacian(g, 0.75),
                      SetField::ball(g, [](double, const State& v) -> State { return -0.5 * v; },
                                     [](double, const State&) { return 0.1; }),
                      Exponents::from_p(3.0)};
  for (auto _ : state) benchmark::DoNotOptimize(marching_solve(d, MinimalNorm{}));
}
BENCHMARK(BM_MarchingSolve)->Arg(100)->Arg(400)->Unit(benchmark::kMillisecond);

void BM_PolytopeProjection(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const Grid g = Grid::make(n, 1.0);
  std::mt19937_64 rng(3);
  std::vector<State> verts;
  for (std::size_t k = 0; k < kMaxPolytopeVertices; ++k) verts.push_back(random_state(n, rng));
  const SetValue poly{PolytopeSet{verts}, g};
  const State x = 5.0 * random_state(n, rng);
  for (auto _ : state) benchmark::DoNotOptimize(project(poly, x));
}
BENCHMARK(BM_PolytopeProjection)->Arg(16)->Arg(64)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
