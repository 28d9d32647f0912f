#pragma once

#include <cmath>

#include "memincl/solver.hpp"

namespace testutil {

// Heat-type problem: A = p-Laplacian, B = Laplacian, F = {-gain v}.
inline memincl::ProblemData heat_problem(std::size_t n, std::size_t steps, double final_time, double lambda,
                                         double p = 2.0, double gain = 0.0) {
  using namespace memincl;
  const Grid g = Grid::make(n, 1.0);
  State v0(static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) v0[static_cast<Eigen::Index>(i)] = std::sin(M_PI * g.x(i));
  SetField field = SetField::singleton(g, [gain](double, const State& v) -> State { return -gain * v; });
  return ProblemData{g,
                     TimeMesh::make(final_time, steps),
                     lambda,
                     State::Zero(static_cast<Eigen::Index>(n)),
                     v0,
                     p == 2.0 ? OperatorA::laplacian(g) : OperatorA::p_laplacian(g, p),
                     OperatorB::laplacian(g),
                     std::move(field),
                     Exponents::from_p(p)};
}

inline std::vector<memincl::State> zero_forcing(const memincl::ProblemData& d) {
  return std::vector<memincl::State>(d.mesh.steps, memincl::State::Zero(static_cast<Eigen::Index>(d.grid.n)));
}

}  // namespace testutil
