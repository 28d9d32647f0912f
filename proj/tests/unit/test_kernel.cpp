#include <doctest.h>

#include <cmath>
#include <random>

#include "memincl/kernel.hpp"
#include "test_util.hpp"

using namespace memincl;
using testutil::random_state;

TEST_CASE("kernel values") {
  CHECK(kernel_eval(0.0, 3.0) == 3.0);
  CHECK(kernel_eval(std::log(2.0), 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(kernel_eval(1.0, 2.0) > kernel_eval(2.0, 2.0));
  CHECK_THROWS_AS((void)kernel_eval(-1e-3, 1.0), std::domain_error);
}

TEST_CASE("kernel L1 norm") {
  CHECK(l1_kernel_norm(1.0, std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-15));
  double prev = 0.0;
  for (double T : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 40.0}) {
    const double v = l1_kernel_norm(1.3, T);
    CHECK(v > prev);
    CHECK(v < 1.0 + 1e-15);
    prev = v;
  }
  CHECK(prev == doctest::Approx(1.0));

  // Composite trapezoid with 1e6 intervals.
  const double lambda = 2.0;
  const std::size_t m = 1000000;
  const double dz = 1.0 / static_cast<double>(m);
  double sum = 0.5 * (kernel_eval(0.0, lambda) + kernel_eval(1.0, lambda));
  for (std::size_t i = 1; i < m; ++i) {
    sum += kernel_eval(static_cast<double>(i) * dz, lambda);
  }
  CHECK(std::abs(sum * dz - l1_kernel_norm(lambda, 1.0)) <= 1e-10);
}

TEST_CASE("direct convolution of simple inputs") {
  const Grid g = Grid::make(3, 1.0);
  const TimeMesh mesh = TimeMesh::make(2.0, 40);
  const MemoryParams mp{1.7, State::Zero(3), 2.0};
  std::vector<State> zero(mesh.nodes(), State::Zero(3));
  for (const auto& w : apply_k_direct(zero, mp, mesh)) {
    CHECK(w.norm() == 0.0);
  }
  const State c = random_state(3, 5);
  std::vector<State> constant(mesh.nodes(), c);
  const auto w = apply_k_direct(constant, mp, mesh);
  for (std::size_t n = 0; n < mesh.nodes(); ++n) {
    const State exact = c * (1.0 - std::exp(-mp.lambda * mesh.t(n)));
    CHECK((w[n] - exact).cwiseAbs().maxCoeff() <= 1e-14);
  }
  CHECK(w[0].norm() == 0.0);
}

TEST_CASE("memory step") {
  const State v = random_state(4, 1);
  CHECK((memory_step(v, v, 3.0, 0.1) - v).cwiseAbs().maxCoeff() <= 1e-15);
  const State w1 = memory_step(State::Zero(4), v, 3.0, 0.1);
  CHECK((w1 - v * (1.0 - std::exp(-0.3))).cwiseAbs().maxCoeff() <= 1e-16);
  // Stiff rates stay exact.
  CHECK((memory_step(State::Zero(4), v, 1e8, 0.1) - v).cwiseAbs().maxCoeff() == 0.0);
  CHECK(memory_step(State::Zero(4), v, 1e-12, 1e-6).norm() <= 1e-17 * v.norm() + 1e-300);

  // Contraction: convex combination.
  const Grid g = Grid::make(4, 1.0);
  for (std::uint64_t s = 0; s < 20; ++s) {
    const State w = random_state(4, s);
    const State x = random_state(4, s + 30);
    const State next = memory_step(w, x, 0.5 + static_cast<double>(s), 0.05);
    CHECK(h_norm(next, g) <= std::max(h_norm(w, g), h_norm(x, g)) * (1.0 + 1e-14));
  }
}

TEST_CASE("recurrence equals direct sum") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> lam(0.01, 50.0);
  for (int trial = 0; trial < 10; ++trial) {
    const std::size_t steps = 10 + 37 * static_cast<std::size_t>(trial);
    const TimeMesh mesh = TimeMesh::make(1.5, steps);
    const MemoryParams mp{lam(rng), State::Zero(5), 1.5};
    std::vector<State> v;
    for (std::size_t n = 0; n < mesh.nodes(); ++n) {
      v.push_back(random_state(5, 1000 * trial + n));
    }
    const auto direct = apply_k_direct(v, mp, mesh);
    const auto rec = apply_k_recurrence(v, mp, mesh);
    REQUIRE(direct.size() == rec.size());
    for (std::size_t n = 0; n < direct.size(); ++n) {
      const double scale = std::max(1.0, direct[n].cwiseAbs().maxCoeff());
      CHECK((direct[n] - rec[n]).cwiseAbs().maxCoeff() <= 1e-12 * scale);
    }
  }
}

TEST_CASE("relation (Kv)' = lambda (v - w)") {
  const Grid g = Grid::make(2, 1.0);
  const double lambda = 1.4;
  const State c = random_state(2, 3);
  std::vector<double> residuals;
  for (std::size_t steps : {100u, 200u, 400u}) {
    const TimeMesh mesh = TimeMesh::make(1.0, steps);
    const MemoryParams mp{lambda, State::Zero(2), 1.0};
    std::vector<State> v(mesh.nodes(), c);
    std::vector<State> w;
    for (std::size_t n = 0; n < mesh.nodes(); ++n) {
      w.push_back(c * (1.0 - std::exp(-lambda * mesh.t(n))));
    }
    residuals.push_back(check_relation5(v, w, mp, mesh, g));
  }
  // Taylor: residual = tau^2/6 |w'''| + ..., so halving tau divides by 4.
  CHECK(residuals[0] / residuals[1] == doctest::Approx(4.0).epsilon(0.02));
  CHECK(residuals[1] / residuals[2] == doctest::Approx(4.0).epsilon(0.02));
  const double taylor = std::pow(0.01, 2) / 6.0 * std::pow(lambda, 3) * h_norm(c, g);
  CHECK(residuals[0] <= 1.01 * taylor);

  // Constant w = v.
  const TimeMesh mesh = TimeMesh::make(1.0, 50);
  const MemoryParams mp{lambda, State::Zero(2), 1.0};
  std::vector<State> same(mesh.nodes(), c);
  CHECK(check_relation5(same, same, mp, mesh, g) <= 1e-13);

  // One corrupted entry shows up through the difference quotient.
  std::vector<State> w = same;
  const double delta = 1e-3;
  w[10] += State::Constant(2, delta);
  const double corrupted = check_relation5(same, w, mp, mesh, g);
  CHECK(corrupted >= delta / (2.0 * mesh.tau) * h_norm(State::Ones(2), g) - lambda * delta);
}

TEST_CASE("convolution bounds") {
  const Grid g = Grid::make(1, 2.0);  // h = 1, so H norms are plain absolute values
  {
    const TimeMesh mesh = TimeMesh::make(1.0, 100);
    const MemoryParams mp{1.0, State::Zero(1), 1.0};
    std::vector<State> zero(mesh.nodes(), State::Zero(1));
    const auto rep = verify_lemma_bounds(zero, apply_k_direct(zero, mp, mesh), mp, mesh, g);
    CHECK(rep.l2_ok);
    CHECK(rep.c_ok);
    CHECK(rep.l2_lhs == 0.0);
  }
  {
    // v = 1: ||1 - e^{-t}||_{L2(0,1)} = sqrt(int (1 - e^{-t})^2) with the closed form
    // 1 - 2(1 - e^{-1}) + (1 - e^{-2}) / 2.
    const double closed = std::sqrt(1.0 - 2.0 * (1.0 - std::exp(-1.0)) + 0.5 * (1.0 - std::exp(-2.0)));
    CHECK(closed == doctest::Approx(0.40999).epsilon(1e-4));
    const TimeMesh mesh = TimeMesh::make(1.0, 4000);
    const MemoryParams mp{1.0, State::Zero(1), 1.0};
    std::vector<State> one(mesh.nodes(), State::Ones(1));
    const auto rep = verify_lemma_bounds(one, apply_k_direct(one, mp, mesh), mp, mesh, g);
    CHECK(rep.l2_lhs == doctest::Approx(closed).epsilon(2e-4));
    CHECK(rep.l2_rhs == doctest::Approx(1.0 - std::exp(-1.0)).epsilon(1e-12));
    CHECK(rep.l2_ok);
    CHECK(rep.c_ok);
  }
  const Grid g8 = Grid::make(8, 1.0);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> lam(0.05, 20.0);
  for (std::uint64_t s = 0; s < 100; ++s) {
    const TimeMesh mesh = TimeMesh::make(1.0, 32 + s);
    const MemoryParams mp{lam(rng), State::Zero(8), 1.0};
    std::vector<State> v;
    for (std::size_t n = 0; n < mesh.nodes(); ++n) {
      v.push_back(random_state(8, s * 7919 + n));
    }
    const auto rep = verify_lemma_bounds(v, apply_k_direct(v, mp, mesh), mp, mesh, g8);
    CHECK(rep.l2_ok);
    CHECK(rep.c_ok);
    CHECK(rep.slack() >= -1e-10);
  }
}

TEST_CASE("mesh") {
  const TimeMesh m = TimeMesh::make(0.3, 7);
  CHECK(m.t(0) == 0.0);
  CHECK(m.t(7) == 0.3);
  CHECK(m.nodes() == 8);
  CHECK_THROWS(TimeMesh::make(0.0, 3));
  CHECK_THROWS(TimeMesh::make(1.0, 0));
}
