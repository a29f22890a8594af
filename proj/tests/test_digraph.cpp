#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "dgopt/digraph.hpp"
#include "dgopt/spectral.hpp"

using namespace dgopt;

namespace {

Digraph cycle3() { return Digraph(3, {{0, 1}, {1, 2}, {2, 0}}); }

// Largest singular value from the symmetric eigenproblem of M^T M.
double top_singular_value(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.transpose() * m);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

Eigen::MatrixXcd as_complex(const Eigen::MatrixXd& m) { return m.cast<std::complex<double>>(); }

}  // namespace

TEST_CASE("strong connectivity") {
  CHECK(is_strongly_connected(cycle3()));
  CHECK_FALSE(is_strongly_connected(Digraph(2, {{0, 1}})));
  CHECK(is_strongly_connected(fig1_graph()));
  CHECK(is_strongly_connected(Digraph(1, {})));
  CHECK_FALSE(is_strongly_connected(Digraph(4, {{0, 1}, {1, 0}, {2, 3}, {3, 2}})));
}

TEST_CASE("digraph construction rejects malformed edge lists") {
  CHECK_THROWS_AS(Digraph(0, {}), std::invalid_argument);
  CHECK_THROWS_AS(Digraph(2, {{0, 2}}), std::invalid_argument);
  CHECK_THROWS_AS(Digraph(2, {{-1, 0}}), std::invalid_argument);
  CHECK_THROWS_AS(Digraph(2, {{1, 1}}), std::invalid_argument);
  CHECK_THROWS_AS(Digraph(2, {{0, 1}, {0, 1}}), std::invalid_argument);
}

TEST_CASE("neighbourhoods include the node itself") {
  const Digraph g = cycle3();
  for (int i = 0; i < 3; ++i) {
    CHECK(std::count(g.out_neighbors(i).begin(), g.out_neighbors(i).end(), i) == 1);
    CHECK(std::count(g.in_neighbors(i).begin(), g.in_neighbors(i).end(), i) == 1);
    CHECK(g.out_degree(i) == 2);
  }
  CHECK(g.has_edge(0, 1));
  CHECK_FALSE(g.has_edge(1, 0));
}

TEST_CASE("uniform weights") {
  SUBCASE("3-cycle: every nonzero entry is 1/2") {
    const WeightMatrix w = uniform_weights(cycle3());
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const bool linked = i == j || (i == (j + 1) % 3);
        CHECK(w(i, j) == doctest::Approx(linked ? 0.5 : 0.0));
      }
    }
  }
  SUBCASE("single node gives [1]") {
    const WeightMatrix w = uniform_weights(Digraph(1, {}));
    CHECK(w.size() == 1);
    CHECK(w(0, 0) == 1.0);
  }
  SUBCASE("out-degree 4 column has four entries of 1/4") {
    const Digraph g(4, {{0, 1}, {0, 2}, {0, 3}, {1, 0}, {2, 0}, {3, 0}});
    const WeightMatrix w = uniform_weights(g);
    for (int i = 0; i < 4; ++i) CHECK(w(i, 0) == 0.25);
  }
  SUBCASE("not strongly connected") {
    CHECK_THROWS_AS(uniform_weights(Digraph(2, {{0, 1}})), std::invalid_argument);
  }
  SUBCASE("column sums and zero pattern on random graphs") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      const Digraph g = random_strongly_connected(12, 0.2, seed);
      const WeightMatrix w = uniform_weights(g);
      for (int j = 0; j < 12; ++j) {
        CHECK(std::abs(w.matrix().col(j).sum() - 1.0) <= 1e-12);
        for (int i = 0; i < 12; ++i) {
          CHECK((w(i, j) > 0.0) == (i == j || g.has_edge(j, i)));
        }
      }
    }
  }
}

TEST_CASE("weight matrix validation") {
  Eigen::MatrixXd bad(2, 2);
  bad << 0.5, 0.5, 0.6, 0.5;
  CHECK_THROWS_AS(WeightMatrix{bad}, std::invalid_argument);
  bad << 1.5, 0.0, -0.5, 1.0;
  CHECK_THROWS_AS(WeightMatrix{bad}, std::invalid_argument);
  CHECK_THROWS_AS(WeightMatrix{Eigen::MatrixXd(2, 3)}, std::invalid_argument);
}

TEST_CASE("Perron limit") {
  SUBCASE("doubly-stochastic ring gives the uniform vector") {
    const WeightMatrix w = uniform_weights(ring_graph(7));
    const PerronLimit pl = perron_limit(w);
    for (int i = 0; i < 7; ++i) CHECK(pl.pi(i) == doctest::Approx(1.0 / 7).epsilon(1e-12));
  }
  SUBCASE("1x1") {
    const PerronLimit pl = perron_limit(WeightMatrix(Eigen::MatrixXd::Ones(1, 1)));
    CHECK(pl.pi(0) == doctest::Approx(1.0));
  }
  SUBCASE("3-node example agrees with A^200") {
    Eigen::MatrixXd a(3, 3);
    a << 0.5, 0.0, 0.5,
         0.5, 0.5, 0.0,
         0.0, 0.5, 0.5;
    const WeightMatrix w(a);
    const PerronLimit pl = perron_limit(w);
    Eigen::MatrixXd power = Eigen::MatrixXd::Identity(3, 3);
    for (int k = 0; k < 200; ++k) power = a * power;
    CHECK((power.col(0) - pl.pi).cwiseAbs().maxCoeff() <= 1e-10);
  }
  SUBCASE("fixed-point and projector identities on random graphs") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const WeightMatrix w = uniform_weights(random_strongly_connected(9, 0.15, seed));
      const PerronLimit pl = perron_limit(w);
      const Eigen::MatrixXd& a = w.matrix();
      CHECK((a * pl.pi - pl.pi).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK(std::abs(pl.pi.sum() - 1.0) <= 1e-12);
      CHECK(pl.pi.minCoeff() > 0.0);
      CHECK((a * pl.limit - pl.limit).cwiseAbs().maxCoeff() <= 1e-10);
      CHECK((pl.limit * pl.limit - pl.limit).cwiseAbs().maxCoeff() <= 1e-10);
    }
  }
}

TEST_CASE("powers of A stay column-stochastic and approach A_inf") {
  const WeightMatrix w = uniform_weights(fig1_graph());
  const PerronLimit pl = perron_limit(w);
  Eigen::MatrixXd power = Eigen::MatrixXd::Identity(10, 10);
  std::vector<double> gaps;
  for (int k = 1; k <= 500; ++k) {
    power = w.matrix() * power;
    CHECK((power.colwise().sum().array() - 1.0).abs().maxCoeff() <= 1e-12);
    gaps.push_back(norm2(power - pl.limit));
  }
  // Monotone once the transient is over and before roundoff dominates.
  std::size_t start = 0;
  for (std::size_t k = 1; k < gaps.size(); ++k) {
    if (gaps[k] > gaps[k - 1] && gaps[k] > 1e-13) start = k;
  }
  CHECK(start < 400);
  CHECK(gaps.back() < 1e-12);
}

TEST_CASE("push-sum weights stay positive") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const WeightMatrix w = uniform_weights(random_strongly_connected(10, 0.1, seed));
    Eigen::VectorXd y = Eigen::VectorXd::Ones(10);
    for (int k = 0; k < 500; ++k) {
      y = w.matrix() * y;
      REQUIRE(y.minCoeff() > 0.0);
    }
  }
}

TEST_CASE("contraction norm") {
  SUBCASE("symmetric doubly-stochastic weights use the identity") {
    // Bidirectional ring: every column has three entries of 1/3.
    std::vector<Edge> edges;
    for (int i = 0; i < 6; ++i) {
      edges.push_back({i, (i + 1) % 6});
      edges.push_back({(i + 1) % 6, i});
    }
    const WeightMatrix w = uniform_weights(Digraph(6, edges));
    const SpectralData sd = spectral_data(w, 0.01);
    const Eigen::MatrixXd m = w.matrix() - sd.limit;
    CHECK((sd.norm.transform() - as_complex(Eigen::MatrixXd::Identity(6, 6))).norm() == 0.0);
    CHECK(sd.sigma == doctest::Approx(top_singular_value(m)).epsilon(1e-12));
    CHECK(sd.sigma == doctest::Approx(sd.rho).epsilon(1e-10));
  }

  SUBCASE("fig1 with slack 0.01, random-vector oracle") {
    const WeightMatrix w = uniform_weights(fig1_graph());
    const PerronLimit pl = perron_limit(w);
    const ContractionNorm norm = contraction_norm(w, pl, 0.01);
    const Eigen::MatrixXd m = w.matrix() - pl.limit;
    const double rho = spectral_radius(m);
    CHECK(norm.sigma() <= rho + 0.01 + 1e-12);
    CHECK(norm.sigma() < 1.0);
    CHECK(rho <= norm.sigma() + 1e-12);
    std::mt19937_64 rng(11);
    std::normal_distribution<double> normal;
    double worst = 0.0;
    for (int t = 0; t < 1000; ++t) {
      Eigen::VectorXd v(10);
      for (auto& x : v) x = normal(rng);
      worst = std::max(worst, norm(Eigen::VectorXd(m * v)) / norm(v));
    }
    CHECK(worst <= norm.sigma() * (1.0 + 1e-12));
  }

  SUBCASE("contraction inequality for random vectors") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      const WeightMatrix w = uniform_weights(random_strongly_connected(8, 0.2, seed));
      const SpectralData sd = spectral_data(w);
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> normal;
      for (int t = 0; t < 1000; ++t) {
        Eigen::VectorXd a(8);
        for (auto& x : a) x = normal(rng);
        const Eigen::VectorXd lhs = w.matrix() * a - sd.limit * a;
        const Eigen::VectorXd rhs = a - sd.limit * a;
        REQUIRE(sd.norm(lhs) <= sd.sigma * sd.norm(rhs) * (1.0 + 1e-12) + 1e-15);
      }
    }
  }

  SUBCASE("norm-equivalence constants") {
    const SpectralData sd = spectral_data(uniform_weights(fig1_graph()));
    std::mt19937_64 rng(5);
    std::normal_distribution<double> normal;
    for (int t = 0; t < 200; ++t) {
      Eigen::VectorXd v(10);
      for (auto& x : v) x = normal(rng);
      CHECK(v.norm() <= sd.norm.c() * sd.norm(v) * (1.0 + 1e-12));
      CHECK(sd.norm(v) <= sd.norm.d() * v.norm() * (1.0 + 1e-12));
    }
  }

  SUBCASE("invalid slack") {
    const WeightMatrix w = uniform_weights(fig1_graph());
    const PerronLimit pl = perron_limit(w);
    CHECK_THROWS_AS(contraction_norm(w, pl, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(contraction_norm(w, pl, 0.5), std::invalid_argument);
  }
}

TEST_CASE("tau and eps") {
  SUBCASE("1x1") {
    const WeightMatrix w(Eigen::MatrixXd::Ones(1, 1));
    const TauEps te = tau_eps(w, perron_limit(w));
    CHECK(te.tau == 0.0);
    CHECK(te.eps == doctest::Approx(0.0));
  }
  SUBCASE("fig1 transcription is close to the reported constants") {
    const SpectralData sd = spectral_data(uniform_weights(fig1_graph()));
    CHECK(sd.tau == doctest::Approx(1.25).epsilon(0.02));
    CHECK(sd.eps == doctest::Approx(1.11).epsilon(0.02));
  }
  SUBCASE("random graphs match an independent singular-value oracle") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
      const WeightMatrix w = uniform_weights(random_strongly_connected(11, 0.25, seed));
      const PerronLimit pl = perron_limit(w);
      const TauEps te = tau_eps(w, pl);
      const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(11, 11);
      CHECK(te.tau == doctest::Approx(top_singular_value(w.matrix() - id)).epsilon(1e-10));
      CHECK(te.eps == doctest::Approx(top_singular_value(id - pl.limit)).epsilon(1e-10));
    }
  }
}

TEST_CASE("generators") {
  CHECK(ring_graph(5).edge_count() == 5);
  CHECK(ring_graph(2).edge_count() == 2);
  CHECK(complete_graph(4).edge_count() == 12);
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Digraph g = random_strongly_connected(15, 0.1, seed);
    CHECK(is_strongly_connected(g));
    CHECK(g == random_strongly_connected(15, 0.1, seed));
  }
  const auto chain = nested_chain(10, {5, 20, 1000}, 3);
  REQUIRE(chain.size() == 4);
  CHECK(chain.front().edge_count() == 10);
  CHECK(chain.back() == complete_graph(10));
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    CHECK(is_strongly_connected(chain[i]));
    CHECK(is_subgraph(chain[i], chain[i + 1]));
  }
  CHECK_FALSE(is_subgraph(chain[1], chain[0]));
}

TEST_CASE("graph text format") {
  std::istringstream in("# three agents\n3\n0 1  # 0 sends to 1\n1 2\n\n2 0\n");
  const Digraph g = parse_graph(in);
  CHECK(g == cycle3());

  std::ostringstream out;
  write_graph(out, fig1_graph());
  std::istringstream back(out.str());
  CHECK(parse_graph(back) == fig1_graph());

  std::istringstream bad1("3\n0 1 2\n");
  CHECK_THROWS_AS(parse_graph(bad1), std::invalid_argument);
  std::istringstream bad2("# nothing\n");
  CHECK_THROWS_AS(parse_graph(bad2), std::invalid_argument);
  std::istringstream bad3("2\n0 5\n");
  CHECK_THROWS_AS(parse_graph(bad3), std::invalid_argument);
  std::istringstream bad4("2\n0 x\n");
  CHECK_THROWS_AS(parse_graph(bad4), std::invalid_argument);

  const auto path = std::filesystem::temp_directory_path() / "dgopt_graph_test.txt";
  {
    std::ofstream f(path);
    write_graph(f, ring_graph(4));
  }
  CHECK(load_graph(path) == ring_graph(4));
  CHECK(resolve_graph(path.string()) == ring_graph(4));
  std::filesystem::remove(path);
  CHECK_THROWS(load_graph("/nonexistent/graph.txt"));
}

TEST_CASE("graph sources") {
  CHECK(resolve_graph("fig1") == fig1_graph());
  CHECK(resolve_graph("ring:6") == ring_graph(6));
  CHECK(resolve_graph("complete:3") == complete_graph(3));
  CHECK(resolve_graph("random:8:0.2:4") == random_strongly_connected(8, 0.2, 4));
  CHECK_THROWS(resolve_graph("ring:"));
  CHECK_THROWS(resolve_graph("random:8:0.2"));
}
