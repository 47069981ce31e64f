// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "atkse/errors.hpp"
#include "atkse/sbm.hpp"
#include "doctest.h"

using namespace atkse;

TEST_CASE("generate_sbm: p_in=1, p_out=0 gives disjoint cliques") {
  SbmConfig c;
  c.num_nodes = 4;
  c.num_classes = 2;
  c.p_in = 1.0;
  c.p_out = 0.0;
  c.num_features = 2;
  const Graph g = generate_sbm(c);
  Matrix expected = Matrix::Zero(4, 4);
  expected(0, 1) = expected(1, 0) = expected(2, 3) = expected(3, 2) = 1.0;
  CHECK(g.adjacency == expected);
  CHECK(g.labels == std::vector<int>{0, 0, 1, 1});
  CHECK(g.split.train.size() == 2);
  CHECK(g.split.test.size() == 2);
  CHECK_NOTHROW(g.validate());
}

TEST_CASE("generate_sbm is deterministic per seed") {
  SbmConfig c;
  c.seed = 42;
  CHECK(generate_sbm(c) == generate_sbm(c));
  SbmConfig d = c;
  d.seed = 43;
  CHECK_FALSE(generate_sbm(c) == generate_sbm(d));
}

TEST_CASE("generate_sbm edge count matches the binomial expectation") {
  // Expectation 2*C(50,2)*0.1 + 50*50*0.01 = 245 + 25 = 270.
  const double mean = 2.0 * 1225.0 * 0.1 + 2500.0 * 0.01;
  const double sd = std::sqrt(2.0 * 1225.0 * 0.1 * 0.9 + 2500.0 * 0.01 * 0.99);
  CHECK(mean == doctest::Approx(270.0));
  SbmConfig c;
  c.seed = 0;
  const auto edges = static_cast<double>(count_edges(generate_sbm(c).adjacency));
  CHECK(std::abs(edges - mean) <= 3.0 * sd);
}

TEST_CASE("generate_sbm split is stratified 10/90") {
  SbmConfig c;
  c.num_nodes = 200;
  c.num_classes = 4;
  const Graph g = generate_sbm(c);
  std::vector<int> per_class(4, 0);
  for (NodeId i : g.split.train) ++per_class[static_cast<std::size_t>(g.labels[static_cast<std::size_t>(i)])];
  CHECK(per_class == std::vector<int>{5, 5, 5, 5});
  CHECK(g.split.test.size() == 180);
}

TEST_CASE("generate_sbm features carry the class shift on a class block") {
  SbmConfig c;
  c.num_nodes = 2000;
  c.num_classes = 2;
  c.num_features = 4;
  c.feature_shift = 2.0;
  const Graph g = generate_sbm(c);
  // Class 0 owns coordinates {0,1}; class 1 owns {2,3}.
  const double class0_own = g.features.topRows(1000).col(0).mean();
  const double class0_other = g.features.topRows(1000).col(2).mean();
  const double class1_own = g.features.bottomRows(1000).col(3).mean();
  CHECK(class0_own == doctest::Approx(2.0).epsilon(0.1));
  CHECK(std::abs(class0_other) < 0.15);
  CHECK(class1_own == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("generate_sbm rejects bad parameters") {
  SbmConfig c;
  c.num_nodes = 101;
  CHECK_THROWS_AS((void)generate_sbm(c), InvalidArgument);
  c.num_nodes = 100;
  c.p_in = 0.01;
  c.p_out = 0.1;
  CHECK_THROWS_AS((void)generate_sbm(c), InvalidArgument);
  c.p_in = 0.1;
  c.p_out = 0.1;
  CHECK_THROWS_AS((void)generate_sbm(c), InvalidArgument);
}
