#include <doctest.h>

#include <cmath>
#include <vector>

#include "dipr/basis.hpp"
#include "dipr/rng.hpp"
#include "dipr/types.hpp"

using namespace dipr;

namespace {

// Midpoint-rule integral of f over [0,1].
template <typename F>
double integrate(F f, int n = 200000) {
  double s = 0.0;
  for (int i = 0; i < n; ++i) s += f((i + 0.5) / n);
  return s / n;
}

}  // namespace

TEST_CASE("cosine basis is orthonormal on [0,1]") {
  const BasisSpec b = BasisSpec::cosine(5);
  CHECK(b.dimension() == 5);
  CHECK(b.arity() == 1);
  for (Index j = 0; j < 5; ++j) {
    for (Index k = j; k < 5; ++k) {
      const double ip = integrate([&](double x) {
        return b.evaluate_element(j, &x) * b.evaluate_element(k, &x);
      });
      CHECK(std::abs(ip - (j == k ? 1.0 : 0.0)) <= 1e-8);
    }
  }
  // first element is the constant, later ones are scaled cosines
  double x = 0.37;
  CHECK(b.evaluate_element(0, &x) == doctest::Approx(1.0));
  CHECK(b.evaluate_element(2, &x) ==
        doctest::Approx(std::sqrt(2.0) * std::cos(2.0 * M_PI * x)));
}

TEST_CASE("legendre basis matches Gram-Schmidt of monomials") {
  const BasisSpec b = BasisSpec::legendre(4);
  // orthonormalize 1, x, x^2, x^3 under the L2([0,1]) inner product
  const int n = 200000;
  std::vector<Vec> mono(4, Vec(n)), ortho;
  Vec grid(n);
  for (int i = 0; i < n; ++i) {
    grid[i] = (i + 0.5) / n;
    for (int p = 0; p < 4; ++p) mono[p][i] = std::pow(grid[i], p);
  }
  auto dot = [&](const Vec& u, const Vec& v) { return u.dot(v) / n; };
  for (int p = 0; p < 4; ++p) {
    Vec v = mono[p];
    for (const Vec& q : ortho) v -= dot(q, v) * q;
    ortho.push_back(v / std::sqrt(dot(v, v)));
  }
  // compare on a few interior points, up to the sign convention phi_j(1) > 0
  for (int j = 0; j < 4; ++j) {
    double one = 1.0;
    const double sign = b.evaluate_element(j, &one) > 0 ? 1.0 : -1.0;
    const double ref_sign = ortho[j][n - 1] > 0 ? 1.0 : -1.0;
    for (int i : {1000, 50000, 120000, 190000}) {
      CHECK(sign * b.evaluate_element(j, &grid[i]) ==
            doctest::Approx(ref_sign * ortho[j][i]).epsilon(1e-4));
    }
  }
}

TEST_CASE("indicator basis is orthonormal under its category weights") {
  Vec w(3);
  w << 0.2, 0.3, 0.5;
  const BasisSpec b = BasisSpec::indicator(w);
  CHECK(b.dimension() == 3);
  for (Index j = 0; j < 3; ++j) {
    for (Index k = 0; k < 3; ++k) {
      double ip = 0.0;
      for (Index c = 0; c < 3; ++c) {
        double x = double(c);
        ip += w[c] * b.evaluate_element(j, &x) * b.evaluate_element(k, &x);
      }
      CHECK(std::abs(ip - (j == k ? 1.0 : 0.0)) <= 1e-14);
    }
  }
  double x = 1.0;
  CHECK(b.evaluate_element(1, &x) == doctest::Approx(1.0 / std::sqrt(0.3)));
  CHECK(b.evaluate_element(0, &x) == 0.0);
}

TEST_CASE("tensor basis multiplies factors and concatenates coordinates") {
  Vec w(2);
  w << 0.4, 0.6;
  const BasisSpec t = BasisSpec::tensor(BasisSpec::cosine(3), BasisSpec::indicator(w));
  CHECK(t.dimension() == 6);
  CHECK(t.arity() == 2);
  CHECK(t.factor(0) == BasisSpec::cosine(3));
  CHECK(t.factor(1) == BasisSpec::indicator(w));
  double pt[2] = {0.3, 1.0};
  const BasisSpec& f0 = t.factor(0);
  const BasisSpec& f1 = t.factor(1);
  // element ordering: first factor index varies slowest or fastest -- pin it
  Vec vals = t.evaluate_point(pt);
  bool fast_second = true, fast_first = true;
  for (Index i = 0; i < 3; ++i) {
    for (Index j = 0; j < 2; ++j) {
      const double prod =
          f0.evaluate_element(i, &pt[0]) * f1.evaluate_element(j, &pt[1]);
      if (std::abs(vals[i * 2 + j] - prod) > 1e-12) fast_second = false;
      if (std::abs(vals[j * 3 + i] - prod) > 1e-12) fast_first = false;
    }
  }
  CHECK((fast_second || fast_first));
}

TEST_CASE("design matrix rows equal pointwise evaluation") {
  const BasisSpec b = BasisSpec::cosine(4);
  Rng rng(7);
  Mat pts(10, 1);
  for (Index i = 0; i < 10; ++i) pts(i, 0) = rng.uniform();
  const Mat d = b.design(pts);
  CHECK(d.rows() == 10);
  CHECK(d.cols() == 4);
  for (Index i = 0; i < 10; ++i) {
    const Vec v = b.evaluate_point(&pts(i, 0));
    CHECK((d.row(i).transpose() - v).norm() <= 1e-15);
  }
}

TEST_CASE("gram of many uniform points approaches the identity") {
  const BasisSpec b = BasisSpec::cosine(4);
  const int n = 200000;
  Mat pts(n, 1);
  for (int i = 0; i < n; ++i) pts(i, 0) = (i + 0.5) / n;
  const Mat g = gram(b, pts);
  CHECK((g - Mat::Identity(4, 4)).norm() <= 1e-6);
}

TEST_CASE("function handle evaluates linear combinations and norms") {
  Vec c(3);
  c << 0.5, -1.0, 2.0;
  const FunctionHandle h(BasisSpec::cosine(3), c);
  double x = 0.42;
  double manual = 0.0;
  for (Index j = 0; j < 3; ++j) manual += c[j] * h.basis().evaluate_element(j, &x);
  CHECK(h(x) == doctest::Approx(manual));
  CHECK(h.l2_norm() == doctest::Approx(c.norm()));
  CHECK(zero_function(BasisSpec::cosine(3)).l2_norm() == 0.0);
}

TEST_CASE("basis validation rejects bad inputs") {
  CHECK_THROWS_AS(BasisSpec::cosine(0), ConfigError);
  Vec bad(2);
  bad << 0.5, 0.6;
  CHECK_THROWS_AS(BasisSpec::indicator(bad), ConfigError);
  bad << -0.5, 1.5;
  CHECK_THROWS_AS(BasisSpec::indicator(bad), ConfigError);
  const BasisSpec b = BasisSpec::cosine(2);
  double x = 1.7;
  CHECK_THROWS_AS(b.evaluate_element(0, &x), std::domain_error);
  Vec w(2);
  w << 0.5, 0.5;
  const BasisSpec ind = BasisSpec::indicator(w);
  x = 0.4;
  CHECK_THROWS_AS(ind.evaluate_element(0, &x), std::domain_error);
  x = 5.0;
  CHECK_THROWS_AS(ind.evaluate_element(0, &x), std::domain_error);
  CHECK_THROWS_AS(b.weights(), ConfigError);
  CHECK_THROWS_AS(b.factor(0), ConfigError);
  Vec short_c(1);
  short_c << 1.0;
  CHECK_THROWS_AS(FunctionHandle(BasisSpec::cosine(2), short_c), ConfigError);
}

TEST_CASE("basis equality distinguishes family, dimension and weights") {
  CHECK(BasisSpec::cosine(3) == BasisSpec::cosine(3));
  CHECK(BasisSpec::cosine(3) != BasisSpec::cosine(4));
  CHECK(BasisSpec::cosine(3) != BasisSpec::legendre(3));
  Vec w1(2), w2(2);
  w1 << 0.5, 0.5;
  w2 << 0.4, 0.6;
  CHECK(BasisSpec::indicator(w1) != BasisSpec::indicator(w2));
  CHECK(BasisSpec::tensor(BasisSpec::cosine(2), BasisSpec::indicator(w1)) ==
        BasisSpec::tensor(BasisSpec::cosine(2), BasisSpec::indicator(w1)));
}
