#include <cmath>

#include "doctest.h"
#include "support.hpp"
#include "techtrace/gru.hpp"

using namespace techtrace;

namespace {

GruParams<double> random_gru(int d, std::uint64_t seed, double scale = 1.0, bool bias = false) {
  auto p = GruParams<double>::zeros(d, bias);
  Rng rng(seed);
  visit_gru_tensors(
      [&](const std::string&, auto& t) {
        for (Eigen::Index k = 0; k < t.size(); ++k) t.data()[k] = uniform(rng, -scale, scale);
      },
      "gru", p);
  return p;
}

double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// Elementwise update written with explicit index loops.
std::vector<double> naive_step(const GruParams<double>& p, const std::vector<double>& h, const std::vector<double>& x) {
  const int d = p.dim();
  auto mv = [&](const Matrix<double>& w, const std::vector<double>& v, int row) {
    double s = 0;
    for (int c = 0; c < d; ++c) s += w(row, c) * v[c];
    return s;
  };
  std::vector<double> out(static_cast<std::size_t>(d));
  for (int k = 0; k < d; ++k) {
    const double z = sig(mv(p.w_xz, x, k) + mv(p.w_uz, h, k) + (p.has_bias() ? p.b_z[k] : 0.0));
    const double r = sig(mv(p.w_xr, x, k) + mv(p.w_ur, h, k) + (p.has_bias() ? p.b_r[k] : 0.0));
    const double c = std::tanh(mv(p.w_xu, x, k) + r * mv(p.w_uu, h, k) + (p.has_bias() ? p.b_u[k] : 0.0));
    out[k] = (1 - z) * c + z * h[k];
  }
  return out;
}

}  // namespace

TEST_CASE("zero weights halve the state") {
  const auto p = GruParams<double>::zeros(3);
  Eigen::VectorXd h(3), x(3);
  h << 0.4, -0.8, 1.0;
  x << 5, 6, 7;
  CHECK((gru_step(p, h, x) - 0.5 * h).norm() < 1e-15);
  CHECK_THROWS_AS(gru_step(p, h, Eigen::VectorXd(Eigen::VectorXd::Zero(2))), DimensionError);
}

TEST_CASE("two-dimensional step by hand") {
  auto p = GruParams<double>::zeros(2);
  p.w_xz << 1, 0, 0, 1;
  p.w_xu << 0, 1, 1, 0;
  p.w_uu << 1, 0, 0, 1;
  Eigen::VectorXd h(2), x(2);
  h << 0.5, -0.5;
  x << 1, 2;
  // z = sigma(x), r = 1/2, c = tanh(swap(x) + h / 2)
  const double z0 = sig(1), z1 = sig(2);
  const double c0 = std::tanh(2 + 0.25), c1 = std::tanh(1 - 0.25);
  const auto out = gru_step(p, h, x);
  CHECK(out[0] == doctest::Approx((1 - z0) * c0 + z0 * 0.5).epsilon(1e-14));
  CHECK(out[1] == doctest::Approx((1 - z1) * c1 - z1 * 0.5).epsilon(1e-14));
}

TEST_CASE("trajectory and batched unroll follow the loop definition") {
  for (bool bias : {false, true}) {
    const int d = 4;
    const auto p = random_gru(d, 3, 1.0, bias);
    Rng rng(5);
    std::vector<Eigen::MatrixXd> xs;
    for (int t = 0; t < 4; ++t) {
      Eigen::MatrixXd x(3, d);
      for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = uniform(rng, -2.0, 2.0);
      xs.push_back(x);
    }
    const Eigen::MatrixXd last = gru_unroll<double>(p, xs, nullptr);
    for (int e = 0; e < 3; ++e) {
      std::vector<double> h(d, 0.0);
      std::vector<Eigen::VectorXd> seq;
      for (const auto& x : xs) {
        std::vector<double> xv;
        for (int c = 0; c < d; ++c) xv.push_back(x(e, c));
        h = naive_step(p, h, xv);
        seq.push_back(x.row(e).transpose());
      }
      const auto traj = gru_trajectory(p, seq);
      REQUIRE(traj.size() == 4);
      for (int c = 0; c < d; ++c) {
        CHECK(last(e, c) == doctest::Approx(h[c]).epsilon(1e-12));
        CHECK(traj.back()[c] == doctest::Approx(h[c]).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("states stay inside the open unit cube") {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const auto p = random_gru(3, 100 + trial, 5.0);
    std::vector<Eigen::VectorXd> xs;
    for (int t = 0; t < 10; ++t) {
      Eigen::VectorXd x(3);
      for (int c = 0; c < 3; ++c) x[c] = uniform(rng, -50.0, 50.0);
      xs.push_back(x);
    }
    for (const auto& h : gru_trajectory(p, xs)) CHECK(h.cwiseAbs().maxCoeff() <= 1.0);
  }
}

TEST_CASE("backpropagation through time matches central differences") {
  for (bool bias : {false, true}) {
    const int d = 3, E = 2, T = 4;
    auto p = random_gru(d, 21, 1.0, bias);
    Rng rng(22);
    std::vector<Eigen::MatrixXd> xs;
    for (int t = 0; t < T; ++t) {
      Eigen::MatrixXd x(E, d);
      for (Eigen::Index k = 0; k < x.size(); ++k) x.data()[k] = uniform(rng, -1.0, 1.0);
      xs.push_back(x);
    }
    Eigen::MatrixXd G(E, d);
    for (Eigen::Index k = 0; k < G.size(); ++k) G.data()[k] = uniform(rng, -1.0, 1.0);
    auto objective = [&]() { return (gru_unroll<double>(p, xs, nullptr).array() * G.array()).sum(); };

    GruTape<double> tape;
    gru_unroll(p, xs, &tape);
    auto grad = GruParams<double>::zeros(d, bias);
    const auto dx = gru_backward(p, tape, G, grad);

    visit_gru_tensors(
        [&](const std::string& name, auto& w, const auto& g) {
          for (Eigen::Index k = 0; k < w.size(); ++k) {
            const double fd = tt_test::central_difference(w.data()[k], 1e-6, objective);
            INFO(name << "[" << k << "]");
            CHECK(std::abs(fd - g.data()[k]) < 1e-7);
          }
        },
        "gru", p, grad);
    for (int t = 0; t < T; ++t) {
      for (Eigen::Index k = 0; k < xs[t].size(); ++k) {
        const double fd = tt_test::central_difference(xs[t].data()[k], 1e-6, objective);
        CHECK(std::abs(fd - dx[t].data()[k]) < 1e-7);
      }
    }
  }
}
