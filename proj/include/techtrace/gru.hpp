#pragma once

#include <string>
#include <vector>

#include "techtrace/error.hpp"
#include "techtrace/linalg.hpp"

namespace techtrace {

// Gated recurrent unit without biases by default:
//   z  = sigmoid(W_xz x + W_uz h)
//   r  = sigmoid(W_xr x + W_ur h)
//   h~ = tanh(W_xu x + r .* (W_uu h))
//   h' = (1 - z) .* h~ + z .* h
// Optional biases b_z, b_r, b_u are added inside the three activations; they
// are empty vectors when disabled.
template <typename Scalar>
struct GruParams {
  Matrix<Scalar> w_xz, w_uz, w_xr, w_ur, w_xu, w_uu;  // d x d
  Vector<Scalar> b_z, b_r, b_u;

  static GruParams zeros(int d, bool with_bias = false) {
    GruParams p;
    for (auto* m : {&p.w_xz, &p.w_uz, &p.w_xr, &p.w_ur, &p.w_xu, &p.w_uu}) *m = Matrix<Scalar>::Zero(d, d);
    const int nb = with_bias ? d : 0;
    for (auto* b : {&p.b_z, &p.b_r, &p.b_u}) *b = Vector<Scalar>::Zero(nb);
    return p;
  }

  int dim() const { return static_cast<int>(w_xz.rows()); }
  bool has_bias() const { return b_z.size() > 0; }
};

template <typename F, typename... P>
void visit_gru_tensors(F&& f, const std::string& prefix, P&... p) {
  f(prefix + ".w_xz", p.w_xz...);
  f(prefix + ".w_uz", p.w_uz...);
  f(prefix + ".w_xr", p.w_xr...);
  f(prefix + ".w_ur", p.w_ur...);
  f(prefix + ".w_xu", p.w_xu...);
  f(prefix + ".w_uu", p.w_uu...);
  f(prefix + ".b_z", p.b_z...);
  f(prefix + ".b_r", p.b_r...);
  f(prefix + ".b_u", p.b_u...);
}

template <typename Scalar>
Vector<Scalar> gru_step(const GruParams<Scalar>& p, const Vector<Scalar>& h_prev, const Vector<Scalar>& x) {
  const auto d = p.dim();
  if (h_prev.size() != d || x.size() != d) {
    throw DimensionError("gru_step expects vectors of size " + std::to_string(d));
  }
  Vector<Scalar> az = p.w_xz * x + p.w_uz * h_prev;
  Vector<Scalar> ar = p.w_xr * x + p.w_ur * h_prev;
  Vector<Scalar> ac_x = p.w_xu * x;
  if (p.has_bias()) {
    az += p.b_z;
    ar += p.b_r;
    ac_x += p.b_u;
  }
  const Vector<Scalar> z = az.unaryExpr([](Scalar v) { return sigmoid(v); });
  const Vector<Scalar> r = ar.unaryExpr([](Scalar v) { return sigmoid(v); });
  const Vector<Scalar> c = (ac_x.array() + r.array() * (p.w_uu * h_prev).array()).tanh().matrix();
  return ((Scalar(1) - z.array()) * c.array() + z.array() * h_prev.array()).matrix();
}

// States h^2..h^{L+1} for inputs x^1..x^L starting from h^1 = 0.
template <typename Scalar>
std::vector<Vector<Scalar>> gru_trajectory(const GruParams<Scalar>& p, const std::vector<Vector<Scalar>>& xs) {
  std::vector<Vector<Scalar>> states;
  Vector<Scalar> h = Vector<Scalar>::Zero(p.dim());
  for (const auto& x : xs) {
    h = gru_step(p, h, x);
    states.push_back(h);
  }
  return states;
}

// Batched recurrence: row e of every matrix belongs to entity e.
template <typename Scalar>
struct GruTape {
  std::vector<Matrix<Scalar>> x, h, z, r, q, c;  // h has one more entry than x (h[0] = 0)
};

template <typename Scalar>
Matrix<Scalar> gru_unroll(const GruParams<Scalar>& p, const std::vector<Matrix<Scalar>>& xs, GruTape<Scalar>* tape) {
  const auto d = p.dim();
  const Eigen::Index E = xs.empty() ? 0 : xs.front().rows();
  Matrix<Scalar> h = Matrix<Scalar>::Zero(E, d);
  if (tape) {
    *tape = GruTape<Scalar>{};
    tape->h.push_back(h);
  }
  for (const auto& x : xs) {
    if (x.rows() != E || x.cols() != d) throw DimensionError("gru_unroll input has wrong shape");
    Matrix<Scalar> az = x * p.w_xz.transpose() + h * p.w_uz.transpose();
    Matrix<Scalar> ar = x * p.w_xr.transpose() + h * p.w_ur.transpose();
    Matrix<Scalar> ac = x * p.w_xu.transpose();
    if (p.has_bias()) {
      az.rowwise() += p.b_z.transpose();
      ar.rowwise() += p.b_r.transpose();
      ac.rowwise() += p.b_u.transpose();
    }
    const Matrix<Scalar> z = az.unaryExpr([](Scalar v) { return sigmoid(v); });
    const Matrix<Scalar> r = ar.unaryExpr([](Scalar v) { return sigmoid(v); });
    const Matrix<Scalar> q = h * p.w_uu.transpose();
    const Matrix<Scalar> c = (ac.array() + r.array() * q.array()).tanh().matrix();
    Matrix<Scalar> next = ((Scalar(1) - z.array()) * c.array() + z.array() * h.array()).matrix();
    if (tape) {
      tape->x.push_back(x);
      tape->z.push_back(z);
      tape->r.push_back(r);
      tape->q.push_back(q);
      tape->c.push_back(c);
      tape->h.push_back(next);
    }
    h = std::move(next);
  }
  return h;
}

// Back-propagation through time from a gradient on the final state.
// Accumulates parameter gradients into grad and returns d loss / d x per step.
template <typename Scalar>
std::vector<Matrix<Scalar>> gru_backward(const GruParams<Scalar>& p, const GruTape<Scalar>& tape,
                                         const Matrix<Scalar>& d_final, GruParams<Scalar>& grad) {
  const std::size_t steps = tape.x.size();
  std::vector<Matrix<Scalar>> dx(steps);
  Matrix<Scalar> dh = d_final;
  for (std::size_t s = steps; s-- > 0;) {
    const Matrix<Scalar>& x = tape.x[s];
    const Matrix<Scalar>& h = tape.h[s];
    const auto& z = tape.z[s].array();
    const auto& r = tape.r[s].array();
    const auto& c = tape.c[s].array();

    const Matrix<Scalar> dc = (dh.array() * (Scalar(1) - z)).matrix();
    const Matrix<Scalar> dz = (dh.array() * (h.array() - c)).matrix();
    Matrix<Scalar> dh_prev = (dh.array() * z).matrix();

    const Matrix<Scalar> dac = (dc.array() * (Scalar(1) - c * c)).matrix();
    const Matrix<Scalar> dr = (dac.array() * tape.q[s].array()).matrix();
    const Matrix<Scalar> dq = (dac.array() * r).matrix();
    const Matrix<Scalar> dar = (dr.array() * r * (Scalar(1) - r)).matrix();
    const Matrix<Scalar> daz = (dz.array() * z * (Scalar(1) - z)).matrix();

    grad.w_xu.noalias() += dac.transpose() * x;
    grad.w_uu.noalias() += dq.transpose() * h;
    grad.w_xr.noalias() += dar.transpose() * x;
    grad.w_ur.noalias() += dar.transpose() * h;
    grad.w_xz.noalias() += daz.transpose() * x;
    grad.w_uz.noalias() += daz.transpose() * h;
    if (p.has_bias()) {
      grad.b_u += dac.colwise().sum().transpose();
      grad.b_r += dar.colwise().sum().transpose();
      grad.b_z += daz.colwise().sum().transpose();
    }

    dx[s] = dac * p.w_xu + dar * p.w_xr + daz * p.w_xz;
    dh_prev.noalias() += dq * p.w_uu + dar * p.w_ur + daz * p.w_uz;
    dh = std::move(dh_prev);
  }
  return dx;
}

}  // namespace techtrace
