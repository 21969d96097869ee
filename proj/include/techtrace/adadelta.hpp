#pragma once

#include <cmath>

namespace techtrace {

struct AdadeltaOptions {
  double rho = 0.95;
  double epsilon = 1e-6;
  double learning_rate = 1.0;  // scales the applied step, not the accumulated one
};

// Adadelta over a parameter struct P. `Visit` must call
// f(name, tensor_from_each_argument...) for every tensor of P, e.g. a lambda
// forwarding to visit_dtt_tensors.
//
//   E[g^2]  <- rho E[g^2] + (1 - rho) g^2
//   dx      <- -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
//   E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2
//   x       <- x + lr * dx
template <typename P, typename Visit>
class Adadelta {
 public:
  Adadelta(AdadeltaOptions options, const P& zeros, Visit visit)
      : options_(options), sq_grad_(zeros), sq_update_(zeros), visit_(visit) {}

  const AdadeltaOptions& options() const { return options_; }
  const P& squared_gradients() const { return sq_grad_; }
  const P& squared_updates() const { return sq_update_; }
  P& squared_gradients() { return sq_grad_; }
  P& squared_updates() { return sq_update_; }

  void step(P& params, const P& grad) {
    using std::sqrt;
    const double rho = options_.rho, eps = options_.epsilon, lr = options_.learning_rate;
    visit_(
        [&](const auto&, auto& x, const auto& g, auto& eg, auto& edx) {
          using S = typename std::decay_t<decltype(x)>::Scalar;
          eg.array() = S(rho) * eg.array() + S(1 - rho) * g.array().square();
          const auto dx = (-((edx.array() + S(eps)).sqrt() / (eg.array() + S(eps)).sqrt()) * g.array()).eval();
          edx.array() = S(rho) * edx.array() + S(1 - rho) * dx.square();
          x.array() += S(lr) * dx;
        },
        params, grad, sq_grad_, sq_update_);
  }

 private:
  AdadeltaOptions options_;
  P sq_grad_;
  P sq_update_;
  Visit visit_;
};

}  // namespace techtrace
