#pragma once

#include <array>
#include <functional>

#include "mpml/types.hpp"

namespace mpml {

// Central finite differences on functions of (lambda, psi), with
// Richardson-style step refinement for first derivatives. Step sizes follow
// h = eps^(1/3) * (1 + |theta_i|) for first/second order and a wider
// eps^(1/5) step for third-order tensors.
using Fn2 = std::function<double(double, double)>;

std::array<double, 2> fd_gradient(const Fn2& f, double a, double b);
Mat2 fd_hessian(const Fn2& f, double a, double b);

// Third-order tensor T[r][s][j] = d^3 f / dt_r dt_s dt_j, symmetric.
struct Tensor3Sym {
  // Stored as t[i] for multi-indices (000, 001, 011, 111) in (lambda=0, psi=1).
  double t000 = 0, t001 = 0, t011 = 0, t111 = 0;
  double operator()(int r, int s, int j) const {
    const int k = r + s + j;
    switch (k) {
      case 0: return t000;
      case 1: return t001;
      case 2: return t011;
      default: return t111;
    }
  }
};

Tensor3Sym fd_third(const Fn2& f, double a, double b);

}  // namespace mpml
