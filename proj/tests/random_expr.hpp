#pragma once

#include <random>

#include "pbw/expr.hpp"

namespace pbw::testing {

/// Random expressions that are finite and well defined on the whole line.
inline Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
  std::uniform_real_distribution<double> lit(-2.0, 2.0);
  switch (pick(rng)) {
    case 0: return Expr::x();
    case 1: return Expr::constant(std::round(lit(rng) * 100.0) / 100.0);
    case 2: return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 3: return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 4: return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    case 5: {
      const Expr d = random_expr(rng, depth - 1);
      return random_expr(rng, depth - 1) / (Expr::constant(1.0) + Expr::pow(d, 2));
    }
    case 6: return Expr::pow(random_expr(rng, depth - 1), 2 + static_cast<int>(rng() % 2));
    case 7: return sinh(random_expr(rng, depth - 1) / Expr::constant(3.0));
    case 8: return tanh(random_expr(rng, depth - 1));
    default: return sqrt(Expr::constant(1.0) + Expr::pow(random_expr(rng, depth - 1), 2));
  }
}

}  // namespace pbw::testing
