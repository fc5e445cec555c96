#pragma once

// Finite-difference Poisson brackets, used to check commutation relations.

#include <functional>

#include "perihelion/euler_center.hpp"

namespace perihelion {

struct BracketOptions {
  double rel_step = 1e-5;  ///< h = rel_step * max(1, |coordinate|)
  bool richardson = true;
};

/// d f / d coordinate by central differences.
double central_derivative(const std::function<double(double)>& f, double x,
                          const BracketOptions& opts = {});

/// {f, h} for the conjugate pair (G, g): f_g h_G - f_G h_g.
double bracket_Gg(const std::function<double(double G, double g)>& f,
                  const std::function<double(double G, double g)>& h, double G, double g,
                  const BracketOptions& opts = {});

/// {f, h} = sum_i f_{x_i} h_{y_i} - f_{y_i} h_{x_i} on (y, x) in R^3 x R^3.
double bracket_cartesian(const std::function<double(const CartesianState&)>& f,
                         const std::function<double(const CartesianState&)>& h,
                         const CartesianState& s, const BracketOptions& opts = {});

/// {U, E0} at (r, G, g) with Lambda = 1, Theta = 0 and U of unit scale.
double ue0_bracket(double r, double G, double g, std::size_t n_nodes = 4096,
                   const BracketOptions& opts = {});

}  // namespace perihelion
