#include "perihelion/brackets.hpp"

#include <algorithm>
#include <cmath>

#include "perihelion/secular.hpp"

namespace perihelion {

double central_derivative(const std::function<double(double)>& f, double x,
                          const BracketOptions& opts) {
  const double h = opts.rel_step * std::max(1.0, std::abs(x));
  const double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
  if (!opts.richardson) return d1;
  const double d2 = (f(x + 0.5 * h) - f(x - 0.5 * h)) / h;
  return (4.0 * d2 - d1) / 3.0;
}

double bracket_Gg(const std::function<double(double, double)>& f,
                  const std::function<double(double, double)>& h, double G, double g,
                  const BracketOptions& opts) {
  const double fG = central_derivative([&](double x) { return f(x, g); }, G, opts);
  const double fg = central_derivative([&](double x) { return f(G, x); }, g, opts);
  const double hG = central_derivative([&](double x) { return h(x, g); }, G, opts);
  const double hg = central_derivative([&](double x) { return h(G, x); }, g, opts);
  return fg * hG - fG * hg;
}

double bracket_cartesian(const std::function<double(const CartesianState&)>& f,
                         const std::function<double(const CartesianState&)>& h,
                         const CartesianState& s, const BracketOptions& opts) {
  auto partial = [&](const std::function<double(const CartesianState&)>& fn, bool momentum,
                     int i) {
    return central_derivative(
        [&](double v) {
          CartesianState t = s;
          (momentum ? t.y : t.x)[i] = v;
          return fn(t);
        },
        (momentum ? s.y : s.x)[i], opts);
  };
  double sum = 0.0;
  for (int i = 0; i < 3; ++i) {
    sum += partial(f, false, i) * partial(h, true, i) - partial(f, true, i) * partial(h, false, i);
  }
  return sum;
}

double ue0_bracket(double r, double G, double g, std::size_t n_nodes, const BracketOptions& opts) {
  QuadratureOptions q;
  q.n_nodes = n_nodes;
  auto U = [&](double GG, double gg) { return averaged_potential(1.0, r, 1.0, 0.0, GG, gg, q); };
  auto E0 = [&](double GG, double gg) { return e0_planar(r, GG, gg); };
  return bracket_Gg(U, E0, G, g, opts);
}

}  // namespace perihelion
