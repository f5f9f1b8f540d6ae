#ifndef STOKESHAPE_QUADRATURE_HPP
#define STOKESHAPE_QUADRATURE_HPP

#include <cmath>
#include <stdexcept>
#include <vector>

namespace stokeshape {

/// Quadrature point on the reference triangle {(x,y): x,y >= 0, x+y <= 1}.
struct TriQuadPoint {
  double x;
  double y;
  double w;
};

/// Quadrature point on the reference edge [0,1].
struct EdgeQuadPoint {
  double t;
  double w;
};

/// Symmetric Gauss rules on the reference triangle, exact for polynomials up
/// to the requested total degree. Weights sum to the reference area 1/2.
/// Degrees up to 6 are supported.
inline std::vector<TriQuadPoint> triangle_rule(int degree) {
  if (degree < 0 || degree > 6)
    throw std::invalid_argument("triangle_rule: degree must be in [0, 6]");

  std::vector<TriQuadPoint> pts;
  auto sym3 = [&pts](double a, double w) {
    // barycentric (1-2a, a, a) and permutations, mapped to (lambda2, lambda3)
    pts.push_back({a, a, w});
    pts.push_back({1.0 - 2.0 * a, a, w});
    pts.push_back({a, 1.0 - 2.0 * a, w});
  };
  auto sym6 = [&pts](double a, double b, double w) {
    const double c = 1.0 - a - b;
    pts.push_back({a, b, w});
    pts.push_back({b, a, w});
    pts.push_back({a, c, w});
    pts.push_back({c, a, w});
    pts.push_back({b, c, w});
    pts.push_back({c, b, w});
  };

  switch (degree) {
    case 0:
    case 1:
      pts.push_back({1.0 / 3.0, 1.0 / 3.0, 0.5});
      break;
    case 2:
      sym3(1.0 / 6.0, 1.0 / 6.0);
      break;
    case 3:
    case 4:
      // Dunavant degree-4 rule; all weights positive.
      sym3(0.445948490915965, 0.5 * 0.223381589678011);
      sym3(0.091576213509771, 0.5 * 0.109951743655322);
      break;
    case 5:
      pts.push_back({1.0 / 3.0, 1.0 / 3.0, 0.5 * 0.225});
      sym3(0.470142064105115, 0.5 * 0.132394152788506);
      sym3(0.101286507323456, 0.5 * 0.125939180544827);
      break;
    case 6:
      sym3(0.063089014491502, 0.5 * 0.050844906370207);
      sym3(0.249286745170910, 0.5 * 0.116786275726379);
      sym6(0.310352451033785, 0.053145049844816, 0.5 * 0.082851075618374);
      break;
  }
  return pts;
}

/// Gauss-Legendre rules on [0,1], exact for polynomials up to the requested
/// degree (up to 7). Weights sum to 1.
inline std::vector<EdgeQuadPoint> edge_rule(int degree) {
  if (degree < 0 || degree > 7)
    throw std::invalid_argument("edge_rule: degree must be in [0, 7]");

  const int n = (degree + 2) / 2;  // n-point Gauss is exact to degree 2n-1
  std::vector<EdgeQuadPoint> pts;
  switch (n) {
    case 1:
      pts = {{0.5, 1.0}};
      break;
    case 2: {
      const double d = 0.5 / std::sqrt(3.0);
      pts = {{0.5 - d, 0.5}, {0.5 + d, 0.5}};
      break;
    }
    case 3: {
      const double d = 0.5 * std::sqrt(3.0 / 5.0);
      pts = {{0.5 - d, 5.0 / 18.0}, {0.5, 8.0 / 18.0}, {0.5 + d, 5.0 / 18.0}};
      break;
    }
    default: {
      const double x1 = 0.3399810435848563, w1 = 0.6521451548625461;
      const double x2 = 0.8611363115940526, w2 = 0.3478548451374538;
      pts = {{0.5 * (1.0 - x2), 0.5 * w2},
             {0.5 * (1.0 - x1), 0.5 * w1},
             {0.5 * (1.0 + x1), 0.5 * w1},
             {0.5 * (1.0 + x2), 0.5 * w2}};
      break;
    }
  }
  return pts;
}

}  // namespace stokeshape

#endif  // STOKESHAPE_QUADRATURE_HPP
