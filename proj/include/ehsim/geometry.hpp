#pragma once

#include <cmath>
#include <stdexcept>

namespace ehsim {

struct Position {
  double x = 0.0;
  double y = 0.0;
};

inline double distance(const Position& a, const Position& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

inline double squared_distance(const Position& a, const Position& b) {
  const double dx = a.x - b.x;
  const double dy = a.y - b.y;
  return dx * dx + dy * dy;
}

/// Rectangular deployment region [0, width] x [0, height].
struct AreaSpec {
  double width = 20.0;
  double height = 20.0;

  double area() const { return width * height; }
  bool contains(const Position& p) const {
    return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
  }
  void validate() const {
    if (width <= 0.0 || height <= 0.0)
      throw std::invalid_argument("AreaSpec: width and height must be positive");
  }
};

}  // namespace ehsim
