#pragma once

// Deterministic SVG rendering of a network laid out in the Poincare disc.

#include "hypfin/geometry.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hypfin::svg {

struct FigureNode {
  std::string label;
  geometry::PoincarePolar position;
  std::string region; ///< one of io::region_names() or "unassigned"
  bool gsib = false;
};

struct FigureSpec {
  std::string title;
  std::vector<FigureNode> nodes;
  std::vector<std::pair<int, int>> edges; ///< indices into nodes
  std::optional<geometry::PoincarePolar> center;
  /// Straight chords instead of geodesic arcs.
  bool chords = false;

  /// Throws ContractViolation on r >= 1 or dangling edge indices.
  void validate() const;
};

/// Geodesic through two disc points, in Cartesian disc coordinates: either
/// the straight segment (points collinear with the origin within 1e-9) or an
/// arc of the circle centred at (cx, cy) orthogonal to the unit circle.
struct Geodesic {
  bool straight = true;
  double cx = 0.0;
  double cy = 0.0;
  double radius = 0.0;
};

Geodesic geodesic_through(double px, double py, double qx, double qy);

/// Pixel geometry of the rendered disc.
inline constexpr double kDiscCenterPx = 400.0;
inline constexpr double kDiscRadiusPx = 360.0;

std::string render_svg(const FigureSpec &spec);

/// Throws IoError if the file cannot be written.
void write_svg(const FigureSpec &spec, const std::filesystem::path &path);

} // namespace hypfin::svg
