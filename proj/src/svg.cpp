#include "hypfin/svg.hpp"

#include "hypfin/errors.hpp"
#include "hypfin/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hypfin::svg {

namespace {

constexpr double kCollinearTolerance = 1e-9;
constexpr double kWidthPx = 1040.0;
constexpr double kHeightPx = 800.0;

struct Px {
  double x;
  double y;
};

Px to_px(double x, double y) {
  return {kDiscCenterPx + kDiscRadiusPx * x, kDiscCenterPx - kDiscRadiusPx * y};
}

Px to_px(const geometry::PoincarePolar &p) {
  return to_px(p.r * std::cos(p.theta), p.r * std::sin(p.theta));
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s(buf);
  if (s == "-0.000")
    s = "0.000";
  return s;
}

std::string escape(const std::string &text) {
  std::string out;
  for (char c : text) {
    switch (c) {
    case '&': out += "&amp;"; break;
    case '<': out += "&lt;"; break;
    case '>': out += "&gt;"; break;
    case '"': out += "&quot;"; break;
    default: out += c;
    }
  }
  return out;
}

const char *region_color(const std::string &region) {
  static const char *palette[] = {"#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00",
                                  "#a65628", "#f781bf", "#17becf", "#bcbd22"};
  const auto &names = io::region_names();
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == region)
      return palette[k];
  return "#999999";
}

std::string edge_path(const geometry::PoincarePolar &p, const geometry::PoincarePolar &q,
                      bool chords) {
  const double px = p.r * std::cos(p.theta);
  const double py = p.r * std::sin(p.theta);
  const double qx = q.r * std::cos(q.theta);
  const double qy = q.r * std::sin(q.theta);
  const Px a = to_px(px, py);
  const Px b = to_px(qx, qy);
  std::string d = "M " + num(a.x) + " " + num(a.y) + " ";

  const Geodesic g = geodesic_through(px, py, qx, qy);
  if (chords || g.straight)
    return d + "L " + num(b.x) + " " + num(b.y);

  // The part of an orthogonal circle inside the disc is less than a
  // semicircle, so the small arc is always the right one.
  const Px c = to_px(g.cx, g.cy);
  const double cross = (a.x - c.x) * (b.y - c.y) - (a.y - c.y) * (b.x - c.x);
  const double r = g.radius * kDiscRadiusPx;
  return d + "A " + num(r) + " " + num(r) + " 0 0 " + (cross > 0.0 ? "1" : "0") + " " +
         num(b.x) + " " + num(b.y);
}

} // namespace

void FigureSpec::validate() const {
  for (const auto &n : nodes)
    if (!(n.position.r >= 0.0 && n.position.r < 1.0))
      throw ContractViolation("figure node '" + n.label + "' lies outside the unit disc");
  if (center && !(center->r >= 0.0 && center->r < 1.0))
    throw ContractViolation("figure center lies outside the unit disc");
  const auto count = static_cast<int>(nodes.size());
  for (const auto &[i, j] : edges)
    if (i < 0 || j < 0 || i >= count || j >= count)
      throw ContractViolation("figure edge refers to a missing node");
}

Geodesic geodesic_through(double px, double py, double qx, double qy) {
  const double det = px * qy - py * qx;
  if (std::abs(det) < kCollinearTolerance)
    return {};
  // Orthogonal circle through p and q: 2 c.p = |p|^2 + 1, 2 c.q = |q|^2 + 1.
  const double bp = 0.5 * (px * px + py * py + 1.0);
  const double bq = 0.5 * (qx * qx + qy * qy + 1.0);
  Geodesic g;
  g.straight = false;
  g.cx = (bp * qy - py * bq) / det;
  g.cy = (px * bq - bp * qx) / det;
  g.radius = std::sqrt(g.cx * g.cx + g.cy * g.cy - 1.0);
  return g;
}

std::string render_svg(const FigureSpec &spec) {
  spec.validate();
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidthPx) << "\" height=\""
      << num(kHeightPx) << "\" viewBox=\"0 0 " << num(kWidthPx) << " " << num(kHeightPx)
      << "\">\n";
  if (!spec.title.empty())
    out << "<title>" << escape(spec.title) << "</title>\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(kWidthPx) << "\" height=\"" << num(kHeightPx)
      << "\" fill=\"#ffffff\"/>\n";
  out << "<circle id=\"boundary\" cx=\"" << num(kDiscCenterPx) << "\" cy=\""
      << num(kDiscCenterPx) << "\" r=\"" << num(kDiscRadiusPx)
      << "\" fill=\"none\" stroke=\"#000000\" stroke-width=\"1.5\"/>\n";

  out << "<g id=\"edges\" fill=\"none\" stroke=\"#7f7f7f\" stroke-width=\"0.8\">\n";
  for (const auto &[i, j] : spec.edges)
    out << "<path class=\"edge\" data-source=\"" << escape(spec.nodes[i].label)
        << "\" data-target=\"" << escape(spec.nodes[j].label) << "\" d=\""
        << edge_path(spec.nodes[i].position, spec.nodes[j].position, spec.chords) << "\"/>\n";
  out << "</g>\n";

  out << "<g id=\"nodes\" font-family=\"sans-serif\" font-size=\"9\">\n";
  for (const auto &n : spec.nodes) {
    const Px p = to_px(n.position);
    out << "<circle class=\"node\" data-label=\"" << escape(n.label) << "\" cx=\"" << num(p.x)
        << "\" cy=\"" << num(p.y) << "\" r=\"4.000\" fill=\"" << region_color(n.region)
        << "\" stroke=\"#000000\" stroke-width=\"0.4\"/>\n";
    out << "<text x=\"" << num(p.x + 5.0) << "\" y=\"" << num(p.y - 5.0) << "\">"
        << escape(n.label) << (n.gsib ? "<tspan class=\"gsib\" font-weight=\"bold\">*</tspan>" : "")
        << "</text>\n";
  }
  out << "</g>\n";

  if (spec.center) {
    const Px c = to_px(*spec.center);
    constexpr double arm = 7.0;
    out << "<path id=\"center\" d=\"M " << num(c.x - arm) << " " << num(c.y - arm) << " L "
        << num(c.x + arm) << " " << num(c.y + arm) << " M " << num(c.x - arm) << " "
        << num(c.y + arm) << " L " << num(c.x + arm) << " " << num(c.y - arm)
        << "\" stroke=\"#000000\" stroke-width=\"2.5\"/>\n";
  }

  out << "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"12\">\n";
  std::vector<std::string> entries = io::region_names();
  entries.emplace_back(io::kUnassigned);
  double y = 60.0;
  for (const auto &region : entries) {
    out << "<rect x=\"820.000\" y=\"" << num(y - 10.0)
        << "\" width=\"12.000\" height=\"12.000\" fill=\"" << region_color(region) << "\"/>\n"
        << "<text x=\"840.000\" y=\"" << num(y) << "\">" << escape(region) << "</text>\n";
    y += 20.0;
  }
  out << "<text x=\"820.000\" y=\"" << num(y + 10.0) << "\">* G-SIB</text>\n";
  out << "<text x=\"820.000\" y=\"" << num(y + 30.0) << "\">x hyperbolic center</text>\n";
  out << "</g>\n</svg>\n";
  return out.str();
}

void write_svg(const FigureSpec &spec, const std::filesystem::path &path) {
  const std::string text = render_svg(spec);
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text))
    throw IoError("cannot write '" + path.string() + "'");
}

} // namespace hypfin::svg
