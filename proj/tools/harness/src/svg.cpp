#include "gig_tools/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "gig/errors.hpp"

namespace gig::tools {

namespace {

struct Rgb {
  double r, g, b;
};

constexpr Rgb kBlue{0x21, 0x66, 0xac};
constexpr Rgb kWhite{0xf7, 0xf7, 0xf7};
constexpr Rgb kRed{0xb2, 0x18, 0x2b};

// Fixed palette for line series.
constexpr const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                    "#66a61e", "#e6ab02", "#a6761d", "#666666"};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
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

void save(const std::filesystem::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot open " + file.string() + " for writing");
  out << text;
}

std::string header(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" "
         "width=\"" + num(w) + "\" height=\"" + num(h) + "\" viewBox=\"0 0 " + num(w) + " " +
         num(h) + "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string text(double x, double y, const std::string& s, const char* anchor = "middle",
                 int size = 12) {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" font-family=\"sans-serif\" font-size=\"" +
         std::to_string(size) + "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
}

}  // namespace

std::string diverging_color(double t) {
  if (!std::isfinite(t)) t = 0.0;
  t = std::clamp(t, -1.0, 1.0);
  const Rgb& end = t < 0 ? kBlue : kRed;
  const double a = std::abs(t);
  auto mix = [&](double w, double e) { return static_cast<int>(std::lround(w + a * (e - w))); };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", mix(kWhite.r, end.r), mix(kWhite.g, end.g),
                mix(kWhite.b, end.b));
  return buf;
}

void write_heatmap_svg(const std::filesystem::path& file, const std::string& title,
                       const Points& points, const std::vector<std::vector<double>>& values,
                       const std::vector<std::string>& titles) {
  if (values.size() != titles.size()) throw ArgumentError("one title per heatmap panel");
  double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300, scale = 0.0;
  for (const Vec& p : points) {
    xmin = std::min(xmin, p[0]);
    xmax = std::max(xmax, p[0]);
    ymin = std::min(ymin, p[1]);
    ymax = std::max(ymax, p[1]);
  }
  for (const auto& panel : values) {
    if (panel.size() != points.size()) throw ArgumentError("one value per point and panel");
    for (double v : panel) {
      if (std::isfinite(v)) scale = std::max(scale, std::abs(v));
    }
  }
  if (scale == 0.0) scale = 1.0;
  if (xmax <= xmin) xmax = xmin + 1.0;
  if (ymax <= ymin) ymax = ymin + 1.0;

  const double panel = 320.0, margin = 30.0, top = 50.0;
  const double width = margin + values.size() * (panel + margin);
  const double height = top + panel + 60.0;
  std::ostringstream svg;
  svg << header(width, height) << text(width / 2, 24, title, "middle", 16);
  for (std::size_t k = 0; k < values.size(); ++k) {
    const double ox = margin + k * (panel + margin);
    svg << "<g>\n" << text(ox + panel / 2, top - 8, titles[k]);
    svg << "<rect x=\"" << num(ox) << "\" y=\"" << num(top) << "\" width=\"" << num(panel)
        << "\" height=\"" << num(panel) << "\" fill=\"none\" stroke=\"#999999\"/>\n";
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double px = ox + (points[i][0] - xmin) / (xmax - xmin) * panel;
      const double py = top + panel - (points[i][1] - ymin) / (ymax - ymin) * panel;
      svg << "<circle cx=\"" << num(px) << "\" cy=\"" << num(py) << "\" r=\"2\" fill=\""
          << diverging_color(values[k][i] / scale) << "\"/>\n";
    }
    svg << "</g>\n";
  }
  // Colour bar.
  const double bx = margin, by = top + panel + 20, bw = 200;
  for (int s = 0; s < 20; ++s) {
    const double t = -1.0 + (s + 0.5) / 10.0;
    svg << "<rect x=\"" << num(bx + s * bw / 20) << "\" y=\"" << num(by) << "\" width=\""
        << num(bw / 20) << "\" height=\"10\" fill=\"" << diverging_color(t) << "\"/>\n";
  }
  svg << text(bx, by + 24, "-" + num(scale), "start", 10)
      << text(bx + bw, by + 24, "+" + num(scale), "end", 10) << "</svg>\n";
  save(file, svg.str());
}

void write_line_chart_svg(const std::filesystem::path& file, const std::string& title,
                          const std::string& x_label, const std::string& y_label,
                          const std::vector<double>& x, const std::vector<Series>& series) {
  if (x.size() < 2) throw ArgumentError("line chart needs >= 2 x values");
  double ymin = 1e300, ymax = -1e300;
  for (const Series& s : series) {
    if (s.y.size() != x.size()) throw ArgumentError("series length must match x");
    for (std::size_t i = 0; i < s.y.size(); ++i) {
      const double e = s.err.empty() ? 0.0 : s.err[i];
      ymin = std::min(ymin, s.y[i] - e);
      ymax = std::max(ymax, s.y[i] + e);
    }
  }
  if (!(ymax > ymin)) {
    ymin -= 0.5;
    ymax += 0.5;
  }
  const double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;
  const double left = 70, top = 40, w = 480, h = 320, legend = 170;
  const double xmin = x.front(), xmax = x.back();
  auto sx = [&](double v) { return left + (v - xmin) / (xmax - xmin) * w; };
  auto sy = [&](double v) { return top + h - (v - ymin) / (ymax - ymin) * h; };

  std::ostringstream svg;
  svg << header(left + w + legend, top + h + 60) << text(left + w / 2, 24, title, "middle", 16);
  svg << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(w)
      << "\" height=\"" << num(h) << "\" fill=\"none\" stroke=\"#333333\"/>\n";
  for (double v : x) svg << text(sx(v), top + h + 16, num(v), "middle", 10);
  for (int t = 0; t <= 4; ++t) {
    const double v = ymin + t * (ymax - ymin) / 4;
    svg << text(left - 6, sy(v) + 4, num(v), "end", 10);
  }
  svg << text(left + w / 2, top + h + 40, x_label);
  svg << "<text x=\"18\" y=\"" << num(top + h / 2) << "\" font-family=\"sans-serif\" "
      << "font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << num(top + h / 2)
      << ")\">" << escape(y_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const Series& s = series[k];
    const char* color = kPalette[k % std::size(kPalette)];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < x.size(); ++i) svg << (i ? " " : "") << num(sx(x[i])) << "," << num(sy(s.y[i]));
    svg << "\"/>\n";
    for (std::size_t i = 0; i < x.size() && !s.err.empty(); ++i) {
      svg << "<line x1=\"" << num(sx(x[i])) << "\" y1=\"" << num(sy(s.y[i] - s.err[i]))
          << "\" x2=\"" << num(sx(x[i])) << "\" y2=\"" << num(sy(s.y[i] + s.err[i]))
          << "\" stroke=\"" << color << "\"/>\n";
    }
    const double ly = top + 10 + 18 * k;
    svg << "<line x1=\"" << num(left + w + 12) << "\" y1=\"" << num(ly) << "\" x2=\""
        << num(left + w + 32) << "\" y2=\"" << num(ly) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << text(left + w + 38, ly + 4, s.label, "start", 11);
  }
  svg << "</svg>\n";
  save(file, svg.str());
}

}  // namespace gig::tools
