#include "irslab/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace irslab {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kLeft = 64, kRight = 24, kTop = 40, kBottom = 48;

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '&') out += "&amp;";
    else if (c == '<') out += "&lt;";
    else if (c == '>') out += "&gt;";
    else out += c;
  }
  return out;
}

struct Range {
  double lo = 0, hi = 1;
  void widen(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void finish() {
    if (hi - lo < 1e-12) {
      lo -= 0.5;
      hi += 0.5;
    } else {
      double pad = 0.05 * (hi - lo);
      lo -= pad;
      hi += pad;
    }
  }
};

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                          const std::string& ylabel, const std::vector<PlotSeries>& series,
                          const std::vector<PlotBand>& bands) {
  require(!series.empty(), Errc::ConfigInvalid, "plot needs at least one series");
  Range xr, yr;
  bool first = true;
  for (const PlotSeries& s : series)
    for (const auto& [x, y] : s.points) {
      if (first) {
        xr.lo = xr.hi = x;
        yr.lo = yr.hi = y;
        first = false;
      }
      xr.widen(x);
      yr.widen(y);
    }
  require(!first, Errc::ConfigInvalid, "plot needs at least one point");
  for (const PlotBand& b : bands) {
    yr.widen(b.lo);
    yr.widen(b.hi);
  }
  xr.finish();
  yr.finish();

  auto px = [&](double x) {
    return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * (kWidth - kLeft - kRight);
  };
  auto py = [&](double y) {
    return kHeight - kBottom - (y - yr.lo) / (yr.hi - yr.lo) * (kHeight - kTop - kBottom);
  };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
  out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"15\">"
      << escape(title) << "</text>\n";

  for (const PlotBand& b : bands) {
    double y1 = py(b.hi), y2 = py(b.lo);
    out << "<rect x=\"" << num(kLeft) << "\" y=\"" << num(y1) << "\" width=\""
        << num(kWidth - kLeft - kRight) << "\" height=\"" << num(y2 - y1) << "\" fill=\""
        << b.color << "\" fill-opacity=\"0.25\"/>\n";
  }

  // Axes with min/max tick labels.
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kHeight - kBottom) << "\" x2=\""
      << num(kWidth - kRight) << "\" y2=\"" << num(kHeight - kBottom)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << num(kLeft) << "\" y1=\"" << num(kTop) << "\" x2=\"" << num(kLeft)
      << "\" y2=\"" << num(kHeight - kBottom) << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << num(kLeft) << "\" y=\"" << num(kHeight - kBottom + 16)
      << "\" font-family=\"sans-serif\" font-size=\"11\">" << num(xr.lo) << "</text>\n";
  out << "<text x=\"" << num(kWidth - kRight) << "\" y=\"" << num(kHeight - kBottom + 16)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(xr.hi)
      << "</text>\n";
  out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(kHeight - kBottom)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(yr.lo)
      << "</text>\n";
  out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(kTop + 4)
      << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << num(yr.hi)
      << "</text>\n";
  out << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\""
      << num(kHeight - 12) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
      << "font-size=\"12\">" << escape(xlabel) << "</text>\n";
  out << "<text x=\"16\" y=\"" << num((kTop + kHeight - kBottom) / 2)
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" "
      << "transform=\"rotate(-90 16 " << num((kTop + kHeight - kBottom) / 2) << ")\">"
      << escape(ylabel) << "</text>\n";

  double legend_y = kTop + 10;
  for (const PlotSeries& s : series) {
    if (s.points.empty()) continue;
    std::vector<std::pair<double, double>> pts = s.points;
    std::sort(pts.begin(), pts.end());
    out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (i) out << " ";
      out << num(px(pts[i].first)) << "," << num(py(pts[i].second));
    }
    out << "\"/>\n";
    for (const auto& [x, y] : pts)
      out << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y))
          << "\" r=\"2.5\" fill=\"" << s.color << "\"/>\n";
    out << "<text x=\"" << num(kWidth - kRight - 4) << "\" y=\"" << num(legend_y)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
        << s.color << "\">" << escape(s.label) << "</text>\n";
    legend_y += 14;
  }
  for (const PlotBand& b : bands) {
    out << "<text x=\"" << num(kWidth - kRight - 4) << "\" y=\"" << num(legend_y)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\""
        << b.color << "\">" << escape(b.label) << "</text>\n";
    legend_y += 14;
  }
  out << "</svg>\n";
  return out.str();
}

std::string svg_bodies(const std::string& title,
                       const std::vector<std::pair<ConvexBody, std::string>>& bodies) {
  require(!bodies.empty(), Errc::ConfigInvalid, "need at least one body to draw");
  for (const auto& [body, color] : bodies)
    require(body.d == 2, Errc::Unsupported, "body drawings exist for d = 2 only");
  const double size = 480, margin = 36;
  auto px = [&](double x) { return margin + (x + 1.05) / 2.1 * (size - 2 * margin); };
  auto py = [&](double y) { return size - margin - (y + 1.05) / 2.1 * (size - 2 * margin); };

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size
      << "\" viewBox=\"0 0 " << size << " " << size << "\">\n";
  out << "<rect width=\"" << size << "\" height=\"" << size << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << size / 2 << "\" y=\"20\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"14\">"
      << escape(title) << "</text>\n";
  out << "<line x1=\"" << num(px(-1.05)) << "\" y1=\"" << num(py(0)) << "\" x2=\""
      << num(px(1.05)) << "\" y2=\"" << num(py(0)) << "\" stroke=\"#cccccc\"/>\n";
  out << "<line x1=\"" << num(px(0)) << "\" y1=\"" << num(py(-1.05)) << "\" x2=\""
      << num(px(0)) << "\" y2=\"" << num(py(1.05)) << "\" stroke=\"#cccccc\"/>\n";

  double legend_y = 36;
  for (const auto& [body, color] : bodies) {
    std::vector<std::pair<double, double>> pts;
    double cx = 0, cy = 0;
    for (const Vec& v : body.verts) {
      pts.emplace_back(quad_double(v[0]), quad_double(v[1]));
      cx += pts.back().first;
      cy += pts.back().second;
    }
    cx /= static_cast<double>(pts.size());
    cy /= static_cast<double>(pts.size());
    // Convex outline: vertices sorted by angle around the centroid.
    std::sort(pts.begin(), pts.end(), [&](const auto& a, const auto& b) {
      return std::atan2(a.second - cy, a.first - cx) < std::atan2(b.second - cy, b.first - cx);
    });
    if (pts.size() == 1) {
      out << "<circle cx=\"" << num(px(pts[0].first)) << "\" cy=\"" << num(py(pts[0].second))
          << "\" r=\"4\" fill=\"" << color << "\"/>\n";
    } else {
      out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"" << color
          << "\" stroke-width=\"1.5\" points=\"";
      for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i) out << " ";
        out << num(px(pts[i].first)) << "," << num(py(pts[i].second));
      }
      out << "\"/>\n";
    }
    out << "<text x=\"" << num(size - 10) << "\" y=\"" << num(legend_y)
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\" fill=\"" << color
        << "\">body " << pts.size() << " vertices</text>\n";
    legend_y += 14;
  }
  out << "</svg>\n";
  return out.str();
}

}  // namespace irslab
