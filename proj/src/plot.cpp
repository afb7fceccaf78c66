#include "mbrl/plot.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

namespace mbrl {
namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string fixed(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string tick_label(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
  std::ostringstream out;
  for (std::size_t i = 0; i < header.size(); ++i) out << (i ? "," : "") << header[i];
  out << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
    out << '\n';
  }
  return out.str();
}

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::vector<double>& xs, const std::vector<Series>& series,
                          bool log_y, bool log_x) {
  auto ty = [&](double y) { return log_y ? std::log10(y) : y; };
  auto tx = [&](double x) { return log_x ? std::log10(x) : x; };
  auto usable = [&](double x, double y) {
    return std::isfinite(x) && std::isfinite(y) && (!log_y || y > 0) && (!log_x || x > 0);
  };
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& s : series) {
    for (std::size_t i = 0; i < xs.size() && i < s.ys.size(); ++i) {
      if (!usable(xs[i], s.ys[i])) continue;
      x0 = std::min(x0, tx(xs[i]));
      x1 = std::max(x1, tx(xs[i]));
      y0 = std::min(y0, ty(s.ys[i]));
      y1 = std::max(y1, ty(s.ys[i]));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x0 -= 0.5, x1 += 0.5;
  if (y1 == y0) y0 -= 0.5, y1 += 0.5;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (tx(x) - x0) / (x1 - x0) * pw; };
  auto py = [&](double y) { return kTop + (1.0 - (ty(y) - y0) / (y1 - y0)) * ph; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << fixed(kWidth / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
    << escape(title) << "</text>\n";
  o << "<rect x=\"" << fixed(kLeft) << "\" y=\"" << fixed(kTop) << "\" width=\"" << fixed(pw)
    << "\" height=\"" << fixed(ph) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double fy = y0 + (y1 - y0) * k / 4.0;
    const double yv = log_y ? std::pow(10.0, fy) : fy;
    const double yy = kTop + (1.0 - k / 4.0) * ph;
    o << "<text x=\"" << fixed(kLeft - 6) << "\" y=\"" << fixed(yy + 4)
      << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
    const double fx = x0 + (x1 - x0) * k / 4.0;
    const double xv = log_x ? std::pow(10.0, fx) : fx;
    const double xx = kLeft + k / 4.0 * pw;
    o << "<text x=\"" << fixed(xx) << "\" y=\"" << fixed(kTop + ph + 18)
      << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
  }
  o << "<text x=\"" << fixed(kLeft + pw / 2) << "\" y=\"" << fixed(kHeight - 10)
    << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const char* color = kColors[k % (sizeof kColors / sizeof *kColors)];
    o << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < xs.size() && i < series[k].ys.size(); ++i) {
      if (!usable(xs[i], series[k].ys[i])) continue;
      o << (first ? "" : " ") << fixed(px(xs[i])) << "," << fixed(py(series[k].ys[i]));
      first = false;
    }
    o << "\"/>\n";
    const double ly = kTop + 14 + 18 * static_cast<double>(k);
    o << "<line x1=\"" << fixed(kWidth - kRight + 10) << "\" y1=\"" << fixed(ly - 4) << "\" x2=\""
      << fixed(kWidth - kRight + 30) << "\" y2=\"" << fixed(ly - 4) << "\" stroke=\"" << color
      << "\" stroke-width=\"2\"/>\n";
    o << "<text x=\"" << fixed(kWidth - kRight + 35) << "\" y=\"" << fixed(ly) << "\">"
      << escape(series[k].name) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace mbrl
