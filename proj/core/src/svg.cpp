#include "prefopt/svg.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "prefopt/config.hpp"

namespace prefopt::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string color(std::size_t i) { return kPalette[i % (sizeof kPalette / sizeof kPalette[0])]; }

std::string num(double v) {
  std::ostringstream s;
  s.precision(2);
  s << std::fixed << v;
  return s.str();
}

std::string tick_label(double v) {
  std::ostringstream s;
  s.precision(3);
  s << v;
  return s.str();
}

struct Frame {
  double left, top, width, height;
  double x_lo, x_hi, y_lo, y_hi;

  double px(double x) const { return left + (x - x_lo) / (x_hi - x_lo) * width; }
  double py(double y) const { return top + height - (y - y_lo) / (y_hi - y_lo) * height; }
};

void header(std::ostringstream& out, int w, int h, const std::string& title) {
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
      << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
      << "</text>\n";
}

void axes(std::ostringstream& out, const Frame& f, const std::string& x_label, const std::string& y_label,
          bool x_ticks) {
  out << "<rect x=\"" << num(f.left) << "\" y=\"" << num(f.top) << "\" width=\"" << num(f.width) << "\" height=\""
      << num(f.height) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double y = f.y_lo + (f.y_hi - f.y_lo) * i / 4.0;
    out << "<text x=\"" << num(f.left - 6) << "\" y=\"" << num(f.py(y) + 4) << "\" text-anchor=\"end\">"
        << tick_label(y) << "</text>\n";
  }
  if (x_ticks) {
    for (int i = 0; i <= 4; ++i) {
      const double x = f.x_lo + (f.x_hi - f.x_lo) * i / 4.0;
      out << "<text x=\"" << num(f.px(x)) << "\" y=\"" << num(f.top + f.height + 16)
          << "\" text-anchor=\"middle\">" << tick_label(x) << "</text>\n";
    }
  }
  if (!x_label.empty()) {
    out << "<text x=\"" << num(f.left + f.width / 2) << "\" y=\"" << num(f.top + f.height + 34)
        << "\" text-anchor=\"middle\">" << escape(x_label) << "</text>\n";
  }
  if (!y_label.empty()) {
    out << "<text transform=\"translate(" << num(f.left - 48) << ' ' << num(f.top + f.height / 2)
        << ") rotate(-90)\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
  }
}

void polyline(std::ostringstream& out, const Frame& f, const Series& s, const std::string& stroke) {
  out << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
  for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
    out << (i ? " " : "") << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i]));
  }
  out << "\"/>\n";
}

void legend(std::ostringstream& out, double x, double y, const std::vector<std::string>& names) {
  for (std::size_t i = 0; i < names.size(); ++i) {
    const double yy = y + 16.0 * static_cast<double>(i);
    out << "<rect x=\"" << num(x) << "\" y=\"" << num(yy - 9) << "\" width=\"10\" height=\"10\" fill=\"" << color(i)
        << "\"/>\n<text x=\"" << num(x + 14) << "\" y=\"" << num(yy) << "\">" << escape(names[i]) << "</text>\n";
  }
}

}  // namespace

std::string escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string bar_chart(const std::string& title, const std::string& y_label, const std::vector<std::string>& labels,
                      const std::vector<double>& values) {
  const int width = std::max(320, 120 + 110 * static_cast<int>(labels.size()));
  const int height = 360;
  double y_hi = 0.0;
  for (double v : values) y_hi = std::max(y_hi, v);
  if (y_hi <= 0.0) y_hi = 1.0;
  y_hi *= 1.15;
  const Frame f{80.0, 40.0, width - 110.0, height - 110.0, 0.0, static_cast<double>(labels.size()), 0.0, y_hi};

  std::ostringstream out;
  header(out, width, height, title);
  axes(out, f, "", y_label, false);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double x0 = f.px(static_cast<double>(i) + 0.15);
    const double x1 = f.px(static_cast<double>(i) + 0.85);
    const double v = i < values.size() ? values[i] : 0.0;
    const double top = f.py(std::max(0.0, v));
    out << "<rect class=\"bar\" x=\"" << num(x0) << "\" y=\"" << num(top) << "\" width=\"" << num(x1 - x0)
        << "\" height=\"" << num(f.py(0.0) - top) << "\" fill=\"" << color(i) << "\"/>\n"
        << "<text class=\"value\" x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(top - 4)
        << "\" text-anchor=\"middle\" font-size=\"10\">" << format_double(v) << "</text>\n"
        << "<text class=\"label\" x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(f.top + f.height + 18)
        << "\" text-anchor=\"middle\">" << escape(labels[i]) << "</text>\n";
  }
  out << "</svg>\n";
  return out.str();
}

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series) {
  const int width = 640;
  const int height = 400;
  double x_lo = INFINITY, x_hi = -INFINITY, y_hi = 0.0;
  for (const auto& s : series) {
    for (double x : s.x) x_lo = std::min(x_lo, x), x_hi = std::max(x_hi, x);
    for (double y : s.y) y_hi = std::max(y_hi, y);
  }
  if (!std::isfinite(x_lo)) x_lo = 0.0, x_hi = 1.0;
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  if (y_hi <= 0.0) y_hi = 1.0;
  y_hi *= 1.15;
  const Frame f{80.0, 40.0, 400.0, height - 100.0, x_lo, x_hi, 0.0, y_hi};

  std::ostringstream out;
  header(out, width, height, title);
  axes(out, f, x_label, y_label, true);
  std::vector<std::string> names;
  for (std::size_t i = 0; i < series.size(); ++i) {
    const auto& s = series[i];
    names.push_back(s.name);
    polyline(out, f, s, color(i));
    for (std::size_t k = 0; k < s.x.size() && k < s.y.size(); ++k) {
      out << "<circle cx=\"" << num(f.px(s.x[k])) << "\" cy=\"" << num(f.py(s.y[k])) << "\" r=\"3\" fill=\""
          << color(i) << "\"><title>" << escape(s.name) << ' ' << format_double(s.x[k]) << ": "
          << format_double(s.y[k]) << "</title></circle>\n";
    }
  }
  legend(out, f.left + f.width + 20, f.top + 10, names);
  out << "</svg>\n";
  return out.str();
}

std::string panel_chart(const std::string& title, const std::string& x_label, const std::vector<Panel>& panels,
                        double x_lo, double x_hi, const std::vector<double>& markers) {
  const double pw = 220.0;
  const double gap = 70.0;
  const int width = static_cast<int>(70.0 + static_cast<double>(panels.size()) * (pw + gap) + 130.0);
  const int height = 340;

  std::ostringstream out;
  header(out, width, height, title);
  std::vector<std::string> names;
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Frame f{70.0 + static_cast<double>(p) * (pw + gap), 50.0, pw, 220.0, x_lo, x_hi, 0.0, 1.0};
    axes(out, f, x_label, p == 0 ? "probability" : "", true);
    out << "<text x=\"" << num(f.left + f.width / 2) << "\" y=\"" << num(f.top - 8) << "\" text-anchor=\"middle\">"
        << escape(panels[p].title) << "</text>\n";
    for (std::size_t i = 0; i < panels[p].series.size(); ++i) {
      polyline(out, f, panels[p].series[i], color(i));
      if (p == 0) names.push_back(panels[p].series[i].name);
    }
    for (double m : markers) {
      out << "<line class=\"marker\" x1=\"" << num(f.px(m)) << "\" y1=\"" << num(f.py(0.0)) << "\" x2=\""
          << num(f.px(m)) << "\" y2=\"" << num(f.py(0.0) - 8) << "\" stroke=\"black\"/>\n";
    }
  }
  legend(out, static_cast<double>(width) - 120.0, 60.0, names);
  out << "</svg>\n";
  return out.str();
}

}  // namespace prefopt::svg
