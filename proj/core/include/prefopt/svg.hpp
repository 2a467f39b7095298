#pragma once

#include <string>
#include <vector>

namespace prefopt::svg {

struct Series {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::vector<Series> series;
};

std::string escape(const std::string& text);

// One bar per label; each bar carries its value as text formatted with
// format_double.
std::string bar_chart(const std::string& title, const std::string& y_label, const std::vector<std::string>& labels,
                      const std::vector<double>& values);

std::string line_chart(const std::string& title, const std::string& x_label, const std::string& y_label,
                       const std::vector<Series>& series);

// Panels side by side on a shared [x_lo, x_hi] x [0, 1] frame; `markers`
// are drawn as ticks along each panel's x axis.
std::string panel_chart(const std::string& title, const std::string& x_label, const std::vector<Panel>& panels,
                        double x_lo, double x_hi, const std::vector<double>& markers);

}  // namespace prefopt::svg
