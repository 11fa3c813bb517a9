#include "uerw/report_svg.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "uerw/errors.hpp"

namespace uerw {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_bar_chart_svg(const std::string& path, const std::string& title,
                         const std::vector<std::string>& categories,
                         const std::vector<BarSeries>& series, const std::string& y_label,
                         double y_max) {
  for (const auto& s : series)
    if (s.values.size() != categories.size())
      throw ValidationError("bar chart series '" + s.label + "' length mismatch");

  const double margin_l = 60, margin_r = 20, margin_t = 40, margin_b = 70;
  const double group_w = 40.0 + 18.0 * static_cast<double>(series.size());
  const double plot_w = group_w * static_cast<double>(categories.size());
  const double plot_h = 240;
  const double width = margin_l + plot_w + margin_r;
  const double height = margin_t + plot_h + margin_b;

  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\""
      << fmt(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<text x=\"" << fmt(width / 2) << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">"
      << title << "</text>\n";

  // Axes and horizontal grid lines.
  for (int g = 0; g <= 5; ++g) {
    const double v = y_max * g / 5.0;
    const double y = margin_t + plot_h * (1.0 - v / y_max);
    out << "<line x1=\"" << fmt(margin_l) << "\" y1=\"" << fmt(y) << "\" x2=\""
        << fmt(margin_l + plot_w) << "\" y2=\"" << fmt(y) << "\" stroke=\"#ddd\"/>\n";
    out << "<text x=\"" << fmt(margin_l - 6) << "\" y=\"" << fmt(y + 4)
        << "\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
  }
  out << "<text x=\"14\" y=\"" << fmt(margin_t + plot_h / 2)
      << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " << fmt(margin_t + plot_h / 2)
      << ")\">" << y_label << "</text>\n";

  const double bar_w = (group_w - 24.0) / static_cast<double>(series.size());
  for (std::size_t c = 0; c < categories.size(); ++c) {
    const double gx = margin_l + group_w * static_cast<double>(c);
    bool any = false;
    for (std::size_t s = 0; s < series.size(); ++s) {
      const auto& v = series[s].values[c];
      if (!v) continue;
      any = true;
      const double clipped = std::clamp(*v, 0.0, y_max);
      const double h = plot_h * clipped / y_max;
      out << "<rect x=\"" << fmt(gx + 12.0 + bar_w * static_cast<double>(s)) << "\" y=\""
          << fmt(margin_t + plot_h - h) << "\" width=\"" << fmt(bar_w - 2) << "\" height=\""
          << fmt(h) << "\" fill=\"" << series[s].color << "\"/>\n";
    }
    if (!any)
      out << "<text x=\"" << fmt(gx + group_w / 2) << "\" y=\"" << fmt(margin_t + plot_h - 6)
          << "\" text-anchor=\"middle\" fill=\"#999\">n/a</text>\n";
    out << "<text x=\"" << fmt(gx + group_w / 2) << "\" y=\"" << fmt(margin_t + plot_h + 14)
        << "\" text-anchor=\"middle\" transform=\"rotate(30 " << fmt(gx + group_w / 2) << ' '
        << fmt(margin_t + plot_h + 14) << ")\">" << categories[c] << "</text>\n";
  }

  // Legend.
  double lx = margin_l;
  const double ly = height - 16;
  for (const auto& s : series) {
    out << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly - 10) << "\" width=\"12\" height=\"12\" fill=\""
        << s.color << "\"/>\n";
    out << "<text x=\"" << fmt(lx + 16) << "\" y=\"" << fmt(ly) << "\">" << s.label << "</text>\n";
    lx += 26.0 + 7.0 * static_cast<double>(s.label.size());
  }

  out << "</svg>\n";
}

}  // namespace uerw
