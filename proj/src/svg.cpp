#include "roshap/svg.hpp"

#include "roshap/errors.hpp"
#include "roshap/kde.hpp"
#include "roshap/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace roshap::svg {

namespace {

constexpr double kWidth = 640, kHeight = 400;
constexpr double kLeft = 60, kRight = 20, kTop = 40, kBottom = 60;
constexpr const char* kPalette[] = {"#4C72B0", "#DD8452", "#55A868", "#C44E52", "#8172B3", "#937860"};

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

void open(std::ostringstream& os, const std::string& title) {
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
     << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
     << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(title)
     << "</text>\n";
}

void axes(std::ostringstream& os) {
  os << "<line x1=\"" << kLeft << "\" y1=\"" << kHeight - kBottom << "\" x2=\"" << kWidth - kRight << "\" y2=\""
     << kHeight - kBottom << "\" stroke=\"black\"/>\n"
     << "<line x1=\"" << kLeft << "\" y1=\"" << kTop << "\" x2=\"" << kLeft << "\" y2=\"" << kHeight - kBottom
     << "\" stroke=\"black\"/>\n";
}

std::string polyline(const std::vector<std::pair<double, double>>& pts, const char* colour, const char* dash) {
  std::string s = "<polyline fill=\"none\" stroke=\"" + std::string(colour) + "\" stroke-width=\"2\"";
  if (dash) s += " stroke-dasharray=\"" + std::string(dash) + "\"";
  s += " points=\"";
  for (const auto& [x, y] : pts) s += num(x) + "," + num(y) + " ";
  s += "\"/>\n";
  return s;
}

}  // namespace

std::string histogram_with_overlays(const Eigen::Ref<const Eigen::VectorXd>& samples, const std::string& title,
                                    int bins) {
  std::ostringstream os;
  open(os, title);
  axes(os);
  if (samples.size() == 0) {
    os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\">no samples</text>\n";
    os << "</svg>\n";
    return os.str();
  }
  double lo = samples.minCoeff(), hi = samples.maxCoeff();
  const bool spread = hi > lo;
  if (!spread) {
    lo -= 0.5;
    hi += 0.5;
  }
  const double width = (hi - lo) / bins;
  std::vector<double> density(static_cast<std::size_t>(bins), 0.0);
  for (Eigen::Index i = 0; i < samples.size(); ++i) {
    const auto b = std::min(bins - 1, static_cast<int>((samples[i] - lo) / width));
    density[static_cast<std::size_t>(b)] += 1.0;
  }
  for (auto& d : density) d /= static_cast<double>(samples.size()) * width;

  const int grid_points = 200;
  Eigen::VectorXd grid = Eigen::VectorXd::LinSpaced(grid_points, lo, hi);
  Eigen::VectorXd kde_curve, normal_curve;
  if (spread && samples.size() >= 2) {
    kde_curve = GaussianKde(samples).density(grid);
    const double m = stats::mean(samples), s = stats::sd(samples);
    normal_curve = grid.unaryExpr([&](double x) { return stats::normal_pdf(x, m, s); });
  }
  double ymax = *std::max_element(density.begin(), density.end());
  if (kde_curve.size()) ymax = std::max({ymax, kde_curve.maxCoeff(), normal_curve.maxCoeff()});
  ymax *= 1.05;

  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - lo) / (hi - lo) * pw; };
  auto py = [&](double y) { return kHeight - kBottom - y / ymax * ph; };
  for (int b = 0; b < bins; ++b) {
    const double x0 = px(lo + b * width), x1 = px(lo + (b + 1) * width);
    const double y = py(density[static_cast<std::size_t>(b)]);
    os << "<rect x=\"" << num(x0) << "\" y=\"" << num(y) << "\" width=\"" << num(x1 - x0) << "\" height=\""
       << num(kHeight - kBottom - y) << "\" fill=\"#9DB4D9\" stroke=\"white\"/>\n";
  }
  if (kde_curve.size()) {
    std::vector<std::pair<double, double>> k, g;
    for (int i = 0; i < grid_points; ++i) {
      k.emplace_back(px(grid[i]), py(kde_curve[i]));
      g.emplace_back(px(grid[i]), py(normal_curve[i]));
    }
    os << polyline(k, kPalette[0], nullptr) << polyline(g, kPalette[3], "6,4");
    os << "<text x=\"" << kWidth - kRight - 150 << "\" y=\"" << kTop + 10 << "\" fill=\"" << kPalette[0]
       << "\">KDE</text>\n"
       << "<text x=\"" << kWidth - kRight - 150 << "\" y=\"" << kTop + 26 << "\" fill=\"" << kPalette[3]
       << "\">Gaussian (mean, SD)</text>\n";
  }
  for (int t = 0; t <= 4; ++t) {
    const double x = lo + (hi - lo) * t / 4;
    os << "<text x=\"" << num(px(x)) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">"
       << num(x) << "</text>\n";
  }
  os << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16 << "\" text-anchor=\"middle\">U</text>\n";
  os << "<text x=\"16\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 16 " << kHeight / 2
     << ")\" text-anchor=\"middle\">density</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string grouped_bars(const std::vector<BarGroup>& groups, const std::vector<std::string>& series,
                         const std::string& title, const std::string& y_label) {
  std::ostringstream os;
  open(os, title);
  axes(os);
  double ymax = 0.0;
  for (const auto& g : groups)
    for (std::size_t s = 0; s < g.mean.size(); ++s)
      if (std::isfinite(g.mean[s])) ymax = std::max(ymax, g.mean[s] + (s < g.sd.size() ? g.sd[s] : 0.0));
  if (!(ymax > 0.0)) ymax = 1.0;
  ymax *= 1.1;
  const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
  const double group_w = groups.empty() ? pw : pw / static_cast<double>(groups.size());
  const double bar_w = group_w * 0.8 / static_cast<double>(std::max<std::size_t>(1, series.size()));
  auto py = [&](double y) { return kHeight - kBottom - y / ymax * ph; };
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& g = groups[gi];
    const double gx = kLeft + group_w * static_cast<double>(gi) + group_w * 0.1;
    for (std::size_t s = 0; s < g.mean.size() && s < series.size(); ++s) {
      if (!std::isfinite(g.mean[s])) continue;
      const double x = gx + bar_w * static_cast<double>(s);
      const double y = py(g.mean[s]);
      os << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(bar_w * 0.9) << "\" height=\""
         << num(kHeight - kBottom - y) << "\" fill=\"" << kPalette[s % 6] << "\"/>\n";
      const double sd = s < g.sd.size() ? g.sd[s] : 0.0;
      const double cx = x + bar_w * 0.45;
      os << "<line x1=\"" << num(cx) << "\" y1=\"" << num(py(g.mean[s] - sd)) << "\" x2=\"" << num(cx)
         << "\" y2=\"" << num(py(g.mean[s] + sd)) << "\" stroke=\"black\"/>\n";
    }
    os << "<text x=\"" << num(gx + group_w * 0.4) << "\" y=\"" << kHeight - kBottom + 16
       << "\" text-anchor=\"middle\">" << escape(g.label) << "</text>\n";
  }
  for (std::size_t s = 0; s < series.size(); ++s)
    os << "<text x=\"" << kWidth - kRight - 150 << "\" y=\"" << kTop + 10 + 16 * static_cast<double>(s)
       << "\" fill=\"" << kPalette[s % 6] << "\">" << escape(series[s]) << "</text>\n";
  os << "<text x=\"" << kWidth - kRight - 150 << "\" y=\"" << kTop + 10 + 16 * static_cast<double>(series.size())
     << "\">error bars: SD</text>\n";
  for (int t = 0; t <= 4; ++t) {
    const double y = ymax * t / 4;
    os << "<text x=\"" << kLeft - 6 << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">" << num(y)
       << "</text>\n";
  }
  os << "<text x=\"16\" y=\"" << kHeight / 2 << "\" transform=\"rotate(-90 16 " << kHeight / 2
     << ")\" text-anchor=\"middle\">" << escape(y_label) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path);
  out << content;
  if (!out) throw DataError("failed writing " + path);
}

}  // namespace roshap::svg
