#include "csq/svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace csq {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(10);
  os << v;
  return os.str();
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

void SvgChart::add_series(std::string name, std::vector<double> x, std::vector<double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("SvgChart: x/y size mismatch");
  series_.push_back(Series{std::move(name), std::move(x), std::move(y)});
}

std::string SvgChart::render() const {
  const double W = 720, H = 480, ml = 70, mr = 20, mt = 40, mb = 50;
  double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  bool first = true;
  for (const auto& s : series_)
    for (size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
      if (first) {
        xmin = xmax = s.x[i];
        ymin = ymax = s.y[i];
        first = false;
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  const double xpad = 0.05 * (xmax - xmin), ypad = 0.05 * (ymax - ymin);
  xmin -= xpad;
  xmax += xpad;
  ymin -= ypad;
  ymax += ypad;
  auto X = [&](double v) { return ml + (v - xmin) / (xmax - xmin) * (W - ml - mr); };
  auto Y = [&](double v) { return H - mb - (v - ymin) / (ymax - ymin) * (H - mt - mb); };

  std::ostringstream os;
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  os << "<!-- data\n";
  for (const auto& s : series_) {
    os << "series: " << s.name << "\n";
    for (size_t i = 0; i < s.x.size(); ++i) os << fmt(s.x[i]) << "," << fmt(s.y[i]) << "\n";
  }
  os << "-->\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">" << title_
     << "</text>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"13\">"
     << xlabel_ << "</text>\n";
  os << "<text x=\"18\" y=\"" << H / 2 << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 "
     << H / 2 << ")\">" << ylabel_ << "</text>\n";
  os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << W - ml - mr << "\" height=\""
     << H - mt - mb << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int k = 0; k <= 4; ++k) {
    const double xv = xmin + (xmax - xmin) * k / 4.0;
    const double yv = ymin + (ymax - ymin) * k / 4.0;
    os << "<text x=\"" << X(xv) << "\" y=\"" << H - mb + 16
       << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(xv) << "</text>\n";
    os << "<text x=\"" << ml - 6 << "\" y=\"" << Y(yv) + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(yv) << "</text>\n";
  }
  int color = 0;
  for (const auto& s : series_) {
    const char* c = kPalette[color++ % 6];
    os << "<polyline fill=\"none\" stroke=\"" << c << "\" stroke-width=\"1.5\" points=\"";
    for (size_t i = 0; i < s.x.size(); ++i) os << X(s.x[i]) << "," << Y(s.y[i]) << " ";
    os << "\"/>\n";
    for (size_t i = 0; i < s.x.size(); ++i)
      os << "<circle cx=\"" << X(s.x[i]) << "\" cy=\"" << Y(s.y[i]) << "\" r=\"2.5\" fill=\"" << c
         << "\"/>\n";
    os << "<text x=\"" << W - mr - 8 << "\" y=\"" << mt + 16 + 16 * (color - 1)
       << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << c << "\">" << s.name << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

void SvgChart::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("SvgChart: cannot open " + path);
  out << render();
}

}  // namespace csq
