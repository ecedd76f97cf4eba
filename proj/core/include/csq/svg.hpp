#ifndef CSQ_SVG_HPP
#define CSQ_SVG_HPP

#include <string>
#include <vector>

namespace csq {

/// Minimal static SVG line/point chart with the plotted data embedded as an
/// XML comment, so the file is archival without a display dependency.
class SvgChart {
public:
  SvgChart(std::string title, std::string xlabel, std::string ylabel)
      : title_(std::move(title)), xlabel_(std::move(xlabel)), ylabel_(std::move(ylabel)) {}

  void add_series(std::string name, std::vector<double> x, std::vector<double> y);
  std::string render() const;
  void write(const std::string& path) const;

private:
  struct Series {
    std::string name;
    std::vector<double> x, y;
  };
  std::string title_, xlabel_, ylabel_;
  std::vector<Series> series_;
};

}  // namespace csq

#endif
