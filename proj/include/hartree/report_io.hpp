#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace hartree {

/// Comma-separated table written with 17 significant digits.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row();
  CsvTable& cell(const std::string& value);
  CsvTable& cell(double value);
  CsvTable& cell(long long value);
  CsvTable& cell(int value) { return cell(static_cast<long long>(value)); }

  void write(const std::filesystem::path& path, const std::vector<std::string>& trailer = {}) const;
  std::string str(const std::vector<std::string>& trailer = {}) const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

std::string format_double(double v);

struct PlotSeries {
  std::string name;
  std::vector<double> x, y;
  bool scatter = false;
};

struct PlotSpec {
  std::string title, x_label, y_label;
  std::vector<PlotSeries> series;
  bool log_y = false;
  /// Horizontal reference lines (value, label).
  std::vector<std::pair<double, std::string>> h_lines;
};

/// Static SVG line / scatter chart.
void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec);

/// Histogram of `values` in `bins` equal bins, drawn as bars.
void write_svg_histogram(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                         const std::vector<double>& values, int bins);

}  // namespace hartree
