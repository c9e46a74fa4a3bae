#include "hartree/report_io.hpp"

#include "hartree/core.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace hartree {

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

CsvTable& CsvTable::row() {
  rows_.emplace_back();
  return *this;
}

CsvTable& CsvTable::cell(const std::string& value) {
  if (rows_.empty()) row();
  rows_.back().push_back(value);
  return *this;
}

CsvTable& CsvTable::cell(double value) { return cell(format_double(value)); }

CsvTable& CsvTable::cell(long long value) { return cell(std::to_string(value)); }

std::string CsvTable::str(const std::vector<std::string>& trailer) const {
  std::ostringstream os;
  const auto line = [&os](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
    os << '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  for (const auto& t : trailer) os << "# " << t << '\n';
  return os.str();
}

void CsvTable::write(const std::filesystem::path& path, const std::vector<std::string>& trailer) const {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  os << str(trailer);
}

namespace {

constexpr double kWidth = 720, kHeight = 440, kLeft = 80, kRight = 170, kTop = 40, kBottom = 60;
const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                               "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '&': out += "&amp;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string tick(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

struct Frame {
  double x0, x1, y0, y1;
  bool log_y;
  double px(double x) const { return kLeft + (x - x0) / (x1 - x0) * (kWidth - kLeft - kRight); }
  double py(double y) const {
    const double v = log_y ? std::log10(y) : y;
    return kHeight - kBottom - (v - y0) / (y1 - y0) * (kHeight - kTop - kBottom);
  }
};

void widen(double& lo, double& hi) {
  if (!(hi > lo)) {
    const double pad = std::max(1e-12, std::abs(lo) * 0.05 + 1e-12);
    lo -= pad;
    hi += pad;
  }
}

void axes(std::ostream& os, const Frame& f, const std::string& title, const std::string& xl, const std::string& yl) {
  os << "<rect x='0' y='0' width='" << kWidth << "' height='" << kHeight << "' fill='white'/>\n";
  os << "<text x='" << kWidth / 2 << "' y='22' text-anchor='middle' font-size='15'>" << escape(title) << "</text>\n";
  const double xa = kLeft, xb = kWidth - kRight, ya = kHeight - kBottom, yb = kTop;
  os << "<polyline fill='none' stroke='black' points='" << xa << ',' << yb << ' ' << xa << ',' << ya << ' ' << xb
     << ',' << ya << "'/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = f.x0 + (f.x1 - f.x0) * i / 5.0;
    const double yv = f.y0 + (f.y1 - f.y0) * i / 5.0;
    const double px = f.px(xv);
    const double py = kHeight - kBottom - (kHeight - kTop - kBottom) * i / 5.0;
    os << "<text x='" << px << "' y='" << ya + 18 << "' text-anchor='middle' font-size='11'>" << tick(xv)
       << "</text>\n";
    os << "<text x='" << xa - 6 << "' y='" << py + 4 << "' text-anchor='end' font-size='11'>"
       << (f.log_y ? "1e" + tick(yv) : tick(yv)) << "</text>\n";
  }
  os << "<text x='" << (xa + xb) / 2 << "' y='" << kHeight - 15 << "' text-anchor='middle' font-size='13'>"
     << escape(xl) << "</text>\n";
  os << "<text x='18' y='" << (ya + yb) / 2 << "' text-anchor='middle' font-size='13' transform='rotate(-90 18 "
     << (ya + yb) / 2 << ")'>" << escape(yl) << "</text>\n";
}

void save(const std::filesystem::path& path, const std::string& body) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream os(path, std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  os << "<svg xmlns='http://www.w3.org/2000/svg' width='" << kWidth << "' height='" << kHeight << "'>\n"
     << body << "</svg>\n";
}

}  // namespace

void write_svg_plot(const std::filesystem::path& path, const PlotSpec& spec) {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  const auto yval = [&](double y) { return spec.log_y ? std::log10(y) : y; };
  const auto usable = [&](double x, double y) { return std::isfinite(x) && std::isfinite(y) && (!spec.log_y || y > 0); };
  for (const auto& s : spec.series)
    for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!usable(s.x[i], s.y[i])) continue;
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, yval(s.y[i]));
      y1 = std::max(y1, yval(s.y[i]));
    }
  for (const auto& [v, label] : spec.h_lines) {
    if (!spec.log_y || v > 0) {
      y0 = std::min(y0, yval(v));
      y1 = std::max(y1, yval(v));
    }
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  widen(x0, x1);
  widen(y0, y1);
  const Frame f{x0, x1, y0, y1, spec.log_y};
  std::ostringstream os;
  axes(os, f, spec.title, spec.x_label, spec.y_label);
  for (const auto& [v, label] : spec.h_lines) {
    if (spec.log_y && v <= 0) continue;
    os << "<line x1='" << f.px(x0) << "' x2='" << f.px(x1) << "' y1='" << f.py(v) << "' y2='" << f.py(v)
       << "' stroke='gray' stroke-dasharray='4 3'/>\n";
    os << "<text x='" << f.px(x1) + 4 << "' y='" << f.py(v) + 4 << "' font-size='11'>" << escape(label) << "</text>\n";
  }
  for (std::size_t si = 0; si < spec.series.size(); ++si) {
    const auto& s = spec.series[si];
    const char* color = kColors[si % std::size(kColors)];
    if (s.scatter) {
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
        if (usable(s.x[i], s.y[i]))
          os << "<circle cx='" << f.px(s.x[i]) << "' cy='" << f.py(s.y[i]) << "' r='3' fill='" << color << "'/>\n";
    } else {
      os << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5' points='";
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i)
        if (usable(s.x[i], s.y[i])) os << f.px(s.x[i]) << ',' << f.py(s.y[i]) << ' ';
      os << "'/>\n";
    }
    const double ly = kTop + 18.0 * static_cast<double>(si) + 10;
    os << "<rect x='" << kWidth - kRight + 12 << "' y='" << ly - 8 << "' width='12' height='8' fill='" << color
       << "'/>\n";
    os << "<text x='" << kWidth - kRight + 30 << "' y='" << ly << "' font-size='11'>" << escape(s.name) << "</text>\n";
  }
  save(path, os.str());
}

void write_svg_histogram(const std::filesystem::path& path, const std::string& title, const std::string& x_label,
                         const std::vector<double>& values, int bins) {
  bins = std::max(bins, 1);
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : values)
    if (std::isfinite(v)) lo = std::min(lo, v), hi = std::max(hi, v);
  if (!std::isfinite(lo)) lo = 0, hi = 1;
  widen(lo, hi);
  std::vector<int> count(static_cast<std::size_t>(bins), 0);
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    auto b = static_cast<int>((v - lo) / (hi - lo) * bins);
    count[static_cast<std::size_t>(std::clamp(b, 0, bins - 1))]++;
  }
  const int peak = std::max(1, *std::max_element(count.begin(), count.end()));
  const Frame f{lo, hi, 0.0, static_cast<double>(peak), false};
  std::ostringstream os;
  axes(os, f, title, x_label, "count");
  const double w = (f.px(hi) - f.px(lo)) / bins;
  for (int b = 0; b < bins; ++b) {
    const double c = count[static_cast<std::size_t>(b)];
    const double x = f.px(lo + (hi - lo) * b / bins);
    os << "<rect x='" << x << "' y='" << f.py(c) << "' width='" << std::max(w - 1.0, 0.5) << "' height='"
       << f.py(0.0) - f.py(c) << "' fill='" << kColors[0] << "'/>\n";
  }
  save(path, os.str());
}

}  // namespace hartree
