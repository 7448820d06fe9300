#include "burgerslab/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "burgerslab/error.hpp"

namespace burgerslab {

using nlohmann::ordered_json;

CheckItem check_at_most(std::string name, int criterion, double value, double limit, std::string detail) {
  CheckItem c{std::move(name), criterion, value, "<=", -std::numeric_limits<double>::infinity(), limit,
              std::isfinite(value) && value <= limit, std::move(detail)};
  return c;
}

CheckItem check_at_least(std::string name, int criterion, double value, double limit, std::string detail) {
  CheckItem c{std::move(name), criterion, value, ">=", limit, std::numeric_limits<double>::infinity(),
              std::isfinite(value) && value >= limit, std::move(detail)};
  return c;
}

CheckItem check_within(std::string name, int criterion, double value, double lo, double hi, std::string detail) {
  CheckItem c{std::move(name), criterion, value, "in", lo, hi, std::isfinite(value) && value >= lo && value <= hi,
              std::move(detail)};
  return c;
}

CheckItem check_true(std::string name, int criterion, bool ok, std::string detail) {
  return CheckItem{std::move(name), criterion, ok ? 1.0 : 0.0, "==", 1.0, 1.0, ok, std::move(detail)};
}

CheckItem report_only(std::string name, int criterion, double value, std::string detail) {
  return CheckItem{std::move(name), criterion, value, "report", 0.0, 0.0, true, std::move(detail)};
}

bool StudyReport::passed() const {
  return std::all_of(items.begin(), items.end(), [](const CheckItem& c) { return c.pass; });
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

ordered_json bound_json(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

ordered_json to_json(const StudyReport& report) {
  ordered_json j;
  j["study"] = report.study;
  j["config"] = report.config;
  ordered_json results = ordered_json::array();
  for (const CheckItem& c : report.items) {
    ordered_json r;
    r["name"] = c.name;
    r["criterion"] = c.criterion;
    r["value"] = bound_json(c.value);
    r["relation"] = c.relation;
    r["lower"] = bound_json(c.lower);
    r["upper"] = bound_json(c.upper);
    r["pass"] = c.pass;
    r["detail"] = c.detail;
    results.push_back(r);
  }
  j["results"] = results;
  j["data"] = report.data;
  j["pass"] = report.passed();
  return j;
}

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw LabError(Errc::io, "cannot open " + path.string() + " for writing");
  os << text;
  if (!os) throw LabError(Errc::io, "write failed for " + path.string());
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string render_csv(const Table& t) {
  std::ostringstream os;
  for (std::size_t i = 0; i < t.columns.size(); ++i) os << (i ? "," : "") << csv_field(t.columns[i]);
  os << "\n";
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << csv_field(row[i]);
    os << "\n";
  }
  return os.str();
}

std::string xml_escape(const std::string& s) {
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

std::string fixed(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

}  // namespace

std::string render_svg(const Plot& plot) {
  constexpr double width = 640, height = 420, margin = 60;
  auto transform = [&](double v) { return plot.loglog ? std::log10(v) : v; };
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const Series& s : plot.series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (plot.loglog && (!(s.x[i] > 0.0) || !(s.y[i] > 0.0))) continue;
      xmin = std::min(xmin, transform(s.x[i]));
      xmax = std::max(xmax, transform(s.x[i]));
      ymin = std::min(ymin, transform(s.y[i]));
      ymax = std::max(ymax, transform(s.y[i]));
    }
  if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
  if (xmax == xmin) xmax = xmin + 1;
  if (ymax == ymin) ymax = ymin + 1;
  auto px = [&](double v) { return margin + (transform(v) - xmin) / (xmax - xmin) * (width - 2 * margin); };
  auto py = [&](double v) { return height - margin - (transform(v) - ymin) / (ymax - ymin) * (height - 2 * margin); };

  static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << xml_escape(plot.title)
     << "</text>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin << "\" y2=\""
     << height - margin << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\"" << height - margin
     << "\" stroke=\"black\"/>\n";
  const std::string scale = plot.loglog ? " (log10)" : "";
  os << "<text x=\"" << width / 2 << "\" y=\"" << height - 15 << "\" text-anchor=\"middle\" font-size=\"12\">"
     << xml_escape(plot.x_label + scale) << " [" << fixed(xmin) << ", " << fixed(xmax) << "]</text>\n";
  os << "<text x=\"15\" y=\"" << height / 2 << "\" font-size=\"12\" transform=\"rotate(-90 15 " << height / 2
     << ")\" text-anchor=\"middle\">" << xml_escape(plot.y_label + scale) << " [" << fixed(ymin) << ", "
     << fixed(ymax) << "]</text>\n";
  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const Series& series = plot.series[s];
    const char* color = palette[s % std::size(palette)];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    bool first = true;
    for (std::size_t i = 0; i < series.x.size(); ++i) {
      if (plot.loglog && (!(series.x[i] > 0.0) || !(series.y[i] > 0.0))) continue;
      os << (first ? "" : " ") << fixed(px(series.x[i])) << "," << fixed(py(series.y[i]));
      first = false;
    }
    os << "\"/>\n";
    os << "<text x=\"" << width - margin + 4 << "\" y=\"" << margin + 14 * s << "\" font-size=\"11\" fill=\"" << color
       << "\">" << xml_escape(series.name) << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

std::vector<std::filesystem::path> emit_reports(const StudyReport& report, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw LabError(Errc::io, "cannot create output directory " + dir.string() + ": " + ec.message());
  std::vector<std::filesystem::path> written;

  const auto study_path = dir / "study.json";
  write_text(study_path, to_json(report).dump(2) + "\n");
  written.push_back(study_path);

  for (const Table& t : report.tables) {
    if (t.rows.empty()) continue;
    const auto path = dir / t.file;
    write_text(path, render_csv(t));
    written.push_back(path);
  }
  for (const Plot& p : report.plots) {
    if (p.series.empty()) continue;
    const auto path = dir / p.file;
    write_text(path, render_svg(p));
    written.push_back(path);
  }

  ordered_json timing;
  timing["study"] = report.study;
  timing["wall_clock_s"] = report.wall_clock_s;
  ordered_json per_item = ordered_json::object();
  for (const CheckItem& c : report.items) per_item[c.name] = c.seconds;
  timing["items_s"] = per_item;
  const auto timing_path = dir / "timing.json";
  write_text(timing_path, timing.dump(2) + "\n");
  written.push_back(timing_path);
  return written;
}

}  // namespace burgerslab
