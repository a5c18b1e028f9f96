#include "plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "ttp/local_time.hpp"
#include "ttp/routes.hpp"

namespace ttp::cli {

namespace {

constexpr std::array<const char*, 7> kDayNames = {"Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun"};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

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

// Round the axis maximum up to 1, 2 or 5 times a power of ten.
double nice_ceil(double v) {
  if (!(v > 0.0)) return 1.0;
  const double p = std::pow(10.0, std::floor(std::log10(v)));
  for (double m : {1.0, 2.0, 5.0, 10.0}) {
    if (m * p >= v) return m * p;
  }
  return 10.0 * p;
}

double mean_of(double sum, std::size_t n) { return n == 0 ? 0.0 : sum / static_cast<double>(n); }

}  // namespace

std::array<WeekdayStats, 7> weekday_stats(const std::vector<trips::Trip>& trips) {
  std::array<WeekdayStats, 7> s{};
  for (const auto& t : trips) {
    auto& d = s[static_cast<std::size_t>(to_local(t.start_ts).day_of_week - 1)];
    ++d.trips;
    d.distance_km += t.distance_km;
    d.duration_s += t.duration_s;
    d.speed_kmh += t.avg_speed_kmh;
  }
  return s;
}

std::string scatter_svg(const std::vector<Prediction>& preds, const std::string& title) {
  const double w = 640, h = 640, left = 70, right = 20, top = 40, bottom = 60;
  double hi = 0.0;
  for (const auto& p : preds) hi = std::max({hi, p.actual_s, p.predicted_s});
  hi = nice_ceil(hi);
  const double pw = w - left - right, ph = h - top - bottom;
  auto sx = [&](double v) { return left + pw * v / hi; };
  auto sy = [&](double v) { return top + ph - ph * v / hi; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" viewBox=\"0 0 " << w << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << w / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
    << "</text>\n";
  for (int i = 0; i <= 5; ++i) {
    const double v = hi * i / 5.0;
    o << "<line x1=\"" << fmt(sx(v)) << "\" y1=\"" << fmt(sy(0)) << "\" x2=\"" << fmt(sx(v))
      << "\" y2=\"" << fmt(sy(hi)) << "\" stroke=\"#e0e0e0\"/>\n";
    o << "<line x1=\"" << fmt(sx(0)) << "\" y1=\"" << fmt(sy(v)) << "\" x2=\"" << fmt(sx(hi))
      << "\" y2=\"" << fmt(sy(v)) << "\" stroke=\"#e0e0e0\"/>\n";
    o << "<text x=\"" << fmt(sx(v)) << "\" y=\"" << fmt(sy(0) + 18) << "\" text-anchor=\"middle\">"
      << routes::format_number(v) << "</text>\n";
    o << "<text x=\"" << fmt(sx(0) - 6) << "\" y=\"" << fmt(sy(v) + 4) << "\" text-anchor=\"end\">"
      << routes::format_number(v) << "</text>\n";
  }
  o << "<line x1=\"" << fmt(sx(0)) << "\" y1=\"" << fmt(sy(0)) << "\" x2=\"" << fmt(sx(hi))
    << "\" y2=\"" << fmt(sy(hi)) << "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\n";
  o << "<g fill=\"#1f77b4\" fill-opacity=\"0.45\">\n";
  for (const auto& p : preds) {
    o << "<circle cx=\"" << fmt(sx(p.actual_s)) << "\" cy=\"" << fmt(sy(p.predicted_s))
      << "\" r=\"2.5\"/>\n";
  }
  o << "</g>\n";
  o << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 16
    << "\" text-anchor=\"middle\">actual duration (s)</text>\n";
  o << "<text x=\"18\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 "
    << top + ph / 2 << ")\">predicted duration (s)</text>\n";
  o << "</svg>\n";
  return o.str();
}

std::string scatter_csv(const std::vector<Prediction>& preds) {
  std::ostringstream o;
  o << "actual_s,predicted_s\n";
  for (const auto& p : preds) {
    o << routes::format_number(p.actual_s) << ',' << routes::format_number(p.predicted_s) << '\n';
  }
  return o.str();
}

std::string weekday_svg(const std::array<WeekdayStats, 7>& stats) {
  struct Panel {
    const char* label;
    std::array<double, 7> values;
  };
  std::array<Panel, 4> panels{};
  panels[0].label = "trips";
  panels[1].label = "mean distance (km)";
  panels[2].label = "mean duration (s)";
  panels[3].label = "mean speed (km/h)";
  for (std::size_t d = 0; d < 7; ++d) {
    const auto& s = stats[d];
    panels[0].values[d] = static_cast<double>(s.trips);
    panels[1].values[d] = mean_of(s.distance_km, s.trips);
    panels[2].values[d] = mean_of(s.duration_s, s.trips);
    panels[3].values[d] = mean_of(s.speed_kmh, s.trips);
  }

  const double pw = 360, ph = 220, gap = 30, w = 2 * pw + 3 * gap, h = 2 * ph + 3 * gap + 20;
  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
    << "\" viewBox=\"0 0 " << w << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"11\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << w / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">Trips by day of week</text>\n";
  for (std::size_t k = 0; k < panels.size(); ++k) {
    const double x0 = gap + static_cast<double>(k % 2) * (pw + gap);
    const double y0 = 20 + gap + static_cast<double>(k / 2) * (ph + gap);
    const auto& p = panels[k];
    const double hi = nice_ceil(*std::max_element(p.values.begin(), p.values.end()));
    const double plot_top = y0 + 20, plot_h = ph - 40, slot = pw / 7.0;
    o << "<text x=\"" << fmt(x0 + pw / 2) << "\" y=\"" << fmt(y0 + 12)
      << "\" text-anchor=\"middle\" font-size=\"13\">" << p.label << "</text>\n";
    o << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(plot_top + plot_h) << "\" x2=\"" << fmt(x0 + pw)
      << "\" y2=\"" << fmt(plot_top + plot_h) << "\" stroke=\"black\"/>\n";
    for (std::size_t d = 0; d < 7; ++d) {
      const double bh = plot_h * p.values[d] / hi;
      const double bx = x0 + slot * static_cast<double>(d) + slot * 0.15;
      o << "<rect x=\"" << fmt(bx) << "\" y=\"" << fmt(plot_top + plot_h - bh) << "\" width=\""
        << fmt(slot * 0.7) << "\" height=\"" << fmt(bh) << "\" fill=\"#2ca02c\"/>\n";
      o << "<text x=\"" << fmt(bx + slot * 0.35) << "\" y=\"" << fmt(plot_top + plot_h - bh - 3)
        << "\" text-anchor=\"middle\" font-size=\"9\">" << fmt(p.values[d]) << "</text>\n";
      o << "<text x=\"" << fmt(bx + slot * 0.35) << "\" y=\"" << fmt(plot_top + plot_h + 14)
        << "\" text-anchor=\"middle\">" << kDayNames[d] << "</text>\n";
    }
  }
  o << "</svg>\n";
  return o.str();
}

std::string weekday_csv(const std::array<WeekdayStats, 7>& stats) {
  std::ostringstream o;
  o << "day_of_week,day,trips,mean_distance_km,mean_duration_s,mean_speed_kmh\n";
  for (std::size_t d = 0; d < 7; ++d) {
    const auto& s = stats[d];
    o << d + 1 << ',' << kDayNames[d] << ',' << s.trips << ','
      << routes::format_number(mean_of(s.distance_km, s.trips)) << ','
      << routes::format_number(mean_of(s.duration_s, s.trips)) << ','
      << routes::format_number(mean_of(s.speed_kmh, s.trips)) << '\n';
  }
  return o.str();
}

}  // namespace ttp::cli
