#pragma once

// Minimal line-plot SVG writer: axes, ticks, labels, legend, polylines.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

namespace foldpath::svg {

struct Series {
   std::string label;
   std::vector<double> x;
   std::vector<double> y;
   std::string color = "#1f77b4";
   bool markers = false;
   bool dashed = false;
};

struct PlotSpec {
   std::string title;
   std::string x_label;
   std::string y_label;
   bool log_y = false;
   int width = 640;
   int height = 420;
};

namespace detail {

inline std::string num(double v)
{
   char buf[32];
   std::snprintf(buf, sizeof buf, "%.6g", v);
   return buf;
}

inline std::string escape(const std::string& s)
{
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

// Round step to 1, 2 or 5 times a power of ten.
inline double nice_step(double span, int target_ticks)
{
   const double raw = span / std::max(1, target_ticks);
   const double mag = std::pow(10.0, std::floor(std::log10(raw)));
   const double r = raw / mag;
   const double f = r < 1.5 ? 1.0 : r < 3.5 ? 2.0 : r < 7.5 ? 5.0 : 10.0;
   return f * mag;
}

}  // namespace detail

inline std::string render(const PlotSpec& spec, const std::vector<Series>& series)
{
   constexpr double left = 70, right = 20, top = 40, bottom = 55;
   const double w = spec.width - left - right;
   const double h = spec.height - top - bottom;
   auto ty = [&](double v) { return spec.log_y ? std::log10(v) : v; };

   double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
   for (const Series& s : series) {
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
         const double yv = ty(s.y[i]);
         if (!std::isfinite(s.x[i]) || !std::isfinite(yv)) continue;
         xmin = std::min(xmin, s.x[i]);
         xmax = std::max(xmax, s.x[i]);
         ymin = std::min(ymin, yv);
         ymax = std::max(ymax, yv);
      }
   }
   if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
   if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
   if (ymax == ymin) ymin -= 0.5, ymax += 0.5;
   const double ypad = 0.05 * (ymax - ymin);
   ymin -= ypad;
   ymax += ypad;

   auto px = [&](double x) { return left + (x - xmin) / (xmax - xmin) * w; };
   auto py = [&](double y) { return top + (1.0 - (y - ymin) / (ymax - ymin)) * h; };

   std::ostringstream os;
   os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
   os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
   os << "<text x=\"" << spec.width / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
      << detail::escape(spec.title) << "</text>\n";
   os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << w << "\" height=\"" << h
      << "\" fill=\"none\" stroke=\"black\"/>\n";

   const double xstep = detail::nice_step(xmax - xmin, 6);
   for (double t = std::ceil(xmin / xstep) * xstep; t <= xmax + 1e-12 * xstep; t += xstep) {
      const double x = px(t);
      os << "<line x1=\"" << detail::num(x) << "\" y1=\"" << top + h << "\" x2=\"" << detail::num(x) << "\" y2=\""
         << top + h + 5 << "\" stroke=\"black\"/>\n";
      os << "<text x=\"" << detail::num(x) << "\" y=\"" << top + h + 18 << "\" text-anchor=\"middle\">"
         << detail::num(std::abs(t) < 1e-12 * xstep ? 0.0 : t) << "</text>\n";
   }
   const double ystep = detail::nice_step(ymax - ymin, 6);
   for (double t = std::ceil(ymin / ystep) * ystep; t <= ymax + 1e-12 * ystep; t += ystep) {
      const double y = py(t);
      const double shown = std::abs(t) < 1e-12 * ystep ? 0.0 : t;
      os << "<line x1=\"" << left - 5 << "\" y1=\"" << detail::num(y) << "\" x2=\"" << left << "\" y2=\""
         << detail::num(y) << "\" stroke=\"black\"/>\n";
      os << "<text x=\"" << left - 8 << "\" y=\"" << detail::num(y + 4) << "\" text-anchor=\"end\">"
         << (spec.log_y ? "1e" + detail::num(shown) : detail::num(shown)) << "</text>\n";
   }
   os << "<text x=\"" << left + w / 2 << "\" y=\"" << spec.height - 12 << "\" text-anchor=\"middle\">"
      << detail::escape(spec.x_label) << "</text>\n";
   os << "<text x=\"16\" y=\"" << top + h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
      << top + h / 2 << ")\">" << detail::escape(spec.y_label) << "</text>\n";

   int legend_row = 0;
   for (const Series& s : series) {
      std::ostringstream pts;
      std::size_t count = 0;
      for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
         const double yv = ty(s.y[i]);
         if (!std::isfinite(s.x[i]) || !std::isfinite(yv)) continue;
         pts << detail::num(px(s.x[i])) << ',' << detail::num(py(yv)) << ' ';
         ++count;
         if (s.markers) {
            os << "<circle cx=\"" << detail::num(px(s.x[i])) << "\" cy=\"" << detail::num(py(yv))
               << "\" r=\"2\" fill=\"" << s.color << "\"/>\n";
         }
      }
      if (count > 1) {
         os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
            << (s.dashed ? " stroke-dasharray=\"5,4\"" : "") << " points=\"" << pts.str() << "\"/>\n";
      }
      const double ly = top + 14 + 16 * legend_row++;
      os << "<line x1=\"" << left + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + 35 << "\" y2=\"" << ly
         << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"" << (s.dashed ? " stroke-dasharray=\"5,4\"" : "")
         << "/>\n";
      os << "<text x=\"" << left + 40 << "\" y=\"" << ly + 4 << "\">" << detail::escape(s.label) << "</text>\n";
   }
   os << "</svg>\n";
   return os.str();
}

}  // namespace foldpath::svg
