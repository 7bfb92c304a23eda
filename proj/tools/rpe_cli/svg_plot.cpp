#include "svg_plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "rpe/noise_models.hpp"

namespace rpe::cli {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 400;
constexpr double kLeft = 70;
constexpr double kRight = 30;
constexpr double kTop = 40;
constexpr double kBottom = 60;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string label_num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
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

class Svg {
 public:
  Svg(double w, double h) : w_(w), h_(h) {}

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            const std::string& extra = "") {
    body_ << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2)
          << "\" y2=\"" << num(y2) << "\" stroke=\"" << stroke << "\"" << extra << "/>\n";
  }
  void rect(double x, double y, double w, double h, const std::string& fill,
            const std::string& extra = "") {
    body_ << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w)
          << "\" height=\"" << num(h) << "\" fill=\"" << fill << "\"" << extra << "/>\n";
  }
  void circle(double x, double y, double r, const std::string& fill) {
    body_ << "<circle cx=\"" << num(x) << "\" cy=\"" << num(y) << "\" r=\"" << num(r)
          << "\" fill=\"" << fill << "\"/>\n";
  }
  void polyline(const std::vector<std::pair<double, double>>& pts, const std::string& stroke) {
    body_ << "<polyline fill=\"none\" stroke=\"" << stroke << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      body_ << (i ? " " : "") << num(pts[i].first) << "," << num(pts[i].second);
    }
    body_ << "\"/>\n";
  }
  void text(double x, double y, const std::string& s, const std::string& anchor = "middle",
            int size = 12, const std::string& extra = "") {
    body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" font-family=\"sans-serif\" font-size=\""
          << size << "\" text-anchor=\"" << anchor << "\"" << extra << ">" << escape(s) << "</text>\n";
  }

  std::string str() const {
    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
        << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(w_)
        << "\" height=\"" << num(h_) << "\" viewBox=\"0 0 " << num(w_) << " " << num(h_) << "\">\n"
        << "<rect x=\"0\" y=\"0\" width=\"" << num(w_) << "\" height=\"" << num(h_)
        << "\" fill=\"white\"/>\n"
        << body_.str() << "</svg>\n";
    return out.str();
  }

 private:
  double w_, h_;
  std::ostringstream body_;
};

struct Frame {
  double x0, x1, y0, y1;  // data ranges
  double left, top, width, height;

  double px(double x) const { return left + (x - x0) / (x1 - x0) * width; }
  double py(double y) const { return top + height - (y - y0) / (y1 - y0) * height; }
};

void draw_axes(Svg& svg, const Frame& f, const std::vector<double>& xticks,
               const std::string& x_label, const std::string& y_label) {
  svg.rect(f.left, f.top, f.width, f.height, "none", " stroke=\"black\"");
  for (double x : xticks) {
    svg.line(f.px(x), f.top + f.height, f.px(x), f.top + f.height + 5, "black");
    svg.text(f.px(x), f.top + f.height + 18, label_num(x), "middle", 10);
  }
  for (int i = 0; i <= 5; ++i) {
    const double y = f.y0 + (f.y1 - f.y0) * i / 5.0;
    svg.line(f.left - 5, f.py(y), f.left, f.py(y), "black");
    svg.text(f.left - 8, f.py(y) + 4, label_num(y), "end", 10);
  }
  svg.text(f.left + f.width / 2, f.top + f.height + 40, x_label);
  const double cy = f.top + f.height / 2;
  svg.text(18, cy, y_label, "middle", 12,
           " transform=\"rotate(-90 18 " + num(cy) + ")\"");
}

// Primary-axis value where predicted delta crosses the bound, by linear
// interpolation between neighbouring points.
std::optional<double> bound_crossing(const std::vector<SweepPoint>& pts) {
  for (std::size_t i = 1; i < pts.size(); ++i) {
    const double a = pts[i - 1].predicted_delta - kDeltaBound;
    const double b = pts[i].predicted_delta - kDeltaBound;
    if (a == 0.0) return pts[i - 1].axis_value;
    if ((a < 0.0) != (b < 0.0)) {
      const double t = a / (a - b);
      return pts[i - 1].axis_value + t * (pts[i].axis_value - pts[i - 1].axis_value);
    }
  }
  return std::nullopt;
}

// White to dark red.
std::string heat(double rate) {
  const double r = std::clamp(rate, 0.0, 1.0);
  const int g = static_cast<int>(std::lround(255.0 * (1.0 - r)));
  const int red = static_cast<int>(std::lround(255.0 - 75.0 * r));
  char buf[16];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", red, g, g);
  return buf;
}

}  // namespace

std::string plot_failure_curve(const SweepResult& result, const std::string& title,
                               const std::string& x_label) {
  std::vector<SweepPoint> pts = result.points;
  std::stable_sort(pts.begin(), pts.end(),
                   [](const SweepPoint& a, const SweepPoint& b) { return a.axis_value < b.axis_value; });
  double lo = pts.front().axis_value;
  double hi = pts.back().axis_value;
  if (hi == lo) {
    lo -= 1.0;
    hi += 1.0;
  }
  const double pad = (hi - lo) * 0.03;
  Frame f{lo - pad, hi + pad, 0.0, 1.0, kLeft, kTop, kWidth - kLeft - kRight, kHeight - kTop - kBottom};

  Svg svg(kWidth, kHeight);
  svg.text(kWidth / 2, 22, title, "middle", 14);
  std::vector<double> ticks;
  for (const auto& p : pts) ticks.push_back(p.axis_value);
  if (ticks.size() > 12) {
    std::vector<double> thinned;
    const std::size_t step = (ticks.size() + 11) / 12;
    for (std::size_t i = 0; i < ticks.size(); i += step) thinned.push_back(ticks[i]);
    ticks = thinned;
  }
  draw_axes(svg, f, ticks, x_label, "failure rate / predicted delta");

  svg.line(f.left, f.py(kDeltaBound), f.left + f.width, f.py(kDeltaBound), "#555555",
           " stroke-dasharray=\"6 4\"");
  svg.text(f.left + f.width - 4, f.py(kDeltaBound) - 4, "1/sqrt(8)", "end", 10);
  if (auto x = bound_crossing(pts)) {
    svg.line(f.px(*x), f.top, f.px(*x), f.top + f.height, "#555555", " stroke-dasharray=\"2 3\"");
  }

  std::vector<std::pair<double, double>> curve;
  for (const auto& p : pts) curve.emplace_back(f.px(p.axis_value), f.py(std::min(p.predicted_delta, 1.0)));
  svg.polyline(curve, "#1f77b4");

  for (const auto& p : pts) {
    const double x = f.px(p.axis_value);
    svg.line(x, f.py(p.ci_low), x, f.py(p.ci_high), "#d62728");
    svg.line(x - 3, f.py(p.ci_low), x + 3, f.py(p.ci_low), "#d62728");
    svg.line(x - 3, f.py(p.ci_high), x + 3, f.py(p.ci_high), "#d62728");
    svg.circle(x, f.py(p.failure_rate), 3, "#d62728");
  }

  svg.circle(f.left + 12, f.top + 12, 3, "#d62728");
  svg.text(f.left + 20, f.top + 16, "observed failure rate (95% CI)", "start", 10);
  svg.line(f.left + 6, f.top + 28, f.left + 18, f.top + 28, "#1f77b4");
  svg.text(f.left + 20, f.top + 32, "predicted delta", "start", 10);
  return svg.str();
}

std::string plot_failure_grid(const SweepResult& result, const std::string& title,
                              const std::string& x_label, const std::string& y_label,
                              std::optional<double> bound_x) {
  std::set<double> xs_set;
  std::set<double> ys_set;
  std::map<std::pair<double, double>, const SweepPoint*> cells;
  for (const auto& p : result.points) {
    const double y = p.secondary_axis_value.value_or(0.0);
    xs_set.insert(p.axis_value);
    ys_set.insert(y);
    cells[{p.axis_value, y}] = &p;
  }
  const std::vector<double> xs(xs_set.begin(), xs_set.end());
  const std::vector<double> ys(ys_set.begin(), ys_set.end());

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  const double cw = plot_w / static_cast<double>(xs.size());
  const double ch = plot_h / static_cast<double>(ys.size());

  Svg svg(kWidth, kHeight);
  svg.text(kWidth / 2, 22, title, "middle", 14);
  for (std::size_t i = 0; i < xs.size(); ++i) {
    for (std::size_t k = 0; k < ys.size(); ++k) {
      const double x = kLeft + cw * static_cast<double>(i);
      const double y = kTop + plot_h - ch * static_cast<double>(k + 1);
      auto it = cells.find({xs[i], ys[k]});
      if (it == cells.end()) {
        svg.rect(x, y, cw, ch, "#dddddd", " stroke=\"white\"");
        continue;
      }
      const double rate = it->second->failure_rate;
      svg.rect(x, y, cw, ch, heat(rate), " stroke=\"white\"");
      char buf[16];
      std::snprintf(buf, sizeof buf, "%.2f", rate);
      svg.text(x + cw / 2, y + ch / 2 + 4, buf, "middle", 9, rate > 0.6 ? " fill=\"white\"" : "");
    }
    if (xs.size() <= 16 || i % 2 == 0) {
      svg.text(kLeft + cw * (static_cast<double>(i) + 0.5), kTop + plot_h + 16, label_num(xs[i]), "middle", 10);
    }
  }
  for (std::size_t k = 0; k < ys.size(); ++k) {
    svg.text(kLeft - 8, kTop + plot_h - ch * (static_cast<double>(k) + 0.5) + 4, label_num(ys[k]), "end", 10);
  }
  svg.rect(kLeft, kTop, plot_w, plot_h, "none", " stroke=\"black\"");
  svg.text(kLeft + plot_w / 2, kTop + plot_h + 40, x_label);
  const double cy = kTop + plot_h / 2;
  svg.text(18, cy, y_label, "middle", 12, " transform=\"rotate(-90 18 " + num(cy) + ")\"");

  // Marker position interpolated over cell centres.
  if (bound_x && xs.size() > 1 && *bound_x >= xs.front() && *bound_x <= xs.back()) {
    const auto hi = std::lower_bound(xs.begin(), xs.end(), *bound_x);
    const std::size_t i = static_cast<std::size_t>(hi - xs.begin());
    double pos = static_cast<double>(i);
    if (i > 0 && xs[i] != *bound_x) {
      pos = static_cast<double>(i - 1) + (*bound_x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    }
    const double x = kLeft + cw * (pos + 0.5);
    svg.line(x, kTop, x, kTop + plot_h, "#1f77b4", " stroke-width=\"2\" stroke-dasharray=\"6 4\"");
    svg.text(x + 4, kTop - 4, "delta = 1/sqrt(8)", "start", 10);
  }
  return svg.str();
}

std::string plot_histograms(const std::vector<HistogramPanel>& panels, const std::string& title) {
  constexpr double kPanelH = 150;
  const double height = kTop + kPanelH * static_cast<double>(panels.size()) + 30;
  Svg svg(kWidth, height);
  svg.text(kWidth / 2, 22, title, "middle", 14);

  for (std::size_t p = 0; p < panels.size(); ++p) {
    const EstimateHistogram& h = panels[p].histogram;
    std::uint64_t peak = 1;
    for (auto c : h.counts) peak = std::max(peak, c);
    Frame f{h.range_low, h.range_high, 0.0, static_cast<double>(peak),
            kLeft, kTop + kPanelH * static_cast<double>(p), kWidth - kLeft - kRight, kPanelH - 40};
    svg.rect(f.left, f.top, f.width, f.height, "none", " stroke=\"black\"");
    const double bw = f.width / static_cast<double>(h.counts.size());
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
      if (h.counts[b] == 0) continue;
      const double top = f.py(static_cast<double>(h.counts[b]));
      svg.rect(f.left + bw * static_cast<double>(b), top, bw, f.top + f.height - top, "#1f77b4");
    }
    for (double x : {h.bound_low, h.bound_high}) {
      if (x < h.range_low || x > h.range_high) continue;
      svg.line(f.px(x), f.top, f.px(x), f.top + f.height, "#d62728", " stroke-dasharray=\"5 3\"");
    }
    svg.text(f.left + 6, f.top + 14, panels[p].label, "start", 11);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%llu / %llu failed",
                  static_cast<unsigned long long>(h.failures), static_cast<unsigned long long>(h.total));
    svg.text(f.left + f.width - 6, f.top + 14, buf, "end", 11);
    svg.text(f.left, f.top + f.height + 14, label_num(h.range_low), "start", 10);
    svg.text(f.left + f.width, f.top + f.height + 14, label_num(h.range_high), "end", 10);
    svg.text(f.left - 8, f.top + 10, std::to_string(peak), "end", 10);
  }
  svg.text(kWidth / 2, height - 8, "theta estimate (rad)");
  return svg.str();
}

}  // namespace rpe::cli
