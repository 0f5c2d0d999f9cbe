#include "groupnav/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "groupnav/geometry.hpp"

namespace groupnav::svg {

namespace {

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.7g", v);
    return buf;
}

std::string escape_xml(const std::string& s) {
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

struct Bounds {
    double lo = 0.0;
    double hi = 1.0;
    bool seen = false;
    void add(double v) {
        if (!std::isfinite(v)) return;
        if (!seen) {
            lo = hi = v;
            seen = true;
        } else {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    }
    void pad() {
        if (!seen) return;
        if (hi == lo) {
            lo -= 1.0;
            hi += 1.0;
        } else {
            const double margin = 0.05 * (hi - lo);
            lo -= margin;
            hi += margin;
        }
    }
};

// round tick spacing to 1/2/5 x 10^k
std::vector<double> ticks(double lo, double hi, int target = 6) {
    std::vector<double> out;
    const double span = hi - lo;
    if (!(span > 0.0) || !std::isfinite(span)) return out;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    if (raw / mag > 5.0)
        step = 10.0 * mag;
    else if (raw / mag > 2.0)
        step = 5.0 * mag;
    else if (raw / mag > 1.0)
        step = 2.0 * mag;
    const double start = std::ceil(lo / step) * step;
    for (double v = start; v <= hi + 1e-9 * span; v += step) out.push_back(v);
    return out;
}

}  // namespace

std::string line_chart(const std::vector<Series>& series, const std::string& title,
                       const std::string& x_label, const std::string& y_label) {
    if (series.empty()) throw std::invalid_argument("line_chart: no series");
    constexpr double kWidth = 860, kHeight = 540;
    constexpr double kLeft = 72, kRight = 24, kTop = 48, kBottom = 56;
    const double plot_w = kWidth - kLeft - kRight;
    const double plot_h = kHeight - kTop - kBottom;

    Bounds bx, by;
    for (const Series& s : series) {
        if (s.x.size() != s.y.size())
            throw std::invalid_argument("line_chart: series length mismatch");
        for (double v : s.x) bx.add(v);
        for (double v : s.y) by.add(v);
    }
    if (!bx.seen || !by.seen) throw std::invalid_argument("line_chart: no points");
    bx.pad();
    by.pad();

    auto px = [&](double v) { return kLeft + (v - bx.lo) / (bx.hi - bx.lo) * plot_w; };
    auto py = [&](double v) { return kTop + plot_h - (v - by.lo) / (by.hi - by.lo) * plot_h; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
       << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"26\" text-anchor=\"middle\" font-size=\"17\">"
       << escape_xml(title) << "</text>\n";

    for (double t : ticks(bx.lo, bx.hi)) {
        const double x = px(t);
        os << "<line x1=\"" << num(x) << "\" y1=\"" << kTop << "\" x2=\"" << num(x) << "\" y2=\""
           << kTop + plot_h << "\" stroke=\"#e0e0e0\"/>\n";
        os << "<text x=\"" << num(x) << "\" y=\"" << kTop + plot_h + 20
           << "\" text-anchor=\"middle\" font-size=\"12\">" << num(t) << "</text>\n";
    }
    for (double t : ticks(by.lo, by.hi)) {
        const double y = py(t);
        os << "<line x1=\"" << kLeft << "\" y1=\"" << num(y) << "\" x2=\"" << kLeft + plot_w
           << "\" y2=\"" << num(y) << "\" stroke=\"#e0e0e0\"/>\n";
        os << "<text x=\"" << kLeft - 8 << "\" y=\"" << num(y + 4)
           << "\" text-anchor=\"end\" font-size=\"12\">" << num(t) << "</text>\n";
    }
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << plot_w << "\" height=\""
       << plot_h << "\" fill=\"none\" stroke=\"#404040\"/>\n";
    os << "<text x=\"" << kLeft + plot_w / 2 << "\" y=\"" << kHeight - 12
       << "\" text-anchor=\"middle\" font-size=\"14\">" << escape_xml(x_label) << "</text>\n";
    os << "<text x=\"20\" y=\"" << kTop + plot_h / 2
       << "\" text-anchor=\"middle\" font-size=\"14\" transform=\"rotate(-90 20 "
       << kTop + plot_h / 2 << ")\">" << escape_xml(y_label) << "</text>\n";

    for (size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % kPaletteSize];
        std::ostringstream points;
        bool open = false;
        auto flush = [&]() {
            if (open) {
                os << "<polyline fill=\"none\" stroke=\"" << color
                   << "\" stroke-width=\"1.8\" points=\"" << points.str() << "\"/>\n";
                points.str("");
                open = false;
            }
        };
        for (size_t i = 0; i < series[s].x.size(); ++i) {
            const double vx = series[s].x[i];
            const double vy = series[s].y[i];
            if (!std::isfinite(vx) || !std::isfinite(vy)) {
                flush();
                continue;
            }
            points << num(px(vx)) << ',' << num(py(vy)) << ' ';
            open = true;
        }
        flush();
        if (!series[s].label.empty()) {
            const double ly = kTop + 16 + 18 * static_cast<double>(s);
            os << "<line x1=\"" << kLeft + plot_w - 150 << "\" y1=\"" << ly - 4 << "\" x2=\""
               << kLeft + plot_w - 122 << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color
               << "\" stroke-width=\"2\"/>\n";
            os << "<text x=\"" << kLeft + plot_w - 116 << "\" y=\"" << ly
               << "\" font-size=\"12\">" << escape_xml(series[s].label) << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

std::string trajectory_plot(const std::vector<io::TrajectoryRecord>& records,
                            const std::string& title) {
    if (records.empty()) throw std::invalid_argument("trajectory_plot: empty log");
    constexpr double kSize = 720, kTop = 48, kMargin = 36;

    Bounds bx, by;
    for (const io::TrajectoryRecord& rec : records) {
        bx.add(rec.robot.position.x);
        by.add(rec.robot.position.y);
        bx.add(rec.robot.goal.x);
        by.add(rec.robot.goal.y);
        for (const env::PedestrianView& p : rec.pedestrians) {
            bx.add(p.position.x);
            by.add(p.position.y);
        }
    }
    bx.pad();
    by.pad();
    const double span = std::max(bx.hi - bx.lo, by.hi - by.lo);
    const double cx = 0.5 * (bx.lo + bx.hi);
    const double cy = 0.5 * (by.lo + by.hi);
    const double plot = kSize - 2 * kMargin;
    const double scale = plot / span;
    auto px = [&](double v) { return kSize / 2 + (v - cx) * scale; };
    auto py = [&](double v) { return kTop + kMargin + plot / 2 - (v - cy) * scale; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kSize << ' '
       << kSize + kTop << "\" font-family=\"sans-serif\">\n";
    os << "<rect width=\"" << kSize << "\" height=\"" << kSize + kTop
       << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << kSize / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"17\">"
       << escape_xml(title) << "</text>\n";

    // the crossing circle, inferred from the robot's start
    const double arena = records.front().robot.position.norm();
    if (arena > 0.0)
        os << "<circle cx=\"" << num(px(0)) << "\" cy=\"" << num(py(0)) << "\" r=\""
           << num(arena * scale)
           << "\" fill=\"none\" stroke=\"#c8c8c8\" stroke-dasharray=\"6 5\"/>\n";

    const size_t n_peds = records.front().pedestrians.size();
    const size_t stride = std::max<size_t>(1, records.size() / 8);

    // group hull snapshots
    for (size_t t = 0; t < records.size(); t += stride) {
        const io::TrajectoryRecord& rec = records[t];
        int n_groups = 0;
        for (int g : rec.groups) n_groups = std::max(n_groups, g + 1);
        for (int g = 0; g < n_groups; ++g) {
            std::vector<geom::Vec2> members;
            for (size_t i = 0; i < rec.pedestrians.size(); ++i)
                if (rec.groups[i] == g) members.push_back(rec.pedestrians[i].position);
            if (members.size() < 2) continue;
            const geom::Polygon hull = geom::convex_hull(members);
            if (hull.vertices.size() < 2) continue;
            os << "<polygon fill=\"" << kPalette[g % kPaletteSize]
               << "\" fill-opacity=\"0.08\" stroke=\"" << kPalette[g % kPaletteSize]
               << "\" stroke-opacity=\"0.35\" points=\"";
            for (const geom::Vec2& v : hull.vertices)
                os << num(px(v.x)) << ',' << num(py(v.y)) << ' ';
            os << "\"/>\n";
        }
        for (size_t i = 0; i < rec.pedestrians.size(); ++i)
            os << "<circle cx=\"" << num(px(rec.pedestrians[i].position.x)) << "\" cy=\""
               << num(py(rec.pedestrians[i].position.y)) << "\" r=\"2.4\" fill=\""
               << kPalette[static_cast<size_t>(rec.groups[i]) % kPaletteSize]
               << "\" fill-opacity=\"0.5\"/>\n";
    }

    // pedestrian paths
    for (size_t i = 0; i < n_peds; ++i) {
        os << "<polyline fill=\"none\" stroke=\""
           << kPalette[static_cast<size_t>(records.front().groups[i]) % kPaletteSize]
           << "\" stroke-opacity=\"0.45\" stroke-width=\"1\" points=\"";
        for (const io::TrajectoryRecord& rec : records)
            if (i < rec.pedestrians.size())
                os << num(px(rec.pedestrians[i].position.x)) << ','
                   << num(py(rec.pedestrians[i].position.y)) << ' ';
        os << "\"/>\n";
    }

    // robot path on top
    os << "<polyline fill=\"none\" stroke=\"#111111\" stroke-width=\"2.4\" points=\"";
    for (const io::TrajectoryRecord& rec : records)
        os << num(px(rec.robot.position.x)) << ',' << num(py(rec.robot.position.y)) << ' ';
    os << "\"/>\n";
    const io::TrajectoryRecord& first = records.front();
    const io::TrajectoryRecord& last = records.back();
    os << "<circle cx=\"" << num(px(first.robot.position.x)) << "\" cy=\""
       << num(py(first.robot.position.y)) << "\" r=\"5\" fill=\"#111111\"/>\n";
    os << "<circle cx=\"" << num(px(last.robot.goal.x)) << "\" cy=\""
       << num(py(last.robot.goal.y))
       << "\" r=\"6\" fill=\"none\" stroke=\"#111111\" stroke-width=\"2\"/>\n";
    os << "<circle cx=\"" << num(px(last.robot.goal.x)) << "\" cy=\""
       << num(py(last.robot.goal.y)) << "\" r=\"1.6\" fill=\"#111111\"/>\n";
    os << "</svg>\n";
    return os.str();
}

}  // namespace groupnav::svg
