#include <algorithm>
#include <cmath>
#include <sstream>

#include "role_engine/io.hpp"
#include "role_engine/render.hpp"

namespace role_engine {

namespace {

constexpr double kPixelsPerCell = 6.0;

const char* const kPalette[] = {"#d62728", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};

struct Canvas {
    std::ostringstream svg;
    double scale = 1.0; // pixels per meter

    std::string px(double meters) const { return format_number(meters * scale); }

    void open(const OccupancyGrid& grid) {
        scale = kPixelsPerCell / grid.resolution();
        const double w = grid.width() * kPixelsPerCell;
        const double h = grid.height() * kPixelsPerCell;
        svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << format_number(w) << "\" height=\""
            << format_number(h) << "\" viewBox=\"0 0 " << format_number(w) << ' ' << format_number(h) << "\">\n";
        svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<g fill=\"#555555\">\n";
        // One rectangle per horizontal run of occupied cells keeps the file small.
        for (int r = 0; r < grid.height(); ++r) {
            int c = 0;
            while (c < grid.width()) {
                if (!grid.occupied(c, r)) {
                    ++c;
                    continue;
                }
                const int start = c;
                while (c < grid.width() && grid.occupied(c, r))
                    ++c;
                svg << "<rect x=\"" << format_number(start * kPixelsPerCell) << "\" y=\""
                    << format_number(r * kPixelsPerCell) << "\" width=\""
                    << format_number((c - start) * kPixelsPerCell) << "\" height=\"" << format_number(kPixelsPerCell)
                    << "\"/>\n";
            }
        }
        svg << "</g>\n";
    }

    void marker(Vec2 p, const char* color, double radius_px) {
        svg << "<circle cx=\"" << px(p.x()) << "\" cy=\"" << px(p.y()) << "\" r=\"" << format_number(radius_px)
            << "\" fill=\"" << color << "\"/>\n";
    }

    void polyline(const std::vector<Vec2>& points, const char* color) {
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < points.size(); ++i)
            svg << (i ? " " : "") << px(points[i].x()) << ',' << px(points[i].y());
        svg << "\"/>\n";
    }

    std::string close() {
        svg << "</svg>\n";
        return svg.str();
    }
};

} // namespace

std::string render_plan_svg(const OccupancyGrid& grid, const std::vector<Vec2>& sources,
                            const std::vector<Vec2>& destinations, const std::vector<ProcessRole>& roles) {
    Canvas c;
    c.open(grid);
    for (std::size_t i = 0; i < roles.size(); ++i) {
        std::vector<Vec2> pts;
        for (std::size_t k = 0; k < roles[i].states.size(); ++k)
            pts.push_back(roles[i].position(k));
        c.polyline(pts, kPalette[i % std::size(kPalette)]);
    }
    for (const Vec2& s : sources)
        c.marker(s, "#2ca02c", 5.0);
    for (const Vec2& d : destinations)
        c.marker(d, "#1f77b4", 5.0);
    return c.close();
}

std::string render_trace_svg(const OccupancyGrid& grid, const std::vector<Vec2>& destinations,
                             const SimulationTrace& trace) {
    Canvas c;
    c.open(grid);
    for (const Vec2& d : destinations)
        c.marker(d, "#1f77b4", 5.0);
    const double duration = std::max(1.0, trace.dt * static_cast<double>(trace.executed.size()));
    for (std::size_t a = 0; a < trace.agent_ids.size(); ++a) {
        std::vector<Vec2> pts;
        for (const auto& frame : trace.executed)
            pts.push_back(frame[a].head<2>());
        if (pts.empty())
            continue;
        const char* color = kPalette[a % std::size(kPalette)];
        c.polyline(pts, color);
        c.marker(pts.front(), "#2ca02c", 4.0);
        std::ostringstream xs, ys;
        for (std::size_t i = 0; i < pts.size(); ++i) {
            xs << (i ? ";" : "") << c.px(pts[i].x());
            ys << (i ? ";" : "") << c.px(pts[i].y());
        }
        c.svg << "<circle r=\"" << c.px(trace.radii[a]) << "\" fill=\"" << color << "\" fill-opacity=\"0.6\">"
              << "<animate attributeName=\"cx\" dur=\"" << format_number(duration) << "s\" values=\"" << xs.str()
              << "\" fill=\"freeze\"/>"
              << "<animate attributeName=\"cy\" dur=\"" << format_number(duration) << "s\" values=\"" << ys.str()
              << "\" fill=\"freeze\"/></circle>\n";
    }
    return c.close();
}

GrayImage sdf_heat_image(const SignedDistanceField& sdf) {
    GrayImage img;
    img.width = sdf.width();
    img.height = sdf.height();
    img.pixels.resize(static_cast<std::size_t>(img.width) * img.height);
    if (sdf.values().empty())
        return img;
    const auto [lo, hi] = std::minmax_element(sdf.values().begin(), sdf.values().end());
    const double span = *hi > *lo ? *hi - *lo : 1.0;
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * (sdf.values()[i] - *lo) / span));
    return img;
}

} // namespace role_engine
