#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "dtrl/errors.hpp"

namespace dtrl {

// Native SVG scatter plot of accuracy against decision-node count, one marker
// per sweep row, colored per zeta, with the Pareto front drawn as a polyline.
// Fixed 800x600 canvas, no plotting dependency.
struct ScatterPoint {
    double nodes = 0.0;
    double accuracy = 0.0;
    double zeta = 0.0;
    bool pareto = false;
};

inline void write_scatter_svg(const std::vector<ScatterPoint>& pts, const std::string& title,
                              const std::string& path) {
    const double W = 800, H = 600;
    const double ml = 70, mr = 170, mt = 50, mb = 60; // margins; legend on the right
    const double pw = W - ml - mr, ph = H - mt - mb;

    double max_nodes = 1.0;
    for (const auto& p : pts) max_nodes = std::max(max_nodes, p.nodes);
    max_nodes = std::ceil(max_nodes + 0.5);

    auto sx = [&](double nodes) { return ml + pw * nodes / max_nodes; };
    auto sy = [&](double acc) { return mt + ph * (1.0 - acc); };

    std::vector<double> zetas;
    for (const auto& p : pts)
        if (std::find(zetas.begin(), zetas.end(), p.zeta) == zetas.end()) zetas.push_back(p.zeta);
    std::sort(zetas.begin(), zetas.end());
    static const char* palette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
    auto color_of = [&](double z) {
        auto it = std::find(zetas.begin(), zetas.end(), z);
        return palette[(it - zetas.begin()) % 8];
    };

    std::ofstream out(path);
    if (!out) throw IoError("cannot write svg file: " + path);
    char buf[256];
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" "
           "viewBox=\"0 0 800 600\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"800\" height=\"600\" fill=\"white\"/>\n";
    out << "<text x=\"" << W / 2 << "\" y=\"28\" text-anchor=\"middle\" font-size=\"18\" "
           "font-family=\"sans-serif\">"
        << title << "</text>\n";

    // axes
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", ml,
                  mt + ph, ml + pw, mt + ph);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", ml, mt,
                  ml, mt + ph);
    out << buf;
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << H - 14
        << "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\">decision nodes"
           "</text>\n";
    out << "<text x=\"18\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-size=\"14\" font-family=\"sans-serif\" transform=\"rotate(-90 "
           "18 "
        << mt + ph / 2 << ")\">accuracy</text>\n";

    // ticks
    int xstep = max_nodes > 20 ? static_cast<int>(max_nodes / 10) : 1;
    for (int nodes = 0; nodes <= static_cast<int>(max_nodes); nodes += xstep) {
        double x = sx(nodes);
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n", x,
                      mt + ph, x, mt + ph + 5);
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"middle\" font-size=\"12\" "
                      "font-family=\"sans-serif\">%d</text>\n",
                      x, mt + ph + 20, nodes);
        out << buf;
    }
    for (int i = 0; i <= 10; i += 2) {
        double acc = i / 10.0;
        double y = sy(acc);
        std::snprintf(buf, sizeof buf,
                      "<line x1=\"%.1f\" y1=\"%.1f\" x2=\"%.1f\" y2=\"%.1f\" stroke=\"black\"/>\n",
                      ml - 5, y, ml, y);
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" text-anchor=\"end\" font-size=\"12\" "
                      "font-family=\"sans-serif\">%.1f</text>\n",
                      ml - 9, y + 4, acc);
        out << buf;
    }

    // pareto front polyline (sorted by node count)
    std::vector<ScatterPoint> front;
    for (const auto& p : pts)
        if (p.pareto) front.push_back(p);
    std::sort(front.begin(), front.end(), [](const ScatterPoint& a, const ScatterPoint& b) {
        return a.nodes != b.nodes ? a.nodes < b.nodes : a.accuracy < b.accuracy;
    });
    out << "<polyline fill=\"none\" stroke=\"#444444\" stroke-dasharray=\"5,4\" points=\"";
    for (const auto& p : front) {
        std::snprintf(buf, sizeof buf, "%.1f,%.1f ", sx(p.nodes), sy(p.accuracy));
        out << buf;
    }
    out << "\"/>\n";

    for (const auto& p : pts) {
        std::snprintf(buf, sizeof buf,
                      "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"%d\" fill=\"%s\" fill-opacity=\"0.8\" "
                      "stroke=\"%s\"/>\n",
                      sx(p.nodes), sy(p.accuracy), p.pareto ? 6 : 4, color_of(p.zeta),
                      p.pareto ? "black" : "none");
        out << buf;
    }

    // legend
    double ly = mt + 10;
    out << "<text x=\"" << W - mr + 20 << "\" y=\"" << ly
        << "\" font-size=\"13\" font-family=\"sans-serif\">zeta</text>\n";
    for (double z : zetas) {
        ly += 20;
        std::snprintf(buf, sizeof buf, "<circle cx=\"%.1f\" cy=\"%.1f\" r=\"5\" fill=\"%s\"/>\n",
                      W - mr + 26, ly - 4, color_of(z));
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%.1f\" font-size=\"13\" font-family=\"sans-serif\">%g</text>\n",
                      W - mr + 38, ly, z);
        out << buf;
    }
    out << "</svg>\n";
    if (!out) throw IoError("write failed: " + path);
}

} // namespace dtrl
