// SPDX-License-Identifier: Apache-2.0
//
// beamsel: analog beam selection toolkit for THz beamspace MIMO
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include "beamsel/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace beamsel::plot
{
    namespace
    {
        constexpr double width = 640, height = 420;
        constexpr double left = 70, right = 170, top = 40, bottom = 55;

        const char *palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
                                 "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

        std::string num(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.2f", v);
            return buf;
        }

        std::string tick(double v)
        {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%g", std::abs(v) < 1e-12 ? 0.0 : v);
            return buf;
        }

        // Round step of roughly span / 5.
        double nice_step(double span)
        {
            if (!(span > 0))
                return 1.0;
            const double raw = span / 5.0;
            const double mag = std::pow(10.0, std::floor(std::log10(raw)));
            const double f = raw / mag;
            return (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
        }

        struct Axis
        {
            double lo = 0, hi = 1;
            double map(double v, double a, double b) const { return a + (v - lo) / (hi - lo) * (b - a); }
        };

        Axis make_axis(double lo, double hi, bool from_zero)
        {
            if (from_zero)
                lo = std::min(lo, 0.0);
            if (!(hi > lo))
                hi = lo + 1.0;
            const double step = nice_step(hi - lo);
            return {std::floor(lo / step) * step, std::ceil(hi / step) * step};
        }

        void header(std::ostringstream &o, const std::string &title)
        {
            o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
              << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
              << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
              << "<text x=\"" << num(width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
              << escape_xml(title) << "</text>\n";
        }

        void y_axis(std::ostringstream &o, const Axis &ay, const std::string &label)
        {
            const double step = nice_step(ay.hi - ay.lo);
            for (double v = ay.lo; v <= ay.hi + step * 1e-9; v += step)
            {
                const double y = ay.map(v, height - bottom, top);
                o << "<line x1=\"" << left << "\" x2=\"" << width - right << "\" y1=\"" << num(y) << "\" y2=\""
                  << num(y) << "\" stroke=\"#e0e0e0\"/>\n"
                  << "<text x=\"" << left - 6 << "\" y=\"" << num(y + 4) << "\" text-anchor=\"end\">" << tick(v)
                  << "</text>\n";
            }
            o << "<text transform=\"translate(18," << num((top + height - bottom) / 2)
              << ") rotate(-90)\" text-anchor=\"middle\">" << escape_xml(label) << "</text>\n"
              << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << width - left - right << "\" height=\""
              << height - top - bottom << "\" fill=\"none\" stroke=\"black\"/>\n";
        }
    }

    std::string escape_xml(const std::string &s)
    {
        std::string out;
        for (char c : s)
            switch (c)
            {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
            }
        return out;
    }

    std::string line_chart(const std::string &title, const std::string &x_label, const std::string &y_label,
                           const std::vector<Series> &series)
    {
        double xlo = std::numeric_limits<double>::infinity(), xhi = -xlo, ylo = xlo, yhi = -xlo;
        for (const auto &s : series)
            for (std::size_t i = 0; i < s.x.size(); ++i)
            {
                const double e = s.err.empty() ? 0.0 : s.err[i];
                xlo = std::min(xlo, s.x[i]);
                xhi = std::max(xhi, s.x[i]);
                ylo = std::min(ylo, s.y[i] - e);
                yhi = std::max(yhi, s.y[i] + e);
            }
        if (!std::isfinite(xlo))
            xlo = 0, xhi = 1, ylo = 0, yhi = 1;
        const Axis ax{xlo, xhi > xlo ? xhi : xlo + 1.0};
        const Axis ay = make_axis(ylo, yhi, true);

        std::ostringstream o;
        header(o, title);
        y_axis(o, ay, y_label);
        const double xstep = nice_step(ax.hi - ax.lo);
        for (double v = std::ceil(ax.lo / xstep) * xstep; v <= ax.hi + xstep * 1e-9; v += xstep)
            o << "<text x=\"" << num(ax.map(v, left, width - right)) << "\" y=\"" << height - bottom + 16
              << "\" text-anchor=\"middle\">" << tick(v) << "</text>\n";
        o << "<text x=\"" << num((left + width - right) / 2) << "\" y=\"" << height - 14
          << "\" text-anchor=\"middle\">" << escape_xml(x_label) << "</text>\n";

        for (std::size_t k = 0; k < series.size(); ++k)
        {
            const auto &s = series[k];
            const char *colour = palette[k % std::size(palette)];
            o << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.8\" points=\"";
            for (std::size_t i = 0; i < s.x.size(); ++i)
                o << num(ax.map(s.x[i], left, width - right)) << ',' << num(ay.map(s.y[i], height - bottom, top))
                  << ' ';
            o << "\"/>\n";
            for (std::size_t i = 0; i < s.x.size(); ++i)
            {
                const double px = ax.map(s.x[i], left, width - right);
                if (!s.err.empty() && s.err[i] > 0)
                    o << "<line x1=\"" << num(px) << "\" x2=\"" << num(px) << "\" y1=\""
                      << num(ay.map(s.y[i] - s.err[i], height - bottom, top)) << "\" y2=\""
                      << num(ay.map(s.y[i] + s.err[i], height - bottom, top)) << "\" stroke=\"" << colour
                      << "\"/>\n";
                o << "<circle cx=\"" << num(px) << "\" cy=\"" << num(ay.map(s.y[i], height - bottom, top))
                  << "\" r=\"3\" fill=\"" << colour << "\"/>\n";
            }
            const double ly = top + 10 + 18.0 * static_cast<double>(k);
            o << "<line x1=\"" << width - right + 12 << "\" x2=\"" << width - right + 36 << "\" y1=\"" << num(ly)
              << "\" y2=\"" << num(ly) << "\" stroke=\"" << colour << "\" stroke-width=\"2\"/>\n"
              << "<text x=\"" << width - right + 42 << "\" y=\"" << num(ly + 4) << "\">" << escape_xml(s.name)
              << "</text>\n";
        }
        o << "</svg>\n";
        return o.str();
    }

    std::string bar_chart(const std::string &title, const std::string &y_label, const std::vector<Bar> &bars)
    {
        double hi = 0.0;
        for (const auto &b : bars)
            hi = std::max(hi, b.value + b.err);
        const Axis ay = make_axis(0.0, hi, true);

        std::ostringstream o;
        header(o, title);
        y_axis(o, ay, y_label);
        const double slot = (width - left - right) / static_cast<double>(std::max<std::size_t>(bars.size(), 1));
        for (std::size_t i = 0; i < bars.size(); ++i)
        {
            const auto &b = bars[i];
            const double x0 = left + slot * (static_cast<double>(i) + 0.15);
            const double y = ay.map(b.value, height - bottom, top);
            o << "<rect x=\"" << num(x0) << "\" y=\"" << num(y) << "\" width=\"" << num(slot * 0.7) << "\" height=\""
              << num(height - bottom - y) << "\" fill=\"" << palette[i % std::size(palette)] << "\"/>\n";
            if (b.err > 0)
            {
                const double cx = x0 + slot * 0.35;
                o << "<line x1=\"" << num(cx) << "\" x2=\"" << num(cx) << "\" y1=\""
                  << num(ay.map(b.value - b.err, height - bottom, top)) << "\" y2=\""
                  << num(ay.map(b.value + b.err, height - bottom, top)) << "\" stroke=\"black\"/>\n";
            }
            o << "<text x=\"" << num(x0 + slot * 0.35) << "\" y=\"" << height - bottom + 16
              << "\" text-anchor=\"middle\">" << escape_xml(b.label) << "</text>\n"
              << "<text x=\"" << num(x0 + slot * 0.35) << "\" y=\"" << num(y - 4) << "\" text-anchor=\"middle\">"
              << num(b.value) << "</text>\n";
        }
        o << "</svg>\n";
        return o.str();
    }

    std::string heatmap(const std::string &title, const std::vector<std::string> &row_labels,
                        const std::vector<std::string> &col_labels, const std::vector<std::vector<double>> &values)
    {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto &r : values)
            for (double v : r)
                if (std::isfinite(v))
                    lo = std::min(lo, v), hi = std::max(hi, v);
        const double span = hi > lo ? hi - lo : 1.0;

        std::ostringstream o;
        header(o, title);
        const double cw = (width - 2 * left) / static_cast<double>(std::max<std::size_t>(col_labels.size(), 1));
        const double ch = (height - top - bottom - 30) / static_cast<double>(std::max<std::size_t>(row_labels.size(), 1));
        for (std::size_t c = 0; c < col_labels.size(); ++c)
            o << "<text x=\"" << num(left + 40 + cw * (static_cast<double>(c) + 0.5)) << "\" y=\"" << top + 20
              << "\" text-anchor=\"middle\">" << escape_xml(col_labels[c]) << "</text>\n";
        for (std::size_t r = 0; r < row_labels.size(); ++r)
        {
            const double y0 = top + 30 + ch * static_cast<double>(r);
            o << "<text x=\"" << left + 30 << "\" y=\"" << num(y0 + ch / 2 + 4) << "\" text-anchor=\"end\">"
              << escape_xml(row_labels[r]) << "</text>\n";
            for (std::size_t c = 0; c < col_labels.size(); ++c)
            {
                const double v = r < values.size() && c < values[r].size()
                                     ? values[r][c]
                                     : std::numeric_limits<double>::quiet_NaN();
                const double t = std::isfinite(v) ? (v - lo) / span : 0.0;
                const int shade = static_cast<int>(235 - 120 * t);
                o << "<rect x=\"" << num(left + 40 + cw * static_cast<double>(c)) << "\" y=\"" << num(y0)
                  << "\" width=\"" << num(cw - 2) << "\" height=\"" << num(ch - 2) << "\" fill=\"rgb(" << shade << ','
                  << shade << ",255)\"/>\n"
                  << "<text x=\"" << num(left + 40 + cw * (static_cast<double>(c) + 0.5)) << "\" y=\""
                  << num(y0 + ch / 2 + 4) << "\" text-anchor=\"middle\">"
                  << (std::isfinite(v) ? num(100.0 * v) + "%" : std::string("n/a")) << "</text>\n";
            }
        }
        o << "</svg>\n";
        return o.str();
    }
}
