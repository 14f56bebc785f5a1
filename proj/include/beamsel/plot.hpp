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

#pragma once

#include <string>
#include <vector>

namespace beamsel::plot
{
    struct Series
    {
        std::string name;
        std::vector<double> x;
        std::vector<double> y;
        std::vector<double> err; // optional +-band, same length as y or empty
    };

    struct Bar
    {
        std::string label;
        double value = 0.0;
        double err = 0.0;
    };

    /// Minimal SVG line chart with markers, error bars and a legend.
    std::string line_chart(const std::string &title, const std::string &x_label, const std::string &y_label,
                           const std::vector<Series> &series);

    /// Vertical bar chart.
    std::string bar_chart(const std::string &title, const std::string &y_label, const std::vector<Bar> &bars);

    /// Grid of labelled cells shaded by value (rows x cols).
    std::string heatmap(const std::string &title, const std::vector<std::string> &row_labels,
                        const std::vector<std::string> &col_labels, const std::vector<std::vector<double>> &values);

    std::string escape_xml(const std::string &s);
}
