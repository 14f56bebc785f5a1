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

#include "beamsel/common.hpp"

namespace beamsel
{
    const char *to_string(ErrorKind kind)
    {
        switch (kind)
        {
        case ErrorKind::invalid_argument:
            return "invalid argument";
        case ErrorKind::degenerate_channel:
            return "degenerate channel";
        case ErrorKind::invalid_selection:
            return "invalid selection";
        case ErrorKind::budget_exceeded:
            return "budget exceeded";
        case ErrorKind::component_collapse:
            return "component collapse";
        case ErrorKind::training_diverged:
            return "training diverged";
        case ErrorKind::ensemble_failed:
            return "ensemble failed";
        case ErrorKind::io:
            return "i/o error";
        case ErrorKind::config:
            return "config error";
        }
        return "error";
    }

    std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
    {
        std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * (stream + 1);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }
}
