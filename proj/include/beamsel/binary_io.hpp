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

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "beamsel/common.hpp"

// Little-endian record helpers shared by every binary format in the toolkit.
namespace beamsel::binio
{
    static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

    template <typename T>
    void put(std::ostream &out, T value)
    {
        static_assert(std::is_trivially_copyable_v<T>);
        out.write(reinterpret_cast<const char *>(&value), sizeof(T));
    }

    template <typename T>
    T get(std::istream &in)
    {
        static_assert(std::is_trivially_copyable_v<T>);
        T value{};
        in.read(reinterpret_cast<char *>(&value), sizeof(T));
        if (!in)
            throw Error(ErrorKind::io, "truncated record");
        return value;
    }

    inline void put_magic(std::ostream &out, std::string_view magic)
    {
        out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
    }

    inline void expect_magic(std::istream &in, std::string_view magic)
    {
        std::array<char, 4> buf{};
        in.read(buf.data(), 4);
        if (!in || std::string_view(buf.data(), 4) != magic)
            throw Error(ErrorKind::io, "bad magic, expected \"" + std::string(magic) + "\"");
    }

    inline void put_string(std::ostream &out, const std::string &s)
    {
        put<std::uint64_t>(out, s.size());
        out.write(s.data(), static_cast<std::streamsize>(s.size()));
    }

    inline std::string get_string(std::istream &in)
    {
        const auto n = get<std::uint64_t>(in);
        std::string s(n, '\0');
        in.read(s.data(), static_cast<std::streamsize>(n));
        if (!in)
            throw Error(ErrorKind::io, "truncated string");
        return s;
    }
}
