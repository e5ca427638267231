// Copyright 2026 The ivphard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef IVPHARD_REAL_NAME_HPP
#define IVPHARD_REAL_NAME_HPP

#include <cstdint>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "ivphard/dyadic.hpp"
#include "ivphard/enclosure.hpp"

namespace ivphard {

/// A real number presented by its approximations: query(m) is a multiple of 2^-m at distance at
/// most 2^-m from the value.
class RealName {
public:
    using Evaluator = std::function<Enclosure(std::int64_t)>;

    explicit RealName(Evaluator eval) : eval_(std::make_shared<const Evaluator>(std::move(eval))) {}

    Dyadic query(std::int64_t m) const {
        if (m < 0) throw std::invalid_argument("RealName::query: negative precision");
        Enclosure e = (*eval_)(m + 2);
        if (!e.meets(m + 2)) throw std::runtime_error("RealName::query: evaluator missed its precision");
        return e.mid().round_to(m, Rounding::nearest);
    }

    /// Sign bit then the binary digits of |2^m query(m)|, the string form of the name at m.
    std::string digits(std::int64_t m) const { return encode_name(query(m), m); }

    static std::string encode_name(const Dyadic& v, std::int64_t m) {
        mpz_class scaled = v.shifted(m).floor_int();
        std::string out = sgn(scaled) < 0 ? "1" : "0";
        out += mpz_class(::abs(scaled)).get_str(2);
        return out;
    }

    static Dyadic decode_name(const std::string& s, std::int64_t m) {
        if (s.size() < 2 || (s[0] != '0' && s[0] != '1')) throw std::invalid_argument("malformed name string");
        mpz_class v;
        if (v.set_str(s.substr(1), 2) != 0) throw std::invalid_argument("malformed name string");
        if (s[0] == '1') v = -v;
        return Dyadic(v, -m);
    }

private:
    std::shared_ptr<const Evaluator> eval_;
};

inline RealName make_name(const Dyadic& x) {
    return RealName([x](std::int64_t) { return Enclosure(x); });
}

inline RealName make_name(RealName::Evaluator eval) { return RealName(std::move(eval)); }

}  // namespace ivphard

#endif  // IVPHARD_REAL_NAME_HPP
