#pragma once

// Criterion selector grammar. Every builder label round-trips through
// parse_criterion, so selectors on the command line and labels in reports are
// the same language:
//
//   E:ks,ki,l            Ec:ns,ni,l
//   E4:ks,ki,ls,li[:i]   E4c:ns,ni,ls,li[:i]
//   CS:N=ns,ni;L=ls,li   M2:L=ls,li;N=ns,ni   M3:K=a,b;L=c,d;N=e,f
//   M:L=ls,li;N=ns,ni    M:K=a,b;L=c,d;N=e,f  (size picked by pair count)
//   D3:(a,b,c)/(d,e,f)[:i]   D4:(a,b,c,d)/(e,f,g,h)
//   D3sys1:k,l,m[:i]  D3sys2:k,l,m[:i]  Dsys3:k,l,m
//   DB3:k,l,m[:i]  DB4:k,l,m,n  Dmn:k,l,m,n
//   A:LABEL[:i]          (catalog entry by label)
//
// A trailing ":i" selects the idler arm where the family distinguishes arms;
// ":s" is accepted as the explicit default.

#include <string>
#include <utility>
#include <vector>

#include "catalog.hpp"
#include "criteria.hpp"
#include "errors.hpp"

namespace qnc {
namespace detail {

inline std::vector<std::string> split_on(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= s.size(); ++i)
        if (i == s.size() || s[i] == sep) {
            out.push_back(s.substr(start, i - start));
            start = i + 1;
        }
    return out;
}

inline int parse_index(const std::string& s, const std::string& what) {
    if (s.empty()) throw ParseError(what + ": missing integer");
    std::size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(s, &pos);
    } catch (...) {
        throw ParseError(what + ": '" + s + "' is not an integer");
    }
    if (pos != s.size()) throw ParseError(what + ": '" + s + "' is not an integer");
    return v;
}

inline std::vector<int> parse_indices(const std::string& s, std::size_t want,
                                      const std::string& what) {
    std::vector<std::string> parts = split_on(s, ',');
    if (parts.size() != want)
        throw ParseError(what + ": expected " + std::to_string(want) +
                         " comma-separated indices, got '" + s + "'");
    std::vector<int> out;
    for (const std::string& p : parts) out.push_back(parse_index(p, what));
    return out;
}

/// Strip an optional trailing arm tag (":i" or ":s") and return the arm.
inline Arm strip_arm_tag(std::string& rest) {
    if (rest.size() >= 2 && rest[rest.size() - 2] == ':') {
        char c = rest.back();
        if (c == 'i' || c == 's') {
            rest.erase(rest.size() - 2);
            return c == 'i' ? Arm::idler : Arm::signal;
        }
    }
    return Arm::signal;
}

inline std::pair<int, int> parse_keyed_pair(const std::string& field,
                                            const std::string& key,
                                            const std::string& what) {
    std::string prefix = key + "=";
    if (field.rfind(prefix, 0) != 0)
        throw ParseError(what + ": expected '" + prefix + "a,b', got '" + field + "'");
    std::vector<int> v = parse_indices(field.substr(prefix.size()), 2, what);
    return {v[0], v[1]};
}

inline std::vector<int> parse_paren_tuple(const std::string& s, std::size_t want,
                                          const std::string& what) {
    if (s.size() < 2 || s.front() != '(' || s.back() != ')')
        throw ParseError(what + ": expected a parenthesized tuple, got '" + s + "'");
    return parse_indices(s.substr(1, s.size() - 2), want, what);
}

}  // namespace detail

/// Build a criterion from a selector string (see the grammar above).
/// Malformed selectors raise ParseError; selectors that parse but violate a
/// family's index constraints raise InvalidIndices.
inline Criterion parse_criterion(const std::string& spec) {
    std::size_t colon = spec.find(':');
    if (colon == std::string::npos || colon == 0)
        throw ParseError("criterion selector needs a family prefix, e.g. 'E:0,0,1'");
    std::string head = spec.substr(0, colon);
    std::string rest = spec.substr(colon + 1);

    if (head == "E") {
        std::vector<int> v = detail::parse_indices(rest, 3, spec);
        return criterion_E3(v[0], v[1], v[2]);
    }
    if (head == "Ec") {
        std::vector<int> v = detail::parse_indices(rest, 3, spec);
        return criterion_E3_centered(v[0], v[1], v[2]);
    }
    if (head == "E4" || head == "E4c") {
        Arm arm = detail::strip_arm_tag(rest);
        std::vector<int> v = detail::parse_indices(rest, 4, spec);
        return head == "E4" ? criterion_E4(v[0], v[1], v[2], v[3], arm)
                            : criterion_E4_centered(v[0], v[1], v[2], v[3], arm);
    }
    if (head == "CS" || head == "M2") {
        std::vector<std::string> fields = detail::split_on(rest, ';');
        if (fields.size() != 2)
            throw ParseError(spec + ": expected two ';'-separated index pairs");
        if (head == "CS") {
            auto N = detail::parse_keyed_pair(fields[0], "N", spec);
            auto L = detail::parse_keyed_pair(fields[1], "L", spec);
            return criterion_CS(N.first, N.second, L.first, L.second);
        }
        auto L = detail::parse_keyed_pair(fields[0], "L", spec);
        auto N = detail::parse_keyed_pair(fields[1], "N", spec);
        return criterion_M2(L.first, L.second, N.first, N.second);
    }
    if (head == "M3") {
        std::vector<std::string> fields = detail::split_on(rest, ';');
        if (fields.size() != 3)
            throw ParseError(spec + ": expected three ';'-separated index pairs");
        auto K = detail::parse_keyed_pair(fields[0], "K", spec);
        auto L = detail::parse_keyed_pair(fields[1], "L", spec);
        auto N = detail::parse_keyed_pair(fields[2], "N", spec);
        return criterion_M3(K, L, N);
    }
    if (head == "M") {  // bare matrix family: the pair count picks the size
        std::vector<std::string> fields = detail::split_on(rest, ';');
        if (fields.size() == 2) {
            auto L = detail::parse_keyed_pair(fields[0], "L", spec);
            auto N = detail::parse_keyed_pair(fields[1], "N", spec);
            return criterion_M2(L.first, L.second, N.first, N.second);
        }
        if (fields.size() == 3) {
            auto K = detail::parse_keyed_pair(fields[0], "K", spec);
            auto L = detail::parse_keyed_pair(fields[1], "L", spec);
            auto N = detail::parse_keyed_pair(fields[2], "N", spec);
            return criterion_M3(K, L, N);
        }
        throw ParseError(spec + ": expected two or three ';'-separated index pairs");
    }
    if (head == "D3" || head == "D4") {
        Arm arm = detail::strip_arm_tag(rest);
        if (head == "D4" && arm == Arm::idler)
            throw ParseError(spec + ": the four-variable form has no arm variants");
        std::vector<std::string> sides = detail::split_on(rest, '/');
        if (sides.size() != 2)
            throw ParseError(spec + ": expected '(hi)/(lo)' tuples");
        if (head == "D3") {
            std::vector<int> h = detail::parse_paren_tuple(sides[0], 3, spec);
            std::vector<int> l = detail::parse_paren_tuple(sides[1], 3, spec);
            return criterion_D3({h[0], h[1], h[2]}, {l[0], l[1], l[2]}, arm);
        }
        std::vector<int> h = detail::parse_paren_tuple(sides[0], 4, spec);
        std::vector<int> l = detail::parse_paren_tuple(sides[1], 4, spec);
        return criterion_D4({h[0], h[1], h[2], h[3]}, {l[0], l[1], l[2], l[3]});
    }
    if (head == "D3sys1" || head == "D3sys2") {
        Arm arm = detail::strip_arm_tag(rest);
        std::vector<int> v = detail::parse_indices(rest, 3, spec);
        return head == "D3sys1" ? criterion_Dsys1(v[0], v[1], v[2], arm)
                                : criterion_Dsys2(v[0], v[1], v[2], arm);
    }
    if (head == "Dsys3") {
        std::vector<int> v = detail::parse_indices(rest, 3, spec);
        return criterion_Dsys3(v[0], v[1], v[2]);
    }
    if (head == "DB3") {
        Arm arm = detail::strip_arm_tag(rest);
        std::vector<int> v = detail::parse_indices(rest, 3, spec);
        return criterion_D3_minball(v[0], v[1], v[2], arm);
    }
    if (head == "DB4") {
        std::vector<int> v = detail::parse_indices(rest, 4, spec);
        return criterion_D4_minball(v[0], v[1], v[2], v[3]);
    }
    if (head == "Dmn") {
        std::vector<int> v = detail::parse_indices(rest, 4, spec);
        return criterion_Dmn(v[0], v[1], v[2], v[3]);
    }
    if (head == "A") {
        Arm arm = detail::strip_arm_tag(rest);
        if (rest.empty()) throw ParseError(spec + ": missing catalog label");
        return catalog_criterion(rest, arm);
    }
    throw ParseError("unknown criterion family '" + head + "' in '" + spec + "'");
}

}  // namespace qnc
