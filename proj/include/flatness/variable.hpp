#pragma once

#include <compare>
#include <string>
#include <vector>

namespace flatness {

/// A time-indexed symbol: `name` observed at discrete-time offset `shift`
/// (0 = current instant, negative = past, positive = future). Identity and
/// the total order are (name, shift), lexicographic.
struct Var {
    std::string name;
    int shift = 0;

    Var() = default;
    Var(std::string n, int s = 0) : name(std::move(n)), shift(s) {}

    friend bool operator==(const Var&, const Var&) = default;
    friend std::strong_ordering operator<=>(const Var& a, const Var& b) {
        if (auto c = a.name <=> b.name; c != 0) return c;
        return a.shift <=> b.shift;
    }
};

inline std::string to_string(const Var& v) {
    if (v.shift == 0) return v.name;
    return v.name + "@" + std::to_string(v.shift);
}

/// `[A-Za-z][A-Za-z0-9_]*`
inline bool valid_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0]))) return false;
    for (char c : s)
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    return true;
}

} // namespace flatness
