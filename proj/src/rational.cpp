#include "semistable/rational.hpp"

namespace semistable {

namespace {

bool looks_like_int(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-' || s[0] == '+') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (s[i] < '0' || s[i] > '9') return false;
    return true;
}

}  // namespace

Int parse_int(const std::string& text) {
    if (!looks_like_int(text)) throw Error("not an integer literal: '" + text + "'");
    return Int(text, 10);
}

Rat parse_rat(const std::string& text) {
    auto slash = text.find('/');
    if (slash == std::string::npos) return Rat(parse_int(text));
    Int num = parse_int(text.substr(0, slash));
    Int den = parse_int(text.substr(slash + 1));
    if (den <= 0) throw Error("rational denominator must be positive: '" + text + "'");
    return make_rat(num, den);
}

}  // namespace semistable
