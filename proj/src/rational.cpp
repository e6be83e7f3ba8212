#include "floerpot/rational.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cctype>
#include <vector>

namespace floerpot {

std::string rat_str(const Rational& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) s += "/" + denominator(r).str();
    return s;
}

Rational parse_rational(const std::string& text) {
    size_t a = 0, b = text.size();
    while (a < b && std::isspace(static_cast<unsigned char>(text[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(text[b - 1]))) --b;
    std::string body = text.substr(a, b - a);
    if (body.empty()) throw ParseError("empty rational");
    try {
        size_t slash = body.find('/');
        if (slash == std::string::npos) return Rational(Integer(body));
        Integer num(body.substr(0, slash));
        Integer den(body.substr(slash + 1));
        if (den == 0) throw ParseError("zero denominator in '" + body + "'");
        return Rational(num, den);
    } catch (const std::runtime_error& e) {
        throw ParseError("bad rational '" + body + "': " + e.what());
    }
}

Rational rat_pow(const Rational& base, long exponent) {
    if (exponent == 0) return 1;
    if (exponent < 0) {
        if (base == 0) throw InvariantError("0 has no negative power");
        return rat_pow(Rational(1) / base, -exponent);
    }
    Rational acc = 1, b = base;
    long e = exponent;
    while (e > 0) {
        if (e & 1) acc *= b;
        b *= b;
        e >>= 1;
    }
    return acc;
}

Integer gcd_all(const std::vector<Integer>& xs) {
    Integer g = 0;
    for (const auto& x : xs) g = boost::multiprecision::gcd(g, x);
    return g;
}

} // namespace floerpot
