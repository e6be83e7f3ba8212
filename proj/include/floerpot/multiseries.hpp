#pragma once

#include <map>
#include <string>
#include <vector>

#include "floerpot/novikov.hpp"

namespace floerpot {

// Formal power series in several commuting variables with NovikovSeries
// coefficients, truncated at total degree < maxdeg.  All coefficients share
// one truncation order and lambda cap.
class MultiSeries {
public:
    using Key = std::vector<unsigned>;
    using Terms = std::map<Key, NovikovSeries, LambdaOrder>;

    MultiSeries() = default;
    MultiSeries(std::vector<std::string> vars, unsigned maxdeg, Exponent trunc,
                unsigned cap);

    static MultiSeries constant(const NovikovSeries& c, std::vector<std::string> vars,
                                unsigned maxdeg);
    static MultiSeries variable(size_t index, std::vector<std::string> vars,
                                unsigned maxdeg, Exponent trunc, unsigned cap);

    const std::vector<std::string>& vars() const { return vars_; }
    unsigned maxdeg() const { return maxdeg_; }
    const Exponent& trunc() const { return trunc_; }
    unsigned cap() const { return cap_; }
    const Terms& terms() const { return terms_; }

    bool is_zero() const { return terms_.empty(); }
    NovikovSeries coeff(const Key& k) const;
    void add_term(const Key& k, const NovikovSeries& c);

    MultiSeries operator-() const;
    MultiSeries operator+(const MultiSeries& o) const;
    MultiSeries operator-(const MultiSeries& o) const;
    MultiSeries operator*(const MultiSeries& o) const;
    MultiSeries& operator+=(const MultiSeries& o);
    MultiSeries operator*(const NovikovSeries& c) const;
    MultiSeries operator*(const Rational& c) const;
    bool operator==(const MultiSeries& o) const;
    bool operator!=(const MultiSeries& o) const { return !(*this == o); }

    // Minimal total degree of a nonzero monomial (maxdeg if zero).
    unsigned order() const;

    MultiSeries exp() const;
    MultiSeries log1p() const;
    // Requires an invertible constant monomial.
    MultiSeries inverse() const;
    MultiSeries pow(long n) const;

    // Substitutes images[i] for variable i; images share shape with *this.
    MultiSeries substitute(const std::vector<MultiSeries>& images) const;
    NovikovSeries evaluate(const std::vector<NovikovSeries>& values) const;

    std::string str() const;

private:
    void check_compatible(const MultiSeries& o) const;

    std::vector<std::string> vars_;
    unsigned maxdeg_ = 0;
    Exponent trunc_ = 0;
    unsigned cap_ = 1;
    Terms terms_;
};

// Inverts maps[j] = var_j * (1 + higher order) under composition; the result
// satisfies maps(result(q)) = q to total degree < maxdeg.
std::vector<MultiSeries> reversion_triangular(const std::vector<MultiSeries>& maps);

} // namespace floerpot
