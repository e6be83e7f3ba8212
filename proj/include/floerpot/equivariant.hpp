#pragma once

#include <map>
#include <string>
#include <vector>

#include "floerpot/rational.hpp"

namespace floerpot {

// Multidegree in the equivariant parameters lambda_1, lambda_2, ...
// Trailing zeros are always trimmed, so {} is the constant monomial and
// {0,1} is lambda_2.
using LambdaExp = std::vector<unsigned>;

unsigned lambda_degree(const LambdaExp& e);
LambdaExp lambda_trim(LambdaExp e);
LambdaExp lambda_mul(const LambdaExp& a, const LambdaExp& b);
std::string lambda_str(const LambdaExp& e);

// Orders monomials by total degree, then reverse-lexicographically so that
// lambda_1 sorts before lambda_2 in the same degree.
struct LambdaOrder {
    bool operator()(const LambdaExp& a, const LambdaExp& b) const;
};

// A polynomial in the lambda_i with rational coefficients, truncated at total
// lambda-degree `cap`.  Binary operations require equal caps; producing a
// monomial above the cap is an error rather than a silent truncation.
class EquivariantScalar {
public:
    using Terms = std::map<LambdaExp, Rational, LambdaOrder>;

    EquivariantScalar() = default;
    explicit EquivariantScalar(unsigned cap) : cap_(cap) {}
    EquivariantScalar(const Rational& c, unsigned cap = 1);

    static EquivariantScalar lambda(unsigned index, unsigned cap = 1);
    static EquivariantScalar monomial(const LambdaExp& e, const Rational& c, unsigned cap = 1);

    unsigned cap() const { return cap_; }
    const Terms& terms() const { return terms_; }

    bool is_zero() const { return terms_.empty(); }
    bool lambda_free() const;
    Rational rational_part() const;
    // Largest total lambda-degree appearing (0 for the zero scalar).
    unsigned degree() const;

    void set(const LambdaExp& e, const Rational& c);
    Rational coeff(const LambdaExp& e) const;

    EquivariantScalar operator-() const;
    EquivariantScalar& operator+=(const EquivariantScalar& o);
    EquivariantScalar& operator-=(const EquivariantScalar& o);
    EquivariantScalar operator+(const EquivariantScalar& o) const;
    EquivariantScalar operator-(const EquivariantScalar& o) const;
    EquivariantScalar operator*(const EquivariantScalar& o) const;
    EquivariantScalar operator*(const Rational& c) const;
    bool operator==(const EquivariantScalar& o) const;
    bool operator!=(const EquivariantScalar& o) const { return !(*this == o); }

    // Replaces lambda_i by images[i]; used when restricting the torus.
    EquivariantScalar substitute(const std::vector<EquivariantScalar>& images,
                                 unsigned new_cap) const;

    // Splits off the lambda-free part and the rest.
    EquivariantScalar lambda_free_part() const;
    EquivariantScalar lambda_positive_part() const;

    std::string str() const;

private:
    void check_cap(const EquivariantScalar& o) const;

    unsigned cap_ = 1;
    Terms terms_;
};

} // namespace floerpot
