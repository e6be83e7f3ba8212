#pragma once

#include <map>
#include <string>

#include "floerpot/equivariant.hpp"
#include "floerpot/rational.hpp"

namespace floerpot {

// Element of Lambda_0 / T^trunc with equivariant coefficients: a finite sum
//   sum_E  c_E * T^E,   c_E an EquivariantScalar,  0 <= E < trunc.
// Every binary operation insists on equal truncation and equal lambda cap.
class NovikovSeries {
public:
    using Terms = std::map<Exponent, EquivariantScalar>;

    NovikovSeries() = default;
    NovikovSeries(Exponent trunc, unsigned cap);

    static NovikovSeries constant(const Rational& c, Exponent trunc, unsigned cap = 1);
    static NovikovSeries scalar(const EquivariantScalar& c, Exponent trunc);
    static NovikovSeries t_power(const Exponent& e, Exponent trunc, unsigned cap = 1);
    static NovikovSeries monomial(const Exponent& e, const EquivariantScalar& c,
                                  Exponent trunc);
    static NovikovSeries parse(const std::string& text, Exponent trunc, unsigned cap = 1);

    const Exponent& trunc() const { return trunc_; }
    unsigned cap() const { return cap_; }
    const Terms& terms() const { return terms_; }

    bool is_zero() const { return terms_.empty(); }
    bool is_one() const;
    bool lambda_free() const;
    size_t term_count() const;

    // Minimal exponent present; equals trunc() for the zero series.
    Exponent valuation() const;
    EquivariantScalar coeff(const Exponent& e) const;
    // Adds c * T^e, silently dropping exponents >= trunc.
    void add_term(const Exponent& e, const EquivariantScalar& c);

    NovikovSeries operator-() const;
    NovikovSeries operator+(const NovikovSeries& o) const;
    NovikovSeries operator-(const NovikovSeries& o) const;
    NovikovSeries operator*(const NovikovSeries& o) const;
    NovikovSeries& operator+=(const NovikovSeries& o);
    NovikovSeries& operator-=(const NovikovSeries& o);
    NovikovSeries operator*(const Rational& c) const;
    NovikovSeries operator*(const EquivariantScalar& c) const;
    bool operator==(const NovikovSeries& o) const;
    bool operator!=(const NovikovSeries& o) const { return !(*this == o); }

    // exp / log(1 + x) demand strictly positive valuation.
    NovikovSeries exp() const;
    NovikovSeries log1p() const;
    // Requires an invertible constant term (nonzero rational part at T^0).
    NovikovSeries inverse() const;
    NovikovSeries pow(long n) const;

    NovikovSeries truncate(const Exponent& new_trunc) const;
    NovikovSeries with_cap(unsigned new_cap) const;
    NovikovSeries substitute_lambda(const std::vector<EquivariantScalar>& images,
                                    unsigned new_cap) const;

    // The sub-series of terms whose lambda multidegree equals `e`, with the
    // lambda factor stripped (so the result is lambda-free).
    NovikovSeries lambda_component(const LambdaExp& e) const;
    NovikovSeries lambda_free_part() const;

    std::string str() const;

private:
    void check_compatible(const NovikovSeries& o) const;

    Exponent trunc_ = 0;
    unsigned cap_ = 1;
    Terms terms_;
};

std::string exponent_str(const Exponent& e);

} // namespace floerpot
