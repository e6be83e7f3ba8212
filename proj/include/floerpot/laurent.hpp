#pragma once

#include <map>
#include <string>
#include <vector>

#include "floerpot/novikov.hpp"

namespace floerpot {

// Laurent exponent vector; negative entries allowed.
using ZExp = std::vector<long>;

// Shifts every T-exponent by delta.  Exponents that would become negative are
// an error; exponents at or above the truncation are dropped.
NovikovSeries shift_energy(const NovikovSeries& s, const Exponent& delta);

// log of a series with leading coefficient exactly 1 at T^0.
NovikovSeries log_unit(const NovikovSeries& s);

// Laurent polynomial in z_1..z_n over the Novikov ring, together with a
// formal logarithmic part  sum_r lambda_r * log(z^{m_r}).  Scalar lambda
// contributions created by restricting a log covector are ordinary series and
// live in the exponent-zero term.
class LaurentPotential {
public:
    using Terms = std::map<ZExp, NovikovSeries>;

    LaurentPotential() = default;
    LaurentPotential(size_t nvars, Exponent trunc, unsigned cap);

    size_t nvars() const { return nvars_; }
    const Exponent& trunc() const { return trunc_; }
    unsigned cap() const { return cap_; }
    const Terms& terms() const { return terms_; }
    const std::map<unsigned, ZExp>& log_part() const { return log_part_; }

    bool is_zero() const { return terms_.empty() && log_part_.empty(); }
    NovikovSeries coeff(const ZExp& e) const;
    void add_term(const ZExp& e, const NovikovSeries& c);
    // Accumulates lambda_index * log(z^covector); covectors with the same
    // lambda index merge additively and zero covectors vanish.
    void add_log(unsigned lambda_index, const ZExp& covector);

    LaurentPotential operator+(const LaurentPotential& o) const;
    LaurentPotential operator-(const LaurentPotential& o) const;
    LaurentPotential operator*(const Rational& c) const;
    bool operator==(const LaurentPotential& o) const;
    bool operator!=(const LaurentPotential& o) const { return !(*this == o); }

    // z_i -> T^{shift_i} z_i.  Requires an empty log part (the substitution
    // would create log T terms there).
    LaurentPotential scale_variables(const std::vector<Exponent>& shifts) const;
    LaurentPotential truncate(const Exponent& new_trunc) const;

    // Canonical text: terms sorted by (coefficient valuation, exponent lex),
    // then log terms by lambda index.
    std::string str() const;

private:
    size_t nvars_ = 0;
    Exponent trunc_ = 1;
    unsigned cap_ = 1;
    Terms terms_;
    std::map<unsigned, ZExp> log_part_;
};

// One relation z^covector = value.
struct Constraint {
    ZExp covector;
    NovikovSeries value;
};

// Substitutes the constraints into W, eliminating the designated variables
// (1-based, one per constraint); the constraint covectors restricted to the
// eliminated set must form a unimodular matrix.  Remaining log covectors are
// rewritten in the kept variables; the part absorbed into constraint values
// becomes lambda_r * log(value), which requires unit values.  The output is
// indexed by the kept variables in their original order.
LaurentPotential restrict_potential(const LaurentPotential& W,
                                    const std::vector<Constraint>& constraints,
                                    const std::vector<size_t>& eliminate);

} // namespace floerpot
