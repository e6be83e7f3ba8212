#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "floerpot/linalg.hpp"
#include "floerpot/novikov.hpp"

namespace floerpot {

struct GradedBasis {
    std::vector<std::string> names;
    std::vector<int> degrees;
    std::optional<size_t> unit;

    size_t size() const { return names.size(); }
    size_t index_of(const std::string& name) const;
    void validate() const;
};

// Sparse module element with series coefficients, and its classical analogue
// used inside fixed-energy tables.
using Element = std::map<size_t, NovikovSeries>;
using ScalarElement = std::map<size_t, EquivariantScalar>;

void elem_add(Element& a, const Element& b);
void elem_add_scaled(Element& a, const Element& b, const Rational& c);
Element elem_scale(const Element& a, const NovikovSeries& c);
bool elem_is_zero(const Element& a);
Element scalar_to_element(const ScalarElement& a, const Exponent& energy,
                          Exponent trunc, unsigned cap);
void scalar_elem_add(ScalarElement& a, const ScalarElement& b);
ScalarElement scalar_elem_scale(const ScalarElement& a, const EquivariantScalar& c);
bool scalar_elem_is_zero(const ScalarElement& a);
std::string elem_str(const Element& a, const GradedBasis& basis);
std::string scalar_elem_str(const ScalarElement& a, const GradedBasis& basis);

// Filtered gapped A-infinity algebra on a finite graded basis.  Operations are
// sparse tables (arity, energy, input tuple) -> scalar combination; the T-power
// of an entry is carried by its energy key.
class AInfinityAlgebra {
public:
    // arity -> energy -> input tuple -> output
    using Table =
        std::map<unsigned,
                 std::map<Exponent, std::map<std::vector<size_t>, ScalarElement>>>;

    struct Violation {
        unsigned k = 0;
        Exponent energy;
        std::vector<size_t> inputs;
        std::string str(const GradedBasis& basis) const;
    };

    AInfinityAlgebra() = default;
    AInfinityAlgebra(GradedBasis basis, Exponent trunc, unsigned cap);

    const GradedBasis& basis() const { return basis_; }
    const Exponent& trunc() const { return trunc_; }
    unsigned cap() const { return cap_; }
    const Table& ops() const { return ops_; }
    const std::vector<Exponent>& gapping() const { return gapping_; }
    const std::map<Exponent, int>& maslov() const { return maslov_; }

    void set_gapping(std::vector<Exponent> gapping);
    void set_maslov(const Exponent& energy, int mu);

    void set_op(unsigned k, const Exponent& energy, const std::vector<size_t>& inputs,
                const ScalarElement& out);
    const ScalarElement* op(unsigned k, const Exponent& energy,
                            const std::vector<size_t>& inputs) const;
    unsigned max_arity() const;

    // Checks each stored entry against deg(out) = sum(deg(in) - 1) + 2 - mu(E),
    // seeding mu(E) from the first entry at each energy when not declared.
    void validate_homogeneous();
    // Checks that every table energy lies in the monoid generated by the
    // gapping set (when a gapping set is declared).
    void validate_gapping() const;

    Element apply_basis(unsigned k, const std::vector<size_t>& inputs) const;
    Element apply(const std::vector<Element>& inputs) const;

    std::vector<Violation> check_ainfinity(unsigned k_max) const;
    std::vector<std::string> check_unit() const;

    void validate_deformation(const Element& b) const;
    AInfinityAlgebra deform(const Element& b) const;
    std::optional<NovikovSeries> is_weak_mc(const Element& b) const;
    AInfinityAlgebra restrict_scalars(const std::vector<EquivariantScalar>& images,
                                      unsigned new_cap) const;

    // Differential-graded algebra with the standard sign dictionary
    // m1 = d, m2(a,b) = (-1)^{deg a} a.b; `products` maps (i,j) to the plain
    // (untwisted) product of basis elements.
    static AInfinityAlgebra from_dga(
        GradedBasis basis, const QMat& d,
        const std::map<std::pair<size_t, size_t>, ScalarElement>& products,
        Exponent trunc, unsigned cap);

    Element parse_element(const std::string& text) const;

private:
    GradedBasis basis_;
    Exponent trunc_ = 0;
    unsigned cap_ = 1;
    std::vector<Exponent> gapping_;
    std::map<Exponent, int> maslov_;
    Table ops_;
};

// Curved A-infinity morphism f: source -> target as component tables
// f_{k,E}: source^{tensor k} -> target (k = 0 components allowed).
class AInfinityMorphism {
public:
    using Table =
        std::map<unsigned,
                 std::map<Exponent, std::map<std::vector<size_t>, ScalarElement>>>;

    AInfinityMorphism() = default;
    AInfinityMorphism(const AInfinityAlgebra* source, const AInfinityAlgebra* target);

    const Table& components() const { return comps_; }
    const AInfinityAlgebra& source() const { return *source_; }
    const AInfinityAlgebra& target() const { return *target_; }

    void set_component(unsigned k, const Exponent& energy,
                       const std::vector<size_t>& inputs, const ScalarElement& out);
    Element apply_basis(unsigned k, const std::vector<size_t>& inputs) const;
    Element apply(const std::vector<Element>& inputs) const;

    // Residuals of the curved-morphism identity
    //   sum (-1)^eps f(..., m_src(...), ...) = sum m_tgt(f x ... x f)
    // per input tuple up to arity k_max.
    std::vector<AInfinityAlgebra::Violation> check(unsigned k_max) const;

    // exp(f)(b) = sum_k f_k(b,...,b), including the k = 0 curvature term.
    Element pushforward_mc(const Element& b) const;

private:
    const AInfinityAlgebra* source_ = nullptr;
    const AInfinityAlgebra* target_ = nullptr;
    Table comps_;
};

} // namespace floerpot
