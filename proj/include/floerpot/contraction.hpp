#pragma once

#include "floerpot/ainfinity.hpp"

namespace floerpot {

// Finite cochain complex over the rationals.
struct Complex {
    GradedBasis basis;
    QMat d;

    void validate() const;  // square, degree +1, d^2 = 0
};

// Strong contraction (i, p, h):
//   p i = Id,  Id - i p = d h + h d,  h i = 0,  p h = 0,  h h = 0.
struct Contraction {
    Complex source;
    Complex target;
    QMat i;  // target -> source
    QMat p;  // source -> target
    QMat h;  // source -> source, degree -1
};

// Verifies every axiom exactly; empty report means a strong contraction.
std::vector<std::string> check_strong_contraction(const Contraction& c);

// Splits each degree as Im d + harmonic complement + lift, inverts d on the
// lift, and contracts onto the harmonic part (the cohomology, with zero
// differential).  A declared unit is forced into the harmonic basis.
Contraction make_strong_contraction(const Complex& A);

struct TransferResult {
    AInfinityAlgebra algebra;           // structure on the contraction target
    AInfinityAlgebra::Table inclusion;  // components of the filtered inclusion

    // Morphism from the transferred algebra into `original`; keep both this
    // result and `original` alive while using it.
    AInfinityMorphism inclusion_morphism(const AInfinityAlgebra& original) const;
};

// Homotopy transfer through a contraction of the algebra's classical complex,
// by the (energy, arity)-inductive scheme, computed for arities <= k_max and
// energies < E_max.
TransferResult transfer_algebra(const AInfinityAlgebra& alg, const Contraction& c,
                                unsigned k_max, const Exponent& E_max);

} // namespace floerpot
