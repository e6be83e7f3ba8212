#pragma once

#include <optional>

#include "floerpot/contraction.hpp"

namespace floerpot {

// Filtered gapped A-infinity tri-module over a left algebra C'' and right
// algebras (C', C).  An operation
//   n_{k'',k',k}(xi_1..xi_{k''}; y; eta_1..eta_{k'}; zeta_1..zeta_k)
// takes xi from C'', y from the module, eta from C' and zeta from C; tables
// store the inputs flattened in that order.  All three algebras and the
// module share one truncation order and lambda cap.
class AInfinityTriModule {
public:
    struct Arity {
        unsigned kpp = 0;  // inputs from C''
        unsigned kp = 0;   // inputs from C'
        unsigned k = 0;    // inputs from C

        unsigned total() const { return kpp + kp + k; }
        auto operator<=>(const Arity&) const = default;
    };
    // arity -> energy -> flattened input tuple -> output
    using Table =
        std::map<Arity,
                 std::map<Exponent, std::map<std::vector<size_t>, ScalarElement>>>;

    struct Violation {
        Arity arity;
        Exponent energy;
        std::vector<size_t> inputs;
        std::string str(const AInfinityTriModule& D) const;
    };

    AInfinityTriModule() = default;
    AInfinityTriModule(AInfinityAlgebra left, AInfinityAlgebra right_first,
                       AInfinityAlgebra right_second, GradedBasis basis);

    const AInfinityAlgebra& left() const { return left_; }          // C''
    const AInfinityAlgebra& right_first() const { return rfirst_; } // C'
    const AInfinityAlgebra& right_second() const { return rsecond_; } // C
    const GradedBasis& basis() const { return basis_; }
    const Exponent& trunc() const { return left_.trunc(); }
    unsigned cap() const { return left_.cap(); }
    const Table& ops() const { return ops_; }

    void set_op(const Arity& a, const Exponent& energy,
                const std::vector<size_t>& inputs, const ScalarElement& out);
    const ScalarElement* op(const Arity& a, const Exponent& energy,
                            const std::vector<size_t>& inputs) const;

    Element apply_basis(const Arity& a, const std::vector<size_t>& inputs) const;
    Element apply(const std::vector<Element>& xi, const Element& y,
                  const std::vector<Element>& eta,
                  const std::vector<Element>& zeta) const;

    // The classical (energy-zero, lambda-free) differential n_{0,0,0}.
    Complex classical_complex() const;

    // Residuals of the tri-module relation over all input tuples with
    // k'' + k' + k <= k_max.
    std::vector<Violation> check_trimodule(unsigned k_max) const;

    // Inserts b'' / b' / b into the xi / eta / zeta slots in all ways; the
    // result is a tri-module over the correspondingly deformed algebras.
    AInfinityTriModule deform_trimodule(const Element& bpp, const Element& bp,
                                        const Element& b) const;

    std::optional<struct CyclicElement> is_left_cyclic(const Element& one) const;
    // strand 1 tests n_{0,1,0}(1;-) against C', strand 2 tests n_{0,0,1}(1;-)
    // against C.
    std::optional<struct CyclicElement> is_right_cyclic(const Element& one,
                                                        unsigned strand) const;
    std::optional<struct CyclicElement> is_bicyclic(const Element& one) const;

private:
    AInfinityAlgebra left_, rfirst_, rsecond_;
    GradedBasis basis_;
    Table ops_;
};

// A degree-zero module element with vanishing classical differential whose
// classical pairing n_{1,0,0}(-;1) inverts; the matrix and its inverse are
// cached for the energy induction in compose.
struct CyclicElement {
    Element one;
    ScalarElement one_classical;
    QMat left_matrix;   // columns indexed by the C'' basis
    QMat left_inverse;
    unsigned right_strand = 0;  // 0 = none, 1 = C', 2 = C
    QMat right_matrix;
    QMat right_inverse;
};

// Solves n^{b'',b',b}_{0,0,0}(1) = 0 for b'' energy level by energy level,
// reusing the cached classical inverse; the solution is unique.
Element compose(const AInfinityTriModule& D, const CyclicElement& cyc,
                const Element& b, const Element& bp);

// n^{def}(n^{def}(y)) + (W''-W'-W)|_{lambda-free} y + sign * (lambda part) y,
// with the potentials of the three deformed algebras.  The overall sign of
// the lambda term is not pinned; callers probe both.
Element obstruction_square(const AInfinityTriModule& D, const Element& bpp,
                           const Element& bp, const Element& b, const Element& y,
                           int lambda_sign);

using SeriesMat = std::vector<std::vector<NovikovSeries>>;

struct KappaResult {
    SeriesMat kappa;       // C' -> C''
    int product_sign = 0;  // s with [m''_2(k x, k y)] = s [k m'_2(x, y)]
    int unit_sign = 0;     // u with [k e'] = u [e'']
    std::vector<std::string> report;  // empty iff every identity verified
};

// Builds phi' = n^{def}_{0,1,0}(1;-), phi'' = n^{def}_{1,0,0}(-;1) and
// kappa = (phi'')^{-1} phi'; verifies both chain-map identities exactly and
// the product/unit identities up to one global sign modulo exact terms.
KappaResult chain_iso_kappa(const AInfinityTriModule& D, const CyclicElement& cyc,
                            const Element& bpp, const Element& bp,
                            const Element& b);

struct TriTransferResult {
    AInfinityTriModule module;             // over the three canonical algebras
    AInfinityTriModule::Table inclusion;   // components of the module inclusion
};

// Homotopy transfer of the module strand through c_D followed by pullback of
// the algebra strands along the three transferred inclusions.  `left`,
// `right_first`, `right_second` are the transfers of C'', C', C; arities are
// computed for k'' + k' + k <= k_max and energies < min(E_max, truncation).
TriTransferResult transfer_trimodule(const AInfinityTriModule& D,
                                     const Contraction& c_D,
                                     const TransferResult& left,
                                     const TransferResult& right_first,
                                     const TransferResult& right_second,
                                     unsigned k_max, const Exponent& E_max);

} // namespace floerpot
