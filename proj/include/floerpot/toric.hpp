#pragma once

#include <optional>
#include <string>
#include <vector>

#include "floerpot/laurent.hpp"
#include "floerpot/linalg.hpp"
#include "floerpot/multiseries.hpp"

namespace floerpot {

// Ray (toric divisor) indices are 1-based throughout this interface, matching
// the D_i labels; storage vectors are plain 0-based arrays.

struct ToricData {
    std::vector<std::string> names;              // divisor names, D1.. by default
    ZMat rays;                                   // one primitive vector per row
    std::vector<std::vector<size_t>> max_cones;  // 1-based ray index sets
    std::vector<Exponent> areas;                 // facet parameters A_i > 0

    size_t nrays() const { return rays.size(); }
    size_t dim() const { return rays.empty() ? 0 : rays[0].size(); }

    // Primitivity, dimension consistency, positive areas, unimodular cones.
    void validate() const;
    bool is_orthant() const;  // rays = the standard basis, in order
    bool cone_spanned(const std::vector<size_t>& s) const;  // inside a max cone?
    std::string ray_name(size_t i) const;  // 1-based
};

struct SubtorusAction {
    ZMat generators;              // k linearly independent rows in Z^n
    std::vector<Rational> level;  // c in Q^k

    size_t rank() const { return generators.size(); }
    void validate(size_t n) const;  // sizes, independence, saturation
};

// The exact sequence 0 -> K -> Z^n -> N -> 0 of a fan, with the kernel basis
// normalized so that class j has a single 1 in the extra-ray block (possible
// whenever rays 1..d form the standard basis; `psi_normalized` records it).
// `mori` holds the extremal effective classes (wall relations reduced to an
// irredundant set), one per row, in kernel-basis coordinates.
struct CurveClassLattice {
    ZMat inclusion;   // n x r, column j = basis class as a vector of D_p pairings
    ZMat projection;  // d x n, column p = ray v_p
    ZMat mori;        // extremal effective classes, rows, kernel coordinates
    bool psi_normalized = false;

    size_t rank() const { return inclusion.empty() ? 0 : inclusion[0].size(); }
    size_t nrays() const { return inclusion.size(); }

    ZVec pairing(const ZVec& c) const;  // all D_p . c
    Integer c1(const ZVec& c) const;    // sum_p D_p . c
    Exponent energy(const ZVec& c, const std::vector<Exponent>& areas) const;

    // Coordinates of c over the mori rows; requires them to form a lattice
    // basis of K.  Effective classes are exactly those with all coordinates
    // nonnegative.
    ZVec mori_coordinates(const ZVec& c) const;
    ZVec class_of_mori(const ZVec& m) const;

    void validate() const;  // composite zero, ranks add up
};

struct DiscClass {
    std::string label;
    ZVec basic;            // coefficients over the basic classes beta_1..beta_n
    ZVec sphere;           // kernel-basis coordinates of the sphere part
    int maslov = 0;
    Exponent energy = 0;
};

CurveClassLattice curve_class_lattice(const ToricData& td);

// W = sum_i T^{A_i} z^{v_i}.  trunc = 0 picks sum(areas) + 1.
LaurentPotential basic_disc_potential(const ToricData& td, Exponent trunc = 0,
                                      unsigned cap = 1);

// basic_disc_potential plus sum_j lambda_j * log(z^{g_j}) over the subtorus
// generators.  Requires cap >= 2.
LaurentPotential equivariant_potential(const ToricData& td, const SubtorusAction& sub,
                                       Exponent trunc = 0, unsigned cap = 2);

// c1 > 0 (resp. >= 0) on every extremal effective class; the witness, when
// returned, is a violating class in kernel coordinates.
bool check_fano(const CurveClassLattice& cl, ZVec* witness = nullptr);
bool check_semifano(const CurveClassLattice& cl, ZVec* witness = nullptr);

struct MissedReport {
    std::vector<size_t> missed;  // 1-based divisor indices with D_i cut off
    std::vector<size_t> hit;
};

// Exact feasibility of facet_i intersected with the slice {subtorus moment
// map = level} inside P = {<v_i,x> + A_i >= 0}.  The level must be regular:
// the slice is nonempty and passes through no vertex of P.
MissedReport missed_divisors(const ToricData& td, const SubtorusAction& sub);

// Maslov index of the correspondence class beta_i^B: finds the primitive
// vector v = sum_{j in B+{i}} n_j v_j spanning (span of sub.generators) ^
// (normal space of the moment image of the stratum), normalized to n_i > 0,
// and returns 2 sum_j n_j.  Stratum and i are 1-based.
int maslov_index_correspondence(const ToricData& td, const SubtorusAction& sub,
                                const std::vector<size_t>& stratum, size_t i);

// g_l as a series in the extremal-class variables (variable a stands for
// q^{mori_a}), summed over effective c with c1(c) = 0, D_l.c < 0, D_p.c >= 0
// for p != l, up to total degree N.  Coefficient shape (trunc, cap) is that
// of the Novikov constants, (1, 1) by default.
MultiSeries g_series(const CurveClassLattice& cl, size_t l, unsigned N,
                     Exponent trunc = 1, unsigned cap = 1);

// Both directions of the semi-Fano mirror map to total degree N, kept as
// unit factors and coordinate maps in the extremal-class variables.
struct MirrorMap {
    CurveClassLattice cl;
    std::vector<Exponent> areas;
    std::vector<MultiSeries> g;               // per ray, checked-side variables
    std::vector<MultiSeries> u_forward;       // u_a(uc), one per extremal class
    std::vector<MultiSeries> u_inverse;       // uc_a(u)
    std::vector<MultiSeries> forward_factor;  // q_j(qc)/qc_j
    std::vector<MultiSeries> inverse_factor;  // qc_j(q)/q_j

    // "q_j(qc) = qc_j * (...)" lines, then "qc_j(q) = q_j * (...)" lines.
    std::string str() const;
};

MirrorMap mirror_map(const CurveClassLattice& cl, const ToricData& td, unsigned N,
                     Exponent trunc = 1, unsigned cap = 1);

// W = sum_l exp(g_l(qc(q))) Z_l in fiber-absorbed coordinates: Z_l = z_l for
// l <= d and Z_l = T^{omega.Psi_{l-d}} z^{v_l} for the extra rays.  trunc = 0
// picks a bound covering every term to mirror order N.
LaurentPotential semifano_potential(const CurveClassLattice& cl, const ToricData& td,
                                    unsigned N, Exponent trunc = 0);

// sum_j lambda_j (log q_j - log qc_j(q)) as a z-free potential over the
// coordinates of Y; identically zero for Fano X.
LaurentPotential correspondence_equivariant_potential(const ToricData& td_Y,
                                                      const CurveClassLattice& cl,
                                                      const ToricData& td_X, unsigned N,
                                                      Exponent trunc = 0);

struct TelemanReport {
    bool ok = false;
    std::vector<Exponent> shifts;      // a_i in z_i = T^{a_i} zt_i u_i
    std::vector<NovikovSeries> units;  // u_i, unit leading coefficient
    // Relative T-order of the first disagreement (0 = leading behavior).
    std::optional<Exponent> mismatch_order;
    std::string detail;

    std::string str() const;
};

// Restricts the equivariant potential of Y = C^n to the fiber with lambda-part
// shifted by -h, and matches it against the disc potential of X through a
// coordinate change z_i = T^{a_i} zt_i (1 + o(T)) solved from the linear
// terms.  Reports the change or the first mismatching energy.
TelemanReport verify_teleman(const ToricData& td_Y, const SubtorusAction& sub,
                             const ToricData& td_X, unsigned N);

struct CorrespondenceClasses {
    std::vector<size_t> missed;       // 1-based
    std::vector<DiscClass> lifted;    // one lift per missed divisor
    std::vector<DiscClass> spheres;   // basis of K_X
    size_t rank = 0;                  // of the generated group, by Smith form
};

// Generators of the disc-class group of the correspondence: lifts beta_i^B
// over the missed divisors (B the adjacent hit stratum) plus the sphere
// classes of X.
CorrespondenceClasses correspondence_disc_classes(const ToricData& td_Y,
                                                  const SubtorusAction& sub,
                                                  const ToricData& td_X);

} // namespace floerpot
