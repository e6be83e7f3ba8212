#pragma once

#include <optional>
#include <vector>

#include "floerpot/rational.hpp"

namespace floerpot {

using QVec = std::vector<Rational>;
using QMat = std::vector<QVec>; // row-major, rectangular

using ZVec = std::vector<Integer>;
using ZMat = std::vector<ZVec>;

QMat qmat_zero(size_t rows, size_t cols);
QMat qmat_identity(size_t n);
QVec mat_vec(const QMat& A, const QVec& x);
QMat mat_mul(const QMat& A, const QMat& B);

// In-place reduced row echelon form; returns the rank.
size_t rref(QMat& M);
size_t rank(QMat M);

// Basis of { x : A x = 0 }.
std::vector<QVec> kernel_basis(const QMat& A);
// One solution of A x = b, if any.
std::optional<QVec> solve(const QMat& A, const QVec& b);
QMat inverse(const QMat& A);
Rational det(QMat A);

// Basis of the intersection of the column spans of A and B.
std::vector<QVec> span_intersection(const QMat& A, const QMat& B);

// Scales a rational vector to a primitive integer vector (gcd 1), keeping
// direction.  Zero vector maps to zero.
ZVec primitive_vector(const QVec& v);

// Smith normal form: returns diag entries d_1 | d_2 | ... ; if kernel is
// non-null, fills it with a basis of the saturated integer kernel lattice of A.
std::vector<Integer> smith_normal_form(ZMat A, std::vector<ZVec>* kernel = nullptr);

// Exact linear feasibility by Gaussian elimination on equations followed by
// Fourier-Motzkin elimination on inequalities.
struct LinearConstraint {
    enum Kind { EQ, LE, LT }; // a.x = b, a.x <= b, a.x < b
    QVec a;
    Rational b;
    Kind kind;
};
bool feasible(std::vector<LinearConstraint> cs, size_t nvars);

} // namespace floerpot
