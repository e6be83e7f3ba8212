#include <doctest.h>

#include "floerpot/linalg.hpp"

using namespace floerpot;

TEST_CASE("rref, rank, kernel, solve, inverse") {
    QMat A{{1, 2, 3}, {2, 4, 6}, {1, 0, 1}};
    CHECK(rank(A) == 2);

    auto ker = kernel_basis(A);
    REQUIRE(ker.size() == 1);
    for (const auto& row : A) {
        Rational s = 0;
        for (size_t j = 0; j < 3; ++j) s += row[j] * ker[0][j];
        CHECK(s == 0);
    }

    QMat B{{2, 1}, {1, 1}};
    QMat Binv = inverse(B);
    CHECK(mat_mul(B, Binv) == qmat_identity(2));
    CHECK(det(B) == 1);
    CHECK(det(A) == 0);
    CHECK_THROWS_AS(inverse(A), InvariantError);

    auto x = solve(B, {Rational(3), Rational(2)});
    REQUIRE(x.has_value());
    CHECK((*x)[0] == 1);
    CHECK((*x)[1] == 1);
    CHECK_FALSE(solve(QMat{{1, 1}, {1, 1}}, {Rational(0), Rational(1)}).has_value());
}

TEST_CASE("span intersection of two planes in Q^3") {
    // span{e1,e2} and span{(1,1,1),(1,0,1)} meet in the line through (1,0,0)?
    // (a,b,0) = s(1,1,1)+t(1,0,1): s+t=a, s=b, s+t=0 -> a=0 -> line span{(0,1,0)}... check:
    // s = b, s + t = a and s + t = 0 give a = 0, vector (0, b, 0).
    QMat A{{1, 0}, {0, 1}, {0, 0}};
    QMat B{{1, 1}, {1, 0}, {1, 1}};
    auto I = span_intersection(A, B);
    REQUIRE(I.size() == 1);
    CHECK(I[0][0] == 0);
    CHECK(I[0][1] != 0);
    CHECK(I[0][2] == 0);

    auto primitive = primitive_vector({Rational(2, 3), Rational(-4, 3), Rational(0)});
    CHECK(primitive == ZVec{1, -2, 0});
}

TEST_CASE("smith normal form gives invariant factors and kernel") {
    ZMat A{{2, 4, 4}, {-6, 6, 12}, {10, -4, -16}};
    auto d = smith_normal_form(A);
    REQUIRE(d.size() == 3);
    CHECK(d[0] == 2);
    CHECK(d[1] == 6);
    CHECK(d[2] == 12);

    ZMat R{{1, 0, -1, 0}, {0, 1, 0, -1}};
    std::vector<ZVec> ker;
    auto diag = smith_normal_form(R, &ker);
    CHECK(diag == std::vector<Integer>{1, 1});
    REQUIRE(ker.size() == 2);
    for (const auto& v : ker) {
        CHECK(v[0] == v[2]);
        CHECK(v[1] == v[3]);
    }
}

TEST_CASE("exact feasibility with strict and weak inequalities") {
    auto le = [](QVec a, Rational b) {
        return LinearConstraint{std::move(a), std::move(b), LinearConstraint::LE};
    };
    auto lt = [](QVec a, Rational b) {
        return LinearConstraint{std::move(a), std::move(b), LinearConstraint::LT};
    };
    auto eq = [](QVec a, Rational b) {
        return LinearConstraint{std::move(a), std::move(b), LinearConstraint::EQ};
    };

    // x >= 0, y >= 0, x + y <= 1 has interior points.
    CHECK(feasible({lt({-1, 0}, 0), lt({0, -1}, 0), lt({1, 1}, 1)}, 2));
    // x >= 0, x <= 0, x = 0 boundary: weakly feasible, strictly not.
    CHECK(feasible({le({-1}, 0), le({1}, 0)}, 1));
    CHECK_FALSE(feasible({lt({-1}, 0), lt({1}, 0)}, 1));
    // Equation x + y = 2 with x,y < 1 is infeasible.
    CHECK_FALSE(feasible({eq({1, 1}, 2), lt({1, 0}, 1), lt({0, 1}, 1)}, 2));
    // Inconsistent equations.
    CHECK_FALSE(feasible({eq({1, 1}, 1), eq({1, 1}, 2)}, 2));
    // Unbounded direction is fine.
    CHECK(feasible({le({-1, -1}, -5)}, 2));
}
