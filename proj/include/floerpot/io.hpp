#pragma once

#include <optional>
#include <string>

#include "floerpot/toric.hpp"
#include "floerpot/trimodule.hpp"

namespace floerpot {

// Structured text for algebras:
//
//   trunc = 4
//   cap = 2
//   basis {
//     e 0
//     x 1
//   }
//   unit = e
//   gapping = [1, 3/2]
//   m[2, E=0](x, x) = 2*e - 3*x
//
// and for tri-modules, where the three algebra sections wrap the same syntax
// and module entries list the four input groups as in the relation reports:
//
//   left { ... }
//   right_first { ... }
//   right_second { ... }
//   module {
//     basis { p 0 }
//     cyclic = p
//     n[1,0,1, E=0](a | p | | b) = p
//   }
//
// Serialization is deterministic: tables print in key order.

std::string serialize_algebra(const AInfinityAlgebra& A);
AInfinityAlgebra parse_algebra(const std::string& text);

// Morphism component tables under the key `i[k, E=p/q](...)`.
std::string serialize_morphism_table(const AInfinityAlgebra::Table& t,
                                     const GradedBasis& source,
                                     const GradedBasis& target);

struct TriModuleFile {
    AInfinityTriModule module;
    std::optional<std::string> cyclic;  // declared cyclic element name
};

std::string serialize_trimodule(const AInfinityTriModule& D,
                                const std::optional<std::string>& cyclic = {});
TriModuleFile parse_trimodule(const std::string& text);

// Fan files:
//
//   rays = [[1, 0], [0, 1], [-1, -2], [0, -1]]
//   cones = [[1, 2], [2, 3], [3, 4], [4, 1]]
//   areas = [2, 1, 2, 1]
//   subtorus = { generators = [[1, 2, 1, 0], [0, 1, 0, 1]], level = [0, 0] }
struct FanFile {
    ToricData td;
    std::optional<SubtorusAction> sub;
};

FanFile parse_fan(const std::string& text);
std::string serialize_fan(const FanFile& f);

// Restriction job description for the command-line driver:
//
//   fan = p1p1.fan
//   equivariant = false
//   trunc = 7
//   eliminate = [2]
//   constraint = { covector = [1, 1], value = 1 }
//
// one constraint per eliminated variable, in order.  Constraint values are
// parsed against the potential's truncation later, so they stay as text.
struct RestrictConfig {
    std::string fan;
    bool equivariant = false;
    std::optional<Exponent> trunc;
    unsigned cap = 0;  // 0 = pick by flavor
    std::vector<size_t> eliminate;
    std::vector<ZExp> covectors;
    std::vector<std::string> values;
};

RestrictConfig parse_restrict_config(const std::string& text);

// Two-fan job for the Teleman verifier: y_fan = "...", x_fan = "...".
struct TelemanConfig {
    std::string y_fan;
    std::string x_fan;
};

TelemanConfig parse_teleman_config(const std::string& text);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

} // namespace floerpot
