#include "floerpot/io.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "floerpot/error.hpp"

namespace floerpot {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

// Comment-stripped, trimmed, non-empty lines.
std::vector<std::string> logical_lines(const std::string& text) {
    std::vector<std::string> out;
    std::istringstream ss(text);
    for (std::string raw; std::getline(ss, raw);) {
        size_t h = raw.find('#');
        if (h != std::string::npos) raw = raw.substr(0, h);
        std::string t = trim(raw);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

struct Cursor {
    const std::vector<std::string>& lines;
    size_t pos = 0;

    bool done() const { return pos >= lines.size(); }
    const std::string& next() {
        if (done()) throw ParseError("unexpected end of input");
        return lines[pos++];
    }
};

// `key = value` with the key as a whole token.
bool is_kv(const std::string& line, const std::string& key, std::string& value) {
    if (line.rfind(key, 0) != 0) return false;
    size_t p = key.size();
    while (p < line.size() && std::isspace(static_cast<unsigned char>(line[p]))) ++p;
    if (p >= line.size() || line[p] != '=') return false;
    value = trim(line.substr(p + 1));
    return true;
}

std::vector<std::string> split_depth0(const std::string& s, char sep) {
    std::vector<std::string> out;
    int depth = 0;
    std::string cur;
    for (char c : s) {
        if (c == '[' || c == '{' || c == '(') ++depth;
        if (c == ']' || c == '}' || c == ')') --depth;
        if (depth == 0 && c == sep) {
            out.push_back(trim(cur));
            cur.clear();
            continue;
        }
        cur += c;
    }
    out.push_back(trim(cur));
    return out;
}

std::vector<std::string> list_items(const std::string& s, char open, char close) {
    std::string t = trim(s);
    if (t.size() < 2 || t.front() != open || t.back() != close)
        throw ParseError(fmt::format("expected a {}...{} list, got '{}'", open, close, s));
    std::string inner = trim(t.substr(1, t.size() - 2));
    if (inner.empty()) return {};
    auto items = split_depth0(inner, ',');
    for (const auto& it : items)
        if (it.empty()) throw ParseError("empty entry in list '" + s + "'");
    return items;
}

unsigned uint_of(const std::string& tok) {
    if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError("expected a non-negative integer, got '" + tok + "'");
    return static_cast<unsigned>(std::stoul(tok));
}

int int_of(const std::string& tok) {
    size_t pos = 0;
    int v = 0;
    try {
        v = std::stoi(tok, &pos);
    } catch (const std::exception&) {
        throw ParseError("expected an integer, got '" + tok + "'");
    }
    if (pos != tok.size()) throw ParseError("expected an integer, got '" + tok + "'");
    return v;
}

Integer integer_of(const std::string& tok) {
    std::string t = tok;
    if (!t.empty() && t.front() == '-') t = t.substr(1);
    if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
        throw ParseError("expected an integer, got '" + tok + "'");
    return Integer(tok);
}

ZVec parse_zvec(const std::string& s) {
    ZVec v;
    for (const auto& it : list_items(s, '[', ']')) v.push_back(integer_of(it));
    return v;
}

ZMat parse_zmat(const std::string& s) {
    ZMat m;
    for (const auto& it : list_items(s, '[', ']')) m.push_back(parse_zvec(it));
    return m;
}

std::vector<Rational> parse_qvec(const std::string& s) {
    std::vector<Rational> v;
    for (const auto& it : list_items(s, '[', ']')) v.push_back(parse_rational(it));
    return v;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string zvec_str(const ZVec& v) {
    std::vector<std::string> parts;
    for (const auto& x : v) parts.push_back(x.str());
    return "[" + join(parts, ", ") + "]";
}

std::string zmat_str(const ZMat& m) {
    std::vector<std::string> parts;
    for (const auto& row : m) parts.push_back(zvec_str(row));
    return "[" + join(parts, ", ") + "]";
}

std::string qlist_str(const std::vector<Rational>& v) {
    std::vector<std::string> parts;
    for (const auto& x : v) parts.push_back(rat_str(x));
    return "[" + join(parts, ", ") + "]";
}

std::string rhs_str(const ScalarElement& v, const GradedBasis& basis) {
    std::string s = scalar_elem_str(v, basis);
    for (size_t p; (p = s.find(" + -")) != std::string::npos;) s.replace(p, 4, " - ");
    return s;
}

// Parses a lambda-polynomial combination of basis elements; T powers are
// rejected since the energy lives in the operation key.
ScalarElement parse_rhs(const GradedBasis& basis, const Exponent& trunc, unsigned cap,
                        const std::string& text) {
    AInfinityAlgebra tmp(basis, trunc, cap);
    Element e = tmp.parse_element(text);
    ScalarElement out;
    for (const auto& [i, series] : e) {
        for (const auto& [energy, c] : series.terms())
            if (energy != 0)
                throw ParseError("operation values carry no T powers; the energy "
                                 "belongs in the key: '" +
                                 text + "'");
        EquivariantScalar c = series.coeff(0);
        if (!c.is_zero()) out.emplace(i, c);
    }
    return out;
}

struct OpLine {
    std::vector<unsigned> arity;
    Exponent energy;
    std::string args;
    std::string rhs;
};

OpLine parse_op_line(const std::string& line, char head, size_t arity_count) {
    if (line.size() < 2 || line[0] != head || line[1] != '[')
        throw ParseError(fmt::format("expected '{}[' in '{}'", head, line));
    size_t rb = line.find(']');
    if (rb == std::string::npos) throw ParseError("missing ']' in '" + line + "'");
    auto key = split_depth0(line.substr(2, rb - 2), ',');
    if (key.size() != arity_count + 1)
        throw ParseError("bad operation key in '" + line + "'");
    OpLine out;
    for (size_t i = 0; i < arity_count; ++i) out.arity.push_back(uint_of(key[i]));
    if (key.back().rfind("E=", 0) != 0)
        throw ParseError("missing energy in '" + line + "'");
    out.energy = parse_rational(key.back().substr(2));
    size_t lp = line.find('(', rb);
    if (lp == std::string::npos || !trim(line.substr(rb + 1, lp - rb - 1)).empty())
        throw ParseError("missing input list in '" + line + "'");
    size_t rp = line.find(')', lp);
    if (rp == std::string::npos) throw ParseError("missing ')' in '" + line + "'");
    size_t eq = line.find('=', rp);
    if (eq == std::string::npos || !trim(line.substr(rp + 1, eq - rp - 1)).empty())
        throw ParseError("missing '=' after inputs in '" + line + "'");
    out.args = line.substr(lp + 1, rp - lp - 1);
    out.rhs = trim(line.substr(eq + 1));
    if (out.rhs.empty()) throw ParseError("missing value in '" + line + "'");
    return out;
}

std::vector<std::string> name_list(const std::string& args) {
    if (trim(args).empty()) return {};
    auto items = split_depth0(args, ',');
    for (const auto& it : items)
        if (it.empty()) throw ParseError("empty name in input list '" + args + "'");
    return items;
}

std::vector<size_t> resolve(const std::vector<std::string>& names, const GradedBasis& b) {
    std::vector<size_t> out;
    for (const auto& n : names) out.push_back(b.index_of(n));
    return out;
}

std::vector<std::string> basis_lines(const GradedBasis& b) {
    std::vector<std::string> out;
    out.push_back("basis {");
    for (size_t i = 0; i < b.size(); ++i)
        out.push_back(fmt::format("  {} {}", b.names[i], b.degrees[i]));
    out.push_back("}");
    return out;
}

std::vector<std::string> algebra_lines(const AInfinityAlgebra& A) {
    std::vector<std::string> out;
    out.push_back(fmt::format("trunc = {}", rat_str(A.trunc())));
    out.push_back(fmt::format("cap = {}", A.cap()));
    for (auto& l : basis_lines(A.basis())) out.push_back(l);
    if (A.basis().unit) out.push_back("unit = " + A.basis().names[*A.basis().unit]);
    if (!A.gapping().empty()) out.push_back("gapping = " + qlist_str(A.gapping()));
    if (!A.maslov().empty()) {
        std::vector<std::string> parts;
        for (const auto& [e, mu] : A.maslov())
            parts.push_back(fmt::format("{}: {}", rat_str(e), mu));
        out.push_back("maslov = [" + join(parts, ", ") + "]");
    }
    for (const auto& [k, by_energy] : A.ops())
        for (const auto& [e, by_tuple] : by_energy)
            for (const auto& [tuple, value] : by_tuple) {
                std::vector<std::string> names;
                for (size_t i : tuple) names.push_back(A.basis().names[i]);
                out.push_back(fmt::format("m[{}, E={}]({}) = {}", k, rat_str(e),
                                          join(names, ", "),
                                          rhs_str(value, A.basis())));
            }
    return out;
}

GradedBasis parse_basis_block(Cursor& c) {
    GradedBasis b;
    while (true) {
        const std::string& line = c.next();
        if (line == "}") break;
        std::istringstream ss(line);
        std::string name, degree, extra;
        ss >> name >> degree;
        if (name.empty() || degree.empty() || (ss >> extra))
            throw ParseError("expected 'name degree' in basis block, got '" + line + "'");
        b.names.push_back(name);
        b.degrees.push_back(int_of(degree));
    }
    return b;
}

AInfinityAlgebra parse_algebra_lines(const std::vector<std::string>& lines) {
    std::optional<Exponent> trunc;
    std::optional<unsigned> cap;
    std::optional<GradedBasis> basis;
    std::optional<std::string> unit;
    std::optional<std::vector<Exponent>> gapping;
    std::vector<std::pair<Exponent, int>> maslov;
    std::vector<std::string> op_lines;

    Cursor c{lines};
    while (!c.done()) {
        const std::string& line = c.next();
        std::string val;
        if (line == "basis {") {
            basis = parse_basis_block(c);
        } else if (is_kv(line, "trunc", val)) {
            trunc = parse_rational(val);
        } else if (is_kv(line, "cap", val)) {
            cap = uint_of(val);
        } else if (is_kv(line, "unit", val)) {
            unit = val;
        } else if (is_kv(line, "gapping", val)) {
            gapping = parse_qvec(val);
        } else if (is_kv(line, "maslov", val)) {
            for (const auto& it : list_items(val, '[', ']')) {
                auto kv = split_depth0(it, ':');
                if (kv.size() != 2)
                    throw ParseError("expected 'energy: index' in maslov list");
                maslov.emplace_back(parse_rational(kv[0]), int_of(kv[1]));
            }
        } else if (line.rfind("m[", 0) == 0) {
            op_lines.push_back(line);
        } else {
            throw ParseError("unrecognized line '" + line + "'");
        }
    }
    if (!trunc) throw ParseError("missing 'trunc'");
    if (!cap) throw ParseError("missing 'cap'");
    if (!basis) throw ParseError("missing basis block");
    if (unit) basis->unit = basis->index_of(*unit);
    basis->validate();

    AInfinityAlgebra A(*basis, *trunc, *cap);
    if (gapping) A.set_gapping(*gapping);
    for (const auto& [e, mu] : maslov) A.set_maslov(e, mu);
    for (const auto& raw : op_lines) {
        OpLine op = parse_op_line(raw, 'm', 1);
        auto names = name_list(op.args);
        if (names.size() != op.arity[0])
            throw ParseError("input count does not match the arity in '" + raw + "'");
        A.set_op(op.arity[0], op.energy, resolve(names, A.basis()),
                 parse_rhs(A.basis(), *trunc, *cap, op.rhs));
    }
    return A;
}

// Body of a `name { ... }` block; nested braces are tracked per line.
std::vector<std::string> take_block(Cursor& c, const std::string& name) {
    const std::string& head = c.next();
    if (head.size() < 2 || head.back() != '{' ||
        trim(head.substr(0, head.size() - 1)) != name)
        throw ParseError("expected '" + name + " {', got '" + head + "'");
    std::vector<std::string> body;
    int depth = 1;
    while (true) {
        const std::string& line = c.next();
        for (char ch : line) {
            if (ch == '{') ++depth;
            if (ch == '}') --depth;
        }
        if (depth == 0) {
            if (line != "}") throw ParseError("expected '}', got '" + line + "'");
            return body;
        }
        body.push_back(line);
    }
}

std::string group_join(const std::array<std::string, 4>& groups) {
    std::string out = groups[0];
    for (size_t i = 1; i < 4; ++i) {
        out += (out.empty() || out.back() == ' ') ? "| " : " | ";
        out += groups[i];
    }
    return trim(out);
}

} // namespace

std::string serialize_algebra(const AInfinityAlgebra& A) {
    return join(algebra_lines(A), "\n") + "\n";
}

AInfinityAlgebra parse_algebra(const std::string& text) {
    return parse_algebra_lines(logical_lines(text));
}

std::string serialize_morphism_table(const AInfinityAlgebra::Table& t,
                                     const GradedBasis& source,
                                     const GradedBasis& target) {
    std::string out;
    for (const auto& [k, by_energy] : t)
        for (const auto& [e, by_tuple] : by_energy)
            for (const auto& [tuple, value] : by_tuple) {
                std::vector<std::string> names;
                for (size_t i : tuple) names.push_back(source.names[i]);
                out += fmt::format("i[{}, E={}]({}) = {}\n", k, rat_str(e),
                                   join(names, ", "), rhs_str(value, target));
            }
    return out;
}

std::string serialize_trimodule(const AInfinityTriModule& D,
                                const std::optional<std::string>& cyclic) {
    auto block = [](const std::string& name, const std::vector<std::string>& body) {
        std::string out = name + " {\n";
        for (const auto& l : body) out += "  " + l + "\n";
        return out + "}\n";
    };
    std::vector<std::string> module;
    for (auto& l : basis_lines(D.basis())) module.push_back(l);
    if (cyclic) module.push_back("cyclic = " + *cyclic);
    for (const auto& [a, by_energy] : D.ops())
        for (const auto& [e, by_tuple] : by_energy)
            for (const auto& [tuple, value] : by_tuple) {
                auto names = [&](const GradedBasis& b, size_t from, size_t count) {
                    std::vector<std::string> out;
                    for (size_t i = 0; i < count; ++i)
                        out.push_back(b.names[tuple[from + i]]);
                    return join(out, ", ");
                };
                std::array<std::string, 4> groups = {
                    names(D.left().basis(), 0, a.kpp),
                    names(D.basis(), a.kpp, 1),
                    names(D.right_first().basis(), a.kpp + 1, a.kp),
                    names(D.right_second().basis(), a.kpp + 1 + a.kp, a.k)};
                module.push_back(fmt::format("n[{},{},{}, E={}]({}) = {}", a.kpp,
                                             a.kp, a.k, rat_str(e),
                                             group_join(groups),
                                             rhs_str(value, D.basis())));
            }
    return block("left", algebra_lines(D.left())) +
           block("right_first", algebra_lines(D.right_first())) +
           block("right_second", algebra_lines(D.right_second())) +
           block("module", module);
}

TriModuleFile parse_trimodule(const std::string& text) {
    auto lines = logical_lines(text);
    Cursor c{lines};
    AInfinityAlgebra left = parse_algebra_lines(take_block(c, "left"));
    AInfinityAlgebra rfirst = parse_algebra_lines(take_block(c, "right_first"));
    AInfinityAlgebra rsecond = parse_algebra_lines(take_block(c, "right_second"));
    auto module_body = take_block(c, "module");
    if (!c.done()) throw ParseError("trailing content after the module block");

    std::optional<GradedBasis> basis;
    std::optional<std::string> cyclic;
    std::vector<std::string> op_lines;
    Cursor m{module_body};
    while (!m.done()) {
        const std::string& line = m.next();
        std::string val;
        if (line == "basis {") {
            basis = parse_basis_block(m);
        } else if (is_kv(line, "cyclic", val)) {
            cyclic = val;
        } else if (line.rfind("n[", 0) == 0) {
            op_lines.push_back(line);
        } else {
            throw ParseError("unrecognized line '" + line + "'");
        }
    }
    if (!basis) throw ParseError("missing basis block in the module section");
    basis->validate();
    if (cyclic) basis->index_of(*cyclic);

    TriModuleFile out{AInfinityTriModule(left, rfirst, rsecond, *basis), cyclic};
    AInfinityTriModule& D = out.module;
    for (const auto& raw : op_lines) {
        OpLine op = parse_op_line(raw, 'n', 3);
        auto groups = split_depth0(op.args, '|');
        if (groups.size() != 4)
            throw ParseError("expected four '|'-separated input groups in '" + raw + "'");
        AInfinityTriModule::Arity a{op.arity[0], op.arity[1], op.arity[2]};
        auto xi = name_list(groups[0]);
        auto eta = name_list(groups[2]);
        auto zeta = name_list(groups[3]);
        if (trim(groups[1]).empty())
            throw ParseError("missing module input in '" + raw + "'");
        if (xi.size() != a.kpp || eta.size() != a.kp || zeta.size() != a.k)
            throw ParseError("input counts do not match the arity in '" + raw + "'");
        std::vector<size_t> tuple = resolve(xi, D.left().basis());
        tuple.push_back(D.basis().index_of(trim(groups[1])));
        for (size_t i : resolve(eta, D.right_first().basis())) tuple.push_back(i);
        for (size_t i : resolve(zeta, D.right_second().basis())) tuple.push_back(i);
        D.set_op(a, op.energy, tuple, parse_rhs(D.basis(), D.trunc(), D.cap(), op.rhs));
    }
    return out;
}

FanFile parse_fan(const std::string& text) {
    FanFile f;
    bool have_rays = false, have_cones = false, have_areas = false;
    for (const auto& line : logical_lines(text)) {
        std::string val;
        if (is_kv(line, "rays", val)) {
            f.td.rays = parse_zmat(val);
            have_rays = true;
        } else if (is_kv(line, "cones", val)) {
            for (const auto& it : list_items(val, '[', ']')) {
                std::vector<size_t> cone;
                for (const auto& n : list_items(it, '[', ']'))
                    cone.push_back(uint_of(n));
                f.td.max_cones.push_back(cone);
            }
            have_cones = true;
        } else if (is_kv(line, "areas", val)) {
            f.td.areas = parse_qvec(val);
            have_areas = true;
        } else if (is_kv(line, "names", val)) {
            for (const auto& it : list_items(val, '[', ']'))
                f.td.names.push_back(it);
        } else if (is_kv(line, "subtorus", val)) {
            SubtorusAction sub;
            bool have_gen = false, have_level = false;
            for (const auto& part : list_items(val, '{', '}')) {
                std::string inner;
                if (is_kv(part, "generators", inner)) {
                    sub.generators = parse_zmat(inner);
                    have_gen = true;
                } else if (is_kv(part, "level", inner)) {
                    sub.level = parse_qvec(inner);
                    have_level = true;
                } else {
                    throw ParseError("unrecognized subtorus field '" + part + "'");
                }
            }
            if (!have_gen || !have_level)
                throw ParseError("subtorus needs both generators and level");
            f.sub = sub;
        } else {
            throw ParseError("unrecognized line '" + line + "'");
        }
    }
    if (!have_rays) throw ParseError("missing 'rays'");
    if (!have_cones) throw ParseError("missing 'cones'");
    if (!have_areas) throw ParseError("missing 'areas'");
    if (f.td.names.empty())
        for (size_t i = 1; i <= f.td.nrays(); ++i)
            f.td.names.push_back("D" + std::to_string(i));
    f.td.validate();
    if (f.sub) f.sub->validate(f.td.dim());
    return f;
}

std::string serialize_fan(const FanFile& f) {
    std::string out;
    out += "rays = " + zmat_str(f.td.rays) + "\n";
    std::vector<std::string> cones;
    for (const auto& c : f.td.max_cones) {
        std::vector<std::string> parts;
        for (size_t i : c) parts.push_back(std::to_string(i));
        cones.push_back("[" + join(parts, ", ") + "]");
    }
    out += "cones = [" + join(cones, ", ") + "]\n";
    out += "areas = " + qlist_str(f.td.areas) + "\n";
    bool default_names = f.td.names.empty();
    if (!default_names) {
        default_names = true;
        for (size_t i = 0; i < f.td.names.size(); ++i)
            default_names = default_names && f.td.names[i] == "D" + std::to_string(i + 1);
    }
    if (!default_names) out += "names = [" + join(f.td.names, ", ") + "]\n";
    if (f.sub)
        out += "subtorus = { generators = " + zmat_str(f.sub->generators) +
               ", level = " + qlist_str(f.sub->level) + " }\n";
    return out;
}

namespace {

std::string unquote(const std::string& s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
        return s.substr(1, s.size() - 2);
    return s;
}

long long_of(const std::string& tok) {
    size_t pos = 0;
    long v = 0;
    try {
        v = std::stol(tok, &pos);
    } catch (const std::exception&) {
        throw ParseError("expected an integer, got '" + tok + "'");
    }
    if (pos != tok.size()) throw ParseError("expected an integer, got '" + tok + "'");
    return v;
}

bool bool_of(const std::string& tok) {
    if (tok == "true") return true;
    if (tok == "false") return false;
    throw ParseError("expected true or false, got '" + tok + "'");
}

} // namespace

RestrictConfig parse_restrict_config(const std::string& text) {
    RestrictConfig cfg;
    for (const auto& line : logical_lines(text)) {
        std::string val;
        if (is_kv(line, "fan", val)) {
            cfg.fan = unquote(val);
        } else if (is_kv(line, "equivariant", val)) {
            cfg.equivariant = bool_of(val);
        } else if (is_kv(line, "trunc", val)) {
            cfg.trunc = parse_rational(val);
        } else if (is_kv(line, "cap", val)) {
            cfg.cap = uint_of(val);
        } else if (is_kv(line, "eliminate", val)) {
            for (const auto& it : list_items(val, '[', ']'))
                cfg.eliminate.push_back(uint_of(it));
        } else if (is_kv(line, "constraint", val)) {
            std::optional<ZExp> covector;
            std::optional<std::string> value;
            for (const auto& part : list_items(val, '{', '}')) {
                std::string inner;
                if (is_kv(part, "covector", inner)) {
                    ZExp e;
                    for (const auto& it : list_items(inner, '[', ']'))
                        e.push_back(long_of(it));
                    covector = e;
                } else if (is_kv(part, "value", inner)) {
                    value = unquote(inner);
                } else {
                    throw ParseError("unrecognized constraint field '" + part + "'");
                }
            }
            if (!covector || !value)
                throw ParseError("a constraint needs both covector and value");
            cfg.covectors.push_back(*covector);
            cfg.values.push_back(*value);
        } else {
            throw ParseError("unrecognized line '" + line + "'");
        }
    }
    if (cfg.fan.empty()) throw ParseError("missing 'fan'");
    if (cfg.eliminate.empty()) throw ParseError("missing 'eliminate'");
    if (cfg.eliminate.size() != cfg.covectors.size())
        throw ParseError("one constraint per eliminated variable required");
    return cfg;
}

TelemanConfig parse_teleman_config(const std::string& text) {
    TelemanConfig cfg;
    for (const auto& line : logical_lines(text)) {
        std::string val;
        if (is_kv(line, "y_fan", val)) {
            cfg.y_fan = unquote(val);
        } else if (is_kv(line, "x_fan", val)) {
            cfg.x_fan = unquote(val);
        } else {
            throw ParseError("unrecognized line '" + line + "'");
        }
    }
    if (cfg.y_fan.empty()) throw ParseError("missing 'y_fan'");
    if (cfg.x_fan.empty()) throw ParseError("missing 'x_fan'");
    return cfg;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvariantError("cannot write '" + path + "'");
    out << text;
    if (!out) throw InvariantError("failed writing '" + path + "'");
}

} // namespace floerpot
