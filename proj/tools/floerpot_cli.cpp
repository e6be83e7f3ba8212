#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "floerpot/contraction.hpp"
#include "floerpot/error.hpp"
#include "floerpot/io.hpp"
#include "floerpot/toric.hpp"
#include "floerpot/trimodule.hpp"

using namespace floerpot;

namespace {

struct Common {
    std::string output;
    unsigned jobs = 1;
};

// --jobs is accepted for interface stability; evaluation is sequential, so
// every setting produces the same bytes.
void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("--output", c.output, "write the report to a file");
    cmd->add_option("--jobs", c.jobs, "worker count")->check(CLI::PositiveNumber);
}

void emit(const std::string& text, const Common& c) {
    if (c.output.empty())
        std::cout << text;
    else
        write_file(c.output, text);
}

std::string sibling(const std::string& config_path, const std::string& rel) {
    std::filesystem::path p(rel);
    if (p.is_absolute()) return rel;
    return (std::filesystem::path(config_path).parent_path() / p).string();
}

FanFile load_fan(const std::string& path) { return parse_fan(read_file(path)); }

bool standard_prefix(const ToricData& td) {
    size_t d = td.dim();
    if (td.nrays() < d) return false;
    for (size_t i = 0; i < d; ++i)
        for (size_t j = 0; j < d; ++j)
            if (td.rays[i][j] != Integer(i == j ? 1 : 0)) return false;
    return true;
}

const SubtorusAction& require_subtorus(const FanFile& f) {
    if (!f.sub) throw InvariantError("the fan file declares no subtorus");
    return *f.sub;
}

Complex classical_complex(const AInfinityAlgebra& A) {
    size_t n = A.basis().size();
    Complex c;
    c.basis = A.basis();
    c.d = qmat_zero(n, n);
    auto kit = A.ops().find(1);
    if (kit != A.ops().end()) {
        auto eit = kit->second.find(0);
        if (eit != kit->second.end())
            for (const auto& [tuple, value] : eit->second)
                for (const auto& [i, s] : value) c.d[i][tuple[0]] = s.rational_part();
    }
    return c;
}

Element one_element(const AInfinityTriModule& D, const std::string& name) {
    size_t idx = D.basis().index_of(name);
    return Element{{idx, NovikovSeries::constant(1, D.trunc(), D.cap())}};
}

int dispatch(const std::function<int()>& action) {
    try {
        return action();
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const CheckFailure& e) {
        std::cerr << "check failed: " << e.what() << "\n";
        return 1;
    } catch (const InvariantError& e) {
        std::cerr << "invariant violated: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Disc potentials, mirror maps, and filtered A-infinity structures"};
    app.require_subcommand(1);
    std::function<int()> action;

    // potential
    {
        auto* cmd = app.add_subcommand("potential", "disc potential of a fan");
        auto opts = std::make_shared<Common>();
        auto path = std::make_shared<std::string>();
        auto trunc = std::make_shared<std::string>();
        auto cap = std::make_shared<unsigned>(2);
        auto equivariant = std::make_shared<bool>(false);
        cmd->add_option("fan", *path, "fan file")->required();
        cmd->add_flag("--equivariant", *equivariant,
                      "include the subtorus lambda-log terms");
        cmd->add_option("--trunc", *trunc, "energy truncation (rational)");
        cmd->add_option("--lambda-cap", *cap, "lambda degree cap");
        add_common(cmd, *opts);
        cmd->callback([=, &action] {
            action = [=] {
                FanFile f = load_fan(*path);
                Exponent tr = trunc->empty() ? Exponent(0) : parse_rational(*trunc);
                LaurentPotential W = *equivariant
                    ? equivariant_potential(f.td, require_subtorus(f), tr, *cap)
                    : basic_disc_potential(f.td, tr);
                if (!*equivariant && standard_prefix(f.td)) {
                    std::vector<Exponent> shifts;
                    for (size_t i = 0; i < f.td.dim(); ++i)
                        shifts.push_back(-f.td.areas[i]);
                    W = W.scale_variables(shifts);
                }
                emit(W.str() + "\n", *opts);
                return 0;
            };
        });
    }

    // mirror-map / inverse-mirror-map
    for (bool inverse_only : {false, true}) {
        auto* cmd = app.add_subcommand(
            inverse_only ? "inverse-mirror-map" : "mirror-map",
            inverse_only ? "inverse semi-Fano mirror map of a fan"
                         : "semi-Fano mirror map of a fan, both directions");
        auto opts = std::make_shared<Common>();
        auto path = std::make_shared<std::string>();
        auto order = std::make_shared<unsigned>(6);
        cmd->add_option("fan", *path, "fan file")->required();
        cmd->add_option("--order", *order, "total degree bound")
            ->check(CLI::PositiveNumber);
        add_common(cmd, *opts);
        cmd->callback([=, &action] {
            action = [=] {
                FanFile f = load_fan(*path);
                MirrorMap mm = mirror_map(curve_class_lattice(f.td), f.td, *order);
                std::string out;
                std::istringstream lines(mm.str());
                for (std::string line; std::getline(lines, line);)
                    if (!inverse_only || line.rfind("qc_", 0) == 0)
                        out += line + "\n";
                emit(out, *opts);
                return 0;
            };
        });
    }

    // semifano-potential
    {
        auto* cmd = app.add_subcommand("semifano-potential",
                                       "mirror-corrected disc potential");
        auto opts = std::make_shared<Common>();
        auto path = std::make_shared<std::string>();
        auto order = std::make_shared<unsigned>(6);
        auto trunc = std::make_shared<std::string>();
        cmd->add_option("fan", *path, "fan file")->required();
        cmd->add_option("--order", *order, "mirror map degree bound")
            ->check(CLI::PositiveNumber);
        cmd->add_option("--trunc", *trunc, "energy truncation (rational)");
        add_common(cmd, *opts);
        cmd->callback([=, &action] {
            action = [=] {
                FanFile f = load_fan(*path);
                Exponent tr = trunc->empty() ? Exponent(0) : parse_rational(*trunc);
                LaurentPotential W =
                    semifano_potential(curve_class_lattice(f.td), f.td, *order, tr);
                emit(W.str() + "\n", *opts);
                return 0;
            };
        });
    }

    // maslov
    {
        auto* cmd = app.add_subcommand(
            "maslov", "Maslov index of a correspondence class beta_i^B");
        auto opts = std::make_shared<Common>();
        auto path = std::make_shared<std::string>();
        auto stratum = std::make_shared<std::vector<size_t>>();
        auto divisor = std::make_shared<size_t>();
        cmd->add_option("fan", *path, "fan file with a subtorus block")->required();
        cmd->add_option("--stratum", *stratum, "hit stratum B (1-based ray indices)")
            ->delimiter(',');
        cmd->add_option("--divisor", *divisor, "missed divisor index i")->required();
        add_common(cmd, *opts);
        cmd->callback([=, &action] {
            action = [=] {
                FanFile f = load_fan(*path);
                int mu = maslov_index_correspondence(f.td, require_subtorus(f),
                                                     *stratum, *divisor);
                emit(fmt::format("maslov = {}\n", mu), *opts);
                return 0;
            };
        });
    }

    // missed-divisors
    {
        auto* cmd = app.add_subcommand("missed-divisors",
                                       "divisors cut off by the moment level");
        auto opts = std::make_shared<Common>();
        auto path = std::make_shared<std::string>();
        cmd->add_option("fan", *path, "fan file with a subtorus block")->required();
        add_common(cmd, *opts);
        cmd->callback([=, &action] {
            action = [=] {
                FanFile f = load_fan(*path);
                MissedReport mr = missed_divisors(f.td, require_subtorus(f));
                auto names = [&](const std::vector<size_t>& idx) {
                    if (idx.empty()) return std::string("none");
                    std::string out;
                    for (size_t i : idx)
                        out += (out.empty() ? "" : ", ") + f.td.ray_name(i);
                    return out;
                };
                emit(fmt::format("missed: {}\nhit: {}\n", names(mr.missed),
                                 names(mr.hit)),
                     *opts);
                return 0;
            };
        });
    }

    // restrict
    {
        auto* cmd = app.add_subcommand("restrict",
                                       "restrict a potential along constraints");
        auto opts = std::make_shared<Common>();
        auto path = std::make_shared<std::string>();
        cmd->add_option("config", *path, "restriction job file")->required();
        add_common(cmd, *opts);
        cmd->callback([=, &action] {
            action = [=] {
                RestrictConfig cfg = parse_restrict_config(read_file(*path));
                FanFile f = load_fan(sibling(*path, cfg.fan));
                Exponent tr = cfg.trunc.value_or(0);
                unsigned cap = cfg.cap ? cfg.cap : (cfg.equivariant ? 2u : 1u);
                LaurentPotential W = cfg.equivariant
                    ? equivariant_potential(f.td, require_subtorus(f), tr, cap)
                    : basic_disc_potential(f.td, tr, cap);
                std::vector<Constraint> constraints;
                for (size_t r = 0; r < cfg.covectors.size(); ++r)
                    constraints.push_back(
                        {cfg.covectors[r],
                         NovikovSeries::parse(cfg.values[r], W.trunc(), W.cap())});
                emit(restrict_potential(W, constraints, cfg.eliminate).str() + "\n",
                     *opts);
                return 0;
            };
        });
    }

    // verify-teleman
    {
        auto* cmd = app.add_subcommand(
            "verify-teleman", "match a quotient potential against its reduction");
        auto opts = std::make_shared<Common>();
        auto path = std::make_shared<std::string>();
        auto order = std::make_shared<unsigned>(6);
        cmd->add_option("config", *path, "job file with y_fan and x_fan")->required();
        cmd->add_option("--order", *order, "mirror map degree bound")
            ->check(CLI::PositiveNumber);
        add_common(cmd, *opts);
        cmd->callback([=, &action] {
            action = [=] {
                TelemanConfig cfg = parse_teleman_config(read_file(*path));
                FanFile y = load_fan(sibling(*path, cfg.y_fan));
                FanFile x = load_fan(sibling(*path, cfg.x_fan));
                TelemanReport rep =
                    verify_teleman(y.td, require_subtorus(y), x.td, *order);
                emit(rep.str() + "\n", *opts);
                return rep.ok ? 0 : 1;
            };
        });
    }

    // ainf
    {
        auto* ainf = app.add_subcommand("ainf", "filtered A-infinity operations");
        ainf->require_subcommand(1);

        {
            auto* cmd = ainf->add_subcommand("check", "verify the relations");
            auto opts = std::make_shared<Common>();
            auto path = std::make_shared<std::string>();
            auto order = std::make_shared<unsigned>(4);
            cmd->add_option("algebra", *path, "algebra file")->required();
            cmd->add_option("--order", *order, "largest arity checked")
                ->check(CLI::PositiveNumber);
            add_common(cmd, *opts);
            cmd->callback([=, &action] {
                action = [=] {
                    AInfinityAlgebra A = parse_algebra(read_file(*path));
                    std::string out;
                    for (const auto& v : A.check_ainfinity(*order))
                        out += v.str(A.basis()) + "\n";
                    if (A.basis().unit)
                        for (const auto& line : A.check_unit()) out += line + "\n";
                    if (out.empty()) {
                        emit(fmt::format("ok: relations hold up to arity {}\n",
                                         *order),
                             *opts);
                        return 0;
                    }
                    emit(out, *opts);
                    return 1;
                };
            });
        }

        {
            auto* cmd = ainf->add_subcommand(
                "transfer", "canonical model by homotopy transfer");
            auto opts = std::make_shared<Common>();
            auto path = std::make_shared<std::string>();
            auto order = std::make_shared<unsigned>(4);
            cmd->add_option("algebra", *path, "algebra file")->required();
            cmd->add_option("--order", *order, "largest arity transferred")
                ->check(CLI::PositiveNumber);
            add_common(cmd, *opts);
            cmd->callback([=, &action] {
                action = [=] {
                    AInfinityAlgebra A = parse_algebra(read_file(*path));
                    Contraction c = make_strong_contraction(classical_complex(A));
                    TransferResult r = transfer_algebra(A, c, *order, A.trunc());
                    emit(serialize_algebra(r.algebra) + "\n" +
                             serialize_morphism_table(r.inclusion,
                                                      r.algebra.basis(), A.basis()),
                         *opts);
                    return 0;
                };
            });
        }

        {
            auto* cmd = ainf->add_subcommand(
                "compose", "solve b'' = b o b' through the cyclic element");
            auto opts = std::make_shared<Common>();
            auto path = std::make_shared<std::string>();
            auto b_text = std::make_shared<std::string>("0");
            auto bp_text = std::make_shared<std::string>("0");
            cmd->add_option("trimodule", *path, "tri-module file")->required();
            cmd->add_option("--b", *b_text, "boundary deformation in C");
            cmd->add_option("--bp", *bp_text, "boundary deformation in C'");
            add_common(cmd, *opts);
            cmd->callback([=, &action] {
                action = [=] {
                    TriModuleFile f = parse_trimodule(read_file(*path));
                    if (!f.cyclic)
                        throw InvariantError(
                            "the tri-module file declares no cyclic element");
                    const AInfinityTriModule& D = f.module;
                    auto cyc = D.is_left_cyclic(one_element(D, *f.cyclic));
                    if (!cyc)
                        throw InvariantError(
                            "the declared element fails the cyclicity test");
                    Element bpp =
                        compose(D, *cyc, D.right_second().parse_element(*b_text),
                                D.right_first().parse_element(*bp_text));
                    emit("b'' = " + elem_str(bpp, D.left().basis()) + "\n", *opts);
                    return 0;
                };
            });
        }

        {
            auto* cmd = ainf->add_subcommand(
                "obstruction", "square of the deformed module differential");
            auto opts = std::make_shared<Common>();
            auto path = std::make_shared<std::string>();
            auto bpp_text = std::make_shared<std::string>("0");
            auto bp_text = std::make_shared<std::string>("0");
            auto b_text = std::make_shared<std::string>("0");
            auto y_text = std::make_shared<std::string>();
            auto sign = std::make_shared<int>(1);
            cmd->add_option("trimodule", *path, "tri-module file")->required();
            cmd->add_option("--bpp", *bpp_text, "deformation in C''");
            cmd->add_option("--bp", *bp_text, "deformation in C'");
            cmd->add_option("--b", *b_text, "deformation in C");
            cmd->add_option("--y", *y_text, "module element")->required();
            cmd->add_option("--lambda-sign", *sign, "sign of the lambda term")
                ->check(CLI::IsMember({1, -1}));
            add_common(cmd, *opts);
            cmd->callback([=, &action] {
                action = [=] {
                    TriModuleFile f = parse_trimodule(read_file(*path));
                    const AInfinityTriModule& D = f.module;
                    AInfinityAlgebra on_module(D.basis(), D.trunc(), D.cap());
                    Element r = obstruction_square(
                        D, D.left().parse_element(*bpp_text),
                        D.right_first().parse_element(*bp_text),
                        D.right_second().parse_element(*b_text),
                        on_module.parse_element(*y_text), *sign);
                    emit("residual = " + elem_str(r, D.basis()) + "\n", *opts);
                    return 0;
                };
            });
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    return dispatch(action);
}
