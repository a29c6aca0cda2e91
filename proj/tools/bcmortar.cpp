// Copyright (c) 2026 the bcmortar authors
// SPDX-License-Identifier: Apache-2.0

#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bcm/experiments.hpp"

namespace {

std::vector<bcm::Method> parse_methods(const std::string& list)
{
    std::vector<bcm::Method> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        const std::size_t comma = list.find(',', pos);
        const std::string item = list.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        if (item == "derham")
            out.push_back(bcm::Method::DeRham);
        else if (item == "galerkin")
            out.push_back(bcm::Method::Galerkin);
        else if (item == "bc")
            out.push_back(bcm::Method::BC);
        else if (!item.empty())
            throw CLI::ValidationError("--methods", "unknown method '" + item + "'");
        if (comma == std::string::npos)
            break;
        pos = comma + 1;
    }
    if (out.empty())
        throw CLI::ValidationError("--methods", "no methods given");
    return out;
}

std::ofstream open_out(const std::string& path)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open output file " + path);
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Buffa-Christiansen dual complexes and nonconforming mesh coupling"};
    app.require_subcommand(1);

    int level = 1;
    int degree = 0;
    int steps = 100;
    int max_level = 4;
    std::string methods = "derham,galerkin,bc";
    std::string out_path;
    std::string which = "i";

    auto* verify = app.add_subcommand("verify", "run the invariant suite and print a pass/fail table");
    verify->add_option("--level", level, "refinement level of the test meshes")->default_val(1);

    auto* exp1 = app.add_subcommand("exp1", "repeated back-and-forth mapping, relative L2 error per step");
    exp1->add_option("--degree", degree, "form degree (0 scalar, 1 vector)")->required()->check(CLI::Range(0, 1));
    exp1->add_option("--methods", methods, "comma list out of derham,galerkin,bc");
    exp1->add_option("--level", level, "refinement level")->default_val(2);
    exp1->add_option("--steps", steps, "number of round trips")->default_val(100);
    exp1->add_option("--out", out_path, "CSV output path")->required();
    std::string dump_dofs;
    exp1->add_option("--dump-final", dump_dofs, "write the final mapped coefficients to FILE.<method>");

    auto* exp2 = app.add_subcommand("exp2", "convergence under uniform refinement, one round trip");
    exp2->add_option("--degree", degree, "form degree (0 scalar, 1 vector)")->required()->check(CLI::Range(0, 1));
    exp2->add_option("--methods", methods, "comma list out of derham,galerkin,bc");
    exp2->add_option("--max-level", max_level, "finest refinement level")->default_val(4);
    exp2->add_option("--out", out_path, "CSV output path")->required();

    auto* cond = app.add_subcommand("cond", "condition numbers of the own-pairing matrices");
    cond->add_option("--max-level", max_level, "finest refinement level")->default_val(3);
    cond->add_option("--methods", methods, "comma list out of galerkin,bc");
    cond->add_option("--out", out_path, "CSV output path")->required();

    auto* mesh_cmd = app.add_subcommand("mesh", "write one of the structured test meshes");
    mesh_cmd->add_option("--level", level, "refinement level")->default_val(0);
    mesh_cmd->add_option("--which", which, "which mesh of the pair, i or j")->check(CLI::IsMember({"i", "j"}));
    mesh_cmd->add_option("--out", out_path, "mesh output path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (verify->parsed()) {
            const bcm::VerifyResult vr = bcm::verify_report(level);
            bcm::write_verify(std::cout, vr);
            return vr.all_hard_pass ? 0 : 1;
        }
        if (exp1->parsed()) {
            bcm::ExperimentConfig cfg;
            cfg.methods = parse_methods(methods);
            cfg.degree = degree;
            cfg.level = level;
            cfg.steps = steps;
            cfg.dump_dofs = dump_dofs;
            const bcm::Exp1Result res = bcm::experiment1(cfg);
            auto out = open_out(out_path);
            bcm::write_csv_exp1(out, res.rows);
            std::printf("exp1: degree %d, level %d, %d round trips; worst CGS iterations to 1e-6: %d\n", degree,
                        level, steps, res.max_cgs_iterations_to_1e6);
            for (const auto& r : res.rows)
                if (r.nu == steps)
                    std::printf("  err_%d(%s) = %.6g %%\n", steps, bcm::method_name(r.method), r.err_percent);
            return 0;
        }
        if (exp2->parsed()) {
            bcm::ExperimentConfig cfg;
            cfg.methods = parse_methods(methods);
            cfg.degree = degree;
            cfg.max_level = max_level;
            const bcm::Exp2Result res = bcm::experiment2(cfg);
            auto out = open_out(out_path);
            bcm::write_csv_exp2(out, res.records);
            std::printf("exp2: degree %d, levels 1..%d; worst CGS iterations to 1e-6: %d\n", degree, max_level,
                        res.max_cgs_iterations_to_1e6);
            for (const auto& rate : res.rates)
                std::printf("  rate %s %s: p = %.3f\n", bcm::method_name(rate.method), bcm::norm_name(rate.norm),
                            rate.rate);
            return 0;
        }
        if (cond->parsed()) {
            std::vector<bcm::Method> ms = parse_methods(methods);
            const auto rows = bcm::condition_report(max_level, ms);
            auto out = open_out(out_path);
            bcm::write_csv_cond(out, rows);
            for (const auto& r : rows)
                std::printf("  kappa(%s, r=%d, level %d) = %.4g\n", bcm::method_name(r.method), r.degree, r.level,
                            r.kappa);
            return 0;
        }
        if (mesh_cmd->parsed()) {
            auto [mi, mj] = bcm::gen_test_meshes(level);
            bcm::write_mesh_file(out_path, which == "i" ? mi : mj);
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
