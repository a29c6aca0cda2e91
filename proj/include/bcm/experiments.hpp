// Copyright (c) 2026 the bcmortar authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "bcm/coupling.hpp"

namespace bcm {

enum class Diagonal { NE, NW };

/// Structured unit-square triangulation: n x n squares, each split along the
/// given diagonal.
SurfaceMesh grid_mesh(int n, Diagonal diag);

/// The nonconforming test pair: a 2x2 grid split along the NE diagonal
/// (source, index i) and a 3x3 grid split along the NW diagonal (target,
/// index j), both uniformly refined `level` times.
std::pair<SurfaceMesh, SurfaceMesh> gen_test_meshes(int level);

struct InitialData {
    AnalyticForm form;
    AnalyticForm derivative;
};

/// Smooth test data: sin(pi x) sin(pi y) for r = 0, sin(pi y) dx +
/// sin(pi x) dy for r = 1, and the matching exterior derivatives.
InitialData initial_data(int r);

enum class NormKind { L2, Hd };

struct ConvergenceRecord {
    Method method;
    int degree;
    int level;
    double h;
    double value;
    NormKind norm;
};

struct Exp1Row {
    Method method;
    int degree;
    int level;
    int nu;
    double err_percent;
};

struct ExperimentConfig {
    std::vector<Method> methods{Method::DeRham, Method::Galerkin, Method::BC};
    int degree = 0;
    int level = 2;       // experiment 1
    int steps = 100;     // experiment 1
    int max_level = 4;   // experiment 2
    std::string out;
    std::string dump_dofs;  // experiment 1: write the final coefficients per method
};

struct Exp1Result {
    std::vector<Exp1Row> rows;
    int max_cgs_iterations_to_1e6 = 0;
    std::array<int, 3> max_cgs_by_method{};  // indexed by Method
};

Exp1Result experiment1(const ExperimentConfig& cfg);

struct RateEntry {
    Method method;
    NormKind norm;
    double rate;
};

struct Exp2Result {
    std::vector<ConvergenceRecord> records;
    std::vector<RateEntry> rates;  // regression over all computed levels except level 0
    int max_cgs_iterations_to_1e6 = 0;
    std::array<int, 3> max_cgs_by_method{};  // indexed by Method
};

Exp2Result experiment2(const ExperimentConfig& cfg);

struct VerifyLine {
    std::string name;
    bool pass;
    bool hard;  // failures of soft lines do not affect the exit status
    double value;
    double threshold;
    std::string note;
};

struct VerifyResult {
    std::vector<VerifyLine> lines;
    bool all_hard_pass = true;
};

/// Runs the dual-basis verification suite and the commuting checks for all
/// three methods on the test meshes at the given refinement level.
VerifyResult verify_report(int level);

struct CondRow {
    Method method;
    int degree;
    int level;
    int elements;
    double kappa;
};

std::vector<CondRow> condition_report(int max_level, const std::vector<Method>& methods);

/// Least-squares slope of log(value) against log(h).
double regression_rate(const std::vector<double>& h, const std::vector<double>& err);

// CSV emission, columns: experiment,method,degree,level,h_or_nu,value,norm
void write_csv_exp1(std::ostream& out, const std::vector<Exp1Row>& rows);
void write_csv_exp2(std::ostream& out, const std::vector<ConvergenceRecord>& records);
void write_csv_cond(std::ostream& out, const std::vector<CondRow>& rows);
void write_verify(std::ostream& out, const VerifyResult& vr);

const char* norm_name(NormKind k);

}  // namespace bcm
