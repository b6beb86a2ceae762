#include "polyimage/conic_program.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace polyimage {

int ConicProgram::max_block_side() const {
    int s = 0;
    for (int k : block_sizes) s = std::max(s, k);
    return s;
}

long long ConicProgram::num_scalar_variables() const {
    long long count = num_free;
    for (int s : block_sizes) count += static_cast<long long>(s) * (s + 1) / 2;
    return count;
}

int ConicProgram::add_block(std::string name, int side) {
    if (side < 1) throw std::invalid_argument("ConicProgram: block side must be >= 1");
    block_sizes.push_back(side);
    block_names.push_back(std::move(name));
    return num_blocks() - 1;
}

int ConicProgram::add_free(double cost) {
    c_free.conservativeResize(num_free + 1);
    c_free(num_free) = cost;
    return num_free++;
}

int ConicProgram::add_row(double rhs) {
    const int i = num_rows();
    b.conservativeResize(i + 1);
    b(i) = rhs;
    row_scale.conservativeResize(i + 1);
    row_scale(i) = 1.0;
    free_rows.emplace_back();
    row_entries.emplace_back();
    return i;
}

void ConicProgram::add_free_coefficient(int row, int var, double value) {
    free_rows.at(static_cast<std::size_t>(row)).emplace_back(var, value);
}

void ConicProgram::add_entry(int row, int block, int i, int j, double value) {
    if (i > j) std::swap(i, j);
    row_entries.at(static_cast<std::size_t>(row)).push_back({block, i, j, value});
}

void ConicProgram::add_objective_entry(int block, int i, int j, double value) {
    if (i > j) std::swap(i, j);
    c_entries.push_back({block, i, j, value});
}

namespace {

void merge_entries(std::vector<SymEntry>& entries) {
    std::map<std::tuple<int, int, int>, double> acc;
    for (const auto& e : entries) acc[{e.block, e.row, e.col}] += e.value;
    entries.clear();
    for (const auto& [key, v] : acc)
        if (v != 0.0) entries.push_back({std::get<0>(key), std::get<1>(key), std::get<2>(key), v});
}

void merge_free(std::vector<std::pair<int, double>>& row) {
    std::map<int, double> acc;
    for (const auto& [k, v] : row) acc[k] += v;
    row.clear();
    for (const auto& [k, v] : acc)
        if (v != 0.0) row.emplace_back(k, v);
}

} // namespace

void ConicProgram::finalize() {
    for (auto& row : row_entries) merge_entries(row);
    for (auto& row : free_rows) merge_free(row);
    merge_entries(c_entries);
    validate();
}

void ConicProgram::normalize_rows() {
    for (int i = 0; i < num_rows(); ++i) {
        double m = 0.0;
        for (const auto& [k, v] : free_rows[static_cast<std::size_t>(i)]) m = std::max(m, std::abs(v));
        for (const auto& e : row_entries[static_cast<std::size_t>(i)]) m = std::max(m, std::abs(e.value));
        if (m == 0.0 || m == 1.0) continue;
        const double s = 1.0 / m;
        for (auto& [k, v] : free_rows[static_cast<std::size_t>(i)]) v *= s;
        for (auto& e : row_entries[static_cast<std::size_t>(i)]) e.value *= s;
        b(i) *= s;
        row_scale(i) *= s;
    }
}

void ConicProgram::validate() const {
    const auto nb = static_cast<std::size_t>(num_blocks());
    if (block_names.size() != nb) throw std::invalid_argument("ConicProgram: block names do not cover blocks");
    if (c_free.size() != num_free) throw std::invalid_argument("ConicProgram: free cost vector has wrong length");
    if (free_rows.size() != static_cast<std::size_t>(num_rows()) || row_entries.size() != free_rows.size() ||
        row_scale.size() != num_rows())
        throw std::invalid_argument("ConicProgram: row arrays have inconsistent lengths");
    auto check = [&](const SymEntry& e) {
        if (e.block < 0 || e.block >= num_blocks()) throw std::invalid_argument("ConicProgram: entry references unknown block");
        const int side = block_sizes[static_cast<std::size_t>(e.block)];
        if (e.row < 0 || e.col < e.row || e.col >= side) throw std::invalid_argument("ConicProgram: entry outside block");
    };
    for (const auto& row : row_entries)
        for (const auto& e : row) check(e);
    for (const auto& e : c_entries) check(e);
    for (const auto& row : free_rows)
        for (const auto& [k, v] : row)
            if (k < 0 || k >= num_free) throw std::invalid_argument("ConicProgram: row references unknown free variable");
}

double ConicProgram::reported_objective(double primal, double dual) const {
    if (form == Form::kEquality) return sense == Sense::kMinimize ? primal : -primal;
    return sense == Sense::kMaximize ? dual : -dual;
}

Eigen::MatrixXd assemble_block(const std::vector<SymEntry>& entries, int block, int side) {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(side, side);
    for (const auto& e : entries) {
        if (e.block != block) continue;
        M(e.row, e.col) += e.value;
        if (e.row != e.col) M(e.col, e.row) += e.value;
    }
    return M;
}

} // namespace polyimage
