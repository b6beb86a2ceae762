#pragma once

#include <Eigen/Core>

#include <string>
#include <utility>
#include <vector>

namespace polyimage {

/// One symmetric-matrix coefficient: value at (row, col) and (col, row), row <= col.
struct SymEntry {
    int block = 0;
    int row = 0;
    int col = 0;
    double value = 0.0;

    friend bool operator==(const SymEntry& a, const SymEntry& b) {
        return a.block == b.block && a.row == b.row && a.col == b.col && a.value == b.value;
    }
};

/// Standard-form SDP data
///
///   P:  min  c_f' x + <C, X>   s.t.  A_f x + A(X) = b,   X psd,  x free
///   D:  max  b' y              s.t.  A_f' y = c_f,  C - A*(y) psd
///
/// `form` says which side the builder meant: kEquality (coefficient matching, the program is P)
/// or kLmi (moment relaxation, the program is D and y holds pseudo-moments).
/// `sense` is the builder's own objective sense; the stored data are always in the P/D form above.
struct ConicProgram {
    enum class Form { kEquality, kLmi };
    enum class Sense { kMinimize, kMaximize };

    Form form = Form::kEquality;
    Sense sense = Sense::kMinimize;

    std::vector<int> block_sizes;
    std::vector<std::string> block_names;
    int num_free = 0;

    Eigen::VectorXd c_free;
    std::vector<SymEntry> c_entries;

    Eigen::VectorXd b;
    std::vector<std::vector<std::pair<int, double>>> free_rows;
    std::vector<std::vector<SymEntry>> row_entries;
    /// Factor each row was multiplied by during normalization (1 when untouched).
    Eigen::VectorXd row_scale;

    int num_rows() const { return static_cast<int>(b.size()); }
    int num_blocks() const { return static_cast<int>(block_sizes.size()); }
    int max_block_side() const;
    /// Scalar unknowns of P: free scalars plus the upper triangles of the blocks.
    long long num_scalar_variables() const;

    int add_block(std::string name, int side);
    int add_free(double cost = 0.0);
    /// Appends an empty row with right-hand side `rhs`; returns its index.
    int add_row(double rhs);
    void add_free_coefficient(int row, int var, double value);
    void add_entry(int row, int block, int i, int j, double value);
    void add_objective_entry(int block, int i, int j, double value);

    /// Merges duplicate coordinates, drops zeros and sorts every row; throws on malformed data.
    void finalize();
    /// Scales each row so its largest |coefficient| is 1 and records the factor.
    void normalize_rows();
    /// Throws std::invalid_argument if any row references past the layout.
    void validate() const;

    /// The builder's objective, given the P and D objectives of the stored data.
    double reported_objective(double primal, double dual) const;
};

/// Dense symmetric matrix of a block from entries.
Eigen::MatrixXd assemble_block(const std::vector<SymEntry>& entries, int block, int side);

} // namespace polyimage
