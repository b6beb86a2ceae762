#include "polyimage/sdpa_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <tuple>
#include <vector>

namespace polyimage {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Line {
    int matrix;
    int block;
    int i;
    int j;
    double value;
};

} // namespace

void export_sdpa(const ConicProgram& prog, std::ostream& out) {
    prog.validate();
    const int nf = prog.num_free;
    const int lp = nf > 0 ? 1 : 0;

    out << "\"polyimage form=" << (prog.form == ConicProgram::Form::kEquality ? "equality" : "lmi")
        << " sense=" << (prog.sense == ConicProgram::Sense::kMinimize ? "minimize" : "maximize") << " free=" << nf
        << "\n";
    out << "\"blocks";
    for (const auto& name : prog.block_names) out << ' ' << (name.empty() ? "-" : name);
    out << "\n";
    bool scaled = false;
    for (int i = 0; i < prog.num_rows(); ++i) scaled = scaled || prog.row_scale(i) != 1.0;
    if (scaled) {
        out << "\"row_scale";
        for (int i = 0; i < prog.num_rows(); ++i) out << ' ' << num(prog.row_scale(i));
        out << "\n";
    }

    out << prog.num_rows() << "\n" << prog.num_blocks() + lp << "\n";
    if (lp) out << -2 * nf << (prog.num_blocks() ? " " : "");
    for (int k = 0; k < prog.num_blocks(); ++k) out << prog.block_sizes[static_cast<std::size_t>(k)] << (k + 1 < prog.num_blocks() ? " " : "");
    out << "\n";
    for (int i = 0; i < prog.num_rows(); ++i) out << num(prog.b(i)) << (i + 1 < prog.num_rows() ? " " : "");
    out << "\n";

    std::vector<Line> lines;
    for (int k = 0; k < nf; ++k) {
        if (prog.c_free(k) == 0.0) continue;
        lines.push_back({0, 1, 2 * k + 1, 2 * k + 1, -prog.c_free(k)});
        lines.push_back({0, 1, 2 * k + 2, 2 * k + 2, prog.c_free(k)});
    }
    for (const auto& e : prog.c_entries) lines.push_back({0, e.block + 1 + lp, e.row + 1, e.col + 1, -e.value});
    for (int i = 0; i < prog.num_rows(); ++i) {
        for (const auto& [k, v] : prog.free_rows[static_cast<std::size_t>(i)]) {
            lines.push_back({i + 1, 1, 2 * k + 1, 2 * k + 1, v});
            lines.push_back({i + 1, 1, 2 * k + 2, 2 * k + 2, -v});
        }
        for (const auto& e : prog.row_entries[static_cast<std::size_t>(i)])
            lines.push_back({i + 1, e.block + 1 + lp, e.row + 1, e.col + 1, e.value});
    }
    std::sort(lines.begin(), lines.end(), [](const Line& a, const Line& b) {
        return std::tie(a.matrix, a.block, a.i, a.j) < std::tie(b.matrix, b.block, b.i, b.j);
    });
    for (const auto& l : lines) out << l.matrix << ' ' << l.block << ' ' << l.i << ' ' << l.j << ' ' << num(l.value) << "\n";
    if (!out) throw std::runtime_error("export_sdpa: write failed");
}

void export_sdpa_file(const ConicProgram& prog, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("export_sdpa: cannot open " + path);
    export_sdpa(prog, out);
}

namespace {

// SDPA allows ',', '(', ')', '{', '}' as separators in the header.
/// Separators become blanks; everything from the first non-numeric token on (e.g. "=mDIM") is dropped.
std::string strip_separators(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '(' || c == ')' || c == '{' || c == '}') c = ' ';
    std::istringstream in(s);
    std::string out;
    std::string tok;
    while (in >> tok) {
        char* end = nullptr;
        std::strtod(tok.c_str(), &end);
        if (end == tok.c_str() || *end != '\0') break;
        out += tok;
        out += ' ';
    }
    return out;
}

struct Header {
    bool ours = false;
    ConicProgram::Form form = ConicProgram::Form::kEquality;
    ConicProgram::Sense sense = ConicProgram::Sense::kMinimize;
    int free = 0;
    std::vector<std::string> names;
    std::vector<double> row_scale;
};

void read_comment(const std::string& line, Header& h) {
    std::istringstream ss(line.substr(1));
    std::string tag;
    ss >> tag;
    if (tag == "polyimage") {
        h.ours = true;
        std::string kv;
        while (ss >> kv) {
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = kv.substr(0, eq);
            const std::string val = kv.substr(eq + 1);
            if (key == "form") h.form = val == "lmi" ? ConicProgram::Form::kLmi : ConicProgram::Form::kEquality;
            else if (key == "sense") h.sense = val == "maximize" ? ConicProgram::Sense::kMaximize : ConicProgram::Sense::kMinimize;
            else if (key == "free") h.free = std::stoi(val);
        }
    } else if (tag == "blocks") {
        std::string name;
        while (ss >> name) h.names.push_back(name == "-" ? std::string() : name);
    } else if (tag == "row_scale") {
        std::string v;
        while (ss >> v) h.row_scale.push_back(std::stod(v));
    }
}

} // namespace

ConicProgram import_sdpa(std::istream& in) {
    Header h;
    std::string line;
    std::vector<std::string> body;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (body.empty() && (line.empty() || line[0] == '"' || line[0] == '*')) {
            if (!line.empty() && line[0] == '"') read_comment(line, h);
            continue;
        }
        body.push_back(line);
    }
    std::istringstream ss;
    std::string joined;
    for (const auto& l : body) joined += strip_separators(l) + "\n";
    ss.str(joined);

    int m = 0;
    int nblocks = 0;
    if (!(ss >> m >> nblocks) || m < 0 || nblocks < 0) throw std::invalid_argument("import_sdpa: bad header");
    std::vector<int> sizes(static_cast<std::size_t>(nblocks));
    for (auto& s : sizes)
        if (!(ss >> s) || s == 0) throw std::invalid_argument("import_sdpa: bad block sizes");
    std::vector<double> c(static_cast<std::size_t>(m));
    for (auto& v : c) {
        std::string tok;
        if (!(ss >> tok)) throw std::invalid_argument("import_sdpa: bad objective vector");
        v = std::stod(tok);
    }

    ConicProgram prog;
    prog.form = h.form;
    prog.sense = h.sense;
    const bool lp_free = h.ours && h.free > 0;
    if (lp_free && (sizes.empty() || sizes[0] != -2 * h.free))
        throw std::invalid_argument("import_sdpa: free-variable block does not match the comment line");

    // Map SDPA (block, i) to our (block, row): LP coordinates of foreign files become 1x1 blocks.
    std::vector<int> first_block(static_cast<std::size_t>(nblocks), -1);
    for (int k = 0; k < nblocks; ++k) {
        const int s = sizes[static_cast<std::size_t>(k)];
        if (k == 0 && lp_free) continue;
        const std::size_t name_idx = static_cast<std::size_t>(prog.num_blocks());
        const std::string name = name_idx < h.names.size() ? h.names[name_idx] : std::string();
        if (s > 0) {
            first_block[static_cast<std::size_t>(k)] = prog.add_block(name, s);
        } else {
            first_block[static_cast<std::size_t>(k)] = prog.num_blocks();
            for (int t = 0; t < -s; ++t) prog.add_block(name, 1);
        }
    }
    for (int k = 0; k < (lp_free ? h.free : 0); ++k) prog.add_free(0.0);
    for (int i = 0; i < m; ++i) prog.add_row(c[static_cast<std::size_t>(i)]);

    int mat = 0;
    int blk = 0;
    int i = 0;
    int j = 0;
    std::string tok;
    while (ss >> mat >> blk >> i >> j >> tok) {
        const double v = std::stod(tok);
        if (mat < 0 || mat > m || blk < 1 || blk > nblocks || i < 1 || j < 1)
            throw std::invalid_argument("import_sdpa: entry out of range");
        const int s = sizes[static_cast<std::size_t>(blk - 1)];
        if (std::max(i, j) > std::abs(s)) throw std::invalid_argument("import_sdpa: entry outside its block");
        if (blk == 1 && lp_free) {
            if (i != j) throw std::invalid_argument("import_sdpa: off-diagonal entry in an LP block");
            if (i % 2 == 0) continue; // the x- half mirrors x+
            const int k = (i - 1) / 2;
            if (mat == 0) prog.c_free(k) = -v;
            else prog.add_free_coefficient(mat - 1, k, v);
            continue;
        }
        int b = first_block[static_cast<std::size_t>(blk - 1)];
        int r = std::min(i, j) - 1;
        int col = std::max(i, j) - 1;
        if (s < 0) {
            if (i != j) throw std::invalid_argument("import_sdpa: off-diagonal entry in an LP block");
            b += i - 1;
            r = col = 0;
        }
        if (mat == 0) prog.add_objective_entry(b, r, col, -v);
        else prog.add_entry(mat - 1, b, r, col, v);
    }
    if (!ss.eof()) throw std::invalid_argument("import_sdpa: malformed entry line");
    prog.finalize();
    if (!h.row_scale.empty()) {
        if (static_cast<int>(h.row_scale.size()) != m) throw std::invalid_argument("import_sdpa: row_scale length mismatch");
        for (int r = 0; r < m; ++r) prog.row_scale(r) = h.row_scale[static_cast<std::size_t>(r)];
    }
    return prog;
}

ConicProgram import_sdpa_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("import_sdpa: cannot open " + path);
    return import_sdpa(in);
}

} // namespace polyimage
