#include "polyimage/problem.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace polyimage {

ParseError::ParseError(int line, int column, const std::string& message)
    : std::invalid_argument(line > 0 ? "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + message : message),
      line_(line), column_(column) {}

namespace {

// Recursive descent over + - * / ^ with integer exponents; '/' only by constants.
class ExpressionParser {
public:
    ExpressionParser(const std::string& text, const std::vector<std::string>& names, int line, int column0)
        : text_(text), names_(names), sig_{static_cast<int>(names.size()), 0}, line_(line), col0_(column0) {}

    Polynomial parse() {
        Polynomial p = expr();
        skip();
        if (pos_ < text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
        return p;
    }

private:
    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(line_, col0_ + static_cast<int>(pos_), msg); }

    void skip() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }
    bool peek(char c) {
        skip();
        return pos_ < text_.size() && text_[pos_] == c;
    }

    Polynomial expr() {
        Polynomial p = term();
        while (true) {
            if (peek('+')) {
                ++pos_;
                p += term();
            } else if (peek('-')) {
                ++pos_;
                p -= term();
            } else {
                return p;
            }
        }
    }

    Polynomial term() {
        Polynomial p = unary();
        while (true) {
            if (peek('*')) {
                ++pos_;
                p = p * unary();
            } else if (peek('/')) {
                ++pos_;
                skip();
                const std::size_t at = pos_;
                const Polynomial d = unary();
                if (d.degree() > 0) {
                    pos_ = at;
                    fail("division by a non-constant expression");
                }
                const double c = d.coefficient(MultiIndex(sig_.total()));
                if (c == 0.0) {
                    pos_ = at;
                    fail("division by zero");
                }
                p *= 1.0 / c;
            } else {
                return p;
            }
        }
    }

    Polynomial unary() {
        if (peek('-')) {
            ++pos_;
            return -unary();
        }
        if (peek('+')) {
            ++pos_;
            return unary();
        }
        return power();
    }

    Polynomial power() {
        Polynomial base = primary();
        if (peek('^')) {
            ++pos_;
            skip();
            const std::size_t start = pos_;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
            if (start == pos_) fail("expected a non-negative integer exponent");
            const int e = std::atoi(text_.substr(start, pos_ - start).c_str());
            if (e > 64) {
                pos_ = start;
                fail("exponent too large");
            }
            return poly_pow(base, e);
        }
        return base;
    }

    Polynomial primary() {
        skip();
        if (pos_ >= text_.size()) fail("unexpected end of expression");
        const char c = text_[pos_];
        if (c == '(') {
            ++pos_;
            Polynomial p = expr();
            if (!peek(')')) fail("expected ')'");
            ++pos_;
            return p;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = text_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) fail("bad number");
            pos_ += static_cast<std::size_t>(end - begin);
            return Polynomial::constant(sig_, v);
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_')) ++pos_;
            const std::string name = text_.substr(start, pos_ - start);
            const auto it = std::find(names_.begin(), names_.end(), name);
            if (it == names_.end()) {
                pos_ = start;
                fail("unknown variable '" + name + "'");
            }
            return Polynomial::variable(sig_, static_cast<int>(it - names_.begin()));
        }
        fail("unexpected '" + std::string(1, c) + "'");
    }

    const std::string& text_;
    const std::vector<std::string>& names_;
    BlockSignature sig_;
    int line_;
    int col0_;
    std::size_t pos_ = 0;
};

struct SourceLine {
    int number;
    std::string text;
};

std::string strip_comment(const std::string& s) {
    const auto hash = s.find('#');
    return hash == std::string::npos ? s : s.substr(0, hash);
}

std::string trim(const std::string& s, std::size_t* offset = nullptr) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) {
        if (offset) *offset = s.size();
        return {};
    }
    const auto b = s.find_last_not_of(" \t\r");
    if (offset) *offset = a;
    return s.substr(a, b - a + 1);
}

std::vector<std::string> words(const std::string& s) {
    std::istringstream ss(s);
    std::vector<std::string> out;
    std::string w;
    while (ss >> w) out.push_back(w);
    return out;
}

// "key = value" split; column of value returned through value_col.
bool key_value(const SourceLine& l, std::string& key, std::string& value, int& value_col) {
    const auto eq = l.text.find('=');
    if (eq == std::string::npos || (eq + 1 < l.text.size() && l.text[eq + 1] == '=')) return false;
    if (eq > 0 && (l.text[eq - 1] == '<' || l.text[eq - 1] == '>')) return false;
    key = trim(l.text.substr(0, eq));
    std::size_t off = 0;
    value = trim(l.text.substr(eq + 1), &off);
    value_col = static_cast<int>(eq + 1 + off) + 1;
    return true;
}

Eigen::VectorXd parse_numbers(const SourceLine& l, const std::string& value, int col) {
    std::vector<double> v;
    for (const auto& w : words(value)) {
        char* end = nullptr;
        const double d = std::strtod(w.c_str(), &end);
        if (*end != '\0') throw ParseError(l.number, col, "expected numbers, got '" + w + "'");
        v.push_back(d);
    }
    return Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

enum class Relation { kGe, kLe, kEq };

// Splits "lhs op rhs"; returns g with g >= 0 (or g == 0).
Polynomial parse_relation(const SourceLine& l, const std::vector<std::string>& names, Relation& rel) {
    const std::string& s = l.text;
    std::size_t at = std::string::npos;
    int count = 0;
    for (std::size_t i = 0; i + 1 < s.size(); ++i) {
        const std::string two = s.substr(i, 2);
        if (two == ">=" || two == "<=" || two == "==") {
            if (count == 0) at = i;
            ++count;
            ++i;
        }
    }
    if (count == 0) throw ParseError(l.number, 1, "expected a constraint with >=, <= or ==");
    if (count > 1) throw ParseError(l.number, static_cast<int>(at) + 1, "more than one relation in a constraint");
    const std::string op = s.substr(at, 2);
    rel = op == ">=" ? Relation::kGe : op == "<=" ? Relation::kLe : Relation::kEq;
    const Polynomial lhs = ExpressionParser(s.substr(0, at), names, l.number, 1).parse();
    const Polynomial rhs = ExpressionParser(s.substr(at + 2), names, l.number, static_cast<int>(at) + 3).parse();
    return rel == Relation::kLe ? rhs - lhs : lhs - rhs;
}

int index_of(const std::vector<std::string>& names, const std::string& name) {
    const auto it = std::find(names.begin(), names.end(), name);
    return it == names.end() ? -1 : static_cast<int>(it - names.begin());
}

bool valid_name(const std::string& s) {
    if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(), [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; });
}

} // namespace

Polynomial parse_expression(const std::string& text, const std::vector<std::string>& names) {
    return ExpressionParser(text, names, 1, 1).parse();
}

ProblemSpec parse_problem(const std::string& text) {
    std::map<std::string, std::vector<SourceLine>> sections;
    std::map<std::string, int> section_line;
    std::string current;
    {
        std::istringstream in(text);
        std::string raw;
        int number = 0;
        while (std::getline(in, raw)) {
            ++number;
            std::size_t off = 0;
            const std::string t = trim(strip_comment(raw), &off);
            if (t.empty()) continue;
            if (t.front() == '[') {
                if (t.back() != ']') throw ParseError(number, static_cast<int>(off) + 1, "unterminated section header");
                current = trim(t.substr(1, t.size() - 2));
                static const char* known[] = {"vars", "S", "B", "map", "lift", "cliques", "pareto"};
                if (std::find(std::begin(known), std::end(known), current) == std::end(known))
                    throw ParseError(number, static_cast<int>(off) + 2, "unknown section [" + current + "]");
                if (sections.count(current)) throw ParseError(number, static_cast<int>(off) + 1, "duplicate section [" + current + "]");
                sections[current];
                section_line[current] = number;
                continue;
            }
            if (current.empty()) throw ParseError(number, static_cast<int>(off) + 1, "text before the first section");
            // Keep original columns: pad the trimmed text back to its offset.
            sections[current].push_back({number, std::string(off, ' ') + t});
        }
    }
    for (const char* required : {"vars", "S", "B", "map"})
        if (!sections.count(required)) throw ParseError(0, 0, std::string("missing section [") + required + "]");

    ProblemSpec spec;
    for (const auto& l : sections["vars"]) {
        std::string key, value;
        int col = 0;
        if (!key_value(l, key, value, col) || (key != "x" && key != "y"))
            throw ParseError(l.number, 1, "expected 'x = names' or 'y = names'");
        auto& list = key == "x" ? spec.x_names : spec.y_names;
        if (!list.empty()) throw ParseError(l.number, 1, "variables '" + key + "' declared twice");
        for (const auto& w : words(value)) {
            if (!valid_name(w)) throw ParseError(l.number, col, "bad variable name '" + w + "'");
            if (index_of(spec.x_names, w) >= 0 || index_of(spec.y_names, w) >= 0)
                throw ParseError(l.number, col, "variable '" + w + "' declared twice");
            list.push_back(w);
        }
    }
    if (spec.x_names.empty() || spec.y_names.empty()) throw ParseError(section_line["vars"], 1, "[vars] needs both x and y");
    spec.base_dim = spec.n();

    std::vector<SourceLine> lift_constraints;
    if (sections.count("lift")) {
        for (const auto& l : sections["lift"]) {
            std::string key, value;
            int col = 0;
            if (key_value(l, key, value, col) && key == "vars") {
                for (const auto& w : words(value)) {
                    if (!valid_name(w)) throw ParseError(l.number, col, "bad variable name '" + w + "'");
                    if (index_of(spec.x_names, w) >= 0 || index_of(spec.y_names, w) >= 0)
                        throw ParseError(l.number, col, "variable '" + w + "' declared twice");
                    spec.x_names.push_back(w);
                }
            } else {
                lift_constraints.push_back(l);
            }
        }
        if (spec.n() == spec.base_dim) throw ParseError(section_line["lift"], 1, "[lift] declares no variables");
    }

    auto add_constraint = [&](const SourceLine& l) {
        Relation rel = Relation::kGe;
        Polynomial g = parse_relation(l, spec.x_names, rel);
        if (rel == Relation::kEq) spec.equations.push_back(std::move(g));
        else spec.constraints.push_back(std::move(g));
    };
    for (const auto& l : sections["S"]) add_constraint(l);
    for (const auto& l : lift_constraints) add_constraint(l);

    {
        std::map<std::string, std::pair<SourceLine, std::string>> kv;
        std::map<std::string, int> cols;
        for (const auto& l : sections["B"]) {
            std::string key, value;
            int col = 0;
            if (!key_value(l, key, value, col)) throw ParseError(l.number, 1, "expected 'key = value' in [B]");
            kv.emplace(key, std::make_pair(l, value));
            cols[key] = col;
        }
        auto need = [&](const std::string& key) -> const std::pair<SourceLine, std::string>& {
            auto it = kv.find(key);
            if (it == kv.end()) throw ParseError(section_line["B"], 1, "[B] needs '" + key + "'");
            return it->second;
        };
        const auto& kind = need("kind");
        if (kind.second == "ball") {
            spec.b_kind = BoundingSet::Kind::kBall;
            const auto& c = need("center");
            spec.b_center = parse_numbers(c.first, c.second, cols["center"]);
            const auto& r = need("radius");
            const Eigen::VectorXd rv = parse_numbers(r.first, r.second, cols["radius"]);
            if (rv.size() != 1 || !(rv(0) > 0.0)) throw ParseError(r.first.number, cols["radius"], "radius must be one positive number");
            spec.b_radius = rv(0);
            if (spec.b_center.size() != spec.m()) throw ParseError(c.first.number, cols["center"], "center needs one entry per y variable");
        } else if (kind.second == "box") {
            spec.b_kind = BoundingSet::Kind::kBox;
            const auto& lo = need("lo");
            const auto& hi = need("hi");
            spec.b_lo = parse_numbers(lo.first, lo.second, cols["lo"]);
            spec.b_hi = parse_numbers(hi.first, hi.second, cols["hi"]);
            if (spec.b_lo.size() != spec.m() || spec.b_hi.size() != spec.m())
                throw ParseError(lo.first.number, cols["lo"], "lo and hi need one entry per y variable");
            if (!(spec.b_lo.array() < spec.b_hi.array()).all()) throw ParseError(lo.first.number, cols["lo"], "need lo < hi");
        } else {
            throw ParseError(kind.first.number, cols["kind"], "kind must be 'ball' or 'box'");
        }
        for (const auto& [key, entry] : kv) {
            const bool ok = key == "kind" || (spec.b_kind == BoundingSet::Kind::kBall ? key == "center" || key == "radius"
                                                                                     : key == "lo" || key == "hi");
            if (!ok) throw ParseError(entry.first.number, 1, "unexpected key '" + key + "' in [B]");
        }
    }

    spec.map.assign(static_cast<std::size_t>(spec.m()), Polynomial(BlockSignature{spec.n(), 0}));
    std::vector<bool> defined(static_cast<std::size_t>(spec.m()), false);
    for (const auto& l : sections["map"]) {
        std::string key, value;
        int col = 0;
        if (!key_value(l, key, value, col)) throw ParseError(l.number, 1, "expected 'y = expression' in [map]");
        const int j = index_of(spec.y_names, key);
        if (j < 0) throw ParseError(l.number, 1, "'" + key + "' is not a y variable");
        if (defined[static_cast<std::size_t>(j)]) throw ParseError(l.number, 1, "'" + key + "' defined twice");
        spec.map[static_cast<std::size_t>(j)] = ExpressionParser(value, spec.x_names, l.number, col).parse();
        defined[static_cast<std::size_t>(j)] = true;
    }
    for (int j = 0; j < spec.m(); ++j)
        if (!defined[static_cast<std::size_t>(j)])
            throw ParseError(section_line["map"], 1, "no map component for '" + spec.y_names[static_cast<std::size_t>(j)] + "'");

    if (sections.count("cliques")) {
        for (const auto& l : sections["cliques"]) {
            std::vector<int> clique;
            for (const auto& w : words(l.text)) {
                const int i = index_of(spec.x_names, w);
                if (i < 0) throw ParseError(l.number, static_cast<int>(l.text.find(w)) + 1, "'" + w + "' is not an x variable");
                clique.push_back(i);
            }
            spec.cliques.push_back(std::move(clique));
        }
    }

    if (sections.count("pareto")) {
        spec.pareto = true;
        for (const auto& l : sections["pareto"]) {
            std::string key, value;
            int col = 0;
            if (!key_value(l, key, value, col)) throw ParseError(l.number, 1, "expected 'key = value' in [pareto]");
            if (key == "order") {
                const Eigen::VectorXd v = parse_numbers(l, value, col);
                if (v.size() != 1 || v(0) < 1 || v(0) != std::floor(v(0))) throw ParseError(l.number, col, "order must be a positive integer");
                spec.pareto_order = static_cast<int>(v(0));
            } else if (key == "scaled") {
                if (value != "yes" && value != "no") throw ParseError(l.number, col, "scaled must be 'yes' or 'no'");
                spec.scaled = value == "yes";
            } else if (key == "a" || key == "b") {
                const Eigen::VectorXd v = parse_numbers(l, value, col);
                if (v.size() != spec.m()) throw ParseError(l.number, col, "need one entry per y variable");
                (key == "a" ? spec.scale_a : spec.scale_b).assign(v.data(), v.data() + v.size());
            } else {
                throw ParseError(l.number, 1, "unexpected key '" + key + "' in [pareto]");
            }
        }
        if (spec.scale_a.size() != spec.scale_b.size()) throw ParseError(section_line["pareto"], 1, "[pareto] needs both a and b");
        if (spec.scaled && spec.scale_a.empty()) throw ParseError(section_line["pareto"], 1, "scaled = yes needs a and b");
    }
    return spec;
}

ProblemSpec parse_problem_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open problem file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str());
}

namespace {

// Shortest text that reads back to the same double.
std::string num(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::string join(const std::vector<std::string>& v, std::size_t from = 0, std::size_t to = std::string::npos) {
    std::string out;
    for (std::size_t i = from; i < std::min(to, v.size()); ++i) out += (out.empty() ? "" : " ") + v[i];
    return out;
}

std::string numbers(const Eigen::VectorXd& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) out += (i ? " " : "") + num(v(i));
    return out;
}

} // namespace

std::string format_polynomial(const Polynomial& p, const std::vector<std::string>& names) {
    if (p.is_zero()) return "0";
    std::string out;
    for (const auto& [alpha, c] : p.terms()) {
        const double a = std::abs(c);
        out += out.empty() ? (c < 0 ? "-" : "") : (c < 0 ? " - " : " + ");
        std::string mono;
        for (int i = 0; i < alpha.dim(); ++i) {
            if (alpha[i] == 0) continue;
            if (!mono.empty()) mono += "*";
            mono += names[static_cast<std::size_t>(i)];
            if (alpha[i] > 1) mono += "^" + std::to_string(alpha[i]);
        }
        if (mono.empty()) out += num(a);
        else if (a == 1.0) out += mono;
        else out += num(a) + "*" + mono;
    }
    return out;
}

std::string emit_problem(const ProblemSpec& spec) {
    std::ostringstream out;
    out << "[vars]\n";
    out << "x = " << join(spec.x_names, 0, static_cast<std::size_t>(spec.base_dim)) << "\n";
    out << "y = " << join(spec.y_names) << "\n\n";
    out << "[S]\n";
    for (const auto& g : spec.constraints) out << format_polynomial(g, spec.x_names) << " >= 0\n";
    for (const auto& e : spec.equations) out << format_polynomial(e, spec.x_names) << " == 0\n";
    if (spec.has_lift()) {
        out << "\n[lift]\n";
        out << "vars = " << join(spec.x_names, static_cast<std::size_t>(spec.base_dim)) << "\n";
    }
    out << "\n[B]\n";
    if (spec.b_kind == BoundingSet::Kind::kBall) {
        out << "kind = ball\ncenter = " << numbers(spec.b_center) << "\nradius = " << num(spec.b_radius) << "\n";
    } else {
        out << "kind = box\nlo = " << numbers(spec.b_lo) << "\nhi = " << numbers(spec.b_hi) << "\n";
    }
    out << "\n[map]\n";
    for (int j = 0; j < spec.m(); ++j)
        out << spec.y_names[static_cast<std::size_t>(j)] << " = " << format_polynomial(spec.map[static_cast<std::size_t>(j)], spec.x_names)
            << "\n";
    if (!spec.cliques.empty()) {
        out << "\n[cliques]\n";
        for (const auto& c : spec.cliques) {
            std::vector<std::string> names;
            for (int i : c) names.push_back(spec.x_names[static_cast<std::size_t>(i)]);
            out << join(names) << "\n";
        }
    }
    if (spec.pareto) {
        out << "\n[pareto]\n";
        if (spec.pareto_order > 0) out << "order = " << spec.pareto_order << "\n";
        if (!spec.scale_a.empty()) {
            out << "a = " << numbers(Eigen::Map<const Eigen::VectorXd>(spec.scale_a.data(), static_cast<Eigen::Index>(spec.scale_a.size()))) << "\n";
            out << "b = " << numbers(Eigen::Map<const Eigen::VectorXd>(spec.scale_b.data(), static_cast<Eigen::Index>(spec.scale_b.size()))) << "\n";
        }
        if (spec.scaled) out << "scaled = yes\n";
    }
    return out.str();
}

SemialgebraicSet ProblemSpec::S() const {
    SemialgebraicSet s(BlockSignature{n(), 0});
    for (const auto& g : constraints) s.add_constraint(g);
    for (const auto& e : equations) s.add_equation(e);
    return s;
}

BoundingSet ProblemSpec::B() const {
    return b_kind == BoundingSet::Kind::kBall ? BoundingSet::ball(b_center, b_radius) : BoundingSet::box(b_lo, b_hi);
}

PolynomialMap ProblemSpec::f() const { return PolynomialMap(n(), map); }

bool ProblemSpec::is_projection() const {
    if (m() > n()) return false;
    const BlockSignature sig{n(), 0};
    for (int j = 0; j < m(); ++j)
        if (!(map[static_cast<std::size_t>(j)] == Polynomial::variable(sig, j))) return false;
    return true;
}

} // namespace polyimage
