#include "transposit/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "transposit/errors.hpp"

namespace transposit {

Expr make_constant(double value) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Constant;
    n->value = value;
    return n;
}

Expr make_parameter(std::string name) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Parameter;
    n->name = std::move(name);
    return n;
}

Expr make_variable(std::string name) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Variable;
    n->name = std::move(name);
    return n;
}

Expr make_unary(char op, Expr operand) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Unary;
    n->op = op;
    n->children.push_back(std::move(operand));
    return n;
}

Expr make_binary(char op, Expr lhs, Expr rhs) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Binary;
    n->op = op;
    n->children.push_back(std::move(lhs));
    n->children.push_back(std::move(rhs));
    return n;
}

Expr make_call(Func func, std::vector<Expr> args) {
    auto n = std::make_shared<ExprNode>();
    n->kind = NodeKind::Call;
    n->func = func;
    n->children = std::move(args);
    return n;
}

namespace {

struct FuncEntry {
    const char* name;
    Func func;
    int arity;
};

constexpr std::array<FuncEntry, 10> kFuncs{{
    {"sin", Func::Sin, 1},
    {"cos", Func::Cos, 1},
    {"tan", Func::Tan, 1},
    {"atan", Func::Atan, 1},
    {"atan2", Func::Atan2, 2},
    {"sqrt", Func::Sqrt, 1},
    {"exp", Func::Exp, 1},
    {"ln", Func::Ln, 1},
    {"abs", Func::Abs, 1},
    {"pow", Func::Pow, 2},
}};

}  // namespace

const char* func_name(Func func) {
    for (const auto& f : kFuncs)
        if (f.func == func) return f.name;
    return "?";
}

std::optional<Func> func_from_name(std::string_view name) {
    for (const auto& f : kFuncs)
        if (name == f.name) return f.func;
    return std::nullopt;
}

int func_arity(Func func) {
    for (const auto& f : kFuncs)
        if (f.func == func) return f.arity;
    return 1;
}

bool structurally_equal(const ExprNode& a, const ExprNode& b) {
    if (a.kind != b.kind) return false;
    switch (a.kind) {
        case NodeKind::Constant: return a.value == b.value;
        case NodeKind::Parameter:
        case NodeKind::Variable: return a.name == b.name;
        case NodeKind::Unary:
        case NodeKind::Binary:
            if (a.op != b.op) return false;
            break;
        case NodeKind::Call:
            if (a.func != b.func) return false;
            break;
    }
    if (a.children.size() != b.children.size()) return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!structurally_equal(*a.children[i], *b.children[i])) return false;
    return true;
}

namespace {

std::string format_number(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

void print_into(const ExprNode& e, std::string& out) {
    switch (e.kind) {
        case NodeKind::Constant: out += format_number(e.value); return;
        case NodeKind::Parameter:
        case NodeKind::Variable: out += e.name; return;
        case NodeKind::Unary:
            out += '(';
            out += e.op;
            print_into(*e.children[0], out);
            out += ')';
            return;
        case NodeKind::Binary:
            out += '(';
            print_into(*e.children[0], out);
            out += ' ';
            out += e.op;
            out += ' ';
            print_into(*e.children[1], out);
            out += ')';
            return;
        case NodeKind::Call:
            out += func_name(e.func);
            out += '(';
            for (std::size_t i = 0; i < e.children.size(); ++i) {
                if (i) out += ", ";
                print_into(*e.children[i], out);
            }
            out += ')';
            return;
    }
}

}  // namespace

std::string pretty_print(const ExprNode& e) {
    std::string out;
    print_into(e, out);
    return out;
}

std::string pretty_print(const Expr& e) { return pretty_print(*e); }

// ---------------------------------------------------------------- parser

namespace {

enum class Tok { Number, Ident, Op, LParen, RParen, Comma, End };

struct Token {
    Tok kind;
    std::size_t pos;
    std::string text;
    double number = 0.0;
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> toks;
    std::size_t i = 0;
    while (i < src.size()) {
        char c = src[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        std::size_t start = i;
        if (digit(c) || (c == '.' && i + 1 < src.size() && digit(src[i + 1]))) {
            while (i < src.size() && digit(src[i])) ++i;
            if (i < src.size() && src[i] == '.') {
                ++i;
                while (i < src.size() && digit(src[i])) ++i;
            }
            if (i < src.size() && (src[i] == 'e' || src[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < src.size() && (src[j] == '+' || src[j] == '-')) ++j;
                if (j < src.size() && digit(src[j])) {
                    i = j;
                    while (i < src.size() && digit(src[i])) ++i;
                } else {
                    throw ParseError(ErrorKind::SyntaxError, j, "malformed exponent", {"digit"});
                }
            }
            Token t{Tok::Number, start, std::string(src.substr(start, i - start))};
            std::string_view text = src.substr(start, i - start);
            std::string buf(text);
            if (buf.front() == '.') buf.insert(buf.begin(), '0');
            auto res = std::from_chars(buf.data(), buf.data() + buf.size(), t.number);
            if (res.ec != std::errc() || !std::isfinite(t.number))
                throw ParseError(ErrorKind::SyntaxError, start, "number out of range", {"number"});
            toks.push_back(std::move(t));
            continue;
        }
        if (ident_start(c)) {
            while (i < src.size() && ident_char(src[i])) ++i;
            toks.push_back({Tok::Ident, start, std::string(src.substr(start, i - start))});
            continue;
        }
        switch (c) {
            case '+':
            case '-':
            case '*':
            case '/':
            case '^': toks.push_back({Tok::Op, start, std::string(1, c)}); break;
            case '(': toks.push_back({Tok::LParen, start, "("}); break;
            case ')': toks.push_back({Tok::RParen, start, ")"}); break;
            case ',': toks.push_back({Tok::Comma, start, ","}); break;
            default:
                throw ParseError(ErrorKind::SyntaxError, start,
                                 std::string("unexpected character '") + c + "'");
        }
        ++i;
    }
    toks.push_back({Tok::End, src.size(), ""});
    return toks;
}

class Parser {
public:
    Parser(std::string_view src, const Scope& scope) : toks_(tokenize(src)), scope_(scope) {}

    Expr parse() {
        Expr e = expr();
        if (peek().kind != Tok::End) fail({"operator", "end of input"});
        return e;
    }

private:
    std::vector<Token> toks_;
    std::size_t at_ = 0;
    const Scope& scope_;

    const Token& peek() const { return toks_[at_]; }
    const Token& next() { return toks_[at_++]; }

    bool peek_op(char c) const { return peek().kind == Tok::Op && peek().text[0] == c; }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        const Token& t = peek();
        std::string what = t.kind == Tok::End ? "unexpected end of input"
                                              : "unexpected token '" + t.text + "'";
        std::string list;
        for (std::size_t i = 0; i < expected.size(); ++i) list += (i ? ", " : "") + expected[i];
        throw ParseError(ErrorKind::SyntaxError, t.pos, what + " (expected " + list + ")",
                         std::move(expected));
    }

    Expr expr() {
        Expr lhs = term();
        while (peek_op('+') || peek_op('-')) {
            char op = next().text[0];
            lhs = make_binary(op, lhs, term());
        }
        return lhs;
    }

    Expr term() {
        Expr lhs = power();
        while (peek_op('*') || peek_op('/')) {
            char op = next().text[0];
            lhs = make_binary(op, lhs, power());
        }
        return lhs;
    }

    Expr power() {
        Expr base = unary();
        if (peek_op('^')) {
            next();
            return make_binary('^', base, power());
        }
        return base;
    }

    Expr unary() {
        if (peek_op('-')) {
            next();
            return make_unary('-', unary());
        }
        return primary();
    }

    Expr primary() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Number: next(); return make_constant(t.number);
            case Tok::LParen: {
                next();
                Expr e = expr();
                if (peek().kind != Tok::RParen) fail({")"});
                next();
                return e;
            }
            case Tok::Ident: return name();
            default: fail({"number", "identifier", "(", "-"});
        }
    }

    Expr name() {
        const Token& t = next();
        if (peek().kind == Tok::LParen) {
            auto f = func_from_name(t.text);
            if (!f) throw ParseError(ErrorKind::UnknownIdentifier, t.pos, "unknown function '" + t.text + "'");
            next();
            std::vector<Expr> args;
            args.push_back(expr());
            while (peek().kind == Tok::Comma) {
                next();
                args.push_back(expr());
            }
            if (peek().kind != Tok::RParen) fail({",", ")"});
            if (static_cast<int>(args.size()) != func_arity(*f))
                throw ParseError(ErrorKind::SyntaxError, peek().pos,
                                 std::string(func_name(*f)) + " takes " +
                                     std::to_string(func_arity(*f)) + " argument(s)",
                                 {func_arity(*f) > static_cast<int>(args.size()) ? "," : ")"});
            next();
            return make_call(*f, std::move(args));
        }
        if (func_from_name(t.text)) fail({"("});
        if (t.text == "t") return make_variable(t.text);
        for (const auto& c : scope_.coords) {
            if (t.text == c) return make_variable(t.text);
            if (t.text.size() == c.size() + 1 && t.text[0] == 'd' && t.text.compare(1, c.size(), c) == 0)
                return make_variable(t.text);
        }
        for (const auto& p : scope_.params)
            if (t.text == p) return make_parameter(t.text);
        throw ParseError(ErrorKind::UnknownIdentifier, t.pos, "unknown identifier '" + t.text + "'");
    }
};

}  // namespace

Expr parse_expression(std::string_view src, const Scope& scope) {
    Parser p(src, scope);
    return p.parse();
}

Expr substitute(const Expr& e, const std::vector<std::pair<std::string, Expr>>& replacements) {
    if (e->kind == NodeKind::Variable) {
        for (const auto& [name, repl] : replacements)
            if (name == e->name) return repl;
        return e;
    }
    if (e->children.empty()) return e;
    std::vector<Expr> kids;
    bool changed = false;
    for (const auto& c : e->children) {
        kids.push_back(substitute(c, replacements));
        changed = changed || kids.back() != c;
    }
    if (!changed) return e;
    auto n = std::make_shared<ExprNode>(*e);
    n->children = std::move(kids);
    return n;
}

bool mentions(const ExprNode& e, std::string_view name) {
    if ((e.kind == NodeKind::Variable || e.kind == NodeKind::Parameter) && e.name == name) return true;
    return std::any_of(e.children.begin(), e.children.end(),
                       [&](const Expr& c) { return mentions(*c, name); });
}

// ---------------------------------------------------------------- model files

Scope ModelSpec::scope() const {
    Scope s;
    s.coords = coords;
    for (const auto& [k, v] : params) s.params.push_back(k);
    return s;
}

std::optional<double> ModelSpec::param(std::string_view key) const {
    for (const auto& [k, v] : params)
        if (k == key) return v;
    return std::nullopt;
}

namespace {

struct Line {
    std::size_t offset;
    std::string_view text;
};

std::string_view trim(std::string_view s, std::size_t& shift) {
    shift = 0;
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
        s.remove_prefix(1);
        ++shift;
    }
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

bool valid_identifier(std::string_view s) {
    if (s.empty() || !ident_start(s[0])) return false;
    return std::all_of(s.begin(), s.end(), ident_char);
}

double parse_number(std::string_view s, std::size_t pos) {
    double v = 0.0;
    std::size_t shift = 0;
    s = trim(s, shift);
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v))
        throw ParseError(ErrorKind::SyntaxError, pos + shift, "expected a number", {"number"});
    return v;
}

struct PendingExpr {
    std::size_t offset;
    std::string_view text;
};

}  // namespace

ModelSpec parse_model_file(std::string_view text) {
    ModelSpec spec;
    std::optional<PendingExpr> lagrangian;
    std::vector<PendingExpr> constraints, aux;
    std::vector<std::pair<std::string, PendingExpr>> monitors;
    bool have_coords = false;
    bool have_lambda0 = false;
    std::size_t coords_pos = text.size(), lambda0_pos = text.size();
    std::vector<std::size_t> coord_pos, param_pos;

    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view raw = text.substr(start, end - start);
        std::size_t hash = raw.find('#');
        if (hash != std::string_view::npos) raw = raw.substr(0, hash);
        std::size_t shift = 0;
        std::string_view line = trim(raw, shift);
        std::size_t base = start + shift;
        start = end + 1;
        if (line.empty()) continue;

        std::size_t sp = 0;
        while (sp < line.size() && !std::isspace(static_cast<unsigned char>(line[sp]))) ++sp;
        std::string_view word = line.substr(0, sp);
        std::size_t rest_shift = 0;
        std::string_view rest = trim(line.substr(sp), rest_shift);
        std::size_t rest_pos = base + sp + rest_shift;

        if (word == "model") {
            if (rest.size() < 2 || rest.front() != '"' || rest.back() != '"')
                throw ParseError(ErrorKind::SyntaxError, rest_pos, "expected quoted model name", {"\""});
            spec.name = std::string(rest.substr(1, rest.size() - 2));
        } else if (word == "coords") {
            if (have_coords) throw ParseError(ErrorKind::InvalidModel, base, "coords declared twice");
            have_coords = true;
            coords_pos = base;
            std::size_t i = 0;
            while (i < rest.size()) {
                while (i < rest.size() && std::isspace(static_cast<unsigned char>(rest[i]))) ++i;
                std::size_t j = i;
                while (j < rest.size() && !std::isspace(static_cast<unsigned char>(rest[j]))) ++j;
                if (j == i) break;
                std::string name(rest.substr(i, j - i));
                if (!valid_identifier(name))
                    throw ParseError(ErrorKind::SyntaxError, rest_pos + i, "invalid coordinate name", {"identifier"});
                if (std::find(spec.coords.begin(), spec.coords.end(), name) != spec.coords.end())
                    throw ParseError(ErrorKind::DuplicateCoordinate, rest_pos + i, "duplicate coordinate '" + name + "'");
                spec.coords.push_back(std::move(name));
                coord_pos.push_back(rest_pos + i);
                i = j;
            }
        } else if (word == "param" || word == "monitor") {
            std::size_t eq = rest.find('=');
            if (eq == std::string_view::npos)
                throw ParseError(ErrorKind::SyntaxError, rest_pos + rest.size(), "expected '='", {"="});
            std::size_t s2 = 0;
            std::string name(trim(rest.substr(0, eq), s2));
            if (!valid_identifier(name))
                throw ParseError(ErrorKind::SyntaxError, rest_pos, "invalid name", {"identifier"});
            if (word == "param") {
                if (spec.param(name))
                    throw ParseError(ErrorKind::InvalidModel, rest_pos, "duplicate parameter '" + name + "'");
                spec.params.emplace_back(name, parse_number(rest.substr(eq + 1), rest_pos + eq + 1));
                param_pos.push_back(rest_pos);
            } else {
                monitors.push_back({name, {rest_pos + eq + 1, rest.substr(eq + 1)}});
            }
        } else if (word == "lagrangian") {
            if (lagrangian) throw ParseError(ErrorKind::InvalidModel, base, "lagrangian declared twice");
            lagrangian = PendingExpr{rest_pos, rest};
        } else if (word == "constraint") {
            constraints.push_back({rest_pos, rest});
        } else if (word == "aux") {
            aux.push_back({rest_pos, rest});
        } else if (word == "lambda0") {
            have_lambda0 = true;
            lambda0_pos = base;
            std::size_t i = 0;
            while (i < rest.size()) {
                while (i < rest.size() && std::isspace(static_cast<unsigned char>(rest[i]))) ++i;
                std::size_t j = i;
                while (j < rest.size() && !std::isspace(static_cast<unsigned char>(rest[j]))) ++j;
                if (j == i) break;
                spec.lambda0.push_back(parse_number(rest.substr(i, j - i), rest_pos + i));
                i = j;
            }
        } else {
            throw ParseError(ErrorKind::SyntaxError, base, "unknown directive '" + std::string(word) + "'",
                             {"model", "coords", "param", "lagrangian", "constraint", "aux", "lambda0", "monitor"});
        }
    }

    // Structural errors point at the offending line, or at the end of the file when a section is absent.
    const std::size_t eof = text.size();
    if (!have_coords || spec.coords.empty())
        throw ParseError(ErrorKind::MissingSection, have_coords ? coords_pos : eof, "missing coords", {"coords"});
    if (!lagrangian) throw ParseError(ErrorKind::MissingSection, eof, "missing lagrangian", {"lagrangian"});
    if (spec.name.empty()) spec.name = "unnamed";

    const std::size_t n = spec.coords.size();
    if (n > kMaxCoords)
        throw ParseError(ErrorKind::InvalidModel, coord_pos[kMaxCoords],
                         "at most " + std::to_string(kMaxCoords) + " coordinates supported");

    std::set<std::string> taken{"t"};
    for (std::size_t i = 0; i < n; ++i) {
        const auto& c = spec.coords[i];
        if (func_from_name(c) || !taken.insert(c).second)
            throw ParseError(ErrorKind::InvalidModel, coord_pos[i], "coordinate name '" + c + "' clashes");
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!taken.insert("d" + spec.coords[i]).second)
            throw ParseError(ErrorKind::InvalidModel, coord_pos[i], "velocity name 'd" + spec.coords[i] + "' clashes");
    for (std::size_t i = 0; i < spec.params.size(); ++i) {
        const auto& p = spec.params[i].first;
        if (func_from_name(p) || taken.count(p))
            throw ParseError(ErrorKind::InvalidModel, param_pos[i], "parameter name '" + p + "' clashes");
    }

    if (constraints.size() >= n)
        throw ParseError(ErrorKind::ArityMismatch, constraints[n - 1].offset,
                         std::to_string(constraints.size()) + " constraints for " + std::to_string(n) + " coordinates");
    const std::size_t want_aux = n - constraints.size();
    if (aux.size() != want_aux)
        throw ParseError(ErrorKind::ArityMismatch, aux.size() > want_aux ? aux[want_aux].offset : eof,
                         "expected " + std::to_string(want_aux) + " aux functions, found " + std::to_string(aux.size()),
                         {"aux"});
    if (have_lambda0 && spec.lambda0.size() != aux.size())
        throw ParseError(ErrorKind::ArityMismatch, lambda0_pos,
                         "lambda0 needs " + std::to_string(aux.size()) + " values");
    if (!have_lambda0) spec.lambda0.assign(aux.size(), 0.0);

    const Scope scope = spec.scope();
    auto compile = [&](const PendingExpr& p) {
        try {
            return parse_expression(p.text, scope);
        } catch (const ParseError& e) {
            throw ParseError(e.kind(), p.offset + e.position(), e.detail(), e.expected());
        }
    };
    spec.lagrangian = compile(*lagrangian);
    for (const auto& c : constraints) spec.constraints.push_back(compile(c));
    for (const auto& a : aux) spec.aux.push_back(compile(a));
    for (const auto& [name, p] : monitors) spec.monitors.push_back({name, compile(p)});
    return spec;
}

std::string emit_model_file(const ModelSpec& spec) {
    std::ostringstream out;
    out << "model \"" << spec.name << "\"\n";
    out << "coords";
    for (const auto& c : spec.coords) out << ' ' << c;
    out << '\n';
    for (const auto& [k, v] : spec.params) out << "param " << k << " = " << format_number(v) << '\n';
    out << "lagrangian " << pretty_print(spec.lagrangian) << '\n';
    for (const auto& c : spec.constraints) out << "constraint " << pretty_print(c) << '\n';
    for (const auto& a : spec.aux) out << "aux " << pretty_print(a) << '\n';
    if (std::any_of(spec.lambda0.begin(), spec.lambda0.end(), [](double v) { return v != 0.0; })) {
        out << "lambda0";
        for (double v : spec.lambda0) out << ' ' << format_number(v);
        out << '\n';
    }
    for (const auto& m : spec.monitors) out << "monitor " << m.name << " = " << pretty_print(m.expr) << '\n';
    return out.str();
}

}  // namespace transposit
