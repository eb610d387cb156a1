#include "masbus/term.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <system_error>

#include "masbus/error.hpp"

namespace masbus {

Term::Term(Kind kind, std::string text, double number, std::vector<Term> items)
    : kind_(kind), text_(std::move(text)), number_(number), items_(std::move(items)) {}

Term Term::atom(std::string name) {
    if (name.empty()) throw Error(Errc::SyntaxError, "atom name must be non-empty");
    return Term(Kind::Atom, std::move(name), 0.0, {});
}

Term Term::number(double value) {
    if (!std::isfinite(value)) throw Error(Errc::SyntaxError, "number must be finite");
    if (value == 0.0) value = 0.0;  // fold -0
    return Term(Kind::Number, {}, value, {});
}

Term Term::string(std::string text) { return Term(Kind::String, std::move(text), 0.0, {}); }

Term Term::structure(std::string functor, std::vector<Term> args) {
    if (args.empty()) return atom(std::move(functor));
    if (functor.empty()) throw Error(Errc::SyntaxError, "functor must be non-empty");
    return Term(Kind::Structure, std::move(functor), 0.0, std::move(args));
}

Term Term::list(std::vector<Term> items) { return Term(Kind::List, {}, 0.0, std::move(items)); }

const std::string& Term::name() const {
    if (kind_ == Kind::Number || kind_ == Kind::List)
        throw Error(Errc::SyntaxError, "term has no name: " + render_term(*this));
    return text_;
}

double Term::as_number() const {
    if (kind_ != Kind::Number) throw Error(Errc::SyntaxError, "not a number: " + render_term(*this));
    return number_;
}

const std::vector<Term>& Term::items() const { return items_; }

std::string Term::text() const {
    if (kind_ == Kind::Atom || kind_ == Kind::String) return text_;
    return render_term(*this);
}

bool operator==(const Term& a, const Term& b) {
    return a.kind_ == b.kind_ && a.text_ == b.text_ && a.number_ == b.number_ && a.items_ == b.items_;
}

bool is_bare_atom(std::string_view name) {
    if (name.empty() || name.front() < 'a' || name.front() > 'z') return false;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
        if (!ok) return false;
    }
    return true;
}

namespace {

constexpr int kMaxDepth = 256;

class TermParser {
public:
    explicit TermParser(std::string_view src) : src_(src) {}

    Term parse_all() {
        skip_ws();
        if (at_end()) fail("empty input");
        Term t = parse_term(0);
        skip_ws();
        if (!at_end()) fail("trailing characters");
        return t;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw Error::at_position(Errc::SyntaxError, what, pos_);
    }

    bool at_end() const { return pos_ >= src_.size(); }
    char peek() const { return at_end() ? '\0' : src_[pos_]; }

    void skip_ws() {
        while (!at_end() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
            ++pos_;
    }

    void expect(char c) {
        if (peek() != c) fail(std::string("expected '") + c + "'");
        ++pos_;
    }

    Term parse_term(int depth) {
        if (depth > kMaxDepth) fail("nesting too deep");
        char c = peek();
        if (c == '[') return parse_list(depth);
        if (c == '"') return Term::string(parse_quoted('"'));
        if (c == '-' || c == '+' || (c >= '0' && c <= '9')) return parse_number();
        std::string name;
        if (c == '\'') {
            name = parse_quoted('\'');
            if (name.empty()) fail("empty quoted atom");
        } else if (c >= 'a' && c <= 'z') {
            std::size_t start = pos_;
            while (!at_end() && is_name_char(src_[pos_])) ++pos_;
            name = std::string(src_.substr(start, pos_ - start));
        } else {
            fail(at_end() ? "unexpected end of input" : std::string("unexpected character '") + c + "'");
        }
        if (peek() != '(') return Term::atom(std::move(name));
        ++pos_;
        skip_ws();
        std::vector<Term> args;
        if (peek() != ')') args = parse_sequence(')', depth);
        expect(')');
        return Term::structure(std::move(name), std::move(args));
    }

    Term parse_list(int depth) {
        expect('[');
        skip_ws();
        std::vector<Term> items;
        if (peek() != ']') items = parse_sequence(']', depth);
        expect(']');
        return Term::list(std::move(items));
    }

    std::vector<Term> parse_sequence(char close, int depth) {
        std::vector<Term> out;
        for (;;) {
            skip_ws();
            out.push_back(parse_term(depth + 1));
            skip_ws();
            if (peek() == ',') {
                ++pos_;
                continue;
            }
            if (peek() == close) return out;
            fail(std::string("expected ',' or '") + close + "'");
        }
    }

    Term parse_number() {
        std::size_t start = pos_;
        if (peek() == '-' || peek() == '+') ++pos_;
        std::size_t digits = pos_;
        while (!at_end() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
        if (pos_ == digits) fail("expected digits");
        if (peek() == '.') {
            ++pos_;
            std::size_t frac = pos_;
            while (!at_end() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            if (pos_ == frac) fail("expected digits after '.'");
        }
        std::string_view lexeme = src_.substr(start, pos_ - start);
        if (!lexeme.empty() && lexeme.front() == '+') lexeme.remove_prefix(1);
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(lexeme.data(), lexeme.data() + lexeme.size(), value);
        if (ec != std::errc{} || ptr != lexeme.data() + lexeme.size()) {
            pos_ = start;
            fail("number out of range");
        }
        return Term::number(value);
    }

    std::string parse_quoted(char quote) {
        expect(quote);
        std::string out;
        for (;;) {
            if (at_end()) fail("unterminated quoted text");
            char c = src_[pos_++];
            if (c == quote) return out;
            if (c != '\\') {
                out.push_back(c);
                continue;
            }
            if (at_end()) fail("dangling escape");
            char e = src_[pos_++];
            switch (e) {
                case 'n': out.push_back('\n'); break;
                case 't': out.push_back('\t'); break;
                case 'r': out.push_back('\r'); break;
                case '\\':
                case '\'':
                case '"': out.push_back(e); break;
                default: --pos_; fail("unknown escape");
            }
        }
    }

    static bool is_name_char(char c) {
        return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
    }

    std::string_view src_;
    std::size_t pos_ = 0;
};

void render_quoted(std::string& out, const std::string& text, char quote) {
    out.push_back(quote);
    for (char c : text) {
        switch (c) {
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            case '\\': out += "\\\\"; break;
            default:
                if (c == quote) out.push_back('\\');
                out.push_back(c);
        }
    }
    out.push_back(quote);
}

void render_name(std::string& out, const std::string& name) {
    if (is_bare_atom(name))
        out += name;
    else
        render_quoted(out, name, '\'');
}

void render_into(std::string& out, const Term& t) {
    switch (t.kind()) {
        case Term::Kind::Atom: render_name(out, t.name()); break;
        case Term::Kind::String: render_quoted(out, t.name(), '"'); break;
        case Term::Kind::Number: {
            char buf[400];
            auto res = std::to_chars(buf, buf + sizeof buf, t.as_number(), std::chars_format::fixed);
            out.append(buf, res.ptr);
            break;
        }
        case Term::Kind::Structure:
        case Term::Kind::List: {
            bool is_list = t.is_list();
            if (is_list) {
                out.push_back('[');
            } else {
                render_name(out, t.name());
                out.push_back('(');
            }
            bool first = true;
            for (const Term& item : t.items()) {
                if (!first) out.push_back(',');
                first = false;
                render_into(out, item);
            }
            out.push_back(is_list ? ']' : ')');
            break;
        }
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

Term parse_term(std::string_view text) { return TermParser(text).parse_all(); }

std::string render_term(const Term& t) {
    std::string out;
    render_into(out, t);
    return out;
}

Term parse_or_string(std::string_view text) {
    try {
        return parse_term(text);
    } catch (const Error&) {
        return Term::string(std::string(text));
    }
}

Term constant(std::string_view text) {
    std::string_view t = trim(text);
    try {
        return parse_term(t);
    } catch (const Error&) {
        if (t.empty()) return Term::string({});
        return Term::atom(std::string(t));
    }
}

std::string constant_text(const Term& t) {
    if (t.is_atom()) {
        const std::string& name = t.name();
        if (trim(name).size() == name.size()) {
            try {
                if (constant(name) == t) return name;
            } catch (const Error&) {
            }
        }
    }
    return render_term(t);
}

}  // namespace masbus
