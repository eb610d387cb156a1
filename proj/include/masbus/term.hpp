#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace masbus {

/// Prolog-literal-like value used for ACL content, exchange headers and
/// bodies, and artifact operation parameters.
///
/// A structure with no arguments is normalised to an atom, so
/// `Term::structure("f", {}) == Term::atom("f")`.
class Term {
public:
    enum class Kind { Atom, Number, String, Structure, List };

    Term() : Term(atom("nil")) {}

    static Term atom(std::string name);
    static Term number(double value);
    static Term string(std::string text);
    static Term structure(std::string functor, std::vector<Term> args);
    static Term list(std::vector<Term> items);

    Kind kind() const noexcept { return kind_; }
    bool is_atom() const noexcept { return kind_ == Kind::Atom; }
    bool is_number() const noexcept { return kind_ == Kind::Number; }
    bool is_string() const noexcept { return kind_ == Kind::String; }
    bool is_structure() const noexcept { return kind_ == Kind::Structure; }
    bool is_list() const noexcept { return kind_ == Kind::List; }

    /// Atom name, structure functor, or string text.
    const std::string& name() const;
    double as_number() const;
    /// Structure arguments or list items.
    const std::vector<Term>& items() const;
    std::size_t arity() const noexcept { return items_.size(); }

    /// Atom name or string text, or the rendered term otherwise. Handy for
    /// header values that name things ("TrackedArtifact", "tell").
    std::string text() const;

    friend bool operator==(const Term& a, const Term& b);
    friend bool operator!=(const Term& a, const Term& b) { return !(a == b); }

private:
    Term(Kind kind, std::string text, double number, std::vector<Term> items);

    Kind kind_;
    std::string text_;
    double number_ = 0.0;
    std::vector<Term> items_;
};

/// Parses a term. Throws Error{SyntaxError} carrying the offending offset.
Term parse_term(std::string_view text);

/// Canonical minimal rendering: no whitespace, bare atoms where the name
/// matches `[a-z][A-Za-z0-9_]*`, single-quoted atoms otherwise, shortest
/// round-trip decimal numbers. `parse_term(render_term(t)) == t`.
std::string render_term(const Term& t);

/// parse_term when the text is a valid term, otherwise a string term holding
/// the raw text. Used by network consumers for inbound payloads.
Term parse_or_string(std::string_view text);

/// Constant value as written in a route definition: parsed as a term when it
/// is one, otherwise an atom named by the trimmed text. `constant("TrackedArtifact")`
/// is the atom TrackedArtifact.
Term constant(std::string_view text);

/// Inverse of constant(): the shortest text that constant() maps back to `t`.
std::string constant_text(const Term& t);

bool is_bare_atom(std::string_view name);

}  // namespace masbus
