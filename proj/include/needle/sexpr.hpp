#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace needle {

struct SourceLoc {
    int line = 0;
    int column = 0;
};

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ParseError : Error {
    SourceLoc loc;
    ParseError(const std::string& msg, SourceLoc l)
        : Error(std::to_string(l.line) + ":" + std::to_string(l.column) + ": " + msg), loc(l) {}
};

struct SExpr {
    enum class Kind { Symbol, Keyword, Numeral, String, List };
    Kind kind = Kind::List;
    std::string text;  // symbol name (pipes stripped), keyword incl ':', numeral digits, string body
    std::vector<SExpr> items;
    SourceLoc loc;

    bool is_list() const { return kind == Kind::List; }
    bool is_symbol() const { return kind == Kind::Symbol; }
    bool is_symbol(std::string_view s) const { return kind == Kind::Symbol && text == s; }
    bool is_numeral() const { return kind == Kind::Numeral; }
    // first item is the given symbol
    bool is_app(std::string_view head) const {
        return is_list() && !items.empty() && items[0].is_symbol(head);
    }
    std::string str() const;
};

std::vector<SExpr> parse_sexprs(std::string_view text);
SExpr parse_sexpr(std::string_view text);  // exactly one expression

// |name| when name is not a plain SMT-LIB simple symbol or contains '!'
std::string quote_symbol(std::string_view name);

}  // namespace needle
