#include "needle/sexpr.hpp"

#include <cctype>

namespace needle {

namespace {

bool simple_char(char c) {
    if (std::isalnum(static_cast<unsigned char>(c))) return true;
    switch (c) {
    case '~': case '!': case '@': case '$': case '%': case '^': case '&': case '*':
    case '_': case '-': case '+': case '=': case '<': case '>': case '.': case '?':
    case '/':
        return true;
    default:
        return false;
    }
}

class Reader {
public:
    explicit Reader(std::string_view t) : text_(t) {}

    bool at_end() {
        skip();
        return pos_ >= text_.size();
    }

    SExpr read() {
        skip();
        if (pos_ >= text_.size()) throw ParseError("unexpected end of input", here());
        SExpr e;
        e.loc = here();
        char c = text_[pos_];
        if (c == '(') {
            bump();
            e.kind = SExpr::Kind::List;
            for (;;) {
                skip();
                if (pos_ >= text_.size()) throw ParseError("unbalanced '('", e.loc);
                if (text_[pos_] == ')') {
                    bump();
                    break;
                }
                e.items.push_back(read());
            }
            return e;
        }
        if (c == ')') throw ParseError("unexpected ')'", here());
        if (c == '|') {
            bump();
            std::string s;
            while (pos_ < text_.size() && text_[pos_] != '|') {
                if (text_[pos_] == '\\') throw ParseError("backslash in quoted symbol", here());
                s += text_[pos_];
                bump();
            }
            if (pos_ >= text_.size()) throw ParseError("unterminated quoted symbol", e.loc);
            bump();
            e.kind = SExpr::Kind::Symbol;
            e.text = std::move(s);
            return e;
        }
        if (c == '"') {
            bump();
            std::string s;
            for (;;) {
                if (pos_ >= text_.size()) throw ParseError("unterminated string", e.loc);
                char d = text_[pos_];
                bump();
                if (d == '"') {
                    if (pos_ < text_.size() && text_[pos_] == '"') {
                        s += '"';
                        bump();
                        continue;
                    }
                    break;
                }
                s += d;
            }
            e.kind = SExpr::Kind::String;
            e.text = std::move(s);
            return e;
        }
        std::string s;
        while (pos_ < text_.size()) {
            char d = text_[pos_];
            if (std::isspace(static_cast<unsigned char>(d)) || d == '(' || d == ')' || d == ';' ||
                d == '|' || d == '"')
                break;
            s += d;
            bump();
        }
        bool digits = !s.empty();
        for (char d : s)
            if (!std::isdigit(static_cast<unsigned char>(d))) digits = false;
        if (digits)
            e.kind = SExpr::Kind::Numeral;
        else if (s[0] == ':')
            e.kind = SExpr::Kind::Keyword;
        else
            e.kind = SExpr::Kind::Symbol;
        e.text = std::move(s);
        return e;
    }

private:
    SourceLoc here() const { return {line_, col_}; }

    void bump() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') bump();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                bump();
            } else {
                break;
            }
        }
    }

    std::string_view text_;
    size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

}  // namespace

std::vector<SExpr> parse_sexprs(std::string_view text) {
    Reader r(text);
    std::vector<SExpr> out;
    while (!r.at_end()) out.push_back(r.read());
    return out;
}

SExpr parse_sexpr(std::string_view text) {
    Reader r(text);
    SExpr e = r.read();
    if (!r.at_end()) throw ParseError("trailing input after expression", {});
    return e;
}

std::string quote_symbol(std::string_view name) {
    bool plain = !name.empty() && !std::isdigit(static_cast<unsigned char>(name[0]));
    for (char c : name)
        if (!simple_char(c) || c == '!') plain = false;
    if (plain) return std::string(name);
    return "|" + std::string(name) + "|";
}

std::string SExpr::str() const {
    switch (kind) {
    case Kind::Symbol: return quote_symbol(text);
    case Kind::Keyword:
    case Kind::Numeral: return text;
    case Kind::String: return "\"" + text + "\"";
    case Kind::List: break;
    }
    std::string s = "(";
    for (size_t i = 0; i < items.size(); ++i) {
        if (i) s += ' ';
        s += items[i].str();
    }
    return s + ")";
}

}  // namespace needle
