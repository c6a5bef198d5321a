#include <algorithm>
#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "artkg/error.hpp"
#include "artkg/graph.hpp"
#include "artkg/util.hpp"

namespace artkg {

namespace {

void escape_into(std::string& out, std::string_view s) {
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            default: out += c; break;
        }
    }
}

void append_utf8(std::string& out, std::uint32_t cp) {
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
}

class LineParser {
public:
    LineParser(std::string_view line, std::size_t line_no) : s_(line), line_no_(line_no) {}

    // Returns nullopt for blank and comment-only lines.
    std::optional<Triple> parse() {
        skip_ws();
        if (at_end() || peek() == '#') return std::nullopt;
        Triple t;
        t.subject = parse_subject();
        require_ws();
        t.predicate = parse_iri_term("predicate");
        require_ws();
        t.object = parse_object();
        skip_ws();
        if (at_end() || peek() != '.') fail("expected '.' to terminate the triple");
        ++pos_;
        skip_ws();
        if (!at_end() && peek() != '#') fail("unexpected text after '.'");
        try {
            validate(t);
        } catch (const Error& e) {
            fail(e.what());
        }
        return t;
    }

private:
    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_no_, pos_ + 1, what); }

    void skip_ws() {
        while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }

    void require_ws() {
        if (at_end() || (peek() != ' ' && peek() != '\t')) fail("expected whitespace between terms");
        skip_ws();
    }

    Term parse_subject() {
        if (!at_end() && peek() == '"') fail("literal in subject position");
        if (!at_end() && peek() == '_') fail("blank nodes are not supported");
        return parse_iri_term("subject");
    }

    Term parse_object() {
        if (at_end()) fail("missing object");
        if (peek() == '"') return parse_literal();
        if (peek() == '_') fail("blank nodes are not supported");
        return parse_iri_term("object");
    }

    Term parse_iri_term(const char* position) {
        if (at_end() || peek() != '<') fail(std::string("expected IRI in ") + position);
        return Term::iri(parse_iri());
    }

    std::uint32_t parse_hex(std::size_t digits) {
        if (pos_ + digits > s_.size()) fail("truncated unicode escape");
        std::uint32_t cp = 0;
        for (std::size_t i = 0; i < digits; ++i) {
            char c = s_[pos_++];
            cp <<= 4;
            if (c >= '0' && c <= '9') cp |= static_cast<std::uint32_t>(c - '0');
            else if (c >= 'a' && c <= 'f') cp |= static_cast<std::uint32_t>(c - 'a' + 10);
            else if (c >= 'A' && c <= 'F') cp |= static_cast<std::uint32_t>(c - 'A' + 10);
            else fail("bad hex digit in unicode escape");
        }
        if (cp > 0x10FFFF) fail("code point out of range");
        return cp;
    }

    std::string parse_iri() {
        ++pos_;  // '<'
        std::string out;
        while (true) {
            if (at_end()) fail("unterminated IRI");
            char c = s_[pos_];
            if (c == '>') {
                ++pos_;
                break;
            }
            if (c == '\\') {
                ++pos_;
                if (at_end()) fail("unterminated IRI");
                char e = s_[pos_++];
                if (e == 'u') append_utf8(out, parse_hex(4));
                else if (e == 'U') append_utf8(out, parse_hex(8));
                else fail("bad escape in IRI");
                continue;
            }
            if (static_cast<unsigned char>(c) <= 0x20 || c == '<' || c == '"' || c == '{' || c == '}' ||
                c == '|' || c == '^' || c == '`') {
                fail("bad IRI character");
            }
            out += c;
            ++pos_;
        }
        if (out.empty()) fail("bad IRI: empty");
        return out;
    }

    Term parse_literal() {
        ++pos_;  // opening quote
        std::string lexical;
        while (true) {
            if (at_end()) fail("unterminated literal");
            char c = s_[pos_++];
            if (c == '"') break;
            if (c != '\\') {
                lexical += c;
                continue;
            }
            if (at_end()) fail("unterminated literal");
            char e = s_[pos_++];
            switch (e) {
                case 't': lexical += '\t'; break;
                case 'b': lexical += '\b'; break;
                case 'n': lexical += '\n'; break;
                case 'r': lexical += '\r'; break;
                case 'f': lexical += '\f'; break;
                case '"': lexical += '"'; break;
                case '\'': lexical += '\''; break;
                case '\\': lexical += '\\'; break;
                case 'u': append_utf8(lexical, parse_hex(4)); break;
                case 'U': append_utf8(lexical, parse_hex(8)); break;
                default: --pos_; fail("bad escape in literal");
            }
        }
        std::string datatype;
        std::string language;
        if (!at_end() && peek() == '^') {
            if (pos_ + 1 >= s_.size() || s_[pos_ + 1] != '^') fail("expected '^^' before datatype");
            pos_ += 2;
            if (at_end() || peek() != '<') fail("expected datatype IRI");
            datatype = parse_iri();
        } else if (!at_end() && peek() == '@') {
            ++pos_;
            std::size_t start = pos_;
            while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '-')) ++pos_;
            if (pos_ == start) fail("empty language tag");
            language = std::string(s_.substr(start, pos_ - start));
        }
        return Term::literal(std::move(lexical), std::move(datatype), std::move(language));
    }

    std::string_view s_;
    std::size_t line_no_;
    std::size_t pos_ = 0;
};

}  // namespace

std::string to_ntriples(const Term& t) {
    std::string out;
    if (t.is_iri()) {
        out.reserve(t.value.size() + 2);
        out += '<';
        out += t.value;
        out += '>';
        return out;
    }
    out += '"';
    escape_into(out, t.value);
    out += '"';
    if (!t.datatype.empty()) {
        out += "^^<";
        out += t.datatype;
        out += '>';
    } else if (!t.language.empty()) {
        out += '@';
        out += t.language;
    }
    return out;
}

std::string to_ntriples_line(const Triple& t) {
    return to_ntriples(t.subject) + ' ' + to_ntriples(t.predicate) + ' ' + to_ntriples(t.object) + " .";
}

std::string serialize_ntriples(const Graph& g) {
    std::vector<std::string> lines;
    lines.reserve(g.size());
    for (const auto& t : g) lines.push_back(to_ntriples_line(t));
    std::sort(lines.begin(), lines.end());
    std::string out;
    for (const auto& l : lines) {
        out += l;
        out += '\n';
    }
    return out;
}

Graph parse_ntriples(std::string_view text) {
    Graph g;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start < text.size()) {
        std::size_t end = text.find('\n', start);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(start, end - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        if (auto t = LineParser(line, line_no).parse()) g.add(std::move(*t));
        start = end + 1;
    }
    return g;
}

Graph read_ntriples_file(const std::string& path) {
    return parse_ntriples(read_file(path));
}

}  // namespace artkg
