#include "leansearch/prover.hpp"

namespace leansearch {

namespace {

bool ident_char(unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '\'' || c == '!' || c == '?' || c >= 0x80;
}

bool at(std::string_view s, std::size_t i, std::string_view tok) {
    return s.compare(i, tok.size(), tok) == 0;
}

// Removing a comment must not glue its neighbours into a new comment opener.
void separate_if_glued(std::string& out, std::string_view src, std::size_t next) {
    if (out.empty() || next >= src.size()) return;
    char a = out.back(), b = src[next];
    if ((a == '/' || a == '-') && b == '-') out += ' ';
}

}  // namespace

StrippedSource strip_comments(std::string_view src) {
    StrippedSource r;
    auto& out = r.text;
    out.reserve(src.size());
    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        char c = src[i];
        if (c == '"') {
            // String literal, honouring backslash escapes.
            out += c;
            ++i;
            while (i < n) {
                char d = src[i];
                out += d;
                ++i;
                if (d == '\\' && i < n) {
                    out += src[i];
                    ++i;
                } else if (d == '"') {
                    break;
                }
            }
            continue;
        }
        if (c == '\'' && (out.empty() || !ident_char(static_cast<unsigned char>(out.back())))) {
            // Character literal such as '"' or '\n'.
            std::size_t len = 0;
            if (i + 2 < n && src[i + 1] != '\\' && src[i + 2] == '\'') len = 3;
            else if (i + 3 < n && src[i + 1] == '\\' && src[i + 3] == '\'') len = 4;
            if (len) {
                out.append(src.substr(i, len));
                i += len;
                continue;
            }
        }
        if (at(src, i, "/-")) {
            int depth = 1;
            i += 2;
            while (i < n && depth > 0) {
                if (at(src, i, "/-")) {
                    ++depth;
                    i += 2;
                } else if (at(src, i, "-/")) {
                    --depth;
                    i += 2;
                } else {
                    if (src[i] == '\n') out += '\n';
                    ++i;
                }
            }
            if (depth > 0) r.unterminated_comment = true;
            separate_if_glued(out, src, i);
            continue;
        }
        if (at(src, i, "--")) {
            while (i < n && src[i] != '\n') ++i;
            continue;
        }
        out += c;
        ++i;
    }
    return r;
}

bool contains_sorry_token(std::string_view text) {
    constexpr std::string_view kTok = "sorry";
    for (auto pos = text.find(kTok); pos != std::string_view::npos; pos = text.find(kTok, pos + 1)) {
        bool left = pos == 0 || !ident_char(static_cast<unsigned char>(text[pos - 1]));
        auto end = pos + kTok.size();
        bool right = end >= text.size() || !ident_char(static_cast<unsigned char>(text[end]));
        if (left && right) return true;
    }
    return false;
}

bool is_solved(bool verifier_ok, std::string_view source) {
    if (!verifier_ok) return false;
    return !contains_sorry_token(strip_comments(source).text);
}

}  // namespace leansearch
