// SPDX-License-Identifier: Apache-2.0
//
// Error-tolerant Java method extractor. It does not build an AST: a lexer
// strips comments and literals, then a shallow recursive scanner walks type
// bodies, recognizing member declarations and descending into method bodies
// only to find local and anonymous classes.

#include "funcloc/corpus.hpp"
#include "funcloc/error.hpp"

#include <algorithm>
#include <cctype>
#include <string>
#include <unordered_set>

namespace funcloc::corpus {
namespace {

enum class TokKind { Ident, Punct, Literal };

struct Token {
    TokKind kind;
    std::string_view text;
    std::size_t offset;
};

bool is_ident_start(unsigned char c) { return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80; }
bool is_ident_part(unsigned char c) { return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80; }

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t i = 0;
    const std::size_t n = src.size();
    while (i < n) {
        const unsigned char c = static_cast<unsigned char>(src[i]);
        if (std::isspace(c)) {
            ++i;
        } else if (c == '/' && i + 1 < n && src[i + 1] == '/') {
            while (i < n && src[i] != '\n') ++i;
        } else if (c == '/' && i + 1 < n && src[i + 1] == '*') {
            const auto close = src.find("*/", i + 2);
            i = close == std::string_view::npos ? n : close + 2;
        } else if (c == '"' && src.substr(i, 3) == "\"\"\"") {
            const std::size_t start = i;
            i += 3;
            while (i < n && src.substr(i, 3) != "\"\"\"") {
                i += (src[i] == '\\') ? 2 : 1;
            }
            i = std::min(n, i + 3);
            out.push_back({TokKind::Literal, src.substr(start, i - start), start});
        } else if (c == '"' || c == '\'') {
            const std::size_t start = i++;
            while (i < n && src[i] != static_cast<char>(c) && src[i] != '\n') {
                i += (src[i] == '\\') ? 2 : 1;
            }
            i = std::min(n, i + 1);
            out.push_back({TokKind::Literal, src.substr(start, i - start), start});
        } else if (is_ident_start(c)) {
            const std::size_t start = i;
            while (i < n && is_ident_part(static_cast<unsigned char>(src[i]))) ++i;
            out.push_back({TokKind::Ident, src.substr(start, i - start), start});
        } else if (std::isdigit(c)) {
            const std::size_t start = i;
            while (i < n && (is_ident_part(static_cast<unsigned char>(src[i])) || src[i] == '.')) ++i;
            out.push_back({TokKind::Literal, src.substr(start, i - start), start});
        } else if (c == '.' && src.substr(i, 3) == "...") {
            out.push_back({TokKind::Punct, src.substr(i, 3), i});
            i += 3;
        } else {
            out.push_back({TokKind::Punct, src.substr(i, 1), i});
            ++i;
        }
    }
    return out;
}

const std::unordered_set<std::string_view> kModifiers = {
    "public", "protected", "private", "static", "final", "abstract", "native",
    "synchronized", "transient", "volatile", "strictfp", "default", "sealed"};

struct TypeContext {
    std::string fqn;          // attribution target for member methods
    std::string simple_name;  // empty for anonymous bodies
    std::string_view kind;    // class, interface, enum, record, @interface
    std::vector<std::string> record_components;
};

class Extractor {
public:
    Extractor(std::string_view src, std::string_view file_path)
        : src_(src), file_path_(file_path), toks_(tokenize(src)) {
        line_starts_.push_back(0);
        for (std::size_t i = 0; i < src.size(); ++i) {
            if (src[i] == '\n') line_starts_.push_back(i + 1);
        }
    }

    std::vector<MethodRecord> run() {
        std::size_t i = 0;
        std::string package;
        if (is(i, "package")) {
            ++i;
            while (i < toks_.size() && !is(i, ";")) {
                package += toks_[i].text;
                ++i;
            }
            ++i;
        }
        while (i < toks_.size()) {
            if (is(i, "import")) {
                while (i < toks_.size() && !is(i, ";")) ++i;
                ++i;
                continue;
            }
            const std::size_t after_mods = skip_modifiers(i);
            if (type_keyword_at(after_mods)) {
                const std::size_t name_at = name_after_keyword(after_mods);
                std::string fqn;
                if (name_at < toks_.size()) {
                    fqn = package.empty() ? std::string(toks_[name_at].text)
                                          : package + "." + std::string(toks_[name_at].text);
                }
                ++type_decls_;
                current_fqn_for_scan_ = fqn;
                i = parse_type_decl(after_mods, fqn);
            } else {
                if (!is(i, ";")) saw_other_ = true;
                i = std::max(i + 1, after_mods);
            }
        }
        if (type_decls_ == 0 && saw_other_) {
            throw Error(ErrorCode::ParseFailure,
                        "no type declarations recoverable" +
                            (file_path_.empty() ? std::string() : " in '" + std::string(file_path_) + "'"));
        }
        return std::move(out_);
    }

private:
    bool is(std::size_t i, std::string_view text) const {
        return i < toks_.size() && toks_[i].kind != TokKind::Literal && toks_[i].text == text;
    }
    bool is_ident(std::size_t i) const { return i < toks_.size() && toks_[i].kind == TokKind::Ident; }

    int line_of(std::size_t offset) const {
        const auto it = std::upper_bound(line_starts_.begin(), line_starts_.end(), offset);
        return static_cast<int>(it - line_starts_.begin());
    }

    // Returns the index after a balanced group opened at `i`.
    std::size_t skip_balanced(std::size_t i, std::string_view open, std::string_view close) const {
        int depth = 0;
        for (; i < toks_.size(); ++i) {
            if (is(i, open)) {
                ++depth;
            } else if (is(i, close)) {
                if (--depth == 0) return i + 1;
            }
        }
        return toks_.size();
    }

    std::size_t skip_annotation(std::size_t i) const {
        ++i;  // '@'
        while (is_ident(i)) {
            ++i;
            if (is(i, ".") && is_ident(i + 1)) {
                ++i;
            } else {
                break;
            }
        }
        if (is(i, "(")) i = skip_balanced(i, "(", ")");
        return i;
    }

    std::size_t skip_modifiers(std::size_t i) const {
        for (;;) {
            if (is(i, "@") && !is(i + 1, "interface")) {
                i = skip_annotation(i);
            } else if (is_ident(i) && kModifiers.count(toks_[i].text) != 0) {
                ++i;
            } else if (is(i, "non") && is(i + 1, "-") && is(i + 2, "sealed")) {
                i += 3;
            } else {
                return i;
            }
        }
    }

    bool type_keyword_at(std::size_t i) const {
        if (is(i, "@") && is(i + 1, "interface")) return true;
        if (i > 0 && is(i - 1, ".")) return false;
        if (is(i, "class") || is(i, "interface") || is(i, "enum")) return is_ident(i + 1);
        if (is(i, "record")) return is_ident(i + 1) && (is(i + 2, "(") || is(i + 2, "<"));
        return false;
    }

    std::size_t name_after_keyword(std::size_t i) const { return is(i, "@") ? i + 2 : i + 1; }

    // `i` at the type keyword; returns the index after the type body.
    std::size_t parse_type_decl(std::size_t i, const std::string& fqn) {
        TypeContext ctx;
        ctx.kind = is(i, "@") ? std::string_view("@interface") : toks_[i].text;
        std::size_t j = name_after_keyword(i);
        if (!is_ident(j)) return j;
        ctx.fqn = fqn;
        ctx.simple_name = std::string(toks_[j].text);
        ++j;
        if (is(j, "<")) j = skip_balanced(j, "<", ">");
        if (ctx.kind == "record" && is(j, "(")) {
            const std::size_t close = skip_balanced(j, "(", ")");
            ctx.record_components = parse_param_types(j, close);
            j = close;
        }
        while (j < toks_.size() && !is(j, "{") && !is(j, ";")) {
            if (is(j, "(")) {
                j = skip_balanced(j, "(", ")");
            } else {
                ++j;
            }
        }
        if (!is(j, "{")) return std::min(toks_.size(), j + 1);
        return parse_class_body(j, ctx);
    }

    // `i` at '{'; returns index after the matching '}'.
    std::size_t parse_class_body(std::size_t i, const TypeContext& ctx) {
        ++i;
        if (ctx.kind == "enum") i = parse_enum_constants(i, ctx);
        while (i < toks_.size() && !is(i, "}")) {
            i = parse_member(i, ctx);
        }
        return std::min(toks_.size(), i + 1);
    }

    std::size_t parse_enum_constants(std::size_t i, const TypeContext& ctx) {
        TypeContext anon{ctx.fqn, "", "class", {}};
        while (i < toks_.size()) {
            while (is(i, "@")) i = skip_annotation(i);
            if (is(i, ";")) return i + 1;
            if (is(i, "}") || !is_ident(i)) return i;
            ++i;
            if (is(i, "(")) i = scan_parens(i);
            if (is(i, "{")) i = parse_class_body(i, anon);
            if (is(i, ",")) ++i;
        }
        return i;
    }

    std::size_t parse_member(std::size_t i, const TypeContext& ctx) {
        const std::size_t decl_start = i;
        if (is(i, ";")) return i + 1;
        if (is(i, "{")) return scan_block(i);
        if (is(i, "static") && is(i + 1, "{")) return scan_block(i + 1);

        i = skip_modifiers(i);
        if (type_keyword_at(i)) return parse_type_decl(i, ctx.fqn);
        if (is(i, "<")) i = skip_balanced(i, "<", ">");
        const std::size_t type_start = i;

        if (ctx.kind == "record" && is(i, std::string_view(ctx.simple_name)) && is(i + 1, "{")) {
            return emit_method(decl_start, ctx, "<init>", ctx.record_components, i + 1);
        }

        int angle = 0;
        std::size_t j = i;
        for (; j < toks_.size(); ++j) {
            if (is(j, "<")) {
                ++angle;
            } else if (is(j, ">")) {
                angle = std::max(0, angle - 1);
            } else if (angle == 0 && (is(j, "(") || is(j, "=") || is(j, ";") || is(j, "{") || is(j, "}"))) {
                break;
            }
        }
        if (j >= toks_.size()) return j;
        if (is(j, "}")) return j == decl_start ? j + 1 : j;
        if (is(j, ";")) return j + 1;
        if (is(j, "=")) return scan_to_semicolon(j + 1);
        if (is(j, "{")) return scan_block(j);

        // '(' : method, constructor, or annotation element.
        if (j == type_start || !is_ident(j - 1)) return scan_to_semicolon(j);
        const std::string name(toks_[j - 1].text);
        const bool constructor = (j - 1 == type_start) && name == ctx.simple_name;
        const std::size_t close = skip_balanced(j, "(", ")");
        auto params = parse_param_types(j, close);

        std::size_t k = close;
        while (k < toks_.size() && !is(k, "{") && !is(k, ";") && !is(k, "}")) {
            if (is(k, "default")) return scan_to_semicolon(k + 1);
            if (is(k, "(")) {
                k = skip_balanced(k, "(", ")");
            } else {
                ++k;
            }
        }
        if (!is(k, "{")) return is(k, ";") ? k + 1 : k;
        return emit_method(decl_start, ctx, constructor ? "<init>" : name, std::move(params), k);
    }

    std::size_t emit_method(std::size_t decl_start, const TypeContext& ctx, std::string name,
                            std::vector<std::string> params, std::size_t body_open) {
        // Reserve the slot before scanning the body so records stay in
        // source order even when the body holds anonymous classes.
        const std::size_t slot = out_.size();
        out_.emplace_back();
        const std::size_t body_end = scan_block(body_open);
        const std::size_t begin = toks_[decl_start].offset;
        const std::size_t end = body_end > 0 && body_end <= toks_.size()
                                    ? toks_[body_end - 1].offset + toks_[body_end - 1].text.size()
                                    : src_.size();
        MethodRecord rec;
        rec.class_fqn = ctx.fqn;
        rec.method_name = std::move(name);
        rec.param_types = std::move(params);
        rec.source_text = std::string(src_.substr(begin, end - begin));
        rec.file_path = std::string(file_path_);
        rec.line_span = {line_of(begin), line_of(end == 0 ? 0 : end - 1)};
        rec.method_id = signature_id(rec.class_fqn, rec.method_name, rec.param_types);
        out_[slot] = std::move(rec);
        return body_end;
    }

    // Code scanning: balanced walk that descends into anonymous and local
    // class bodies. `stop_at_semicolon` ends on ';' at depth zero.
    std::size_t scan_code(std::size_t i, bool stop_at_semicolon) {
        int braces = 0;
        std::vector<std::size_t> open_parens;
        while (i < toks_.size()) {
            if (toks_[i].kind == TokKind::Literal) {
                ++i;
                continue;
            }
            if (braces > 0 || stop_at_semicolon) {
                if (type_keyword_at(i) && !is(i, "@")) {
                    i = parse_type_decl(i, current_fqn_for_scan_);
                    continue;
                }
            }
            const std::string_view t = toks_[i].text;
            if (t == "{") {
                ++braces;
            } else if (t == "}") {
                if (braces == 0) return i;  // unbalanced: let the caller see it
                if (--braces == 0 && !stop_at_semicolon) return i + 1;
            } else if (t == "(") {
                open_parens.push_back(i);
            } else if (t == ")") {
                if (!open_parens.empty()) {
                    const std::size_t open = open_parens.back();
                    open_parens.pop_back();
                    if (is(i + 1, "{") && preceded_by_new(open)) {
                        TypeContext anon{current_fqn_for_scan_, "", "class", {}};
                        i = parse_class_body(i + 1, anon);
                        continue;
                    }
                }
            } else if (t == ";" && stop_at_semicolon && braces == 0 && open_parens.empty()) {
                return i + 1;
            }
            ++i;
        }
        return i;
    }

    bool preceded_by_new(std::size_t open_paren) const {
        std::size_t k = open_paren;
        int angle = 0;
        while (k > 0) {
            --k;
            if (is(k, ">")) {
                ++angle;
            } else if (is(k, "<")) {
                --angle;
            } else if (angle > 0) {
                continue;
            } else if (is(k, "new")) {
                return k + 1 < open_paren;
            } else if (!(is_ident(k) || is(k, "."))) {
                return false;
            }
        }
        return false;
    }

    std::size_t scan_block(std::size_t i) {
        return scan_code(i, false);
    }
    std::size_t scan_to_semicolon(std::size_t i) {
        return scan_code(i, true);
    }
    std::size_t scan_parens(std::size_t i) {
        // Arguments of an enum constant may hold anonymous classes too.
        const std::size_t close = skip_balanced(i, "(", ")");
        std::size_t k = i + 1;
        while (k < close) {
            if (is(k, "(")) {
                const std::size_t inner_close = skip_balanced(k, "(", ")");
                if (is(inner_close, "{") && preceded_by_new(k)) {
                    TypeContext anon{current_fqn_for_scan_, "", "class", {}};
                    k = parse_class_body(inner_close, anon);
                    continue;
                }
            }
            ++k;
        }
        return close;
    }

    std::vector<std::string> parse_param_types(std::size_t open, std::size_t close) const {
        std::vector<std::string> types;
        std::size_t seg_start = open + 1;
        const std::size_t end = close > 0 ? close - 1 : close;  // index of ')'
        int depth = 0;
        for (std::size_t k = open + 1; k <= end && k < toks_.size(); ++k) {
            const bool at_end = (k == end);
            if (!at_end) {
                if (is(k, "<") || is(k, "(") || is(k, "[")) ++depth;
                if (is(k, ">") || is(k, ")") || is(k, "]")) --depth;
            }
            if (at_end || (depth == 0 && is(k, ","))) {
                if (k > seg_start) {
                    if (auto t = param_type(seg_start, k); !t.empty()) types.push_back(std::move(t));
                }
                seg_start = k + 1;
            }
        }
        return types;
    }

    std::string param_type(std::size_t b, std::size_t e) const {
        std::vector<std::size_t> idx;
        for (std::size_t k = b; k < e;) {
            if (is(k, "@")) {
                k = skip_annotation(k);
            } else if (is(k, "final")) {
                ++k;
            } else {
                idx.push_back(k++);
            }
        }
        int trailing_dims = 0;
        while (idx.size() >= 2 && is(idx.back(), "]") && is(idx[idx.size() - 2], "[")) {
            idx.resize(idx.size() - 2);
            ++trailing_dims;
        }
        if (idx.empty()) return {};
        if (idx.size() > 1 && is_ident(idx.back())) {
            if (toks_[idx.back()].text == "this") return {};  // receiver parameter
            idx.pop_back();
        }
        std::string raw;
        for (std::size_t k : idx) raw += toks_[k].text;
        std::string type = normalize_type_name(raw);
        for (int d = 0; d < trailing_dims; ++d) type += "[]";
        return type;
    }

    std::string_view src_;
    std::string_view file_path_;
    std::vector<Token> toks_;
    std::vector<std::size_t> line_starts_;
    std::vector<MethodRecord> out_;
    std::size_t type_decls_ = 0;
    bool saw_other_ = false;
    // Nested, local and anonymous types all attribute to the enclosing
    // top-level class.
    std::string current_fqn_for_scan_;
};

}  // namespace

std::vector<MethodRecord> extract_methods(std::string_view source, Language language,
                                          std::string_view file_path) {
    if (language != Language::Java) {
        throw Error(ErrorCode::UnsupportedLanguage, "only Java is supported");
    }
    return Extractor(source, file_path).run();
}

}  // namespace funcloc::corpus
