// SPDX-License-Identifier: Apache-2.0
#include "funcloc/corpus.hpp"

#include "funcloc/error.hpp"
#include "funcloc/util.hpp"

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <json.hpp>

#include <algorithm>
#include <map>
#include <sstream>
#include <tuple>

namespace funcloc::corpus {

using nlohmann::json;
using nlohmann::ordered_json;

std::string MethodKey::to_string() const {
    std::string out = class_fqn + "#" + method_name;
    if (param_types) {
        out += "(";
        for (std::size_t i = 0; i < param_types->size(); ++i) {
            if (i) out += ",";
            out += (*param_types)[i];
        }
        out += ")";
    }
    return out;
}

std::string signature_id(std::string_view class_fqn, std::string_view method_name,
                         std::span<const std::string> param_types) {
    std::string out;
    out.append(class_fqn).append("#").append(method_name).append("(");
    for (std::size_t i = 0; i < param_types.size(); ++i) {
        if (i) out += ",";
        out += param_types[i];
    }
    out += ")";
    return out;
}

std::string top_level_class(std::string_view class_name) {
    return std::string(class_name.substr(0, class_name.find('$')));
}

std::string normalize_type_name(std::string_view type_name) {
    std::string no_generics;
    int depth = 0;
    for (char c : type_name) {
        if (c == '<') {
            ++depth;
        } else if (c == '>') {
            depth = std::max(0, depth - 1);
        } else if (depth == 0 && c != ' ' && c != '\t' && c != '\n' && c != '\r') {
            no_generics.push_back(c);
        }
    }
    int dims = 0;
    for (;;) {
        if (no_generics.ends_with("[]")) {
            no_generics.resize(no_generics.size() - 2);
            ++dims;
        } else if (no_generics.ends_with("...")) {
            no_generics.resize(no_generics.size() - 3);
            ++dims;
        } else {
            break;
        }
    }
    const auto cut = no_generics.find_last_of("./$");
    std::string out = cut == std::string::npos ? no_generics : no_generics.substr(cut + 1);
    for (int d = 0; d < dims; ++d) out += "[]";
    return out;
}

std::vector<std::string> params_from_jvm_descriptor(std::string_view descriptor) {
    const auto open = descriptor.find('(');
    const auto close = descriptor.find(')');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) {
        throw Error(ErrorCode::MalformedCoverage, "bad method descriptor '" + std::string(descriptor) + "'");
    }
    std::vector<std::string> out;
    std::size_t i = open + 1;
    while (i < close) {
        int dims = 0;
        while (i < close && descriptor[i] == '[') {
            ++dims;
            ++i;
        }
        if (i >= close) break;
        std::string base;
        switch (descriptor[i]) {
            case 'B': base = "byte"; break;
            case 'C': base = "char"; break;
            case 'D': base = "double"; break;
            case 'F': base = "float"; break;
            case 'I': base = "int"; break;
            case 'J': base = "long"; break;
            case 'S': base = "short"; break;
            case 'Z': base = "boolean"; break;
            case 'L': {
                const auto semi = descriptor.find(';', i);
                if (semi == std::string_view::npos || semi > close) {
                    throw Error(ErrorCode::MalformedCoverage,
                                "bad method descriptor '" + std::string(descriptor) + "'");
                }
                base = normalize_type_name(descriptor.substr(i + 1, semi - i - 1));
                i = semi;
                break;
            }
            default:
                throw Error(ErrorCode::MalformedCoverage,
                            "bad method descriptor '" + std::string(descriptor) + "'");
        }
        ++i;
        for (int d = 0; d < dims; ++d) base += "[]";
        out.push_back(std::move(base));
    }
    return out;
}

CoverageFormat coverage_format_from_string(std::string_view name) {
    if (name == "cobertura-xml") return CoverageFormat::CoberturaXml;
    if (name == "simple-json") return CoverageFormat::SimpleJson;
    throw Error(ErrorCode::InvalidArgument, "unknown coverage format '" + std::string(name) + "'");
}

Language language_from_string(std::string_view name) {
    if (name == "java") return Language::Java;
    throw Error(ErrorCode::UnsupportedLanguage, "unsupported language '" + std::string(name) + "'");
}

namespace {

CoverageReport parse_simple_json(std::string_view raw) {
    json doc;
    try {
        doc = json::parse(raw);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::MalformedCoverage, e.what());
    }
    CoverageReport report;
    try {
        report.bug_id = doc.at("bug_id").get<std::string>();
        report.failing_test_names = doc.at("failing_tests").get<std::vector<std::string>>();
        for (const auto& entry : doc.at("covered")) {
            MethodKey key;
            key.class_fqn = top_level_class(entry.at("class").get<std::string>());
            key.method_name = entry.at("method").get<std::string>();
            if (entry.contains("params") && !entry.at("params").is_null()) {
                std::vector<std::string> params;
                for (const auto& p : entry.at("params")) {
                    params.push_back(normalize_type_name(p.get<std::string>()));
                }
                key.param_types = std::move(params);
            }
            report.covered_method_keys.insert(std::move(key));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedCoverage, e.what());
    }
    return report;
}

long hits_of(const boost::property_tree::ptree& node) {
    return node.get<long>("<xmlattr>.hits", 0);
}

CoverageReport parse_cobertura(std::string_view raw) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in{std::string(raw)};
        pt::read_xml(in, tree);
    } catch (const pt::ptree_error& e) {
        throw Error(ErrorCode::MalformedCoverage, e.what());
    }
    const auto coverage = tree.get_child_optional("coverage");
    if (!coverage) {
        throw Error(ErrorCode::MalformedCoverage, "missing <coverage> root element");
    }
    CoverageReport report;
    try {
        const auto packages = coverage->get_child_optional("packages");
        if (!packages) return report;
        for (const auto& [pkg_tag, pkg] : *packages) {
            if (pkg_tag != "package") continue;
            const auto classes = pkg.get_child_optional("classes");
            if (!classes) continue;
            for (const auto& [cls_tag, cls] : *classes) {
                if (cls_tag != "class") continue;
                const auto class_name = top_level_class(cls.get<std::string>("<xmlattr>.name"));
                const auto methods = cls.get_child_optional("methods");
                if (!methods) continue;
                for (const auto& [m_tag, method] : *methods) {
                    if (m_tag != "method") continue;
                    bool hit = hits_of(method) > 0;
                    if (const auto lines = method.get_child_optional("lines"); lines && !hit) {
                        for (const auto& [l_tag, line] : *lines) {
                            if (l_tag == "line" && hits_of(line) > 0) {
                                hit = true;
                                break;
                            }
                        }
                    }
                    if (!hit) continue;
                    MethodKey key;
                    key.class_fqn = class_name;
                    key.method_name = method.get<std::string>("<xmlattr>.name");
                    if (const auto sig = method.get_optional<std::string>("<xmlattr>.signature");
                        sig && !sig->empty()) {
                        key.param_types = params_from_jvm_descriptor(*sig);
                    }
                    report.covered_method_keys.insert(std::move(key));
                }
            }
        }
    } catch (const pt::ptree_error& e) {
        throw Error(ErrorCode::MalformedCoverage, e.what());
    }
    return report;
}

}  // namespace

CoverageReport parse_coverage(std::string_view raw, CoverageFormat format, std::string_view bug_id,
                              std::span<const std::string> failing_tests) {
    CoverageReport report;
    if (format == CoverageFormat::SimpleJson) {
        report = parse_simple_json(raw);
    } else {
        report = parse_cobertura(raw);
        report.bug_id = std::string(bug_id);
        report.failing_test_names.assign(failing_tests.begin(), failing_tests.end());
    }
    if (report.covered_method_keys.empty()) {
        throw Error(ErrorCode::EmptyCoverage, "no covered methods in coverage report");
    }
    return report;
}

bool matches(const MethodKey& key, const MethodRecord& method) {
    if (key.class_fqn != method.class_fqn || key.method_name != method.method_name) return false;
    return !key.param_types || *key.param_types == method.param_types;
}

const MethodRecord* MethodCorpus::find(std::string_view method_id) const {
    for (const auto& m : methods) {
        if (m.method_id == method_id) return &m;
    }
    return nullptr;
}

namespace {

namespace fs = std::filesystem;

struct SourceFile {
    std::string relative;
    std::vector<MethodRecord> methods;
};

class SourceLocator {
public:
    explicit SourceLocator(std::span<const fs::path> roots) : roots_(roots.begin(), roots.end()) {}

    // Records of the file declaring `class_fqn`, or nullptr.
    const SourceFile* file_for(const std::string& class_fqn) {
        std::string rel = class_fqn;
        std::replace(rel.begin(), rel.end(), '.', '/');
        rel += ".java";
        for (const auto& root : roots_) {
            const fs::path candidate = root / rel;
            std::error_code ec;
            if (fs::is_regular_file(candidate, ec)) {
                const auto* file = load(root, candidate);
                if (file && declares(*file, class_fqn)) return file;
            }
        }
        // Non-public top-level classes can live in a file named after another type.
        index_all();
        const auto it = by_class_.find(class_fqn);
        return it == by_class_.end() ? nullptr : it->second;
    }

private:
    static bool declares(const SourceFile& file, const std::string& class_fqn) {
        return std::any_of(file.methods.begin(), file.methods.end(),
                           [&](const MethodRecord& m) { return m.class_fqn == class_fqn; });
    }

    const SourceFile* load(const fs::path& root, const fs::path& file) {
        const std::string key = file.lexically_normal().string();
        if (const auto it = files_.find(key); it != files_.end()) return &it->second;
        SourceFile parsed;
        parsed.relative = file.lexically_relative(root).generic_string();
        try {
            parsed.methods = extract_methods(read_file(file), Language::Java, parsed.relative);
        } catch (const Error&) {
            // Unparseable files contribute nothing; their keys surface as unresolved.
        }
        return &files_.emplace(key, std::move(parsed)).first->second;
    }

    void index_all() {
        if (indexed_) return;
        indexed_ = true;
        for (const auto& root : roots_) {
            std::error_code ec;
            if (!fs::is_directory(root, ec)) continue;
            std::vector<fs::path> found;
            for (auto it = fs::recursive_directory_iterator(root, ec);
                 !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
                if (it->is_regular_file() && it->path().extension() == ".java") found.push_back(it->path());
            }
            std::sort(found.begin(), found.end());
            for (const auto& path : found) {
                const auto* file = load(root, path);
                for (const auto& m : file->methods) by_class_.emplace(m.class_fqn, file);
            }
        }
    }

    std::vector<fs::path> roots_;
    std::map<std::string, SourceFile> files_;
    std::map<std::string, const SourceFile*> by_class_;
    bool indexed_ = false;
};

// Exact matching first; when the coverage side carries parameter types that
// match nothing (erased generics, for example) fall back to same-arity and
// then to name-only overloads so the faulty method is never lost.
std::vector<const MethodRecord*> resolve(const MethodKey& key, const SourceFile& file) {
    std::vector<const MethodRecord*> exact, arity, by_name;
    for (const auto& m : file.methods) {
        if (m.class_fqn != key.class_fqn || m.method_name != key.method_name) continue;
        by_name.push_back(&m);
        if (key.param_types && m.param_types.size() == key.param_types->size()) arity.push_back(&m);
        if (matches(key, m)) exact.push_back(&m);
    }
    if (!exact.empty()) return exact;
    if (!arity.empty()) return arity;
    return by_name;
}

}  // namespace

CorpusBuild build_corpus(const CoverageReport& coverage, std::span<const fs::path> source_roots) {
    CorpusBuild result;
    result.corpus.bug_id = coverage.bug_id;
    SourceLocator locator(source_roots);

    std::map<std::pair<std::string, int>, const MethodRecord*> selected;
    for (const auto& key : coverage.covered_method_keys) {
        const SourceFile* file = locator.file_for(key.class_fqn);
        if (!file) {
            result.unresolved.push_back({key, "no source file declares class " + key.class_fqn});
            continue;
        }
        const auto hits = resolve(key, *file);
        if (hits.empty()) {
            result.unresolved.push_back({key, "method not found in " + file->relative});
            continue;
        }
        for (const auto* m : hits) selected.emplace(std::pair{m->file_path, m->line_span.start}, m);
    }

    std::vector<MethodRecord> methods;
    methods.reserve(selected.size());
    for (const auto& [_, m] : selected) methods.push_back(*m);
    std::sort(methods.begin(), methods.end(), [](const MethodRecord& a, const MethodRecord& b) {
        return std::tie(a.class_fqn, a.method_name, a.param_types, a.file_path, a.line_span.start) <
               std::tie(b.class_fqn, b.method_name, b.param_types, b.file_path, b.line_span.start);
    });

    std::map<std::string, int> id_counts;
    for (const auto& m : methods) ++id_counts[m.method_id];
    for (auto& m : methods) {
        if (id_counts[m.method_id] > 1) m.method_id += "@" + m.file_path + ":" + std::to_string(m.line_span.start);
    }
    result.corpus.methods = std::move(methods);
    return result;
}

std::string to_json(const MethodCorpus& corpus) {
    ordered_json doc;
    doc["bug_id"] = corpus.bug_id;
    doc["methods"] = ordered_json::array();
    for (const auto& m : corpus.methods) {
        ordered_json entry;
        entry["method_id"] = m.method_id;
        entry["class"] = m.class_fqn;
        entry["method"] = m.method_name;
        entry["params"] = m.param_types;
        entry["file"] = m.file_path;
        entry["lines"] = {m.line_span.start, m.line_span.end};
        entry["source"] = m.source_text;
        doc["methods"].push_back(std::move(entry));
    }
    return doc.dump(2);
}

}  // namespace funcloc::corpus
