// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace funcloc::corpus {

struct LineSpan {
    int start = 0;  // 1-based, inclusive
    int end = 0;    // 1-based, inclusive

    friend bool operator==(const LineSpan&, const LineSpan&) = default;
};

/// One source method or constructor. Constructors are named "<init>" and
/// methods of nested, local and anonymous classes carry the FQN of the
/// top-level class that encloses them.
struct MethodRecord {
    std::string method_id;
    std::string class_fqn;
    std::string method_name;
    std::vector<std::string> param_types;
    std::string source_text;
    std::string file_path;
    LineSpan line_span;

    friend bool operator==(const MethodRecord&, const MethodRecord&) = default;
};

/// Identity of a covered method as reported by a coverage tool. An empty
/// `param_types` optional means the format did not carry parameter types.
struct MethodKey {
    std::string class_fqn;
    std::string method_name;
    std::optional<std::vector<std::string>> param_types;

    friend auto operator<=>(const MethodKey&, const MethodKey&) = default;
    friend bool operator==(const MethodKey&, const MethodKey&) = default;

    std::string to_string() const;
};

struct CoverageReport {
    std::string bug_id;
    std::set<MethodKey> covered_method_keys;
    std::vector<std::string> failing_test_names;
};

enum class CoverageFormat { CoberturaXml, SimpleJson };

CoverageFormat coverage_format_from_string(std::string_view name);

/// Parses a coverage report. Cobertura XML carries neither a bug id nor test
/// names, so both may be supplied by the caller; for simple-json they come
/// from the document itself and the arguments are ignored.
CoverageReport parse_coverage(std::string_view raw, CoverageFormat format,
                              std::string_view bug_id = {},
                              std::span<const std::string> failing_tests = {});

enum class Language { Java };

Language language_from_string(std::string_view name);

/// Extracts every method and constructor that has a body. `method_id` of the
/// returned records is the plain signature id; build_corpus disambiguates.
std::vector<MethodRecord> extract_methods(std::string_view source, Language language,
                                          std::string_view file_path = {});

struct MethodCorpus {
    std::string bug_id;
    std::vector<MethodRecord> methods;

    const MethodRecord* find(std::string_view method_id) const;
};

struct UnresolvedKey {
    MethodKey key;
    std::string reason;
};

struct CorpusBuild {
    MethodCorpus corpus;
    std::vector<UnresolvedKey> unresolved;
};

CorpusBuild build_corpus(const CoverageReport& coverage,
                         std::span<const std::filesystem::path> source_roots);

std::string to_json(const MethodCorpus& corpus);

// Type-name normalization shared by the extractor and coverage parsers:
// generics and package qualifiers are dropped, varargs become arrays.
std::string normalize_type_name(std::string_view type_name);
std::vector<std::string> params_from_jvm_descriptor(std::string_view descriptor);

/// "org.a.Outer$Inner$1" -> "org.a.Outer"
std::string top_level_class(std::string_view class_name);

std::string signature_id(std::string_view class_fqn, std::string_view method_name,
                         std::span<const std::string> param_types);

/// Whether a method matches a key, honoring unavailable parameter types.
bool matches(const MethodKey& key, const MethodRecord& method);

}  // namespace funcloc::corpus
