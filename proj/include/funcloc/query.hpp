// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "funcloc/providers.hpp"

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace funcloc::query {

struct FailingTest {
    std::string test_fqn;
    std::string test_code;
    std::string stack_trace;

    friend bool operator==(const FailingTest&, const FailingTest&) = default;
};

/// Failing tests of one bug after parent-test deduplication.
struct FailureBundle {
    std::string bug_id;
    std::vector<FailingTest> tests;
    std::vector<std::string> dedup_note;  // names of collapsed tests
};

struct FunctionalityQuery {
    std::string text;
    std::string model_id;
    providers::Usage usage;
};

struct FailingTestsFile {
    std::string bug_id;
    std::vector<FailingTest> tests;
};

/// Parses `{"bug_id": str, "tests": [{"name": str, "code": str, "stack_trace": str}]}`.
FailingTestsFile parse_failing_tests(std::string_view json_text);

/// Tests with byte-identical, non-empty code collapse to the one with the
/// lexicographically smallest name; groups keep first-appearance order.
FailureBundle assemble_bundle(std::span<const FailingTest> tests, std::string bug_id = {});

/// Renders the functionality-extraction prompt, one test block per bundle
/// entry. Without stack traces the "Stack trace:" line is left out.
std::string build_extraction_prompt(const FailureBundle& bundle, bool include_stack_trace);

/// Keeps the first `max_lines` lines of `text`.
std::string truncate_lines(std::string_view text, std::size_t max_lines);

struct ExtractionOptions {
    bool include_stack_trace = true;
    std::size_t max_stack_lines = 50;
    std::string model_id;
    double temperature = 0.0;
    int max_output_tokens = 2048;
};

FunctionalityQuery extract_functionality(const FailureBundle& bundle, providers::ChatProvider& chat,
                                         const ExtractionOptions& options);

/// Test code and stack traces concatenated verbatim; the retrieval text
/// when no functionality query is generated.
std::string raw_failure_text(const FailureBundle& bundle);

}  // namespace funcloc::query
