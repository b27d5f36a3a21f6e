// SPDX-License-Identifier: Apache-2.0
#include "funcloc/query.hpp"

#include "funcloc/error.hpp"
#include "funcloc/util.hpp"

#include <json.hpp>

#include <map>

namespace funcloc::query {

using nlohmann::json;

namespace {

constexpr std::string_view kExtractionInstructions =
    "You are a code assistant helping to identify faulty program behavior. One or more unit tests have "
    "failed due to the same underlying functionality issue.\n"
    "Given the following test failure information (including multiple test codes, and stack traces), "
    "extract **only** the underlying functional logic that failed. Your output should be a clean, concise "
    "description of the shared functionality that failed to be implemented correctly.\n"
    "\n"
    "Requirements:\n"
    "\n"
    "- Focus on what functionality failed, not how the tests failed.\n"
    "\n"
    "- Include any relevant objects, inputs, and expected behavior if available.\n"
    "\n"
    "- The description should be precise and suitable for use as a semantic query to retrieve code "
    "(in natural language).\n"
    "\n"
    "- Avoid unrelated details.\n"
    "\n";

void validate(const FailingTest& t) {
    if (t.test_fqn.empty()) {
        throw Error(ErrorCode::InvalidArgument, "failing test without a name");
    }
    if (t.test_code.empty() && t.stack_trace.empty()) {
        throw Error(ErrorCode::InvalidArgument, "failing test '" + t.test_fqn + "' has neither code nor stack trace");
    }
}

}  // namespace

FailingTestsFile parse_failing_tests(std::string_view json_text) {
    FailingTestsFile out;
    try {
        const auto doc = json::parse(json_text);
        out.bug_id = doc.at("bug_id").get<std::string>();
        for (const auto& t : doc.at("tests")) {
            FailingTest test{t.at("name").get<std::string>(), t.value("code", std::string()),
                             t.value("stack_trace", std::string())};
            validate(test);
            out.tests.push_back(std::move(test));
        }
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, std::string("failing tests file: ") + e.what());
    }
    return out;
}

FailureBundle assemble_bundle(std::span<const FailingTest> tests, std::string bug_id) {
    if (tests.empty()) {
        throw Error(ErrorCode::EmptyBundle, "no failing tests");
    }
    for (const auto& t : tests) validate(t);

    FailureBundle bundle;
    bundle.bug_id = std::move(bug_id);
    std::map<std::string_view, std::size_t> slot_by_code;
    for (const auto& t : tests) {
        if (t.test_code.empty()) {
            bundle.tests.push_back(t);
            continue;
        }
        const auto [it, inserted] = slot_by_code.try_emplace(t.test_code, bundle.tests.size());
        if (inserted) {
            bundle.tests.push_back(t);
            continue;
        }
        FailingTest& kept = bundle.tests[it->second];
        if (t.test_fqn < kept.test_fqn) {
            bundle.dedup_note.push_back(kept.test_fqn);
            kept = t;
        } else {
            bundle.dedup_note.push_back(t.test_fqn);
        }
    }
    return bundle;
}

std::string build_extraction_prompt(const FailureBundle& bundle, bool include_stack_trace) {
    std::string prompt(kExtractionInstructions);
    for (std::size_t i = 0; i < bundle.tests.size(); ++i) {
        const auto& t = bundle.tests[i];
        if (i) prompt += "\n\n";
        prompt += "Test name: " + t.test_fqn + "\n";
        prompt += "Test code: " + t.test_code;
        if (include_stack_trace) prompt += "\nStack trace: " + t.stack_trace;
    }
    return prompt;
}

std::string truncate_lines(std::string_view text, std::size_t max_lines) {
    std::size_t pos = 0;
    for (std::size_t line = 0; line < max_lines; ++line) {
        pos = text.find('\n', pos);
        if (pos == std::string_view::npos) return std::string(text);
        ++pos;
    }
    // Drop the newline that ends the last kept line.
    return std::string(text.substr(0, pos == 0 ? 0 : pos - 1));
}

FunctionalityQuery extract_functionality(const FailureBundle& bundle, providers::ChatProvider& chat,
                                         const ExtractionOptions& options) {
    if (bundle.tests.empty()) {
        throw Error(ErrorCode::EmptyBundle, "no failing tests");
    }
    FailureBundle truncated = bundle;
    for (auto& t : truncated.tests) t.stack_trace = truncate_lines(t.stack_trace, options.max_stack_lines);

    providers::ChatRequest request;
    request.model_id = options.model_id;
    request.prompt = build_extraction_prompt(truncated, options.include_stack_trace);
    request.temperature = options.temperature;
    request.max_output_tokens = options.max_output_tokens;
    const auto response = chat.chat(request);
    if (is_blank(response.text)) {
        throw Error(ErrorCode::EmptyResponse, "functionality extraction returned no text");
    }
    return FunctionalityQuery{response.text, options.model_id, providers::usage_of(response)};
}

std::string raw_failure_text(const FailureBundle& bundle) {
    std::string out;
    for (const auto& t : bundle.tests) {
        if (!out.empty()) out += "\n";
        out += t.test_code;
        if (!t.stack_trace.empty()) {
            if (!t.test_code.empty()) out += "\n";
            out += t.stack_trace;
        }
    }
    return out;
}

}  // namespace funcloc::query
