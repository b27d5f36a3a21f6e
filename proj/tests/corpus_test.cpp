// SPDX-License-Identifier: Apache-2.0
#include "funcloc/corpus.hpp"
#include "funcloc/error.hpp"
#include "funcloc/util.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

namespace fs = std::filesystem;
using namespace funcloc;
using namespace funcloc::corpus;

namespace {

const fs::path kData = fs::path(FUNCLOC_TEST_DATA) / "fixtures";

const MethodRecord& by_name(const std::vector<MethodRecord>& methods, std::string_view name,
                            std::size_t nth = 0) {
    for (const auto& m : methods) {
        if (m.method_name == name && nth-- == 0) return m;
    }
    throw std::runtime_error("no method " + std::string(name));
}

// Line number of the first line of `text` that contains `needle`.
int line_containing(std::string_view text, std::string_view needle) {
    int line = 1;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto end = text.find('\n', start);
        const auto row = text.substr(start, end == std::string_view::npos ? text.npos : end - start);
        if (row.find(needle) != std::string_view::npos) return line;
        if (end == std::string_view::npos) break;
        start = end + 1;
        ++line;
    }
    return -1;
}

}  // namespace

TEST(ParseCoverage, SimpleJsonMapsFields) {
    const auto report = parse_coverage(read_file(kData / "coverage/simple.json"), CoverageFormat::SimpleJson);
    EXPECT_EQ(report.bug_id, "Calc-1");
    EXPECT_EQ(report.covered_method_keys.size(), 3u);
    ASSERT_EQ(report.failing_test_names.size(), 1u);
    EXPECT_EQ(report.failing_test_names[0], "org.example.CalcTest::testSum");
    const MethodKey sum{"org.example.Calc", "sum", std::vector<std::string>{"List"}};
    EXPECT_EQ(report.covered_method_keys.count(sum), 1u);
}

TEST(ParseCoverage, SimpleJsonWithoutCoveredMethodsIsEmptyCoverage) {
    const std::string raw = R"({"bug_id":"b","failing_tests":["t"],"covered":[]})";
    try {
        parse_coverage(raw, CoverageFormat::SimpleJson);
        FAIL() << "expected EmptyCoverage";
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::EmptyCoverage);
    }
}

TEST(ParseCoverage, MalformedInputs) {
    for (const std::string raw : {"{not json", R"({"bug_id":"b"})", R"({"bug_id":"b","failing_tests":[],"covered":[{"method":"m"}]})"}) {
        try {
            parse_coverage(raw, CoverageFormat::SimpleJson);
            FAIL() << raw;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::MalformedCoverage) << raw;
        }
    }
    try {
        parse_coverage("<coverage><packages>", CoverageFormat::CoberturaXml);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::MalformedCoverage);
    }
}

TEST(ParseCoverage, CoberturaCountsMethodsWithHits) {
    const std::vector<std::string> tests{"org.example.CalcTest::testSum"};
    const auto report = parse_coverage(read_file(kData / "coverage/cobertura.xml"), CoverageFormat::CoberturaXml,
                                       "Calc-1", tests);
    EXPECT_EQ(report.bug_id, "Calc-1");
    EXPECT_EQ(report.failing_test_names, tests);
    ASSERT_EQ(report.covered_method_keys.size(), 5u);
    using P = std::vector<std::string>;
    const std::set<MethodKey> expected{
        {"org.example.Calc", "<init>", P{"int"}},
        {"org.example.Calc", "add", P{"int", "int"}},
        {"org.example.Calc", "scale", P{"double"}},
        {"org.example.Calc", "sum", P{"List"}},
        {"org.example.Shapes", "run", P{}},  // Shapes$1 folds into its top-level class
    };
    EXPECT_EQ(report.covered_method_keys, expected);
}

TEST(JvmDescriptor, DecodesPrimitivesObjectsAndArrays) {
    EXPECT_EQ(params_from_jvm_descriptor("(I[Ljava/lang/String;[[DLjava/util/Map$Entry;Z)V"),
              (std::vector<std::string>{"int", "String[]", "double[][]", "Entry", "boolean"}));
    EXPECT_TRUE(params_from_jvm_descriptor("()V").empty());
    EXPECT_THROW(params_from_jvm_descriptor("(Q)V"), Error);
}

TEST(NormalizeTypeName, StripsGenericsAndPackages) {
    EXPECT_EQ(normalize_type_name("java.util.Map<String, List<Integer>>"), "Map");
    EXPECT_EQ(normalize_type_name("String..."), "String[]");
    EXPECT_EQ(normalize_type_name("int [] []"), "int[][]");
    EXPECT_EQ(normalize_type_name("Outer.Inner"), "Inner");
}

TEST(ExtractMethods, EmptyClassBodyYieldsNothing) {
    EXPECT_TRUE(extract_methods("package a;\npublic class Empty {}\n", Language::Java).empty());
    EXPECT_TRUE(extract_methods("", Language::Java).empty());
}

TEST(ExtractMethods, TwoTopLevelMethodsWithLineSpans) {
    const std::string src =
        "package org.example;\n"        // 1
        "\n"                             // 2
        "public class Calc {\n"          // 3
        "    /** Adds. */\n"             // 4
        "    public int add(int a, int b) {\n"  // 5
        "        return a + b;\n"        // 6
        "    }\n"                        // 7
        "\n"                             // 8
        "    @Override\n"                // 9
        "    public String toString() {\n"  // 10
        "        return \"Calc{\" + \"}\";\n"  // 11
        "    }\n"                        // 12
        "}\n";                           // 13
    const auto methods = extract_methods(src, Language::Java, "org/example/Calc.java");
    ASSERT_EQ(methods.size(), 2u);
    EXPECT_EQ(methods[0].method_name, "add");
    EXPECT_EQ(methods[0].class_fqn, "org.example.Calc");
    EXPECT_EQ(methods[0].param_types, (std::vector<std::string>{"int", "int"}));
    EXPECT_EQ(methods[0].line_span, (LineSpan{5, 7}));
    EXPECT_EQ(methods[0].source_text, "public int add(int a, int b) {\n        return a + b;\n    }");
    EXPECT_EQ(methods[0].file_path, "org/example/Calc.java");
    EXPECT_EQ(methods[1].method_name, "toString");
    EXPECT_EQ(methods[1].line_span, (LineSpan{9, 12}));
    EXPECT_TRUE(methods[1].source_text.starts_with("@Override"));
    EXPECT_TRUE(methods[1].source_text.ends_with("}"));
}

TEST(ExtractMethods, OverloadsAreDistinguishedByParamTypes) {
    const std::string src = R"(class A {
    void foo(int x) { }
    void foo(String s) { }
})";
    const auto methods = extract_methods(src, Language::Java);
    ASSERT_EQ(methods.size(), 2u);
    EXPECT_EQ(methods[0].param_types, std::vector<std::string>{"int"});
    EXPECT_EQ(methods[1].param_types, std::vector<std::string>{"String"});
    EXPECT_EQ(methods[0].line_span, (LineSpan{2, 2}));
    EXPECT_EQ(methods[1].line_span, (LineSpan{3, 3}));
    EXPECT_NE(methods[0].method_id, methods[1].method_id);
}

TEST(ExtractMethods, HandlesTheAwkwardCorners) {
    const std::string src = R"(package p.q;

import java.util.*;

/* class Commented { void ghost() {} } */
@SuppressWarnings({"unchecked", "rawtypes"})
public final class Outer<T extends Comparable<? super T>> extends Base implements Runnable {
    private static final String BRACES = "{ } void fake() { }";
    private final Runnable field = new Runnable() {
        @Override public void run() { System.out.println("}"); }
    };
    static { init(); }

    public Outer() { this(null); }

    protected <K, V extends List<K>> Map<K, V>[] generic(final Map<K, V> m, int... rest) throws java.io.IOException, IllegalStateException {
        char c = '{';
        Runnable r = () -> { System.out.println(c); };
        Comparator<String> cmp = new Comparator<String>() {
            public int compare(String a, String b) { return a.compareTo(b); }
        };
        class Local { int local(int q[]) { return q.length; } }
        String block = """
            } not a brace {
            """;
        return null;
    }

    abstract static class Inner { abstract void noBody(); void body() { } }

    interface Api { default int dflt() { return 1; } void plain(); }

    @interface Marker { String[] value() default {}; int level() default 3; }

    enum Color {
        RED { @Override String label() { return "r"; } },
        GREEN(1) { String label() { return "g"; } },
        BLUE;
        Color() { }
        Color(int v) { }
        String label() { return name(); }
    }

    record Point(int x, java.util.List<String> tags) {
        Point { if (x < 0) throw new IllegalArgumentException(); }
        int twice() { return x * 2; }
    }

    public void run() { }
}

class Second {
    Second(String s) { }
}
)";
    const auto methods = extract_methods(src, Language::Java, "p/q/Outer.java");
    std::vector<std::string> ids;
    for (const auto& m : methods) ids.push_back(m.method_id);
    const std::vector<std::string> expected{
        "p.q.Outer#run()",  // anonymous Runnable in field initializer
        "p.q.Outer#<init>()",
        "p.q.Outer#generic(Map,int[])",
        "p.q.Outer#compare(String,String)",
        "p.q.Outer#local(int[])",
        "p.q.Outer#body()",
        "p.q.Outer#dflt()",
        "p.q.Outer#label()",  // RED
        "p.q.Outer#label()",  // GREEN
        "p.q.Outer#<init>()",  // Color()
        "p.q.Outer#<init>(int)",
        "p.q.Outer#label()",
        "p.q.Outer#<init>(int,List)",  // compact record constructor
        "p.q.Outer#twice()",
        "p.q.Outer#run()",
        "p.q.Second#<init>(String)",
    };
    EXPECT_EQ(ids, expected);

    const auto& generic = by_name(methods, "generic");
    EXPECT_EQ(generic.line_span.start, line_containing(src, "protected <K, V extends"));
    EXPECT_EQ(generic.line_span.end, line_containing(src, "        return null;") + 1);
    for (const auto& m : methods) {
        EXPECT_LE(m.line_span.start, m.line_span.end);
        EXPECT_FALSE(m.source_text.empty());
    }
}

TEST(ExtractMethods, ErrorsAndTolerance) {
    try {
        extract_methods("this is not java at all (", Language::Java);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseFailure);
    }
    EXPECT_THROW(language_from_string("kotlin"), Error);
    // Truncated file: the complete method before the damage is still recovered.
    const auto methods = extract_methods("class A {\n void ok() { }\n void broken() { if (x) {\n", Language::Java);
    ASSERT_GE(methods.size(), 1u);
    EXPECT_EQ(methods[0].method_name, "ok");
}

TEST(ExtractMethods, SourceTextIsBoundedByLineSpan) {
    const auto path = kData / "corpus_src/org/example/Calc.java";
    const std::string src = read_file(path);
    const auto methods = extract_methods(src, Language::Java);
    ASSERT_EQ(methods.size(), 5u);
    std::vector<std::size_t> line_starts{0};
    for (std::size_t i = 0; i < src.size(); ++i) {
        if (src[i] == '\n') line_starts.push_back(i + 1);
    }
    for (const auto& m : methods) {
        const std::size_t lo = line_starts[m.line_span.start - 1];
        const std::size_t hi = m.line_span.end < static_cast<int>(line_starts.size())
                                   ? line_starts[m.line_span.end]
                                   : src.size();
        const std::string_view window(src.data() + lo, hi - lo);
        EXPECT_NE(window.find(m.source_text), std::string_view::npos) << m.method_id;
    }
}

TEST(BuildCorpus, AllKeysResolvable) {
    const auto report = parse_coverage(read_file(kData / "coverage/simple.json"), CoverageFormat::SimpleJson);
    const std::vector<fs::path> roots{kData / "corpus_src"};
    const auto built = build_corpus(report, roots);
    EXPECT_TRUE(built.unresolved.empty());
    ASSERT_EQ(built.corpus.methods.size(), 3u);
    // (class, method, params) order: <init> < add < sum
    EXPECT_EQ(built.corpus.methods[0].method_id, "org.example.Calc#<init>(int)");
    EXPECT_EQ(built.corpus.methods[1].method_id, "org.example.Calc#add(int,int)");
    EXPECT_EQ(built.corpus.methods[2].method_id, "org.example.Calc#sum(List)");
    EXPECT_EQ(built.corpus.methods[2].file_path, "org/example/Calc.java");
    EXPECT_EQ(built.corpus.bug_id, "Calc-1");
}

TEST(BuildCorpus, ThirdPartyKeyIsReportedNotDropped) {
    CoverageReport report;
    report.bug_id = "b";
    report.failing_test_names = {"t"};
    report.covered_method_keys = {
        {"org.example.Calc", "add", std::vector<std::string>{"int", "int"}},
        {"org.example.Shapes", "area", std::vector<std::string>{"double", "double"}},
        {"com.thirdparty.Lib", "call", std::vector<std::string>{}},
    };
    const std::vector<fs::path> roots{kData / "corpus_src"};
    const auto built = build_corpus(report, roots);
    EXPECT_EQ(built.corpus.methods.size(), 2u);
    ASSERT_EQ(built.unresolved.size(), 1u);
    EXPECT_EQ(built.unresolved[0].key.class_fqn, "com.thirdparty.Lib");
    EXPECT_EQ(built.corpus.methods.size() + built.unresolved.size(), report.covered_method_keys.size());
}

TEST(BuildCorpus, NonPublicTopLevelClassFoundByScanning) {
    CoverageReport report;
    report.covered_method_keys = {{"org.example.Helper", "mul", std::vector<std::string>{"double", "double"}}};
    const std::vector<fs::path> roots{kData / "corpus_src"};
    const auto built = build_corpus(report, roots);
    ASSERT_EQ(built.corpus.methods.size(), 1u);
    EXPECT_EQ(built.corpus.methods[0].file_path, "org/example/Shapes.java");
}

TEST(BuildCorpus, MissingParamTypesMatchAllOverloads) {
    CoverageReport report;
    report.covered_method_keys = {{"org.example.Calc", "scale", std::nullopt}};
    const std::vector<fs::path> roots{kData / "corpus_src"};
    const auto built = build_corpus(report, roots);
    ASSERT_EQ(built.corpus.methods.size(), 2u);
    EXPECT_EQ(built.corpus.methods[0].param_types, std::vector<std::string>{"double"});
    EXPECT_EQ(built.corpus.methods[1].param_types, std::vector<std::string>{"int"});
}

TEST(BuildCorpus, ErasedGenericFallsBackToArity) {
    CoverageReport report;
    report.covered_method_keys = {{"org.example.Calc", "sum", std::vector<std::string>{"Object"}}};
    const std::vector<fs::path> roots{kData / "corpus_src"};
    const auto built = build_corpus(report, roots);
    ASSERT_EQ(built.corpus.methods.size(), 1u);
    EXPECT_EQ(built.corpus.methods[0].method_name, "sum");
}

TEST(BuildCorpus, DeterministicAcrossBugsSharingARoot) {
    auto report = parse_coverage(read_file(kData / "coverage/cobertura.xml"), CoverageFormat::CoberturaXml, "X");
    const std::vector<fs::path> roots{kData / "corpus_src"};
    const auto first = build_corpus(report, roots);
    const auto second = build_corpus(report, roots);
    EXPECT_EQ(to_json(first.corpus), to_json(second.corpus));
    // Completeness over the Cobertura fixture: 4 resolved, Shapes$1.run unresolved.
    EXPECT_EQ(first.corpus.methods.size(), 4u);
    EXPECT_EQ(first.unresolved.size(), 1u);

    // Shuffled key insertion order must not matter.
    std::vector<MethodKey> keys(report.covered_method_keys.begin(), report.covered_method_keys.end());
    std::mt19937 rng(7);
    std::shuffle(keys.begin(), keys.end(), rng);
    CoverageReport shuffled;
    shuffled.bug_id = "X";
    shuffled.covered_method_keys.insert(keys.begin(), keys.end());
    EXPECT_EQ(to_json(build_corpus(shuffled, roots).corpus), to_json(first.corpus));
}
