#include "emrec/java_model.hpp"
#include "emrec/java_parser.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace emrec;
using emrec::testing::method_named;

namespace {

const char* kAccount = R"(package bank;

import java.util.List;

class Account {
    private String name;
    private List<String> history;

    void printOwing() {
        printBanner();
        System.out.println("name: " + name);
        System.out.println("amount: " + getOutstanding());
    }
}
)";

const char* kFixture01 = R"(class Fixture01 {
    int run(int a, int b) {
        int x = a + 1;
        int y = b * 2;
        x = x + y;
        if (x > 10) {
            y = y - 1;
            x = x / 2;
            log(x);
        }
        y++;
        int z = x > y ? x : y;
        z += 3;
        log(z);
        assert z > 0;
        return z;
    }
}
)";

std::string describe(const Block& b);

std::string describe(const Statement& s) {
    std::ostringstream os;
    os << static_cast<int>(s.kind) << "[" << s.start_line << "-" << s.end_line << " l" << s.literals << " i"
       << s.invocations << " c" << s.conditionals << " a" << s.assignments << "]";
    for (const auto& r : s.refs) os << " " << static_cast<int>(r.kind) << ":" << r.id << "@" << r.line << "/" << static_cast<int>(r.access);
    for (const auto& c : s.child_blocks) os << " {" << describe(c) << "}";
    return os.str();
}

std::string describe(const Block& b) {
    std::string out = "d" + std::to_string(b.depth);
    for (const auto& s : b.statements) out += " (" + describe(s) + ")";
    return out;
}

bool has_ref(const Statement& s, ElementKind kind, const std::string& id) {
    for (const auto& r : s.refs) {
        if (r.kind == kind && r.id == id) return true;
    }
    return false;
}

} // namespace

TEST(JavaModel, PrintOwingHasThreeInvocationStatements) {
    const auto unit = parse_source(kAccount, "Account.java");
    ASSERT_EQ(unit.methods.size(), 1u);
    const auto& m = unit.methods[0];
    EXPECT_EQ(m.name, "printOwing");
    EXPECT_EQ(m.class_name, "Account");
    ASSERT_EQ(m.body.statements.size(), 3u);
    EXPECT_EQ(m.body.statements[0].invocations, 1);
    EXPECT_EQ(m.body.statements[1].invocations, 1);
    EXPECT_EQ(m.body.statements[2].invocations, 2);
    EXPECT_EQ(m.loc, 3);
    EXPECT_EQ(m.start_line, 9);
    EXPECT_EQ(m.end_line, 13);
    EXPECT_TRUE(has_ref(m.body.statements[1], ElementKind::Field, "name"));
    EXPECT_TRUE(has_ref(m.body.statements[2], ElementKind::Method, "getOutstanding"));
}

TEST(JavaModel, EmptyClassHasNoMethods) {
    const auto unit = parse_source("class Empty {}\n");
    EXPECT_TRUE(unit.methods.empty());
}

TEST(JavaModel, NestedIfBlockHasDepthOne) {
    const auto unit = parse_source(kFixture01);
    const auto& m = method_named(unit, "run");
    ASSERT_EQ(m.body.statements.size(), 10u);
    EXPECT_EQ(m.body.depth, 0);
    const auto& s = m.body.statements[3];
    EXPECT_EQ(s.kind, StatementKind::If);
    ASSERT_EQ(s.child_blocks.size(), 1u);
    EXPECT_EQ(s.child_blocks[0].depth, 1);
    EXPECT_EQ(s.child_blocks[0].statements.size(), 3u);
    EXPECT_EQ(count_statements(m.body), 13u);
}

TEST(JavaModel, StatementKindsAndCounts) {
    const auto unit = parse_source(kFixture01);
    const auto& b = method_named(unit, "run").body.statements;
    EXPECT_EQ(b[0].kind, StatementKind::Declaration);
    EXPECT_EQ(b[2].kind, StatementKind::Assignment);
    EXPECT_EQ(b[2].assignments, 1);
    EXPECT_EQ(b[0].assignments, 0);  // an initializer is not an assignment expression
    EXPECT_EQ(b[0].literals, 1);
    EXPECT_EQ(b[5].conditionals, 1);
    EXPECT_EQ(b[6].assignments, 1);
    EXPECT_EQ(b[4].assignments, 0);  // ++ is not an assignment expression
    EXPECT_EQ(b[9].kind, StatementKind::Return);
    EXPECT_EQ(b[8].kind, StatementKind::Assert);
    EXPECT_EQ(b[3].child_blocks[0].statements[2].invocations, 1);
}

TEST(JavaModel, AccessModes) {
    const auto unit = parse_source(kFixture01);
    const auto& b = method_named(unit, "run").body.statements;
    auto access_of = [](const Statement& s, const std::string& id) {
        for (const auto& r : s.refs) {
            if (r.kind == ElementKind::LocalVariable && r.id == id) return r.access;
        }
        return Access::Call;
    };
    EXPECT_EQ(access_of(b[0], "x"), Access::Write);
    EXPECT_EQ(access_of(b[1], "b"), Access::Read);
    EXPECT_EQ(access_of(b[4], "y"), Access::ReadWrite);
    EXPECT_EQ(access_of(b[6], "z"), Access::ReadWrite);
}

TEST(JavaModel, EveryLocalAndFieldRefHasTypedElementMirror) {
    const auto unit = parse_source(kFixture01);
    const auto& m = method_named(unit, "run");
    int mirrored = 0;
    for_each_statement(m.body, [&](const Statement& s) {
        for (const auto& r : s.refs) {
            if (r.kind != ElementKind::LocalVariable && r.kind != ElementKind::Field) continue;
            const std::string want = (r.kind == ElementKind::LocalVariable ? "local:" : "field:") + r.id;
            bool found = false;
            for (const auto& t : s.refs) {
                found = found || (t.kind == ElementKind::TypedElement && t.id == want && t.line == r.line);
            }
            EXPECT_TRUE(found) << r.id;
            ++mirrored;
        }
    });
    EXPECT_GT(mirrored, 10);
}

TEST(JavaModel, TypeResolutionUsesImportsThenJavaLangThenOwnPackage) {
    const auto unit = parse_source(R"(package shop;
import java.util.List;
class Cart {
    void fill() {
        List<String> items = new Basket();
        Integer n = 3;
    }
}
)");
    const auto& s = unit.methods[0].body.statements;
    EXPECT_TRUE(has_ref(s[0], ElementKind::Type, "java.util.List"));
    EXPECT_TRUE(has_ref(s[0], ElementKind::Type, "java.lang.String"));
    EXPECT_TRUE(has_ref(s[0], ElementKind::Type, "shop.Basket"));
    EXPECT_TRUE(has_ref(s[0], ElementKind::Package, "java.util"));
    EXPECT_TRUE(has_ref(s[0], ElementKind::Package, "shop"));
    EXPECT_TRUE(has_ref(s[1], ElementKind::Package, "java.lang"));
    EXPECT_EQ(unit.imports, std::vector<std::string>{"java.util.List"});
    EXPECT_EQ(unit.package_name, "shop");
}

TEST(JavaModel, ShadowedLocalsGetDistinctIds) {
    const auto unit = parse_source(R"(class S {
    void f(boolean c) {
        if (c) {
            int t = 1;
            t++;
        } else {
            int t = 2;
            t--;
        }
    }
}
)");
    const auto& m = unit.methods[0];
    std::vector<std::string> ids;
    for (const auto& l : m.locals) ids.push_back(l.id);
    EXPECT_EQ(ids, (std::vector<std::string>{"c", "t", "t#2"}));
    EXPECT_TRUE(m.locals[0].parameter);
    const auto& second = m.body.statements[0].child_blocks[1].statements[1];
    EXPECT_TRUE(has_ref(second, ElementKind::LocalVariable, "t#2"));
}

TEST(JavaModel, FieldsAndConstantsAreNotTypes) {
    const auto unit = parse_source(R"(class K {
    static final int RED = 1;
    int count;
    int f() {
        count = RED + this.count;
        return count;
    }
}
)");
    const auto& s = unit.methods[0].body.statements[0];
    EXPECT_TRUE(has_ref(s, ElementKind::Field, "RED"));
    EXPECT_TRUE(has_ref(s, ElementKind::Field, "count"));
    EXPECT_FALSE(has_ref(s, ElementKind::Type, "RED"));
}

TEST(JavaModel, LocCountsOnlyStatementLines) {
    const auto unit = parse_source(R"(class L {
    int f(int a) {
        // a comment

        int b = a
            + 1;
        return b;
    }
}
)");
    EXPECT_EQ(unit.methods[0].loc, 3);
    EXPECT_EQ(unit.methods[0].body.statements[0].start_line, 5);
    EXPECT_EQ(unit.methods[0].body.statements[0].end_line, 6);
}

TEST(JavaModel, StatementLinesCoverBodyExactlyOnce) {
    const auto unit = parse_source(kFixture01);
    const auto& m = method_named(unit, "run");
    std::multiset<int> owned;
    for_each_statement(m.body, [&](const Statement& s) { owned.insert(s.own_lines.begin(), s.own_lines.end()); });
    std::set<int> expected;
    for (int l = m.start_line + 1; l < m.end_line; ++l) expected.insert(l);
    EXPECT_EQ(std::set<int>(owned.begin(), owned.end()), expected);
    EXPECT_EQ(owned.size(), expected.size());
}

TEST(JavaModel, MethodSpansAreOrderedAndInsideTheFile) {
    const auto unit = parse_source(R"(class Two {
    void a() { x(); }
    void b() {
        y();
    }
}
)");
    ASSERT_EQ(unit.methods.size(), 2u);
    EXPECT_LT(unit.methods[0].end_line, unit.methods[1].start_line);
    for (const auto& m : unit.methods) {
        EXPECT_LE(m.start_line, m.end_line);
        EXPECT_LE(m.end_line, unit.line_count);
        EXPECT_GE(m.loc, 1);
    }
}

TEST(JavaModel, ParsingIsDeterministic) {
    const auto a = parse_source(kFixture01);
    const auto b = parse_source(kFixture01);
    EXPECT_EQ(describe(a.methods[0].body), describe(b.methods[0].body));
}

TEST(JavaModel, UnsupportedSyntaxReportsPosition) {
    try {
        parse_source("class A {\n  void f() {\n    Runnable r = () -> go();\n  }\n}\n");
        FAIL() << "lambda accepted";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
        EXPECT_GT(e.column(), 0);
    }
    EXPECT_THROW(parse_source("class A { void f() { int x = 1 } }"), ParseError);
    EXPECT_THROW(parse_source("class A { void f() { foo(; } }"), ParseError);
}

TEST(JavaModel, LoopsSwitchAndTryProduceChildBlocks) {
    const auto unit = parse_source(R"(class C {
    int f(int[] xs) {
        int total = 0;
        for (int x : xs) {
            total += x;
        }
        while (total > 100) total /= 2;
        switch (total) {
            case 1:
                total++;
                break;
            default:
                total--;
        }
        try {
            check(total);
        } catch (Exception e) {
            total = 0;
        }
        return total;
    }
}
)");
    const auto& s = unit.methods[0].body.statements;
    ASSERT_EQ(s.size(), 6u);
    EXPECT_EQ(s[1].kind, StatementKind::For);
    EXPECT_EQ(s[2].kind, StatementKind::While);
    ASSERT_EQ(s[2].child_blocks.size(), 1u);
    EXPECT_EQ(s[2].child_blocks[0].statements.size(), 1u);
    EXPECT_EQ(s[3].kind, StatementKind::Switch);
    EXPECT_EQ(s[3].child_blocks.size(), 2u);
    EXPECT_EQ(s[3].child_blocks[0].statements[1].kind, StatementKind::Break);
    EXPECT_EQ(s[4].kind, StatementKind::Try);
    EXPECT_EQ(s[4].child_blocks.size(), 2u);
}
