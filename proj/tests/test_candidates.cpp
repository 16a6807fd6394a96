#include "emrec/candidates.hpp"
#include "emrec/java_parser.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

using namespace emrec;
using emrec::testing::brute_force_candidates;
using emrec::testing::method_named;

namespace {

const SourceUnit& shapes() {
    static const SourceUnit unit = parse_source(emrec::testing::kCandidateSource, "Shapes.java");
    return unit;
}

std::vector<Violation> violations_of(const std::string& method, BlockPath path, std::size_t s, std::size_t e,
                                     int min = 1) {
    const auto& m = method_named(shapes(), method);
    return check_extractable(m, make_fragment(m, std::move(path), s, e), min).violations;
}

} // namespace

TEST(Candidates, FixtureHasAtLeastTenSmallMethods) {
    ASSERT_GE(shapes().methods.size(), 10u);
    for (const auto& m : shapes().methods) EXPECT_LE(count_statements(m.body), 12u) << m.name;
}

TEST(Candidates, EnumerationEqualsBruteForceOracle) {
    for (int min = 1; min <= 3; ++min) {
        for (const auto& m : shapes().methods) {
            const auto got = enumerate_candidates(m, min);
            EXPECT_EQ(got, brute_force_candidates(m, min)) << m.name << " min=" << min;
            EXPECT_TRUE(std::is_sorted(got.begin(), got.end())) << m.name;
        }
    }
}

TEST(Candidates, ThreeFlatStatementsGiveFiveFragments) {
    const auto c = enumerate_candidates(method_named(shapes(), "flat3"), 1);
    ASSERT_EQ(c.size(), 5u);
    for (const auto& f : c) EXPECT_FALSE(f.start_index == 0 && f.end_index == 2);
}

TEST(Candidates, SingleStatementMethodHasNone) {
    EXPECT_TRUE(enumerate_candidates(method_named(shapes(), "single"), 1).empty());
}

TEST(Candidates, PrintOwingPairIsACandidateAndBodyIsNot) {
    const auto unit = parse_source(emrec::testing::kAccountSource);
    const auto c = enumerate_candidates(unit.methods[0], 2);
    bool pair = false;
    for (const auto& f : c) {
        pair = pair || (f.start_line == 11 && f.end_line == 12);
        EXPECT_FALSE(f.start_line == 10 && f.end_line == 12);
    }
    EXPECT_TRUE(pair);
}

TEST(Candidates, TwoLiveOutLocalsAreRejected) {
    EXPECT_EQ(violations_of("twoLive", {}, 0, 1), std::vector<Violation>{Violation::MultipleLiveOut});
    EXPECT_TRUE(violations_of("twoLive", {}, 0, 2).empty());  // only c is read afterwards
}

TEST(Candidates, BreakLeavingTheFragmentIsRejected) {
    const BlockPath loop{BlockStep{0, 0}};
    EXPECT_EQ(violations_of("loopBreak", loop, 1, 2), std::vector<Violation>{Violation::BrokenJump});
    EXPECT_TRUE(violations_of("loopBreak", {}, 0, 0).empty());
    EXPECT_EQ(violations_of("skipEven", {BlockStep{0, 0}}, 0, 1), std::vector<Violation>{Violation::BrokenJump});
}

TEST(Candidates, BreakInsideSwitchIsLocal) {
    EXPECT_TRUE(violations_of("switchy", {}, 0, 0).empty());
    EXPECT_EQ(violations_of("switchy", {BlockStep{0, 0}}, 0, 1), std::vector<Violation>{Violation::BrokenJump});
}

TEST(Candidates, ReturnSuffixIsExtractable) {
    EXPECT_TRUE(violations_of("withReturn", {}, 1, 3).empty());
    EXPECT_EQ(violations_of("earlyExit", {BlockStep{0, 0}}, 0, 1), std::vector<Violation>{Violation::InteriorReturn});
    EXPECT_TRUE(violations_of("whileLoop", {}, 1, 2).empty());
}

TEST(Candidates, SizeAndWholeBodyViolations) {
    EXPECT_EQ(violations_of("flat3", {}, 0, 1, 3), std::vector<Violation>{Violation::BelowMinSize});
    EXPECT_EQ(violations_of("flat3", {}, 0, 2, 1), std::vector<Violation>{Violation::WholeMethod});
    EXPECT_THROW(violations_of("flat3", {}, 0, 0, 0), ContractError);
}

TEST(Candidates, LoopCarriedWriteIsLiveOut) {
    const auto& m = method_named(shapes(), "whileLoop");
    const BlockPath body{BlockStep{1, 0}};
    EXPECT_EQ(live_out_locals(m, make_fragment(m, body, 0, 0)), std::vector<std::string>{"i"});
    const auto& acc = method_named(shapes(), "accumulate");
    EXPECT_EQ(live_out_locals(acc, make_fragment(acc, {}, 0, 1)), std::vector<std::string>{"acc"});
}

TEST(Candidates, RemainingIsTheComplement) {
    const auto& m = method_named(shapes(), "twoLive");
    const auto rest = remaining_statements(m, make_fragment(m, {}, 0, 2));
    ASSERT_EQ(rest.size(), 1u);
    EXPECT_EQ(rest[0], &m.body.statements[3]);

    const auto& n = method_named(shapes(), "nested");
    const auto inner = remaining_statements(n, make_fragment(n, {BlockStep{1, 0}}, 0, 2));
    EXPECT_NE(std::find(inner.begin(), inner.end(), &n.body.statements[1]), inner.end());
    for (const auto& child : n.body.statements[1].child_blocks[0].statements) {
        EXPECT_EQ(std::find(inner.begin(), inner.end(), &child), inner.end());
    }
}

TEST(Candidates, ComplementSizeAndIdempotentRecheck) {
    for (const auto& m : shapes().methods) {
        const auto total = method_statements(m).size();
        for (const auto& f : enumerate_candidates(m, 1)) {
            EXPECT_EQ(fragment_statements(m, f).size() + remaining_statements(m, f).size(), total);
            EXPECT_TRUE(check_extractable(m, f, 1).extractable);
            EXPECT_GT(f.loc, 0);
            EXPECT_LT(f.loc, m.loc);
        }
    }
}

TEST(Candidates, FragmentLinesComeFromBoundaryStatements) {
    const auto& m = method_named(shapes(), "nested");
    const auto f = make_fragment(m, {}, 1, 2);
    EXPECT_EQ(f.start_line, m.body.statements[1].start_line);
    EXPECT_EQ(f.end_line, m.body.statements[2].end_line);
    EXPECT_THROW(make_fragment(m, {}, 2, 5), ContractError);
    const auto found = find_fragment_by_lines(m, f.start_line, f.end_line);
    ASSERT_TRUE(found.has_value());
    EXPECT_EQ(*found, f);
    EXPECT_FALSE(find_fragment_by_lines(m, f.start_line + 1, f.end_line).has_value());
}
