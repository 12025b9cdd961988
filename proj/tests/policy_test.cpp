#include "tagseek/error.hpp"
#include "tagseek/policy.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <set>

namespace tagseek {
namespace {

EmbeddingTable table_of(std::vector<std::pair<std::string, Eigen::VectorXd>> entries) {
    const auto dim = static_cast<std::size_t>(entries.front().second.size());
    return EmbeddingTable(dim, std::move(entries));
}

QueryResult reply(std::string id, std::vector<std::string> tags) {
    return QueryResult{ItemRecord{std::move(id), std::move(tags), Eigen::VectorXd::Zero(1), std::nullopt}};
}

TEST(PolicyNames, RoundTripAndErrors) {
    for (const auto& n : policy_names()) EXPECT_EQ(policy_name(parse_policy_name(n)), n);
    try {
        parse_policy_name("thompson");
        FAIL();
    } catch (const PolicyError& e) {
        const std::string msg = e.what();
        for (const auto& n : policy_names()) EXPECT_NE(msg.find(n), std::string::npos) << msg;
    }
}

TEST(PolicySpec, Defaults) {
    PolicySpec tiara{PolicyKind::tiara};
    EXPECT_EQ(tiara.alpha_or_default(), 0.01);
    EXPECT_EQ(tiara.lambda_or_default(), 1.0);
    PolicySpec ucb{PolicyKind::ucb};
    EXPECT_EQ(ucb.alpha_or_default(), 1.0);
    PolicySpec bad{PolicyKind::tiara, 0.1, -1.0};
    EXPECT_THROW(bad.validate(), PolicyError);
}

TEST(ArgmaxTag, LexicographicTiesAndShiftInvariance) {
    std::vector<TagScore> scores{{"b", 1.0}, {"a", 1.0}, {"c", 0.5}};
    EXPECT_EQ(scores[argmax_tag(scores)].tag, "a");
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> u(-5, 5);
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<TagScore> s;
        for (int i = 0; i < 10; ++i) s.push_back({std::string(1, static_cast<char>('a' + rng() % 26)), std::round(u(rng))});
        auto shifted = s;
        for (auto& x : shifted) x.score += 3.0;
        EXPECT_EQ(s[argmax_tag(s)].tag, shifted[argmax_tag(shifted)].tag);
    }
    EXPECT_EQ(argmax_tag({}), 0u);
}

TEST(Tiara, FreshStatePrefersLongerEmbedding) {
    auto table = table_of({{"a", Eigen::Vector2d(2, 0)}, {"b", Eigen::Vector2d(1, 0)}});
    std::vector<std::string> init{"b", "a"};
    LinUcbPolicy p(init, table, 1.0, 0.01, true);
    auto d = p.select();
    EXPECT_EQ(d.tag, "a");
    ASSERT_EQ(d.scores.size(), 2u);
    EXPECT_NEAR(d.scores[1].score, 0.02, 1e-15);
}

TEST(Tiara, MultiTagUpdate) {
    auto table = table_of({{"cat", Eigen::Vector2d(1, 0)}, {"animal", Eigen::Vector2d(0.6, 0.8)}});
    std::vector<std::string> init{"cat"};
    LinUcbPolicy p(init, table, 1.0, 0.01, true);
    const double r = 1.5;
    p.observe("cat", reply("x", {"cat", "animal"}), r);
    EXPECT_EQ(p.state().update_count(), 2u);
    EXPECT_LT((p.state().b() - r * Eigen::Vector2d(1.6, 0.8)).norm(), 1e-15);
    EXPECT_TRUE(p.pool().contains("animal"));
    Eigen::Matrix2d a = Eigen::Matrix2d::Identity();
    a += Eigen::Vector2d(1, 0) * Eigen::RowVector2d(1, 0);
    a += Eigen::Vector2d(0.6, 0.8) * Eigen::RowVector2d(0.6, 0.8);
    EXPECT_LT((p.state().a_inv() - a.inverse()).norm(), 1e-14);

    // Already-known tags: pool unchanged, statistics still updated.
    p.observe("animal", reply("y", {"animal", "cat"}), 0.5);
    EXPECT_EQ(p.pool().size(), 2u);
    EXPECT_EQ(p.state().update_count(), 4u);
}

TEST(TiaraS, TrainsOnQueriedTagOnly) {
    auto table = table_of({{"cat", Eigen::Vector2d(1, 0)}, {"animal", Eigen::Vector2d(0.6, 0.8)}});
    std::vector<std::string> init{"cat"};
    LinUcbPolicy p(init, table, 1.0, 0.01, false);
    p.observe("cat", reply("x", {"cat", "animal"}), 2.0);
    EXPECT_EQ(p.state().update_count(), 1u);
    EXPECT_EQ(p.state().b(), Eigen::Vector2d(2, 0));
    EXPECT_TRUE(p.pool().contains("animal"));
}

TEST(Tiara, DuplicateReturnedTagsCountOnce) {
    auto table = table_of({{"cat", Eigen::Vector2d(1, 0)}});
    std::vector<std::string> init{"cat"};
    LinUcbPolicy p(init, table, 1.0, 0.01, true);
    p.observe("cat", reply("x", {"cat", "cat"}), 1.0);
    EXPECT_EQ(p.state().update_count(), 1u);
}

TEST(Tiara, SingletonRepliesMatchTiaraSBitForBit) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> normal;
    std::vector<std::pair<std::string, Eigen::VectorXd>> entries;
    std::vector<std::string> tags;
    for (int i = 0; i < 12; ++i) {
        Eigen::VectorXd v(6);
        for (auto& x : v) x = normal(rng);
        tags.push_back(std::string(1, static_cast<char>('a' + i)) + "x");
        entries.emplace_back(tags.back(), v);
    }
    auto table = table_of(entries);
    LinUcbPolicy multi(tags, table, 1.0, 0.05, true);
    LinUcbPolicy single(tags, table, 1.0, 0.05, false);
    for (int step = 0; step < 60; ++step) {
        auto dm = multi.select();
        auto ds = single.select();
        ASSERT_EQ(dm.tag, ds.tag);
        const double r = normal(rng);
        const auto rep = reply("i" + std::to_string(step), {dm.tag});
        multi.observe(dm.tag, rep, r);
        single.observe(ds.tag, rep, r);
        ASSERT_TRUE(multi.state().a_inv() == single.state().a_inv());
        ASSERT_TRUE(multi.state().b() == single.state().b());
    }
}

TEST(Tiara, ExhaustionRemovesCandidate) {
    auto table = table_of({{"a", Eigen::Vector2d(1, 0)}, {"b", Eigen::Vector2d(0, 1)}});
    std::vector<std::string> init{"a", "b"};
    LinUcbPolicy p(init, table, 1.0, 0.01, true);
    p.observe("a", std::nullopt, std::nullopt);
    EXPECT_EQ(p.select().tag, "b");
    p.observe("b", std::nullopt, std::nullopt);
    EXPECT_EQ(p.pool().size(), 2u);
    try {
        p.select();
        FAIL();
    } catch (const PolicyError& e) {
        EXPECT_STREQ(e.what(), "all candidates exhausted");
    }
}

TEST(Tiara, OovTagsStayInPoolWithZeroScore) {
    auto table = table_of({{"cat", Eigen::Vector2d(1, 0)}});
    std::vector<std::string> init{"cat", "qzxv"};
    LinUcbPolicy p(init, table, 1.0, 0.01, true);
    auto scores = p.tag_scores();
    ASSERT_EQ(scores.size(), 2u);
    EXPECT_EQ(scores[1].score, 0.0);
    EXPECT_EQ(p.select().tag, "cat");
}

TEST(MeanReward, GreedyWithZeroEpsilon) {
    std::vector<std::string> init{"t1", "t2", "t3"};
    MeanRewardPolicy p(PolicyKind::egreedy, init, 1.0, 0.0, 7);
    const std::map<std::string, double> reward{{"t1", 0.2}, {"t2", 0.9}, {"t3", 0.5}};
    // unvisited first, lexicographically
    for (const char* expected : {"t1", "t2", "t3"}) {
        auto d = p.select();
        EXPECT_EQ(d.tag, expected);
        p.observe(d.tag, reply("x", {d.tag}), reward.at(d.tag));
    }
    for (int i = 0; i < 20; ++i) {
        auto d = p.select();
        EXPECT_EQ(d.tag, "t2");
        p.observe(d.tag, reply("x", {d.tag}), reward.at(d.tag));
    }
}

TEST(MeanReward, UcbScores) {
    std::vector<std::string> init{"t1", "t2"};
    MeanRewardPolicy p(PolicyKind::ucb, init, 1.0, 0.1, 0);
    p.observe("t1", reply("x", {"t1"}), 1.0);
    p.observe("t2", reply("y", {"t2"}), 0.0);
    auto d = p.select();
    EXPECT_EQ(d.tag, "t1");
    ASSERT_EQ(d.scores.size(), 2u);
    EXPECT_EQ(d.scores[0].score, 2.0);
    EXPECT_EQ(d.scores[1].score, 1.0);
}

TEST(MeanReward, UcbVisitsEveryArmBeforeRevisiting) {
    std::vector<std::string> init;
    for (int i = 0; i < 15; ++i) init.push_back("tag" + std::string(1, static_cast<char>('a' + i)));
    MeanRewardPolicy p(PolicyKind::ucb, init, 0.5, 0.0, 0);
    std::set<std::string> visited;
    for (int i = 0; i < 15; ++i) {
        auto d = p.select();
        EXPECT_TRUE(visited.insert(d.tag).second);
        p.observe(d.tag, reply("x", {d.tag}), 100.0);
    }
}

TEST(MeanReward, AdaptivePoolGrowsNonAdaptiveDoesNot) {
    std::vector<std::string> init{"a"};
    MeanRewardPolicy fixed(PolicyKind::ucb, init, 1.0, 0.1, 0);
    MeanRewardPolicy ada(PolicyKind::ada_ucb, init, 1.0, 0.1, 0);
    fixed.observe("a", reply("x", {"a", "b", "c"}), 1.0);
    ada.observe("a", reply("x", {"a", "b", "c"}), 1.0);
    EXPECT_EQ(fixed.pool().size(), 1u);
    EXPECT_EQ(ada.pool().size(), 3u);
    EXPECT_EQ(ada.select().tag, "b");
}

TEST(MeanReward, SeededRandomChoicesAreDeterministic) {
    std::vector<std::string> init{"a", "b", "c", "d", "e"};
    for (auto kind : {PolicyKind::random, PolicyKind::egreedy, PolicyKind::ada_egreedy}) {
        MeanRewardPolicy p1(kind, init, 1.0, 0.5, 99);
        MeanRewardPolicy p2(kind, init, 1.0, 0.5, 99);
        std::vector<std::string> seq1, seq2;
        for (int i = 0; i < 50; ++i) {
            auto d1 = p1.select();
            auto d2 = p2.select();
            seq1.push_back(d1.tag);
            seq2.push_back(d2.tag);
            const double r = static_cast<double>(d1.tag[0] - 'a');
            p1.observe(d1.tag, reply("x", {d1.tag}), r);
            p2.observe(d2.tag, reply("x", {d2.tag}), r);
        }
        EXPECT_EQ(seq1, seq2);
    }
}

TEST(MeanReward, RandomSpreadsOverPool) {
    std::vector<std::string> init{"a", "b", "c"};
    MeanRewardPolicy p(PolicyKind::random, init, 1.0, 0.1, 5);
    std::map<std::string, int> counts;
    for (int i = 0; i < 3000; ++i) {
        auto d = p.select();
        ++counts[d.tag];
        p.observe(d.tag, reply("x", {d.tag, "new"}), 1.0);
    }
    EXPECT_EQ(counts.size(), 3u);
    for (const auto& [t, c] : counts) EXPECT_NEAR(c / 3000.0, 1.0 / 3.0, 0.04) << t;
}

TEST(MakePolicy, BuildsEveryKind) {
    auto table = table_of({{"a", Eigen::Vector2d(1, 0)}});
    std::vector<std::string> init{"a"};
    for (const auto& name : policy_names()) {
        PolicySpec spec{parse_policy_name(name)};
        auto p = make_policy(spec, init, table, 1);
        EXPECT_EQ(policy_name(p->kind()), name);
        EXPECT_EQ(p->select().tag, "a");
    }
    EXPECT_THROW(make_policy(PolicySpec{PolicyKind::ucb}, {}, table, 1), PolicyError);
}

} // namespace
} // namespace tagseek
