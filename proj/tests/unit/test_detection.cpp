#include <algorithm>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "railguard/detection.hpp"
#include "railguard/scenario.hpp"
#include "support/fixtures.hpp"

using namespace railguard;
using namespace railguard::testing;

namespace {

// J --L0 (2000)-- S3 with platform 2 on L0, and J --L1-- S4 with platform 1 on L1.
std::shared_ptr<const RailNetwork> platform_net() {
  return std::make_shared<const RailNetwork>(
      build_network({junction("J"), station("S3", {{2, "L0"}}), station("S4", {{1, "L1"}})},
                    {track("L0", "J", "S3", 2000), track("L1", "J", "S4", 2000)}));
}

TrainState standing_at(const RailNetwork& net, std::string id, std::size_t index, TrackIndex t,
                       VertexIndex station, int platform) {
  auto s = train(std::move(id), index, t, net.track(t).length, 0, Direction::Up);
  s.platform = PlatformSlot{station, platform};
  return s;
}

}  // namespace

TEST(Detection, HeadOnTrackExamples) {
  const auto net = twin_track();
  const auto a = train("T1", 0, 0, 1000, 20, Direction::Up);
  const auto b = train("T2", 1, 0, 1150, 15, Direction::Down);  // tips 150 m apart
  const auto inc = detect_head_on_track(a, b, *net, 200);
  ASSERT_TRUE(inc);
  EXPECT_EQ(inc->kind, IncidentKind::HeadOnTrack);
  EXPECT_DOUBLE_EQ(inc->gap, 150.0);
  EXPECT_DOUBLE_EQ(inc->time_to_collision, 150.0 / 35.0);
  EXPECT_EQ(inc->first, 0u);

  auto same = b;
  same.direction = Direction::Up;
  same.position = 1600;
  EXPECT_FALSE(detect_head_on_track(a, same, *net, 1e9));

  auto still_a = a;
  auto still_b = b;
  still_a.speed = still_b.speed = 0;
  EXPECT_FALSE(detect_head_on_track(still_a, still_b, *net, 200));

  EXPECT_FALSE(detect_head_on_track(a, b, *net, 150));  // gap must be strictly below headway
}

TEST(Detection, HeadOnJunctionExamples) {
  const auto net = star(3000);
  const VertexIndex j = *net->find_vertex("J");
  const std::vector trains{train("T1", 0, 0, 2900, 20, Direction::Up),     // 100 m short of J
                           train("T2", 1, 1, 150, 15, Direction::Down)};   // 150 m short of J
  auto incs = detect_head_on_junction(j, std::span<const TrainState>(trains), *net);
  ASSERT_EQ(incs.size(), 1u);
  EXPECT_EQ(incs[0].kind, IncidentKind::HeadOnJunction);
  EXPECT_DOUBLE_EQ(incs[0].gap, 250.0);
  EXPECT_EQ(incs[0].site, j);

  const std::vector lone{trains[0], train("T2", 1, 1, 1500, 15, Direction::Down)};
  EXPECT_TRUE(detect_head_on_junction(j, std::span<const TrainState>(lone), *net).empty());

  auto stopped = trains;
  stopped[1].speed = 0;
  EXPECT_TRUE(detect_head_on_junction(j, std::span<const TrainState>(stopped), *net).empty());
}

TEST(Detection, RearEndTrackExamples) {
  const auto net = twin_track();
  const auto leader = train("T1", 0, 0, 1380, 20, Direction::Up);   // tail at 1180
  const auto follower = train("T2", 1, 0, 1000, 30, Direction::Up);
  for (auto inc : {detect_rear_end_track(leader, follower, *net, 200),
                   detect_rear_end_track(follower, leader, *net, 200)}) {
    ASSERT_TRUE(inc);
    EXPECT_EQ(inc->kind, IncidentKind::RearEndTrack);
    EXPECT_EQ(inc->first, 0u);
    EXPECT_EQ(inc->second, 1u);
    EXPECT_DOUBLE_EQ(inc->gap, 180.0);
    EXPECT_DOUBLE_EQ(inc->time_to_collision, 18.0);
  }
  auto equal = follower;
  equal.speed = 20;
  EXPECT_FALSE(detect_rear_end_track(leader, equal, *net, 200));
  auto opposite = follower;
  opposite.direction = Direction::Down;
  EXPECT_FALSE(detect_rear_end_track(leader, opposite, *net, 200));

  // Down-running pair: the leader has the smaller position.
  const auto dl = train("T1", 0, 0, 1000, 20, Direction::Down);  // tail at 1200
  const auto df = train("T2", 1, 0, 1350, 25, Direction::Down);
  const auto inc = detect_rear_end_track(df, dl, *net, 200);
  ASSERT_TRUE(inc);
  EXPECT_EQ(inc->first, 0u);
  EXPECT_DOUBLE_EQ(inc->gap, 150.0);
}

TEST(Detection, RearEndPlatformExamples) {
  const auto net = platform_net();
  const VertexIndex s3 = *net->find_vertex("S3");
  const auto standing = standing_at(*net, "T1", 0, 0, s3, 2);
  const auto incoming = train("T2", 1, 0, 1200, 25, Direction::Up);
  const auto inc = detect_rear_end_platform(s3, standing, incoming, *net);
  ASSERT_TRUE(inc);
  EXPECT_EQ(inc->kind, IncidentKind::RearEndPlatform);
  EXPECT_EQ(inc->site, s3);
  EXPECT_EQ(inc->first, 0u);
  EXPECT_EQ(inc->second, 1u);
  EXPECT_DOUBLE_EQ(inc->gap, 600.0);

  const auto elsewhere = train("T2", 1, 1, 1200, 25, Direction::Up);
  EXPECT_FALSE(detect_rear_end_platform(s3, standing, elsewhere, *net));

  auto rolling = standing;
  rolling.speed = 2;
  EXPECT_FALSE(detect_rear_end_platform(s3, rolling, incoming, *net));
}

TEST(Detection, EmptyWorld) {
  World w = make_world(twin_track(), {});
  EXPECT_TRUE(scan_all(w).empty());
}

TEST(Detection, SampleScenarioOrdering) {
  const auto sc = load_scenario(RAILGUARD_SCENARIO_DIR "/sample.scn");
  const World w = sc.initial_world();
  const auto incs = scan_all(w);
  ASSERT_EQ(incs.size(), 2u);
  EXPECT_EQ(incs[0].kind, IncidentKind::RearEndPlatform);
  EXPECT_EQ(w.trains[incs[0].first].id, "T2");
  EXPECT_EQ(w.trains[incs[0].second].id, "T1");
  EXPECT_EQ(w.net().vertex(*incs[0].site).id, "S3");
  EXPECT_NEAR(incs[0].time_to_collision, 15.2, 1e-9);
  EXPECT_EQ(incs[1].kind, IncidentKind::RearEndTrack);
  EXPECT_EQ(w.trains[incs[1].first].id, "T3");
  EXPECT_EQ(w.trains[incs[1].second].id, "T4");
  EXPECT_NEAR(incs[1].time_to_collision, 18.0, 1e-9);
  EXPECT_EQ(incs[0].severity_rank, 0u);
  EXPECT_EQ(incs[1].severity_rank, 1u);
}

TEST(Detection, HeadOnOutranksRearEnd) {
  const auto net = twin_track();
  World w = make_world(net, {train("T1", 0, 0, 1000, 30, Direction::Up),
                             train("T2", 0, 0, 700, 40, Direction::Up),
                             train("T3", 0, 1, 1000, 1, Direction::Up),
                             train("T4", 0, 1, 1190, 1, Direction::Down)});
  const auto incs = scan_all(w);
  ASSERT_EQ(incs.size(), 2u);
  EXPECT_EQ(incs[0].kind, IncidentKind::HeadOnTrack);  // despite the longer time to collision
  EXPECT_GT(incs[0].time_to_collision, incs[1].time_to_collision);
}

TEST(Detection, ScanMatchesPairwiseOracle) {
  const auto net = star(1500);
  std::mt19937 rng(29);
  std::uniform_real_distribution<double> pos(200, 1500);
  std::uniform_real_distribution<double> speed(0, 40);
  std::uniform_int_distribution<int> tr(0, 2);
  std::bernoulli_distribution coin(0.5);
  const VertexIndex j = *net->find_vertex("J");
  for (int round = 0; round < 300; ++round) {
    std::vector<TrainState> ts;
    for (int k = 0; k < 5; ++k) {
      auto t = train("T" + std::to_string(k), k, tr(rng), pos(rng), coin(rng) ? speed(rng) : 0.0,
                     coin(rng) ? Direction::Up : Direction::Down);
      t.comm_range = 1e6;  // every pair observable
      ts.push_back(t);
    }
    const World w = make_world(net, ts);
    std::set<std::pair<std::size_t, std::size_t>> expected;
    for (std::size_t a = 0; a < ts.size(); ++a) {
      for (std::size_t b = a + 1; b < ts.size(); ++b) {
        if (detect_head_on_track(w.trains[a], w.trains[b], *net, 200) ||
            detect_rear_end_track(w.trains[a], w.trains[b], *net, 200)) {
          expected.insert({a, b});
        }
      }
    }
    for (const auto& inc : detect_head_on_junction(j, std::span<const TrainState>(w.trains), *net)) {
      expected.insert(std::minmax(inc.first, inc.second));
    }
    const auto incs = scan_all(w);
    std::set<std::pair<std::size_t, std::size_t>> got;
    for (const auto& inc : incs) got.insert(std::minmax(inc.first, inc.second));
    EXPECT_EQ(got, expected);
    EXPECT_EQ(got.size(), incs.size());
    for (std::size_t k = 1; k < incs.size(); ++k) {
      EXPECT_FALSE(more_severe(incs[k], incs[k - 1], w.trains));
    }
    EXPECT_EQ(scan_all(w).size(), incs.size());
  }
}

TEST(Detection, UnobservablePairIsSkipped) {
  // 300 m apart on a 10 km line, vertices far away: 300 > 100 + 100.
  const auto net = twin_track(10000);
  auto a = train("T1", 0, 0, 5000, 10, Direction::Up);
  auto b = train("T2", 1, 0, 5300, 10, Direction::Down);
  a.comm_range = b.comm_range = 100;
  World w = make_world(net, {a, b});
  w.distances.headway = 400;
  EXPECT_TRUE(scan_all(w).empty());
  w.trains[0].comm_range = w.trains[1].comm_range = 150;
  EXPECT_EQ(scan_all(w).size(), 1u);
}

TEST(Detection, DeterministicAcrossRuns) {
  const auto net = star(1000);
  World w = make_world(net, {train("T1", 0, 0, 900, 20, Direction::Up),
                             train("T2", 0, 1, 100, 20, Direction::Down),
                             train("T3", 0, 2, 100, 20, Direction::Down),
                             train("T4", 0, 0, 650, 25, Direction::Up)});
  const auto first = scan_all(w);
  ASSERT_FALSE(first.empty());
  for (int k = 0; k < 100; ++k) {
    const auto again = scan_all(w);
    ASSERT_EQ(again.size(), first.size());
    for (std::size_t i = 0; i < first.size(); ++i) {
      EXPECT_EQ(again[i].first, first[i].first);
      EXPECT_EQ(again[i].second, first[i].second);
      EXPECT_EQ(again[i].kind, first[i].kind);
      EXPECT_EQ(again[i].gap, first[i].gap);
    }
  }
}
