#include <algorithm>
#include <functional>
#include <limits>
#include <random>

#include <gtest/gtest.h>

#include "railguard/error.hpp"
#include "railguard/network.hpp"
#include "railguard/scenario.hpp"
#include "support/fixtures.hpp"

using namespace railguard;
using namespace railguard::testing;

namespace {

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::ParseError;
}

// Simple-path enumeration over the vertex graph.
double enumerate_paths(const RailNetwork& net, VertexIndex from, VertexIndex to) {
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> seen(net.vertex_count(), false);
  std::function<void(VertexIndex, double)> walk = [&](VertexIndex u, double d) {
    if (u == to) {
      best = std::min(best, d);
      return;
    }
    seen[u] = true;
    for (TrackIndex t : net.vertex(u).incident) {
      const VertexIndex w = net.other_end(t, u);
      if (!seen[w]) walk(w, d + net.track(t).length);
    }
    seen[u] = false;
  };
  walk(from, 0.0);
  return best;
}

RailNetwork random_network(std::mt19937& rng, std::size_t vertices, std::size_t edges) {
  std::vector<VertexSpec> vs;
  for (std::size_t k = 0; k < vertices; ++k) vs.push_back(station("V" + std::to_string(k)));
  std::uniform_int_distribution<std::size_t> pick(0, vertices - 1);
  std::uniform_int_distribution<int> len(1, 40);
  std::vector<TrackSpec> ts;
  while (ts.size() < edges) {
    const auto a = pick(rng);
    const auto b = pick(rng);
    if (a == b) continue;
    ts.push_back(track("E" + std::to_string(ts.size()), vs[a].id, vs[b].id, 50.0 * len(rng)));
  }
  return build_network(vs, ts);
}

}  // namespace

TEST(Network, SampleTopologyCounts) {
  const auto sc = load_scenario(RAILGUARD_SCENARIO_DIR "/sample.scn");
  const auto& net = *sc.network;
  EXPECT_EQ(net.vertex_count(), 22u);
  EXPECT_EQ(net.station_count(), 12u);
  EXPECT_EQ(net.junction_count(), 10u);
  EXPECT_EQ(net.station_count() + net.junction_count(), net.vertex_count());
  for (VertexIndex s : net.stations()) {
    EXPECT_EQ(std::count(net.junctions().begin(), net.junctions().end(), s), 0);
  }
}

TEST(Network, EmptyNetworkIsValid) {
  const auto net = build_network({}, {});
  EXPECT_EQ(net.vertex_count(), 0u);
  EXPECT_TRUE(net.tracks().empty());
}

TEST(Network, BuildErrors) {
  EXPECT_EQ(code_of([] { build_network({station("A")}, {track("L", "A", "Z", 10)}); }),
            ErrorCode::DanglingEndpoint);
  EXPECT_EQ(code_of([] { build_network({station("A"), station("A")}, {}); }), ErrorCode::DuplicateId);
  EXPECT_EQ(code_of([] {
              build_network({station("A"), station("B")},
                            {track("L", "A", "B", 10), track("L", "B", "A", 10)});
            }),
            ErrorCode::DuplicateId);
  EXPECT_EQ(code_of([] { build_network({station("A"), station("B")}, {track("L", "A", "B", 0)}); }),
            ErrorCode::NonPositiveLength);
  EXPECT_EQ(code_of([] { build_network({station("A"), station("B")}, {track("L", "A", "B", -5)}); }),
            ErrorCode::NonPositiveLength);
  EXPECT_EQ(code_of([] { build_network({station("A")}, {track("L", "A", "A", 10)}); }),
            ErrorCode::LoopTrack);
  EXPECT_EQ(code_of([] {
              build_network({station("A"), junction("J")}, {track("L", "A", "J", 10)});
            }),
            ErrorCode::InvalidVertex);
  EXPECT_EQ(code_of([] {
              build_network({station("A", {{1, "L"}, {1, "L"}}), station("B")},
                            {track("L", "A", "B", 10)});
            }),
            ErrorCode::DuplicateId);
}

TEST(Network, ParallelTracksAndAdjacencyIntegrity) {
  std::mt19937 rng(7);
  for (int round = 0; round < 50; ++round) {
    const auto net = random_network(rng, 5, 8);
    std::size_t incident_total = 0;
    for (VertexIndex v = 0; v < net.vertex_count(); ++v) {
      for (TrackIndex t : net.vertex(v).incident) {
        const auto& ends = net.track(t).endpoints;
        EXPECT_TRUE(ends[0] == v || ends[1] == v);
      }
      incident_total += net.vertex(v).incident.size();
    }
    EXPECT_EQ(incident_total, 2 * net.tracks().size());
    for (TrackIndex t = 0; t < net.tracks().size(); ++t) {
      for (VertexIndex v : net.track(t).endpoints) {
        const auto& inc = net.vertex(v).incident;
        EXPECT_EQ(std::count(inc.begin(), inc.end(), t), 1);
      }
    }
  }
}

TEST(Network, VertexDistanceMatchesPathEnumeration) {
  std::mt19937 rng(11);
  for (int round = 0; round < 100; ++round) {
    const auto net = random_network(rng, 6, 2 + rng() % 9);
    for (VertexIndex a = 0; a < net.vertex_count(); ++a) {
      for (VertexIndex b = 0; b < net.vertex_count(); ++b) {
        EXPECT_DOUBLE_EQ(net.vertex_distance(a, b), enumerate_paths(net, a, b));
      }
    }
  }
}

TEST(Network, OccupancyExamples) {
  const auto net = build_network({station("S1", {{1, "A"}}), station("S3", {{2, "B"}}), junction("J")},
                                 {track("A", "J", "S1", 2000), track("B", "J", "S3", 2000)});
  auto standing = train("T1", 0, 1, 2000, 0, Direction::Up);
  standing.platform = PlatformSlot{1, 2};
  const auto approach = train("T2", 1, 1, 1200, 20, Direction::Up);
  EXPECT_NO_THROW(validate_occupancy(net, std::vector{standing, approach}));

  auto a = train("T1", 0, 0, 2000, 0, Direction::Up);
  a.platform = PlatformSlot{0, 1};
  auto b = train("T2", 1, 0, 1000, 0, Direction::Up);
  b.platform = PlatformSlot{0, 1};
  EXPECT_EQ(code_of([&] { validate_occupancy(net, std::vector{a, b}); }), ErrorCode::PlatformConflict);

  const auto t1 = train("T1", 0, 0, 500, 10, Direction::Up);
  const auto t2 = train("T2", 1, 0, 400, 10, Direction::Up);
  EXPECT_EQ(code_of([&] { validate_occupancy(net, std::vector{t1, t2}); }), ErrorCode::OverlapConflict);

  auto moving = standing;
  moving.speed = 5;
  EXPECT_EQ(code_of([&] { validate_occupancy(net, std::vector{moving}); }), ErrorCode::ValidationError);
}

TEST(Network, OccupancyMatchesIntervalOracle) {
  const auto net = build_network({station("A"), station("B")},
                                 {track("L0", "A", "B", 3000), track("L1", "A", "B", 3000)});
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> pos(300, 2700);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<int> count(2, 30);
  for (int round = 0; round < 500; ++round) {
    std::vector<TrainState> trains;
    const int n = count(rng);
    for (int k = 0; k < n; ++k) {
      trains.push_back(train("T" + std::to_string(k), k, coin(rng), pos(rng), 10,
                             coin(rng) ? Direction::Up : Direction::Down, 100));
    }
    bool overlap = false;
    for (std::size_t i = 0; i < trains.size(); ++i) {
      for (std::size_t k = i + 1; k < trains.size(); ++k) {
        if (trains[i].track != trains[k].track) continue;
        auto extent = [](const TrainState& t) {
          return t.direction == Direction::Up ? std::pair{t.position - t.length, t.position}
                                              : std::pair{t.position, t.position + t.length};
        };
        const auto [alo, ahi] = extent(trains[i]);
        const auto [blo, bhi] = extent(trains[k]);
        overlap = overlap || std::max(alo, blo) <= std::min(ahi, bhi);
      }
    }
    if (overlap) {
      EXPECT_EQ(code_of([&] { validate_occupancy(net, trains); }), ErrorCode::OverlapConflict);
    } else {
      EXPECT_NO_THROW(validate_occupancy(net, trains));
    }
  }
}

TEST(Network, NeighborsInRangeExamples) {
  const auto net = twin_track();
  const std::vector near{train("T1", 0, 0, 1000, 10, Direction::Up),
                         train("T2", 1, 0, 1500, 10, Direction::Up)};  // bodies 300 m apart
  const AgentId t1{AgentKind::Train, 0};
  const AgentId t2{AgentKind::Train, 1};
  EXPECT_EQ(neighbors_in_range(*net, near, t1, 400), std::vector{t2});
  EXPECT_EQ(neighbors_in_range(*net, near, t2, 400), std::vector{t1});

  const std::vector far{train("T1", 0, 0, 1000, 10, Direction::Up),
                        train("T2", 1, 0, 2100, 10, Direction::Up)};  // 900 m apart
  EXPECT_TRUE(neighbors_in_range(*net, far, t1, 400).empty());

  // S1 --L0 (1000)-- J --L1-- S2: train tip 150 m short of J.
  const auto path = build_network({station("S1"), junction("J"), station("S2")},
                                  {track("L0", "S1", "J", 1000), track("L1", "J", "S2", 1000)});
  const std::vector one{train("T1", 0, 0, 850, 10, Direction::Up)};
  const AgentId j{AgentKind::Junction, 1};
  const auto found = neighbors_in_range(path, one, j, 200);
  EXPECT_NE(std::find(found.begin(), found.end(), t1), found.end());

  EXPECT_THROW(neighbors_in_range(*net, near, AgentId{AgentKind::Train, 9}, 400), Error);
  EXPECT_THROW(neighbors_in_range(*net, near, AgentId{AgentKind::Junction, 0}, 400), Error);
}

TEST(Network, NeighborsSymmetricAndMonotone) {
  const auto net = star(2000);
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> pos(200, 2000);
  std::uniform_int_distribution<int> tr(0, 2);
  for (int round = 0; round < 50; ++round) {
    std::vector<TrainState> trains;
    for (int k = 0; k < 6; ++k) {
      trains.push_back(train("T" + std::to_string(k), k, tr(rng), pos(rng), 10, Direction::Up));
    }
    std::vector<AgentId> agents;
    for (std::size_t k = 0; k < trains.size(); ++k) agents.push_back({AgentKind::Train, k});
    for (VertexIndex v = 0; v < net->vertex_count(); ++v) {
      agents.push_back({net->vertex(v).kind == VertexKind::Station ? AgentKind::Station
                                                                   : AgentKind::Junction, v});
    }
    for (const auto& a : agents) {
      const auto small = neighbors_in_range(*net, trains, a, 300);
      const auto large = neighbors_in_range(*net, trains, a, 900);
      EXPECT_TRUE(std::includes(large.begin(), large.end(), small.begin(), small.end()));
      for (const auto& b : small) {
        const auto back = neighbors_in_range(*net, trains, b, 300);
        EXPECT_NE(std::find(back.begin(), back.end(), a), back.end());
      }
    }
  }
}

TEST(Network, PriorityClassesParse) {
  EXPECT_EQ(parse_priority_class("premium"), PriorityClass::Premium);
  EXPECT_EQ(parse_priority_class("Freight"), PriorityClass::Freight);
  EXPECT_FALSE(parse_priority_class("rocket"));
  EXPECT_LT(PriorityClass::Freight, PriorityClass::Passenger);
  EXPECT_LT(PriorityClass::SuperfastExpress, PriorityClass::Premium);
}
