#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdint>
#include <vector>

#include "qtree/rng/monte_carlo.hpp"
#include "qtree/rng/stream.hpp"

using namespace qtree::rng;

TEST_CASE("lcg48 single steps", "[rng]") {
  SECTION("identity multiplier keeps the state") {
    Lcg48State s{5, 1, 0};
    const double u = lcg48_next(s);
    CHECK(s.x == 5);
    CHECK(u == 5.0 * 0x1p-48);
  }
  SECTION("zero seed advances to the increment") {
    Lcg48State s{0};
    lcg48_next(s);
    CHECK(s.x == 0xBull);
  }
  SECTION("ten steps match a direct loop of the recurrence") {
    Lcg48State s = lcg48_seed(42);
    std::uint64_t x = s.x;
    for (int i = 0; i < 10; ++i) {
      const double u = lcg48_next(s);
      x = (kDrand48A * x + kDrand48C) & kLcg48Mask;  // independent scalar loop
      REQUIRE(s.x == x);
      REQUIRE(u == static_cast<double>(x) * 0x1p-48);
    }
  }
}

TEST_CASE("lcg48 skip coefficients", "[rng]") {
  SECTION("one step is (a, c)") {
    const auto j = lcg48_skip_coefficients(kDrand48A, kDrand48C, 1);
    CHECK(j.A == kDrand48A);
    CHECK(j.C == kDrand48C);
  }
  SECTION("two steps expand to (a^2, ac + c)") {
    const auto j = lcg48_skip_coefficients(3, 1, 2);
    CHECK(j.A == 9);
    CHECK(j.C == 4);
  }
  SECTION("zero steps are rejected") {
    CHECK_THROWS_AS(lcg48_skip_coefficients(3, 1, 0), std::invalid_argument);
  }
  SECTION("a million-step jump equals a million sequential steps") {
    Lcg48State jumped = lcg48_seed(123);
    lcg48_skip(jumped, 1000000);
    Lcg48State looped = lcg48_seed(123);
    for (int i = 0; i < 1000000; ++i) lcg48_next(looped);
    CHECK(jumped.x == looped.x);
  }
}

namespace {
// Direct evaluation of the two recurrences, independent of mrg32k3a_next.
struct MrgOracle {
  std::int64_t h1[3], h2[3];
  double step() {
    const std::int64_t m1 = 4294967087LL, m2 = 4294944443LL;
    std::int64_t x1 = (1403580 * h1[1] - 810728 * h1[0]) % m1;
    if (x1 < 0) x1 += m1;
    h1[0] = h1[1];
    h1[1] = h1[2];
    h1[2] = x1;
    std::int64_t x2 = (527612 * h2[2] - 1370589 * h2[0]) % m2;
    if (x2 < 0) x2 += m2;
    h2[0] = h2[1];
    h2[1] = h2[2];
    h2[2] = x2;
    std::int64_t x = (x1 - x2) % m1;
    if (x < 0) x += m1;
    return static_cast<double>(x + 1) / static_cast<double>(m1 + 1);
  }
};
}  // namespace

TEST_CASE("mrg32k3a recurrences", "[rng]") {
  SECTION("one step from a unit state matches the direct recurrence") {
    Mrg32k3aState s;  // (0,0,1) / (0,0,1)
    MrgOracle o{{0, 0, 1}, {0, 0, 1}};
    for (int i = 0; i < 5; ++i) {
      const double expect = o.step();
      const double got = mrg32k3a_next(s);
      REQUIRE(got == expect);
    }
  }
  SECTION("negative numerators are normalized into range") {
    // Large old history with tiny recent values forces a negative product sum.
    Mrg32k3aState s;
    s.s1 = {kMrgM1 - 1, 1, 1};
    s.s2 = {kMrgM2 - 1, 1, 1};
    mrg32k3a_next(s);
    CHECK(s.s1[2] < kMrgM1);
    CHECK(s.s2[2] < kMrgM2);
  }
  SECTION("uniform mean over a million draws") {
    Mrg32k3aState s = mrg32k3a_seed(7);
    double sum = 0.0;
    for (int i = 0; i < 1000000; ++i) sum += mrg32k3a_next(s);
    const double mean = sum / 1e6;
    CHECK(mean > 0.499);
    CHECK(mean < 0.501);
  }
  SECTION("uniforms stay strictly inside (0,1)") {
    Mrg32k3aState s = mrg32k3a_seed(99);
    for (int i = 0; i < 100000; ++i) {
      const double u = mrg32k3a_next(s);
      REQUIRE(u > 0.0);
      REQUIRE(u < 1.0);
    }
  }
}

TEST_CASE("mrg32k3a skip", "[rng]") {
  SECTION("zero steps is the identity") {
    Mrg32k3aState s = mrg32k3a_seed(5);
    Mrg32k3aState t = s;
    mrg32k3a_skip(t, 0);
    CHECK(t.s1 == s.s1);
    CHECK(t.s2 == s.s2);
  }
  SECTION("one step equals next()") {
    Mrg32k3aState a = mrg32k3a_seed(5);
    Mrg32k3aState b = a;
    mrg32k3a_next(a);
    mrg32k3a_skip(b, 1);
    CHECK(a.s1 == b.s1);
    CHECK(a.s2 == b.s2);
  }
  SECTION("a 1e5 jump equals a 1e5 loop") {
    Mrg32k3aState a = mrg32k3a_seed(2024);
    Mrg32k3aState b = a;
    for (int i = 0; i < 100000; ++i) mrg32k3a_next(a);
    mrg32k3a_skip(b, 100000);
    CHECK(a.s1 == b.s1);
    CHECK(a.s2 == b.s2);
  }
}

TEST_CASE("xorwow kernel", "[rng]") {
  SECTION("hand-executed step from (1,0,0,0,0,0)") {
    XorwowState s{1, 0, 0, 0, 0, 0};
    const std::uint32_t out = xorwow_next(s);
    // t = 0; registers rotate to w=1; v = (1 ^ 16) ^ 0 = 17; d = 362437.
    CHECK(s.v == 17);
    CHECK(s.w == 1);
    CHECK(s.x == 0);
    CHECK(s.y == 0);
    CHECK(s.z == 0);
    CHECK(s.d == 362437);
    CHECK(out == 17 + 362437);
  }
  SECTION("the Weyl counter gains exactly 2*362437 over two calls") {
    XorwowState s = xorwow_seed(77);
    const std::uint32_t d0 = s.d;
    xorwow_next(s);
    xorwow_next(s);
    CHECK(s.d == static_cast<std::uint32_t>(d0 + 2u * 362437u));
  }
  SECTION("the xorshift registers never become all zero") {
    XorwowState s = xorwow_seed(3);
    for (int i = 0; i < 1000000; ++i) {
      xorwow_next(s);
      REQUIRE((s.v | s.w | s.x | s.y | s.z) != 0);
    }
  }
}

TEST_CASE("split_stream partitions reproduce the serial sequence", "[rng]") {
  SECTION("a single stream is the serial sequence (all engines)") {
    for (EngineKind kind : {EngineKind::Lcg48, EngineKind::Mrg32k3a, EngineKind::Xorwow}) {
      RngStream serial = split_stream(kind, 42, StreamPartition{PartitionMode::Block, 1, 0, 1});
      RngStream again = split_stream(kind, 42, StreamPartition{PartitionMode::Block, 1, 0, 1});
      for (int i = 0; i < 1000; ++i) REQUIRE(serial.next_uniform() == again.next_uniform());
    }
  }
  SECTION("four lcg48 skip-ahead streams interleave to the serial sequence") {
    RngStream serial = split_stream(EngineKind::Lcg48, 9, {PartitionMode::Block, 1, 0, 1});
    std::vector<RngStream> streams;
    for (std::uint64_t i = 0; i < 4; ++i)
      streams.push_back(split_stream(EngineKind::Lcg48, 9, {PartitionMode::SkipAhead, 4, i, 1}));
    for (int d = 0; d < 4000; ++d)
      REQUIRE(streams[static_cast<std::size_t>(d % 4)].next_uniform() == serial.next_uniform());
  }
  SECTION("mrg32k3a block streams start at their block offset") {
    RngStream serial = split_stream(EngineKind::Mrg32k3a, 11, {PartitionMode::Block, 1, 0, 1});
    for (int i = 0; i < 1000; ++i) serial.next_uniform();
    const double serial_draw_1001 = serial.next_uniform();
    RngStream s1 = split_stream(EngineKind::Mrg32k3a, 11, {PartitionMode::Block, 4, 1, 1000});
    CHECK(s1.next_uniform() == serial_draw_1001);
  }
  SECTION("xorwow cannot skip ahead") {
    CHECK_THROWS_AS(split_stream(EngineKind::Xorwow, 1, {PartitionMode::SkipAhead, 2, 0, 1}),
                    std::invalid_argument);
  }
}

TEST_CASE("skip-ahead exactness across stream counts", "[rng][property]") {
  for (EngineKind kind : {EngineKind::Lcg48, EngineKind::Mrg32k3a}) {
    for (std::uint64_t s : {std::uint64_t{1}, std::uint64_t{2}, std::uint64_t{7}, std::uint64_t{64}}) {
      RngStream serial = split_stream(kind, 1234, {PartitionMode::Block, 1, 0, 1});
      std::vector<RngStream> streams;
      for (std::uint64_t i = 0; i < s; ++i)
        streams.push_back(split_stream(kind, 1234, {PartitionMode::SkipAhead, s, i, 1}));
      for (int d = 0; d < 10000; ++d)
        REQUIRE(streams[static_cast<std::size_t>(d % s)].next_uniform() == serial.next_uniform());
    }
  }
}

TEST_CASE("jump consistency: skip(s1) then skip(s2) equals skip(s1+s2)", "[rng][property]") {
  SECTION("lcg48") {
    for (auto [s1, s2] : std::vector<std::pair<std::uint64_t, std::uint64_t>>{
             {1, 1}, {3, 5}, {1000, 1}, {12345, 67890}}) {
      Lcg48State a = lcg48_seed(31);
      lcg48_skip(a, s1);
      lcg48_skip(a, s2);
      Lcg48State b = lcg48_seed(31);
      lcg48_skip(b, s1 + s2);
      REQUIRE(a.x == b.x);
    }
  }
  SECTION("mrg32k3a") {
    for (auto [s1, s2] : std::vector<std::pair<std::uint64_t, std::uint64_t>>{
             {1, 1}, {3, 5}, {1000, 1}, {12345, 67890}}) {
      Mrg32k3aState a = mrg32k3a_seed(31);
      mrg32k3a_skip(a, s1);
      mrg32k3a_skip(a, s2);
      Mrg32k3aState b = mrg32k3a_seed(31);
      mrg32k3a_skip(b, s1 + s2);
      REQUIRE(a.s1 == b.s1);
      REQUIRE(a.s2 == b.s2);
    }
  }
}

TEST_CASE("path streamer hands out the documented block substreams", "[rng]") {
  for (EngineKind kind : {EngineKind::Lcg48, EngineKind::Mrg32k3a, EngineKind::Xorwow}) {
    PathStreamer streamer(kind, 555, 16, 0, 32);
    std::vector<RngStream> direct;
    for (std::uint64_t m = 0; m < 20; ++m)
      direct.push_back(split_stream(kind, 555, {PartitionMode::Block, 32, m, 16}));
    for (std::uint64_t m = 0; m < 20; ++m) {
      RngStream s = streamer.next_path();
      for (int d = 0; d < 16; ++d) REQUIRE(s.next_uniform() == direct[m].next_uniform());
    }
  }
}

TEST_CASE("box-muller", "[rng]") {
  SECTION("analytic point: u1 = e^{-1/2}, u2 = 1/4 gives z1 = 0") {
    const auto p = box_muller(std::exp(-0.5), 0.25);
    CHECK(std::abs(p.z1) < 1e-12);
    CHECK(std::abs(p.z2 - 1.0) < 1e-12);
  }
  SECTION("sample moments over a million draws") {
    RngStream g = split_stream(EngineKind::Mrg32k3a, 2718, StreamPartition{});
    double sum = 0.0, sum_sq = 0.0;
    const int n = 1000000;
    for (int i = 0; i < n; ++i) {
      const double z = g.next_gaussian();
      sum += z;
      sum_sq += z * z;
    }
    const double mean = sum / n;
    const double var = sum_sq / n - mean * mean;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(static_cast<double>(n)));
    CHECK(std::abs(var - 1.0) < 0.01);
  }
}

TEST_CASE("pi estimator", "[rng]") {
  SECTION("all points at the origin give exactly 4") {
    RngStream zeros{Lcg48State{0, 1, 0}};  // a=1, c=0, x=0: every uniform is 0
    const auto est = estimate_pi(zeros, 1000);
    CHECK(est.estimate == 4.0);
    CHECK(est.std_error == 0.0);
  }
  SECTION("odd sample counts are rejected") {
    RngStream g = split_stream(EngineKind::Lcg48, 1, StreamPartition{});
    CHECK_THROWS_AS(estimate_pi(g, 3), std::invalid_argument);
  }
  SECTION("a million samples land within four standard errors") {
    RngStream g = split_stream(EngineKind::Mrg32k3a, 31415, StreamPartition{});
    const auto est = estimate_pi(g, 1000000);
    CHECK(std::abs(est.estimate - std::numbers::pi) <= 4.0 * est.std_error);
    const double formula = std::sqrt(std::numbers::pi * (4.0 - std::numbers::pi) / 500000.0);
    CHECK(est.std_error == Catch::Approx(formula).epsilon(0.05));
  }
  SECTION("partitioned estimates are deterministic and mode-consistent") {
    const auto a = estimate_pi_partitioned(EngineKind::Mrg32k3a, 7, 400000, 8, PartitionMode::SkipAhead);
    const auto b = estimate_pi_partitioned(EngineKind::Mrg32k3a, 7, 400000, 8, PartitionMode::SkipAhead);
    CHECK(a.estimate == b.estimate);
    // Skip-ahead partition re-pairs the same draws, so the estimate stays
    // close to the serial one but need not be identical.
    RngStream serial = split_stream(EngineKind::Mrg32k3a, 7, StreamPartition{});
    const auto c = estimate_pi(serial, 400000);
    CHECK(std::abs(a.estimate - c.estimate) < 5.0 * c.std_error);
  }
}
