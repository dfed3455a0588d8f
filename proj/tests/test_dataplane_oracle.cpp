#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "generators.hpp"
#include "nettwin/dataplane.hpp"
#include "oracles.hpp"

namespace nettwin {
namespace {

std::string loopback_ip(const DeviceConfig& dev) {
  for (const auto& i : dev.interfaces) {
    if (i.name == "lo0" && i.v4_addr) {
      return i.v4_addr->substr(0, i.v4_addr->find('/'));
    }
  }
  return "10.255.255.255";
}

TEST(ReachabilityOracle, MatchesBruteForceOnRandomFixtures) {
  std::mt19937 rng(820417);
  const int kFixtures = 120;
  int probes = 0;
  for (int f = 0; f < kFixtures; ++f) {
    testgen::StaticFixture fx = testgen::random_static_fixture(rng);
    Dataplane dp(fx.spec);
    for (const auto& dev : fx.spec.devices) {
      IpAddr src_ip = *IpAddr::parse(loopback_ip(dev));
      for (const IpAddr& dst : fx.probe_dsts) {
        PacketSpec probe{dev.hostname, src_ip, dst, "icmp", 0, 0};
        bool got = dp.reachable(probe);
        bool want = oracle::reachable(fx.spec, dev.hostname, dst);
        ASSERT_EQ(got, want) << "fixture " << f << " src " << dev.hostname << " dst "
                             << dst.str();
        ++probes;
      }
    }
  }
  EXPECT_GT(probes, 2000);
}

TEST(AclOracle, MatchesNaiveEvaluatorOnRandomPackets) {
  std::mt19937 rng(911003);
  const int kFixtures = 120;
  const int kPacketsPerFixture = 10000;
  for (int f = 0; f < kFixtures; ++f) {
    AclCfg acl = testgen::random_acl(rng);
    for (int p = 0; p < kPacketsPerFixture; ++p) {
      AclPacket pkt = testgen::random_acl_packet(rng);
      AclVerdict got = eval_acl(acl, pkt);
      oracle::Verdict want = oracle::acl_verdict(acl, pkt.src_ip, pkt.dst_ip, pkt.protocol,
                                                 pkt.src_port, pkt.dst_port);
      ASSERT_EQ(got.permit, want.permit)
          << "fixture " << f << " packet " << pkt.src_ip.str() << " -> " << pkt.dst_ip.str()
          << " " << pkt.protocol << " " << pkt.src_port << ":" << pkt.dst_port;
      ASSERT_EQ(got.seq, want.seq) << "fixture " << f;
    }
  }
}

TEST(AclCompareOracle, WitnessSetsMatchExhaustiveEnumeration) {
  std::mt19937 rng(407781);
  const int kCases = 80;
  int nonempty = 0;
  for (int t = 0; t < kCases; ++t) {
    testgen::CompareCase c = testgen::random_compare_case(rng);
    std::vector<AclWitness> got = acl_compare(c.a, c.b, c.space(), 1ull << 16);
    std::set<oracle::PacketKey> want = oracle::witness_set(
        c.a, c.b, c.src_prefixes, c.dst_prefixes, c.protocols, c.src_ports, c.dst_ports);
    ASSERT_EQ(got.size(), want.size()) << "case " << t;
    for (const AclWitness& w : got) {
      oracle::PacketKey key{w.packet.src_ip, w.packet.dst_ip, w.packet.protocol,
                            w.packet.src_port, w.packet.dst_port};
      ASSERT_TRUE(want.count(key)) << "case " << t << " packet " << w.packet.src_ip.str()
                                   << " -> " << w.packet.dst_ip.str();
      ASSERT_NE(w.verdict_a.permit, w.verdict_b.permit);
      oracle::Verdict va = oracle::acl_verdict(c.a, w.packet.src_ip, w.packet.dst_ip,
                                               w.packet.protocol, w.packet.src_port,
                                               w.packet.dst_port);
      oracle::Verdict vb = oracle::acl_verdict(c.b, w.packet.src_ip, w.packet.dst_ip,
                                               w.packet.protocol, w.packet.src_port,
                                               w.packet.dst_port);
      EXPECT_EQ(w.verdict_a.permit, va.permit);
      EXPECT_EQ(w.verdict_a.seq, va.seq);
      EXPECT_EQ(w.verdict_b.permit, vb.permit);
      EXPECT_EQ(w.verdict_b.seq, vb.seq);
    }
    EXPECT_TRUE(std::is_sorted(got.begin(), got.end(),
                               [](const AclWitness& x, const AclWitness& y) {
                                 return x.packet < y.packet;
                               }));
    if (!got.empty()) ++nonempty;
  }
  EXPECT_GT(nonempty, 10);  // the mutation mix must actually produce differences
}

TEST(TwoProcessRedistribution, ExternalFixturesConvergeLoopFree) {
  std::mt19937 rng(550099);
  const int kFixtures = 30;
  for (int f = 0; f < kFixtures; ++f) {
    NetworkSpec spec = testgen::random_two_process_fixture(rng);
    Dataplane dp(spec);
    ASSERT_TRUE(dp.routes().converged) << "fixture " << f;
    ASSERT_TRUE(dp.detect_loops().empty()) << "fixture " << f;
    for (const auto& src : spec.devices) {
      IpAddr src_ip = *IpAddr::parse(loopback_ip(src));
      for (const auto& dst : spec.devices) {
        IpAddr dst_ip = *IpAddr::parse(loopback_ip(dst));
        PacketSpec probe{src.hostname, src_ip, dst_ip, "icmp", 0, 0};
        ASSERT_TRUE(dp.reachable(probe))
            << "fixture " << f << " " << src.hostname << " -> " << dst.hostname;
      }
    }
  }
}

}  // namespace
}  // namespace nettwin
