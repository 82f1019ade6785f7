#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "slicerl/metrics.hpp"
#include "slicerl/rng.hpp"

using namespace slicerl;

namespace {

// Independent brute-force oracles, kept as plain indexed loops.
double reward_oracle(const std::vector<double>& a,
                     const std::vector<double>& d) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    acc += a[i] >= d[i] ? a[i] - d[i] : d[i] - a[i];
  }
  return 1.0 - acc / static_cast<double>(a.size());
}

double beta_oracle(const QosTrace& trace, double thresh) {
  double num = 0.0;
  double den = 0.0;
  for (std::size_t t = 0; t < trace.traffic.size(); ++t) {
    den += trace.traffic[t];
    if (trace.throughput[t] <= thresh) num += trace.traffic[t];
  }
  return den == 0.0 ? 0.0 : num / den;
}

double sla_oracle(const QosTrace& trace, double thresh) {
  double count = 0.0;
  for (std::size_t t = 0; t < trace.throughput.size(); ++t) {
    if (trace.throughput[t] > thresh) count += 1.0;
  }
  return count / static_cast<double>(trace.throughput.size());
}

}  // namespace

TEST_CASE("reward reference points") {
  const std::vector<double> one{0.33};
  CHECK(reward(one, one) == 1.0);
  CHECK(reward(std::vector<double>{1.0}, std::vector<double>{0.0}) == 0.0);
  CHECK(reward(std::vector<double>{0.7}, std::vector<double>{0.4}) ==
        doctest::Approx(0.7).epsilon(1e-12));
  CHECK(reward(std::vector<double>{0.2, 0.9}, std::vector<double>{0.4, 0.5}) ==
        doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("reward contract violations") {
  CHECK_THROWS_AS(reward({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(
      reward(std::vector<double>{0.5}, std::vector<double>{0.5, 0.5}),
      std::invalid_argument);
}

TEST_CASE("reward vs oracle on random vectors, symmetry, bounds") {
  Rng rng(101);
  for (int it = 0; it < 1000; ++it) {
    const std::size_t n = 1 + rng.next_u64() % 8;
    std::vector<double> a(n);
    std::vector<double> d(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.uniform01();
      d[i] = rng.uniform01();
    }
    const double r = reward(a, d);
    CHECK(std::abs(r - reward_oracle(a, d)) <= 1e-12);
    CHECK(r == reward(d, a));
    CHECK(r >= 0.0);
    CHECK(r <= 1.0);
    CHECK(reward(a, a) == 1.0);
    if (a != d) CHECK(r < 1.0);
  }
}

TEST_CASE("load_estimate") {
  SliceConfig cfg;
  CHECK(load_estimate(0, cfg).value == 0.0);
  CHECK(load_estimate(20, cfg).value == 1.0);  // 5600 mc clamps
  CHECK(load_estimate(5, cfg).value == doctest::Approx(0.35).epsilon(1e-15));
}

TEST_CASE("qos_degradation reference points") {
  const QosTrace clean{{1, 2, 3}, {5.0, 9.0, 2.0}};
  CHECK(qos_degradation(clean, 1.0) == 0.0);

  const QosTrace broken{{1, 2, 3}, {0.2, 0.0, 1.0}};
  CHECK(qos_degradation(broken, 1.0) == 1.0);

  const QosTrace mixed{{2, 3, 5}, {0.5, 2.0, 0.9}};
  CHECK(qos_degradation(mixed, 1.0) == 0.7);

  const QosTrace idle{{0, 0, 0}, {0.0, 0.0, 0.0}};
  CHECK(qos_degradation(idle, 1.0) == 0.0);  // zero traffic convention
}

TEST_CASE("qos_degradation and sla_fraction vs brute-force oracles") {
  Rng rng(202);
  for (int it = 0; it < 1000; ++it) {
    const std::size_t n = 1 + rng.next_u64() % 40;
    QosTrace trace;
    for (std::size_t t = 0; t < n; ++t) {
      trace.traffic.push_back(std::floor(rng.uniform(0.0, 12.0)));
      trace.throughput.push_back(rng.uniform(0.0, 2.5));
    }
    CHECK(std::abs(qos_degradation(trace, 1.0) - beta_oracle(trace, 1.0)) <=
          1e-12);
    CHECK(std::abs(sla_fraction(trace, 1.0) - sla_oracle(trace, 1.0)) <=
          1e-12);

    // uniform positive scaling of the traffic leaves beta unchanged
    const double scale = rng.uniform(0.1, 9.0);
    QosTrace scaled = trace;
    for (double& x : scaled.traffic) x *= scale;
    CHECK(qos_degradation(scaled, 1.0) ==
          doctest::Approx(qos_degradation(trace, 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("sla_fraction boundary uses the strict-above convention") {
  const QosTrace mixed{{1, 1, 1}, {0.5, 2.0, 0.9}};
  CHECK(sla_fraction(mixed, 1.0) == doctest::Approx(1.0 / 3.0));
  const QosTrace edge{{1}, {1.0}};
  CHECK(sla_fraction(edge, 1.0) == 0.0);
  CHECK(qos_degradation(edge, 1.0) == 1.0);  // q == thresh is a violation
}

TEST_CASE("qos trace validation") {
  CHECK_THROWS_AS(qos_degradation(QosTrace{{}, {}}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(qos_degradation(QosTrace{{1, 2}, {1.0}}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(qos_degradation(QosTrace{{-1}, {1.0}}, 1.0),
                  std::invalid_argument);
}

TEST_CASE("mean_allocation") {
  std::vector<KpiSample> constant(5);
  for (auto& row : constant) row.allocation_mc = 500.0;
  CHECK(mean_allocation(constant) == 500.0);

  std::vector<KpiSample> pair(2);
  pair[0].allocation_mc = 1000.0;
  pair[1].allocation_mc = 2000.0;
  CHECK(mean_allocation(pair) == 1500.0);

  CHECK_THROWS_AS(mean_allocation(std::vector<KpiSample>{}),
                  std::invalid_argument);
}

TEST_CASE("summary text carries the four keys and the beta convention") {
  SliceConfig cfg;
  std::vector<KpiSample> rows(3);
  for (int i = 0; i < 3; ++i) {
    rows[i].active_users = 5;
    rows[i].allocation_mc = 1400.0;
    rows[i].throughput_mbps = 20.0;
    rows[i].reward = 1.0;
  }
  const MetricsSummary s = summarize(rows, cfg);
  const std::string text = s.to_text();
  CHECK(text.find("mean_allocation_mc=1400.000000") != std::string::npos);
  CHECK(text.find("beta=0.000000") != std::string::npos);
  CHECK(text.find("sla_fraction=1.000000") != std::string::npos);
  CHECK(text.find("mean_reward=1.000000") != std::string::npos);
  CHECK(text.find("beta=0 when total traffic is 0") != std::string::npos);
}
