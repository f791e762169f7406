#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <random>

#include "eventgrad/trigger.hpp"

using namespace eventgrad;

namespace {

Eigen::VectorXd vec1(double v) {
  Eigen::VectorXd out(1);
  out << v;
  return out;
}

ThresholdSchedule no_cap() { return {}; }

ThresholdSchedule geometric(double alpha, double beta) {
  ThresholdSchedule s;
  s.kind = ThresholdSchedule::Kind::geometric_cap;
  s.alpha = alpha;
  s.beta = beta;
  return s;
}

ThresholdSchedule constant(double c) {
  ThresholdSchedule s;
  s.kind = ThresholdSchedule::Kind::constant_cap;
  s.c = c;
  return s;
}

}  // namespace

TEST_CASE("event check compares the drift norm to the threshold") {
  TriggerState trig(vec1(0.0), 0.1, 1.0, 1);
  CHECK(trig.check_event(vec1(0.15)));
  CHECK(trig.check_event(vec1(-0.10)));  // boundary counts as an event
  CHECK_FALSE(trig.check_event(vec1(0.05)));
  CHECK_FALSE(trig.check_event(vec1(0.0)));
  CHECK_THROWS_AS(trig.check_event(Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("zero threshold fires on any change, including none") {
  TriggerState trig(vec1(1.0), 0.0, 1.0, 1);
  CHECK(trig.check_event(vec1(1.0)));  // ||diff|| = 0 >= 0
  CHECK(trig.check_event(vec1(1.0 + 1e-300)));
}

TEST_CASE("threshold update from a single slope") {
  // drift 0.5 over 5 iterations -> slope 0.1; horizon 1 -> threshold 0.1
  TriggerState trig(vec1(0.0), 0.3, 1.0, 1);
  trig.update_on_trigger(vec1(0.5), 5, no_cap());
  CHECK(trig.threshold() == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(trig.last_sent_iter() == 5);
  CHECK(trig.last_sent_value()(0) == 0.5);
  REQUIRE(trig.slope_history().size() == 1);
  CHECK(trig.slope_history()[0] == doctest::Approx(0.1).epsilon(1e-15));
}

TEST_CASE("slope history is averaged over the configured length") {
  // successive unit-interval drifts 0.2, 0.1, 0.3 with horizon 2:
  // mean slope 0.2, threshold 0.4
  TriggerState trig(vec1(0.0), 0.0, 2.0, 3);
  trig.update_on_trigger(vec1(0.2), 1, no_cap());
  trig.update_on_trigger(vec1(0.3), 2, no_cap());  // drift 0.1
  trig.update_on_trigger(vec1(0.0), 3, no_cap());  // drift 0.3
  REQUIRE(trig.slope_history().size() == 3);
  CHECK(trig.threshold() == doctest::Approx(0.4).epsilon(1e-12));

  // a fourth trigger evicts the oldest slope (0.2): history {0.1, 0.3, 0.6}
  trig.update_on_trigger(vec1(0.6), 4, no_cap());
  REQUIRE(trig.slope_history().size() == 3);
  CHECK(trig.slope_history()[0] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(trig.threshold() == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
}

TEST_CASE("history length one keeps only the latest slope") {
  TriggerState trig(vec1(0.0), 0.0, 1.5, 1);
  trig.update_on_trigger(vec1(0.2), 1, no_cap());
  trig.update_on_trigger(vec1(1.2), 2, no_cap());  // drift 1.0
  REQUIRE(trig.slope_history().size() == 1);
  CHECK(trig.threshold() == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("schedule caps clamp the adaptive threshold") {
  SUBCASE("constant cap") {
    TriggerState trig(vec1(0.0), 0.0, 1.0, 1);
    trig.update_on_trigger(vec1(5.0), 1, constant(0.2));  // slope 5 capped at 0.2
    CHECK(trig.threshold() == doctest::Approx(0.2).epsilon(1e-15));
  }
  SUBCASE("geometric cap min(0.5, 0.2)") {
    const ThresholdSchedule s = geometric(0.04, 1.0);  // cap sqrt(0.04) = 0.2 at all k
    TriggerState trig(vec1(0.0), 0.0, 1.0, 1);
    trig.update_on_trigger(vec1(0.5), 1, s);  // slope 0.5 vs cap 0.2
    CHECK(trig.threshold() == doctest::Approx(0.2).epsilon(1e-15));
  }
  SUBCASE("geometric cap decays with the trigger iteration") {
    const ThresholdSchedule s = geometric(1.0, 0.25);
    TriggerState trig(vec1(0.0), 0.0, 10.0, 1);
    trig.update_on_trigger(vec1(100.0), 4, s);
    CHECK(trig.threshold() == doctest::Approx(std::sqrt(std::pow(0.25, 4))).epsilon(1e-12));
  }
  SUBCASE("no cap leaves the slope rule untouched") {
    TriggerState trig(vec1(0.0), 0.0, 3.0, 1);
    trig.update_on_trigger(vec1(2.0), 1, no_cap());
    CHECK(trig.threshold() == doctest::Approx(6.0).epsilon(1e-15));
  }
}

TEST_CASE("triggers must advance in time") {
  TriggerState trig(vec1(0.0), 0.0, 1.0, 1);
  trig.update_on_trigger(vec1(1.0), 3, no_cap());
  CHECK_THROWS_AS(trig.update_on_trigger(vec1(2.0), 3, no_cap()), std::invalid_argument);
  CHECK_THROWS_AS(trig.update_on_trigger(vec1(2.0), 1, no_cap()), std::invalid_argument);
  CHECK_NOTHROW(trig.update_on_trigger(vec1(2.0), 4, no_cap()));
}

TEST_CASE("construction rejects bad parameters") {
  CHECK_THROWS_AS(TriggerState(vec1(0.0), -0.1, 1.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(TriggerState(vec1(0.0), 0.0, 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(TriggerState(vec1(0.0), 0.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("schedule pointwise values") {
  SUBCASE("none") {
    const ThresholdSchedule s = no_cap();
    CHECK(s.g(0) == 0.0);
    CHECK(s.g(100) == 0.0);
    CHECK(s.cap(0) == std::numeric_limits<double>::infinity());
  }
  SUBCASE("constant") {
    const ThresholdSchedule s = constant(0.3);
    CHECK(s.g(7) == doctest::Approx(0.09).epsilon(1e-15));
    CHECK(s.cap(7) == 0.3);
  }
  SUBCASE("geometric") {
    const ThresholdSchedule s = geometric(4.0, 0.25);
    CHECK(s.g(0) == 4.0);
    CHECK(s.g(2) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(s.cap(2) == doctest::Approx(0.5).epsilon(1e-15));
  }
}

TEST_CASE("schedule partial sums") {
  SUBCASE("no-cap schedule sums to zero") {
    CHECK(schedule_sum_G(no_cap(), 100) == 0.0);
    CHECK(schedule_sum_Ghalf(no_cap(), 100) == 0.0);
  }
  SUBCASE("constant schedule sums linearly") {
    CHECK(schedule_sum_G(constant(0.5), 3) == doctest::Approx(4 * 0.25).epsilon(1e-15));
    CHECK(schedule_sum_Ghalf(constant(0.5), 3) == doctest::Approx(4 * 0.5).epsilon(1e-15));
  }
  SUBCASE("geometric worked examples") {
    // alpha=1, beta=1/4: G(2) = 1 + 1/4 + 1/16 = 1.3125; Ghalf(2) = 1 + 1/2 + 1/4
    CHECK(schedule_sum_G(geometric(1.0, 0.25), 2) == doctest::Approx(1.3125).epsilon(1e-15));
    CHECK(schedule_sum_Ghalf(geometric(1.0, 0.25), 2) == doctest::Approx(1.75).epsilon(1e-15));
    // alpha=4, beta=1/4: G(1) = 4 + 1 = 5; Ghalf(1) = 2 + 1 = 3
    CHECK(schedule_sum_G(geometric(4.0, 0.25), 1) == doctest::Approx(5.0).epsilon(1e-15));
    CHECK(schedule_sum_Ghalf(geometric(4.0, 0.25), 1) == doctest::Approx(3.0).epsilon(1e-15));
  }
  SUBCASE("geometric sums stay below the infinite-series limit") {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> ua(0.01, 10.0), ub(0.05, 0.95);
    std::uniform_int_distribution<int> uk(0, 400);
    for (int trial = 0; trial < 200; ++trial) {
      const double alpha = ua(rng), beta = ub(rng);
      const int K = uk(rng);
      const ThresholdSchedule s = geometric(alpha, beta);
      const double G = schedule_sum_G(s, K);
      const double Ghalf = schedule_sum_Ghalf(s, K);
      CAPTURE(alpha);
      CAPTURE(beta);
      CAPTURE(K);
      CHECK(G >= 0.0);
      CHECK(G <= alpha / (1.0 - beta) * (1.0 + 1e-12));
      CHECK(Ghalf <= std::sqrt(alpha) / (1.0 - std::sqrt(beta)) * (1.0 + 1e-12));
      // partial sums are monotone in K
      if (K > 0) CHECK(G >= schedule_sum_G(s, K - 1));
    }
  }
  SUBCASE("negative K is rejected") {
    CHECK_THROWS_AS(schedule_sum_G(no_cap(), -1), std::invalid_argument);
  }
}

TEST_CASE("an untriggered block stays inside its threshold") {
  // Random walk drifting through repeated checks: whenever the check says
  // "no event" the drift norm is strictly below the threshold.
  std::mt19937_64 rng(91);
  std::normal_distribution<double> gauss(0.0, 0.05);
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4);
  TriggerState trig(x, 0.1, 1.0, 3);
  for (int k = 1; k <= 500; ++k) {
    for (Eigen::Index j = 0; j < x.size(); ++j) x(j) += gauss(rng);
    if (trig.check_event(x)) {
      trig.update_on_trigger(x, k, geometric(1.0, 0.995));
      CHECK(trig.threshold() <= std::sqrt(1.0 * std::pow(0.995, k)) + 1e-15);
    } else {
      CHECK((trig.last_sent_value() - x).norm() < trig.threshold());
    }
    CHECK(trig.threshold() >= 0.0);
  }
}
