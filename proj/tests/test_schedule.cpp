#include <doctest.h>

#include "tsbench/schedule.hpp"

using namespace tsbench;

TEST_CASE("default linear schedule meets the endpoint bounds") {
    NoiseSchedule s = NoiseSchedule::make(ScheduleKind::linear, 1000);
    CHECK(s.alpha_bar(1) > 0.99);
    CHECK(s.alpha_bar(1000) < 0.01);
    for (std::size_t t = 2; t <= 1000; ++t) CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
    CHECK(s.alpha_bar(0) == 1.0);
}

TEST_CASE("cosine schedule is valid and strictly decreasing") {
    NoiseSchedule s = NoiseSchedule::make(ScheduleKind::cosine, 200);
    for (double b : s.betas) {
        CHECK(b > 0.0);
        CHECK(b < 1.0);
    }
    for (std::size_t t = 2; t <= 200; ++t) CHECK(s.alpha_bar(t) < s.alpha_bar(t - 1));
    CHECK(s.alpha_bar(1) > 0.99);
}

TEST_CASE("schedule rejects bad parameters") {
    CHECK_THROWS_AS(NoiseSchedule::make(ScheduleKind::linear, 0), ParamError);
    CHECK_THROWS_AS(NoiseSchedule::make(ScheduleKind::linear, 10, 0.0, 0.02), ParamError);
    CHECK_THROWS_AS(NoiseSchedule::make(ScheduleKind::linear, 10, 0.1, 1.5), ParamError);
}
