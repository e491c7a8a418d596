#pragma once

namespace igsim::world {

inline constexpr long kSecondsPerTick = 10;
inline constexpr long kTicksPerHour = 3600 / kSecondsPerTick;
inline constexpr long kTicksPerDay = 24 * kTicksPerHour;

constexpr long ticks_for_days(long days) { return days * kTicksPerDay; }
constexpr long ticks_for_hours(long hours) { return hours * kTicksPerHour; }
/// Tick 0 is 07:00 on day 0. Plan items are stored in clock ticks (since
/// midnight of day 0); everything else counts simulation ticks.
inline constexpr long kStartHour = 7;

constexpr long sim_hour(long tick) { return tick * kSecondsPerTick / 3600; }
constexpr long clock_tick(long tick) { return tick + kStartHour * kTicksPerHour; }
constexpr long tick_of_day(long tick) { return clock_tick(tick) % kTicksPerDay; }
constexpr long day_of(long tick) { return clock_tick(tick) / kTicksPerDay; }

static_assert(ticks_for_days(3) == 25920);

}  // namespace igsim::world
