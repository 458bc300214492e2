#pragma once

#include <array>
#include <optional>
#include <string_view>

namespace maraug {

enum class WeatherCondition {
  DayClear,
  DayRain,
  DayCloudy,
  DaySunny,
  NightClear,
  NightRain,
  NightCloudy,
};

inline constexpr std::array<WeatherCondition, 7> kAllConditions{
    WeatherCondition::DayClear,   WeatherCondition::DayRain,
    WeatherCondition::DayCloudy,  WeatherCondition::DaySunny,
    WeatherCondition::NightClear, WeatherCondition::NightRain,
    WeatherCondition::NightCloudy,
};

/// The six synthetic conditions, in the order the planner cycles them.
inline constexpr std::array<WeatherCondition, 6> kSyntheticConditions{
    WeatherCondition::DayRain,    WeatherCondition::DayCloudy,
    WeatherCondition::DaySunny,   WeatherCondition::NightClear,
    WeatherCondition::NightRain,  WeatherCondition::NightCloudy,
};

constexpr std::string_view to_string(WeatherCondition c) {
  switch (c) {
    case WeatherCondition::DayClear: return "day-clear";
    case WeatherCondition::DayRain: return "day-rain";
    case WeatherCondition::DayCloudy: return "day-cloudy";
    case WeatherCondition::DaySunny: return "day-sunny";
    case WeatherCondition::NightClear: return "night-clear";
    case WeatherCondition::NightRain: return "night-rain";
    case WeatherCondition::NightCloudy: return "night-cloudy";
  }
  return "day-clear";
}

constexpr std::optional<WeatherCondition> parse_condition(std::string_view s) {
  for (WeatherCondition c : kAllConditions) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

}  // namespace maraug
