#pragma once

#include <cstdint>

namespace ridepool {

using NodeId = std::int64_t;
using ZoneId = std::int64_t;
using RequestId = std::int64_t;
using VehicleId = std::int32_t;
using OperatorId = std::int32_t;

/// Slack for comparing planned or realized times against constraint bounds (seconds).
inline constexpr double kTimeTolerance = 1e-6;

inline constexpr double kSecondsPerDay = 86400.0;

}  // namespace ridepool
