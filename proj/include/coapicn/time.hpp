#pragma once

#include <chrono>
#include <cstdint>

namespace coapicn {

// Time since the start of a run. Simulated runs use virtual time, live
// gateways map the steady clock onto the same type.
using SimTime = std::chrono::microseconds;

using namespace std::chrono_literals;

constexpr std::int64_t to_us(SimTime t) noexcept { return t.count(); }

}  // namespace coapicn
