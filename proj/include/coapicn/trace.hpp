#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "coapicn/time.hpp"

namespace coapicn {

// Append-only event log. One line per event:
//   <time_us> <kind> <key=value ...>
// Field order is fixed by each producer so equal runs give equal bytes.
class Trace {
public:
    void record(SimTime at, std::string_view kind, std::string_view fields);

    const std::vector<std::string>& lines() const { return lines_; }
    std::size_t count(std::string_view kind) const;
    std::string str() const;
    void clear() { lines_.clear(); }

private:
    std::vector<std::string> lines_;
};

}  // namespace coapicn
