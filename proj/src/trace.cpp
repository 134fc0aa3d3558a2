#include "coapicn/trace.hpp"

#include <algorithm>

namespace coapicn {

void Trace::record(SimTime at, std::string_view kind, std::string_view fields)
{
    std::string line = std::to_string(to_us(at));
    line += ' ';
    line += kind;
    if (!fields.empty()) {
        line += ' ';
        line += fields;
    }
    lines_.push_back(std::move(line));
}

std::size_t Trace::count(std::string_view kind) const
{
    return static_cast<std::size_t>(std::count_if(lines_.begin(), lines_.end(), [&](const std::string& l) {
        const auto sp = l.find(' ');
        if (sp == std::string::npos)
            return false;
        const auto rest = std::string_view(l).substr(sp + 1);
        return rest.substr(0, rest.find(' ')) == kind;
    }));
}

std::string Trace::str() const
{
    std::string out;
    for (const auto& l : lines_) {
        out += l;
        out += '\n';
    }
    return out;
}

}  // namespace coapicn
