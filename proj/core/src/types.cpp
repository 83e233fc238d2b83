#include "dpglmb/types.hpp"

#include "dpglmb/errors.hpp"

#include <charconv>

namespace dpglmb {

Label parse_label(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ContractViolation("malformed label '" + text + "'");
    Label l;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    auto r1 = std::from_chars(begin, begin + colon, l.birth_time);
    auto r2 = std::from_chars(begin + colon + 1, end, l.index);
    if (r1.ec != std::errc{} || r1.ptr != begin + colon || r2.ec != std::errc{} || r2.ptr != end) {
        throw ContractViolation("malformed label '" + text + "'");
    }
    return l;
}

}  // namespace dpglmb
