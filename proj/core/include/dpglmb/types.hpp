#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace dpglmb {

/// Track label (birth step, index among objects born at that step). Ordered lexicographically.
struct Label {
    int birth_time = 0;
    int index = 0;

    auto operator<=>(const Label&) const = default;

    [[nodiscard]] std::string to_string() const {
        return std::to_string(birth_time) + ":" + std::to_string(index);
    }
};

inline std::ostream& operator<<(std::ostream& os, const Label& l) { return os << l.to_string(); }

/// Parses "birth:index". Throws ContractViolation on malformed input.
Label parse_label(const std::string& text);

using MeasurementSet = std::vector<Eigen::VectorXd>;

}  // namespace dpglmb

template <>
struct std::hash<dpglmb::Label> {
    std::size_t operator()(const dpglmb::Label& l) const noexcept {
        return std::hash<std::int64_t>{}((static_cast<std::int64_t>(l.birth_time) << 32) ^
                                         static_cast<std::uint32_t>(l.index));
    }
};
