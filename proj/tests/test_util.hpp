#pragma once
#include <cmath>
#include <optional>

#include "elflow/common.hpp"

namespace elflow::test {

// Kind of the elflow::Error thrown by f, or nothing when f returns normally.
template <class F>
std::optional<ErrorKind> error_kind(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    return std::nullopt;
}

inline const double kPi = std::acos(-1.0);

}  // namespace elflow::test
