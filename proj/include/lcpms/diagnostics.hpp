#pragma once

#include <cstddef>

namespace lcpms {

enum class Warning : std::size_t {
    UniformFallback,      ///< localizer mass vanished, uniform weights used
    SinusoidFallback,     ///< windowed sinusoid fit was singular
    NadarayaWatsonFallback,
    Count
};

/// Prints a one-line warning to stderr the first time each kind is raised.
/// Silenced when LCPMS_LOG=quiet. Thread-safe.
void warn_once(Warning kind);

/// Number of times each warning was raised since process start.
[[nodiscard]] std::size_t warning_count(Warning kind);

}  // namespace lcpms
