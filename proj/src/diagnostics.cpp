#include "lcpms/diagnostics.hpp"

#include <array>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace lcpms {

namespace {

std::array<std::atomic<std::size_t>, static_cast<std::size_t>(Warning::Count)> counters{};

const char* message(Warning kind) {
    switch (kind) {
        case Warning::UniformFallback:
            return "localizer weights vanished at an evaluation point; using uniform weights";
        case Warning::SinusoidFallback:
            return "windowed sinusoid fit was singular; falling back to a global fit";
        case Warning::NadarayaWatsonFallback:
            return "Nadaraya-Watson denominator underflowed; using the nearest neighbour";
        case Warning::Count: break;
    }
    return "";
}

bool quiet() {
    static const bool q = [] {
        const char* v = std::getenv("LCPMS_LOG");
        return v != nullptr && std::strcmp(v, "quiet") == 0;
    }();
    return q;
}

}  // namespace

void warn_once(Warning kind) {
    const auto previous = counters[static_cast<std::size_t>(kind)].fetch_add(1, std::memory_order_relaxed);
    if (previous == 0 && !quiet()) {
        std::fprintf(stderr, "lcpms: warning: %s\n", message(kind));
    }
}

std::size_t warning_count(Warning kind) {
    return counters[static_cast<std::size_t>(kind)].load(std::memory_order_relaxed);
}

}  // namespace lcpms
