#include "surfspec/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

namespace surfspec {

std::size_t worker_count() {
    std::size_t hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    if (const char* env = std::getenv("SURFSPEC_THREADS")) {
        try {
            long v = std::stol(env);
            hw = (v >= 1) ? std::min(hw, (std::size_t)v) : 1;
        } catch (...) {
        }
    }
    return hw;
}

} // namespace surfspec
