#include "ips/parallel.hpp"

#include <cstdlib>
#include <string>

namespace ips {

int default_threads() {
    if (const char* s = std::getenv("IPS_THREADS")) {
        try {
            const int n = std::stoi(s);
            if (n > 0) return n;
        } catch (...) {
        }
    }
    return 1;
}

}  // namespace ips
