#include "nort/parallel.hpp"

#include <omp.h>

namespace nort {

namespace {
int g_threads = 0;
}

void set_threads(int n) {
    g_threads = n > 0 ? n : 0;
    if (g_threads > 0)
        omp_set_num_threads(g_threads);
}

int threads() { return g_threads > 0 ? g_threads : omp_get_max_threads(); }

} // namespace nort
