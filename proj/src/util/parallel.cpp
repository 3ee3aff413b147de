#include "verikit/util/parallel.hpp"

#include <omp.h>

namespace verikit {

int default_jobs() { return omp_get_max_threads(); }

int resolve_jobs(int jobs) { return jobs <= 0 ? default_jobs() : jobs; }

}  // namespace verikit
