#pragma once

namespace verikit {

/// Thread count that parallel kernels use when a caller passes jobs <= 0.
int default_jobs();

/// Clamps a requested job count to at least one thread.
int resolve_jobs(int jobs);

}  // namespace verikit
