#pragma once

#include <functional>

namespace smpi::detail {

/// Worker count: hardware concurrency, capped by SMPI_THREADS when set.
int worker_count();

/// Runs body(row) for every row in [0, rows). Rows are split into contiguous
/// chunks, one per worker; body must only write state owned by its row.
void parallel_for_rows(int rows, const std::function<void(int)>& body);

}  // namespace smpi::detail
