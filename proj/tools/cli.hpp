// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <ostream>

namespace funcloc::cli {

/// Exit status: 0 on success, 1 when the pipeline fails, 2 for usage or
/// configuration errors. Tables go to `out`, diagnostics to `err`.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace funcloc::cli
