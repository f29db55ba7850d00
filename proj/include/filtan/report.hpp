#pragma once

/**
 * Report rendering.
 *
 * The JSON report is a deterministic function of the analysis result: keys
 * keep insertion order, every double is emitted as a {"dec", "hex"} string
 * pair (%.17g and %a — reparsing either recovers the exact bits), exact
 * rationals are emitted as strings, and no clock or environment data is
 * included, so re-running the same analysis yields a byte-identical file.
 * The text report is for humans and does include the elapsed wall time.
 */

#include <string>

#include "filtan/analyze.hpp"

namespace filtan {

std::string report_json(const Analysis& a);
std::string report_text(const Analysis& a);

}  // namespace filtan
