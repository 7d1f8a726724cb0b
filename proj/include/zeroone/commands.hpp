#pragma once

// check, classify and verify. Each produces a JSON report and a summary
// table; execute() also writes them to the output directory.
//
// Exit codes: 0 success, 1 a condition FAILs or is INDETERMINATE (check) or
// the preconditions of classify fail, 2 configuration or expression error,
// 3 an INDETERMINATE classification, 4 a verification CONTRADICTS,
// 5 a verification is UNDERPOWERED, 6 internal contradiction between the
// zero-one verdicts and the certain-explosion test.

#include <ostream>
#include <string>

#include "zeroone/config.hpp"
#include "zeroone/report.hpp"

namespace zeroone::cli {

struct Outcome {
  int exit_code = 0;
  report::Json report;
  std::string summary;
  /// One serialized PathRecord per line (verify with output.dump_paths > 0).
  std::string path_dump;
};

Outcome run_check(const RunConfig& cfg);
Outcome run_classify(const RunConfig& cfg);
/// `workers` only parallelizes the simulation; the outcome does not depend on it.
Outcome run_verify(const RunConfig& cfg, unsigned workers);

/// Runs `command`, writes <out>/<command>.json, <command>.txt and, if any,
/// <command>_paths.jsonl, prints the summary to `out`. Errors go to `err`.
int execute(const std::string& command, const RunConfig& cfg, unsigned workers, std::ostream& out,
            std::ostream& err);

}  // namespace zeroone::cli
