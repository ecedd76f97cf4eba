#ifndef CSQ_EXPERIMENT_HPP
#define CSQ_EXPERIMENT_HPP

#include <cstdint>
#include <optional>
#include <string>

#include "csq/types.hpp"

namespace csq {

/// One batch experiment: a command plus a flat key/value parameter map read
/// from a JSON file. Unknown keys are rejected; physical parameters are
/// validated against module preconditions before dispatch.
struct ExperimentSpec {
  std::string command;
  std::string json;  // raw spec text, echoed into the run manifest

  static ExperimentSpec from_file(const std::string& path);
  static ExperimentSpec from_string(const std::string& text);
};

struct RunOptions {
  std::string out_dir = ".";
  std::optional<uint64_t> seed = std::nullopt;  // overrides the spec seed
  int workers = 0;
  bool svg = false;
};

struct RunResult {
  std::string csv_path;
  std::string manifest_path;
  std::string svg_path;  // empty unless requested and produced
};

/// Executes the experiment: always writes <out>/<command>.csv (RFC 4180,
/// CRLF, '.' decimal separator, complex values as re/im column pairs) and a
/// run manifest; optionally a static SVG plot. Deterministic for a fixed
/// spec, seed, and worker count.
RunResult run(const ExperimentSpec& spec, const RunOptions& opts);

}  // namespace csq

#endif
