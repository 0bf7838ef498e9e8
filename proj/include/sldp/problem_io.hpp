#pragma once

#include <string>

#include "sldp/engine.hpp"

namespace sldp {

/// On-disk JSON document: stage templates, per-stage scenarios and the run
/// configuration. Parsing and serialization round-trip losslessly.
struct ProblemFile {
  int version = 1;
  ProblemData data;
  SldpConfig config;
};

ProblemFile parse_problem_file(const std::string& json_text);
std::string serialize_problem_file(const ProblemFile& pf);

ProblemFile load_problem_file(const std::string& path);
void save_problem_file(const ProblemFile& pf, const std::string& path);

}  // namespace sldp
