#pragma once

#include <string>
#include <vector>

#include "procomplete/process_model.hpp"

namespace procomplete {

/// Reads every .bpmn / .xml file of a directory (sorted by file name, not
/// recursive). Process ids become "<file stem>/<process id>" so that ids stay
/// unique across files. Throws Error(IoFailure) for a missing directory and
/// rethrows parse errors with the file name prepended.
std::vector<ProcessGraph> load_corpus(const std::string& directory);

/// Reads a whole file. Throws Error(IoFailure).
std::string read_file(const std::string& path);

}  // namespace procomplete
