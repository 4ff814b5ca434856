#include "procomplete/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "procomplete/error.hpp"

namespace procomplete {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<ProcessGraph> load_corpus(const std::string& directory) {
  std::error_code ec;
  if (!fs::is_directory(directory, ec))
    throw Error(ErrorCode::IoFailure, "'" + directory + "' is not a directory");

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    if (ext == ".bpmn" || ext == ".xml") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  std::vector<ProcessGraph> corpus;
  for (const auto& file : files) {
    std::vector<ProcessGraph> graphs;
    try {
      graphs = parse_bpmn(read_file(file.string()));
    } catch (const Error& e) {
      throw Error(e.code(), file.filename().string() + ": " + e.what());
    }
    const auto stem = file.stem().string();
    for (auto& g : graphs)
      corpus.push_back(g.renamed(stem + "/" + g.process_id()));
  }
  return corpus;
}

}  // namespace procomplete
