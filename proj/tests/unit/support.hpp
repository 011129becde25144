#pragma once

#include <unistd.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "seqfuzz/corpus_gen.hpp"
#include "seqfuzz/mock_sut.hpp"
#include "seqfuzz/openapi.hpp"
#include "seqfuzz/spec_graph.hpp"

namespace test {

inline std::filesystem::path fixtures() { return SEQFUZZ_FIXTURES_DIR; }

inline const seqfuzz::ApiSpec& minipet() {
  static const seqfuzz::ApiSpec spec = seqfuzz::load_spec_file((fixtures() / "minipet.yaml").string());
  return spec;
}

inline const seqfuzz::DependencyGraph& minipet_graph() {
  static const seqfuzz::DependencyGraph graph = seqfuzz::build_dependency_graph(minipet());
  return graph;
}

inline const std::vector<seqfuzz::RequestSequence>& minipet_seeds() {
  static const std::vector<seqfuzz::RequestSequence> seeds = [] {
    seqfuzz::Rng rng(1);
    return seqfuzz::generate_corpus(minipet(), minipet_graph(), rng).sequences;
  }();
  return seeds;
}

/// Fresh temporary directory removed on destruction.
struct TempDir {
  std::filesystem::path path;
  TempDir() {
    static int counter = 0;
    path = std::filesystem::temp_directory_path() /
           ("seqfuzz-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path);
    std::filesystem::create_directories(path);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path, ec);
  }
};

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

} // namespace test
