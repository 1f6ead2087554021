#pragma once

#include <string>

#include "dpsp/pipeline.hpp"

namespace dpsp::testing {

inline std::string corpus_path(const std::string& rel) { return std::string(DPSP_CORPUS_DIR) + "/" + rel; }

inline Unit load_corpus(const std::string& rel) { return load_unit(corpus_path(rel)); }

}  // namespace dpsp::testing
