#pragma once

#include <stdexcept>
#include <string>

namespace lmapf {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DisconnectedMap : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyEndpointSet : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CycleDetected : std::logic_error {
  using std::logic_error::logic_error;
};

struct NotSolved : std::logic_error {
  using std::logic_error::logic_error;
};

struct InsufficientCells : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidQuery : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

}  // namespace lmapf
