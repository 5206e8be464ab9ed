#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace railguard {

enum class ErrorCode {
  // net-model
  DuplicateId,
  DanglingEndpoint,
  NonPositiveLength,
  LoopTrack,
  InvalidVertex,
  UnknownTrack,
  PlatformConflict,
  OverlapConflict,
  UnknownAgent,
  // kinematics
  NegativeSpeed,
  DisconnectedTracks,
  Unreachable,
  // maxsum
  IncompleteScope,
  MissingEdge,
  InvalidGraph,
  TooLarge,
  // coordination
  NoRelayInRange,
  UnknownTrain,
  // scenario / cli
  ParseError,
  ValidationError,
  CountMismatch,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Exception carrying one of the named error conditions above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace railguard
