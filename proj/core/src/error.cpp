#include "railguard/error.hpp"

namespace railguard {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DanglingEndpoint: return "DanglingEndpoint";
    case ErrorCode::NonPositiveLength: return "NonPositiveLength";
    case ErrorCode::LoopTrack: return "LoopTrack";
    case ErrorCode::InvalidVertex: return "InvalidVertex";
    case ErrorCode::UnknownTrack: return "UnknownTrack";
    case ErrorCode::PlatformConflict: return "PlatformConflict";
    case ErrorCode::OverlapConflict: return "OverlapConflict";
    case ErrorCode::UnknownAgent: return "UnknownAgent";
    case ErrorCode::NegativeSpeed: return "NegativeSpeed";
    case ErrorCode::DisconnectedTracks: return "DisconnectedTracks";
    case ErrorCode::Unreachable: return "Unreachable";
    case ErrorCode::IncompleteScope: return "IncompleteScope";
    case ErrorCode::MissingEdge: return "MissingEdge";
    case ErrorCode::InvalidGraph: return "InvalidGraph";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::NoRelayInRange: return "NoRelayInRange";
    case ErrorCode::UnknownTrain: return "UnknownTrain";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::CountMismatch: return "CountMismatch";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace railguard
