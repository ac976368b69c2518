#pragma once

#include <stdexcept>
#include <string>

namespace gka {

enum class Err {
  // field
  ZeroInverse,
  MixedModulus,
  DuplicateAbscissa,
  NotPrime,
  // codec
  MalformedSecret,
  LengthMismatch,
  MalformedMessage,
  // crypto
  DecryptionFailure,
  // protocol
  SignatureInvalid,
  ReplayDetected,
  UnknownSender,
  IdMismatch,
  DuplicateSubmission,
  InvalidState,
  MissingContributions,
  ShareMissing,
  ContributionNotUsed,
  AlreadyMember,
  NotAMember,
  GroupTooSmall,
  // harness
  ScriptInvalid,
};

inline const char* err_name(Err e) {
  switch (e) {
    case Err::ZeroInverse: return "ZeroInverse";
    case Err::MixedModulus: return "MixedModulus";
    case Err::DuplicateAbscissa: return "DuplicateAbscissa";
    case Err::NotPrime: return "NotPrime";
    case Err::MalformedSecret: return "MalformedSecret";
    case Err::LengthMismatch: return "LengthMismatch";
    case Err::MalformedMessage: return "MalformedMessage";
    case Err::DecryptionFailure: return "DecryptionFailure";
    case Err::SignatureInvalid: return "SignatureInvalid";
    case Err::ReplayDetected: return "ReplayDetected";
    case Err::UnknownSender: return "UnknownSender";
    case Err::IdMismatch: return "IdMismatch";
    case Err::DuplicateSubmission: return "DuplicateSubmission";
    case Err::InvalidState: return "InvalidState";
    case Err::MissingContributions: return "MissingContributions";
    case Err::ShareMissing: return "ShareMissing";
    case Err::ContributionNotUsed: return "ContributionNotUsed";
    case Err::AlreadyMember: return "AlreadyMember";
    case Err::NotAMember: return "NotAMember";
    case Err::GroupTooSmall: return "GroupTooSmall";
    case Err::ScriptInvalid: return "ScriptInvalid";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(Err code, const std::string& detail = {})
      : std::runtime_error(detail.empty() ? err_name(code)
                                          : std::string(err_name(code)) + ": " + detail),
        code_(code) {}

  Err code() const { return code_; }

 private:
  Err code_;
};

}  // namespace gka
