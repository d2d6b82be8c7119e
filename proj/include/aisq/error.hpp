#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace aisq {

enum class ErrorCode {
    // ais_ingest
    MalformedSentence,
    ChecksumMismatch,
    InvalidFillBits,
    InvalidArmorCharacter,
    UnsupportedMessageType,
    SentinelValue,
    OutOfRange,
    TruncatedPayload,
    HeaderMismatch,
    // geo
    EmptyPointSet,
    FormatError,
    // pipeline
    TooShort,
    DegenerateEndpoint,
    ConstantChannel,
    UnmappedShipType,
    EmptyDataset,
    MagicMismatch,
    VersionMismatch,
    // tsnet
    ShapeMismatch,
    DegenerateBatch,
    InvalidConfig,
    EmptySplit,
    DivergedLoss,
    // metrics
    LabelOutOfRange,
    EmptyMatrix,
    // shared
    IoError,
    Usage,
};

std::string_view to_string(ErrorCode code);

/// Process exit status for an error: 1 usage, 2 data, 3 I/O.
int exit_status(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace aisq
