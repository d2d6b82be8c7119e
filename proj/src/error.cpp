#include "aisq/error.hpp"

namespace aisq {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedSentence: return "MalformedSentence";
        case ErrorCode::ChecksumMismatch: return "ChecksumMismatch";
        case ErrorCode::InvalidFillBits: return "InvalidFillBits";
        case ErrorCode::InvalidArmorCharacter: return "InvalidArmorCharacter";
        case ErrorCode::UnsupportedMessageType: return "UnsupportedMessageType";
        case ErrorCode::SentinelValue: return "SentinelValue";
        case ErrorCode::OutOfRange: return "OutOfRange";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::HeaderMismatch: return "HeaderMismatch";
        case ErrorCode::EmptyPointSet: return "EmptyPointSet";
        case ErrorCode::FormatError: return "FormatError";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::DegenerateEndpoint: return "DegenerateEndpoint";
        case ErrorCode::ConstantChannel: return "ConstantChannel";
        case ErrorCode::UnmappedShipType: return "UnmappedShipType";
        case ErrorCode::EmptyDataset: return "EmptyDataset";
        case ErrorCode::MagicMismatch: return "MagicMismatch";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::DegenerateBatch: return "DegenerateBatch";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::EmptySplit: return "EmptySplit";
        case ErrorCode::DivergedLoss: return "DivergedLoss";
        case ErrorCode::LabelOutOfRange: return "LabelOutOfRange";
        case ErrorCode::EmptyMatrix: return "EmptyMatrix";
        case ErrorCode::IoError: return "IoError";
        case ErrorCode::Usage: return "Usage";
    }
    return "Unknown";
}

int exit_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::Usage: return 1;
        case ErrorCode::IoError: return 3;
        default: return 2;
    }
}

}  // namespace aisq
