#include "lfsel/error.hpp"

namespace lfsel {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Io: return "Io";
        case ErrorCode::MalformedRow: return "MalformedRow";
        case ErrorCode::NonUniformGrid: return "NonUniformGrid";
        case ErrorCode::EmptyFile: return "EmptyFile";
        case ErrorCode::Upsample: return "Upsample";
        case ErrorCode::NonIntegralRatio: return "NonIntegralRatio";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::TooShort: return "TooShort";
        case ErrorCode::DegenerateSeries: return "DegenerateSeries";
        case ErrorCode::LagOutOfRange: return "LagOutOfRange";
        case ErrorCode::Infeasible: return "Infeasible";
        case ErrorCode::NonConvergence: return "NonConvergence";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::AllInfeasible: return "AllInfeasible";
        case ErrorCode::SingleClass: return "SingleClass";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::TooFew: return "TooFew";
        case ErrorCode::EmptySpec: return "EmptySpec";
        case ErrorCode::StoreVersion: return "StoreVersion";
        case ErrorCode::Config: return "Config";
    }
    return "Unknown";
}

}  // namespace lfsel
