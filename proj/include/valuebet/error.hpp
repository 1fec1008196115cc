#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace valuebet {

enum class ErrorCode {
    InsufficientQuotes,
    DegenerateProbability,
    MarginUnderflow,
    IncompleteMarket,
    InvalidQuote,
    InvalidConfig,
    SchemaError,
    EmptyDataset,
    NoEligibleGames,
    InsufficientBins,
    InvalidCalibration,
    NotFound,
    AlreadyPlaced,
    AlreadySettled,
    RecommendationExpired,
    InvalidStake,
    StoreError,
};

constexpr std::string_view to_string(ErrorCode code) noexcept
{
    switch (code) {
    case ErrorCode::InsufficientQuotes: return "InsufficientQuotes";
    case ErrorCode::DegenerateProbability: return "DegenerateProbability";
    case ErrorCode::MarginUnderflow: return "MarginUnderflow";
    case ErrorCode::IncompleteMarket: return "IncompleteMarket";
    case ErrorCode::InvalidQuote: return "InvalidQuote";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::NoEligibleGames: return "NoEligibleGames";
    case ErrorCode::InsufficientBins: return "InsufficientBins";
    case ErrorCode::InvalidCalibration: return "InvalidCalibration";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::AlreadyPlaced: return "AlreadyPlaced";
    case ErrorCode::AlreadySettled: return "AlreadySettled";
    case ErrorCode::RecommendationExpired: return "RecommendationExpired";
    case ErrorCode::InvalidStake: return "InvalidStake";
    case ErrorCode::StoreError: return "StoreError";
    }
    return "Unknown";
}

/// Every library failure is reported as an Error carrying a stable code; the
/// HTTP layer maps codes to status + machine-readable reason.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code)
    {
    }

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace valuebet
