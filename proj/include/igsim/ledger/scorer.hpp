#pragma once

#include <string>

namespace igsim::ledger {

struct LinguisticScores {
    double hate = 0.0;          // probability-like, [0,1]
    double sentiment = 0.0;     // [-1,1]
    double moral_binding = 0.0;
    double moral_individualizing = 0.0;
};

/// Text classifier interface for language outcomes.
class LinguisticScorer {
public:
    virtual ~LinguisticScorer() = default;
    virtual LinguisticScores score(const std::string& text) const = 0;
};

/// Keyword lexicon scorer for tests and offline runs.
class KeywordScorer : public LinguisticScorer {
public:
    LinguisticScores score(const std::string& text) const override;
};

inline constexpr double kHateThreshold = 0.5;

}  // namespace igsim::ledger
