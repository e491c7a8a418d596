#include "igsim/ledger/scorer.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>
#include <unordered_set>

namespace igsim::ledger {

namespace {

const std::unordered_set<std::string> kHate = {"hate", "hateful", "vermin", "filth", "scum", "disgusting", "ruining"};
const std::unordered_set<std::string> kNegative = {"hate", "angry", "bad", "awful", "leave", "insults", "shoves",
                                                   "mocks", "blocks", "ruining", "threat", "fear"};
const std::unordered_set<std::string> kPositive = {"good", "lovely", "thanks", "helps", "greets", "happy", "kind",
                                                   "great", "friend", "welcome"};
const std::unordered_set<std::string> kBinding = {"loyal", "loyalty", "tradition", "traditions", "betray", "pure",
                                                  "sacred", "authority", "respect", "our"};
const std::unordered_set<std::string> kIndividualizing = {"fair", "unfair", "harm", "care", "rights", "equal",
                                                          "justice", "hurt", "protect"};

}  // namespace

LinguisticScores KeywordScorer::score(const std::string& text) const {
    std::string lower;
    lower.reserve(text.size());
    for (unsigned char c : text) lower.push_back(std::isalpha(c) ? static_cast<char>(std::tolower(c)) : ' ');
    std::istringstream in(lower);
    std::string w;
    int n = 0, hate = 0, neg = 0, pos = 0, bind = 0, indiv = 0;
    bool your_kind = false;
    std::string prev;
    while (in >> w) {
        ++n;
        hate += static_cast<int>(kHate.count(w));
        if (w == "kind" && prev == "your") your_kind = true;
        neg += static_cast<int>(kNegative.count(w));
        pos += static_cast<int>(kPositive.count(w));
        bind += static_cast<int>(kBinding.count(w));
        indiv += static_cast<int>(kIndividualizing.count(w));
        prev = w;
    }
    LinguisticScores s;
    if (n == 0) return s;
    s.hate = std::min(1.0, 0.5 * (hate + (your_kind ? 1 : 0)));
    s.sentiment = pos + neg == 0 ? 0.0 : static_cast<double>(pos - neg) / (pos + neg);
    s.moral_binding = std::min(1.0, static_cast<double>(bind) / n * 5.0);
    s.moral_individualizing = std::min(1.0, static_cast<double>(indiv) / n * 5.0);
    return s;
}

}  // namespace igsim::ledger
