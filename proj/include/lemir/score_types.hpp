#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace lemir {

/// Inclusive token range.
struct TokenSpan {
    std::size_t start = 0;
    std::size_t end = 0;

    friend bool operator==(const TokenSpan&, const TokenSpan&) = default;
};

struct ScoreRequest {
    std::string request_id;
    std::vector<std::string> tokens;
    std::vector<TokenSpan> spans;
    std::vector<std::string> labels;

    friend bool operator==(const ScoreRequest&, const ScoreRequest&) = default;
};

/// `scores[i][j]` is the similarity of span i and label j, in [0, 1].
struct ScoreResponse {
    std::string request_id;
    std::vector<std::vector<double>> scores;

    friend bool operator==(const ScoreResponse&, const ScoreResponse&) = default;
};

/// Checks the request invariants; throws ProtocolError(Malformed).
void validate_request(const ScoreRequest& request);
/// Checks shape against `request` and that all scores are finite and in
/// [0, 1]; throws ProtocolError.
void validate_response(const ScoreResponse& response, const ScoreRequest& request);

/// Anything that can score spans against labels. Implementations must be
/// safe to call from several threads at once.
class SpanScorer {
  public:
    virtual ~SpanScorer() = default;
    virtual ScoreResponse score(const ScoreRequest& request) = 0;
};

}  // namespace lemir
