#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "logsieve/token.hpp"

namespace logsieve {

// Length of the longest common token subsequence. A Wildcard equals only a
// Wildcard here; no pattern semantics are applied.
std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b);
inline std::size_t lcs_length(const Pattern& a, const Pattern& b) {
  return lcs_length(a.tokens, b.tokens);
}

// LCS(p, q) - alpha * max(|p|, |q|) >= 0.
bool satisfies_similarity(std::size_t lcs, std::size_t p_length,
                          std::size_t q_length, double alpha);
bool satisfies_similarity(const Pattern& p, const Pattern& q, double alpha);

// Needleman-Wunsch scores.
inline constexpr int kMatchScore = 1;
inline constexpr int kMismatchScore = -1;
inline constexpr int kGapScore = -1;

struct AlignedPair {
  TokenSeq first;
  TokenSeq second;
  int score = 0;
};

// Global alignment; both outputs have equal length and stripping Gaps from
// them gives back the inputs. Ties resolve leftmost-first in the order
// substitution, gap in `first`, gap in `second`.
AlignedPair align_pair(const TokenSeq& first, const TokenSeq& second);

// Score of an existing alignment of two equal-length rows.
int alignment_score(const TokenSeq& first, const TokenSeq& second);

struct ColumnMode {
  Token token;
  std::size_t frequency = 0;
};

struct AlignmentMatrix {
  std::vector<TokenSeq> rows;  // rows[i] aligns input pattern i
  std::size_t width = 0;
  std::vector<ColumnMode> column_modes;

  std::size_t height() const { return rows.size(); }
};

// Most frequent token of column `j`; ties go to the smallest token.
ColumnMode column_mode(const std::vector<TokenSeq>& rows, std::size_t j);

// Longest-first progressive alignment of a block. Patterns are sorted by
// length (stably) and aligned pairwise against the last aligned row; when an
// alignment lengthens that row the aligned prefix is realigned recursively.
AlignmentMatrix align_block(std::span<const Pattern> patterns);

struct ReductionOutcome {
  Pattern reduced;
  std::vector<std::size_t> misfits;  // ascending row indices
  std::vector<bool> constant_columns;

  std::size_t survivors(std::size_t height) const {
    return height - misfits.size();
  }
};

// Column j is constant iff f_j >= beta * n. Rows that disagree with the mode
// of any constant column are misfits. The reduced pattern takes modes of
// constant columns and Wildcards for variable ones; all-Gap columns vanish.
// Throws UsageError on an empty matrix.
ReductionOutcome reduce_matrix(const AlignmentMatrix& matrix, double beta);

}  // namespace logsieve
