#include "logsieve/align.hpp"

#include <algorithm>
#include <map>

#include "logsieve/errors.hpp"

namespace logsieve {

namespace {

// Absorbs rounding in alpha * length and beta * n products.
constexpr double kEps = 1e-9;

int substitution(const Token& a, const Token& b) {
  return a == b ? kMatchScore : kMismatchScore;
}

struct Row {
  std::size_t source;
  TokenSeq tokens;
};

std::vector<Row> longest_first(std::vector<Row> seqs, std::size_t width_limit) {
  std::stable_sort(seqs.begin(), seqs.end(), [](const Row& a, const Row& b) {
    return a.tokens.size() > b.tokens.size();
  });
  if (seqs.size() < 2) return seqs;

  std::vector<Row> aligned;
  {
    AlignedPair first = align_pair(seqs[0].tokens, seqs[1].tokens);
    aligned.push_back({seqs[0].source, std::move(first.first)});
    aligned.push_back({seqs[1].source, std::move(first.second)});
  }
  for (std::size_t i = 2; i < seqs.size(); ++i) {
    for (;;) {
      AlignedPair pair = align_pair(aligned.back().tokens, seqs[i].tokens);
      if (pair.first.size() > aligned.back().tokens.size()) {
        if (pair.first.size() > width_limit)
          throw InvariantError("alignment width exceeded its bound");
        aligned.back().tokens = std::move(pair.first);
        aligned = longest_first(std::move(aligned), width_limit);
        continue;
      }
      aligned.push_back({seqs[i].source, std::move(pair.second)});
      break;
    }
  }
  return aligned;
}

}  // namespace

std::size_t lcs_length(const TokenSeq& a, const TokenSeq& b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1
                                    : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

bool satisfies_similarity(std::size_t lcs, std::size_t p_length,
                          std::size_t q_length, double alpha) {
  const double longest = static_cast<double>(std::max(p_length, q_length));
  return static_cast<double>(lcs) - alpha * longest >= -kEps;
}

bool satisfies_similarity(const Pattern& p, const Pattern& q, double alpha) {
  return satisfies_similarity(lcs_length(p, q), p.length(), q.length(), alpha);
}

AlignedPair align_pair(const TokenSeq& first, const TokenSeq& second) {
  const std::size_t n = first.size(), m = second.size();
  // suffix[i][j]: best score aligning first[i..] with second[j..]. Tracing
  // forward from (0, 0) lets the tie order favour leftmost substitutions.
  std::vector<int> suffix((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> int& {
    return suffix[i * (m + 1) + j];
  };
  for (std::size_t i = n + 1; i-- > 0;) {
    for (std::size_t j = m + 1; j-- > 0;) {
      if (i == n && j == m) {
        at(i, j) = 0;
      } else if (i == n) {
        at(i, j) = static_cast<int>(m - j) * kGapScore;
      } else if (j == m) {
        at(i, j) = static_cast<int>(n - i) * kGapScore;
      } else {
        at(i, j) = std::max({substitution(first[i], second[j]) + at(i + 1, j + 1),
                             kGapScore + at(i, j + 1), kGapScore + at(i + 1, j)});
      }
    }
  }

  AlignedPair out;
  out.score = at(0, 0);
  std::size_t i = 0, j = 0;
  while (i < n || j < m) {
    const int here = at(i, j);
    if (i < n && j < m &&
        here == substitution(first[i], second[j]) + at(i + 1, j + 1)) {
      out.first.push_back(first[i++]);
      out.second.push_back(second[j++]);
    } else if (j < m && here == kGapScore + at(i, j + 1)) {
      out.first.push_back(Token::gap());
      out.second.push_back(second[j++]);
    } else {
      out.first.push_back(first[i++]);
      out.second.push_back(Token::gap());
    }
  }
  return out;
}

int alignment_score(const TokenSeq& first, const TokenSeq& second) {
  if (first.size() != second.size())
    throw UsageError("aligned rows must have equal length");
  int score = 0;
  for (std::size_t k = 0; k < first.size(); ++k) {
    const bool gap_a = first[k].is_gap(), gap_b = second[k].is_gap();
    if (gap_a && gap_b) continue;
    if (gap_a || gap_b) {
      score += kGapScore;
    } else {
      score += substitution(first[k], second[k]);
    }
  }
  return score;
}

ColumnMode column_mode(const std::vector<TokenSeq>& rows, std::size_t j) {
  std::map<Token, std::size_t> counts;
  for (const auto& row : rows) ++counts[row.at(j)];
  ColumnMode mode;
  for (const auto& [token, count] : counts) {
    if (count > mode.frequency) {
      mode.token = token;
      mode.frequency = count;
    }
  }
  return mode;
}

AlignmentMatrix align_block(std::span<const Pattern> patterns) {
  AlignmentMatrix matrix;
  if (patterns.empty()) return matrix;
  std::vector<Row> seqs;
  std::size_t total = 0;
  for (std::size_t i = 0; i < patterns.size(); ++i) {
    seqs.push_back({i, patterns[i].tokens});
    total += patterns[i].length();
  }
  auto aligned = longest_first(std::move(seqs), 2 * total + 8);

  matrix.rows.resize(patterns.size());
  for (auto& row : aligned) matrix.rows[row.source] = std::move(row.tokens);
  matrix.width = matrix.rows.front().size();
  for (const auto& row : matrix.rows)
    if (row.size() != matrix.width)
      throw InvariantError("aligned rows differ in length");
  matrix.column_modes.reserve(matrix.width);
  for (std::size_t j = 0; j < matrix.width; ++j)
    matrix.column_modes.push_back(column_mode(matrix.rows, j));
  return matrix;
}

ReductionOutcome reduce_matrix(const AlignmentMatrix& matrix, double beta) {
  if (matrix.rows.empty() || matrix.width == 0)
    throw UsageError("cannot reduce an empty alignment matrix");
  const std::size_t n = matrix.height();
  ReductionOutcome outcome;
  outcome.constant_columns.assign(matrix.width, false);
  std::vector<bool> misfit(n, false);
  TokenSeq reduced;
  for (std::size_t j = 0; j < matrix.width; ++j) {
    const ColumnMode& mode = matrix.column_modes.at(j);
    if (mode.token.is_gap() && mode.frequency == n) continue;
    const bool constant =
        static_cast<double>(mode.frequency) - beta * static_cast<double>(n) >= -kEps;
    if (constant && !mode.token.is_gap()) {
      outcome.constant_columns[j] = true;
      reduced.push_back(mode.token);
      for (std::size_t i = 0; i < n; ++i)
        if (matrix.rows[i][j] != mode.token) misfit[i] = true;
    } else {
      reduced.push_back(Token::wildcard());
    }
  }
  outcome.reduced = normalize(reduced);
  for (std::size_t i = 0; i < n; ++i)
    if (misfit[i]) outcome.misfits.push_back(i);
  return outcome;
}

}  // namespace logsieve
