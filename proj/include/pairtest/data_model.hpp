#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace pairtest {

enum class System { A, B };

/// One human score for one system output. Scores are direct-assessment
/// points on the 0-100 scale; segment and annotator ids are optional
/// (empty string means not provided).
struct Judgment {
  std::string comparison_id;
  std::string language_pair;
  System system = System::A;
  double score = 0.0;
  std::string segment_id;
  std::string annotator_id;
};

/// A pairwise comparison: two judgment pools plus metadata. The segment
/// and annotator vectors run parallel to the score pools.
struct ComparisonData {
  std::string comparison_id;
  std::string language_pair;
  std::vector<double> scores_a;
  std::vector<double> scores_b;
  std::vector<std::string> segments_a;
  std::vector<std::string> segments_b;
  std::vector<std::string> annotators_a;
  std::vector<std::string> annotators_b;

  const std::vector<double>& scores(System s) const {
    return s == System::A ? scores_a : scores_b;
  }

  // mean(a) - mean(b); requires both pools non-empty.
  double observed_diff() const;

  // True when the pool is non-empty and every judgment carries a segment id.
  bool has_segments(System s) const;

  // (segment_id, score) pairs for one system; errors when ids are missing.
  std::vector<std::pair<std::string, double>> segmented_scores(System s) const;
};

struct SummaryStats {
  std::size_t n_a = 0;
  std::size_t n_b = 0;
  double mean_a = 0.0;
  double mean_b = 0.0;
  double diff = 0.0;  // mean_a - mean_b
  double var_a = 0.0;  // unbiased, n-1 denominator
  double var_b = 0.0;
};

// Descriptive summary of one comparison; errors if either pool is empty.
SummaryStats summarize(const ComparisonData& c);

/// Reads the judgment file format: UTF-8, comma-delimited, mandatory header
/// `comparison_id,language_pair,system,score,segment_id,annotator_id`
/// (the last two columns are optional and may be left empty). Rows are
/// grouped by comparison_id in first-appearance order; row order within a
/// pool is preserved and duplicate rows are retained as distinct judgments.
/// Malformed rows, scores outside [0,100] and empty files are rejected with
/// the offending line number.
std::vector<ComparisonData> load_judgments(std::istream& in,
                                           const std::string& source_name = "input");
std::vector<ComparisonData> load_judgments_file(const std::string& path);

// Writes the same format; scores carry 6 significant digits, so a
// save/load/save round trip is byte-stable.
void save_judgments(std::ostream& out, std::span<const ComparisonData> comparisons);
void save_judgments_file(const std::string& path, std::span<const ComparisonData> comparisons);

// Structural problems that block statistical use (currently: empty pools).
// Returns human-readable messages; empty result means the corpus is usable.
std::vector<std::string> validate_comparisons(std::span<const ComparisonData> comparisons);

std::string to_string(System s);

}  // namespace pairtest
