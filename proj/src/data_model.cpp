#include "pairtest/data_model.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "pairtest/error.hpp"
#include "pairtest/math.hpp"

namespace pairtest {

namespace {

const char* kColumnNames[6] = {"comparison_id", "language_pair", "system",
                               "score",         "segment_id",    "annotator_id"};

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

bool read_line(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

double parse_score(const std::string& field, const std::string& source, std::size_t line_no) {
  std::string text = trim(field);
  double value = 0.0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size() || text.empty()) {
    fail(source + ": line " + std::to_string(line_no) + ": score is not a number: '" + field + "'");
  }
  if (!(value >= 0.0 && value <= 100.0)) {
    fail(source + ": line " + std::to_string(line_no) + ": score " + text +
         " outside the [0,100] scale");
  }
  return value;
}

std::string format_score(double score) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", score);
  return buf;
}

}  // namespace

std::string to_string(System s) { return s == System::A ? "A" : "B"; }

double ComparisonData::observed_diff() const {
  if (scores_a.empty() || scores_b.empty()) {
    fail("comparison " + comparison_id + ": both pools must be non-empty");
  }
  return mean(scores_a) - mean(scores_b);
}

bool ComparisonData::has_segments(System s) const {
  const auto& segs = s == System::A ? segments_a : segments_b;
  if (segs.empty()) return false;
  for (const auto& id : segs) {
    if (id.empty()) return false;
  }
  return true;
}

std::vector<std::pair<std::string, double>> ComparisonData::segmented_scores(System s) const {
  if (!has_segments(s)) {
    fail("comparison " + comparison_id + ": segment ids missing for system " + to_string(s));
  }
  const auto& segs = s == System::A ? segments_a : segments_b;
  const auto& pool = scores(s);
  std::vector<std::pair<std::string, double>> out;
  out.reserve(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) out.emplace_back(segs[i], pool[i]);
  return out;
}

SummaryStats summarize(const ComparisonData& c) {
  if (c.scores_a.empty() || c.scores_b.empty()) {
    fail("comparison " + c.comparison_id + ": cannot summarize an empty pool");
  }
  SummaryStats s;
  s.n_a = c.scores_a.size();
  s.n_b = c.scores_b.size();
  s.mean_a = mean(c.scores_a);
  s.mean_b = mean(c.scores_b);
  s.diff = s.mean_a - s.mean_b;
  s.var_a = sample_variance(c.scores_a);
  s.var_b = sample_variance(c.scores_b);
  return s;
}

std::vector<ComparisonData> load_judgments(std::istream& in, const std::string& source_name) {
  std::string line;
  if (!read_line(in, line)) fail(source_name + ": empty file");
  // Strip a UTF-8 BOM if present.
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);

  std::vector<std::string> header = split_fields(line);
  if (header.size() < 4 || header.size() > 6) {
    fail(source_name + ": line 1: header must list 4 to 6 of the judgment columns");
  }
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (trim(header[i]) != kColumnNames[i]) {
      fail(source_name + ": line 1: expected column '" + std::string(kColumnNames[i]) +
           "', got '" + header[i] + "'");
    }
  }
  const std::size_t n_cols = header.size();

  std::vector<ComparisonData> comparisons;
  std::map<std::string, std::size_t> index_of;
  std::size_t line_no = 1;
  std::size_t rows = 0;

  while (read_line(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields = split_fields(line);
    if (fields.size() != n_cols) {
      fail(source_name + ": line " + std::to_string(line_no) + ": expected " +
           std::to_string(n_cols) + " columns, got " + std::to_string(fields.size()));
    }

    std::string id = trim(fields[0]);
    std::string lang = trim(fields[1]);
    std::string system_field = trim(fields[2]);
    if (id.empty()) fail(source_name + ": line " + std::to_string(line_no) + ": empty comparison_id");
    System system;
    if (system_field == "A") {
      system = System::A;
    } else if (system_field == "B") {
      system = System::B;
    } else {
      fail(source_name + ": line " + std::to_string(line_no) + ": system must be A or B, got '" +
           fields[2] + "'");
    }
    double score = parse_score(fields[3], source_name, line_no);
    std::string segment = n_cols > 4 ? trim(fields[4]) : "";
    std::string annotator = n_cols > 5 ? trim(fields[5]) : "";

    auto [it, inserted] = index_of.try_emplace(id, comparisons.size());
    if (inserted) {
      ComparisonData c;
      c.comparison_id = id;
      c.language_pair = lang;
      comparisons.push_back(std::move(c));
    }
    ComparisonData& c = comparisons[it->second];
    if (system == System::A) {
      c.scores_a.push_back(score);
      c.segments_a.push_back(segment);
      c.annotators_a.push_back(annotator);
    } else {
      c.scores_b.push_back(score);
      c.segments_b.push_back(segment);
      c.annotators_b.push_back(annotator);
    }
    ++rows;
  }

  if (rows == 0) fail(source_name + ": no judgment rows");
  return comparisons;
}

std::vector<ComparisonData> load_judgments_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path + ": cannot open for reading");
  return load_judgments(in, path);
}

void save_judgments(std::ostream& out, std::span<const ComparisonData> comparisons) {
  out << "comparison_id,language_pair,system,score,segment_id,annotator_id\n";
  for (const auto& c : comparisons) {
    for (std::size_t i = 0; i < c.scores_a.size(); ++i) {
      out << c.comparison_id << ',' << c.language_pair << ",A," << format_score(c.scores_a[i])
          << ',' << (i < c.segments_a.size() ? c.segments_a[i] : "") << ','
          << (i < c.annotators_a.size() ? c.annotators_a[i] : "") << '\n';
    }
    for (std::size_t i = 0; i < c.scores_b.size(); ++i) {
      out << c.comparison_id << ',' << c.language_pair << ",B," << format_score(c.scores_b[i])
          << ',' << (i < c.segments_b.size() ? c.segments_b[i] : "") << ','
          << (i < c.annotators_b.size() ? c.annotators_b[i] : "") << '\n';
    }
  }
}

void save_judgments_file(const std::string& path, std::span<const ComparisonData> comparisons) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(path + ": cannot open for writing");
  save_judgments(out, comparisons);
}

std::vector<std::string> validate_comparisons(std::span<const ComparisonData> comparisons) {
  std::vector<std::string> problems;
  for (const auto& c : comparisons) {
    if (c.scores_a.empty()) {
      problems.push_back("comparison " + c.comparison_id + ": no system A judgments");
    }
    if (c.scores_b.empty()) {
      problems.push_back("comparison " + c.comparison_id + ": no system B judgments");
    }
  }
  return problems;
}

}  // namespace pairtest
