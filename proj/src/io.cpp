#include "expeval/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace expeval::io {

namespace {

std::vector<std::string> split_ws(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream iss(line);
  std::string token;
  while (iss >> token) out.push_back(std::move(token));
  return out;
}

bool skippable(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r\n");
  return pos == std::string::npos || line[pos] == '#';
}

[[noreturn]] void fail(std::size_t line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

double parse_double(const std::string& token, std::size_t line_no,
                    const char* what) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    fail(line_no, std::string("cannot parse ") + what + " '" + token + "'");
  }
  if (!std::isfinite(value)) {
    fail(line_no, std::string(what) + " '" + token + "' is not finite");
  }
  return value;
}

long parse_int(const std::string& token, std::size_t line_no, const char* what) {
  long value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    fail(line_no, std::string("cannot parse ") + what + " '" + token + "'");
  }
  return value;
}

}  // namespace

RunData parse_run(std::istream& in) {
  struct PendingRun {
    std::vector<std::pair<std::string, double>> entries;
    std::unordered_set<std::string> seen;
    std::string tag;
  };
  std::vector<std::string> query_order;
  std::unordered_map<std::string, PendingRun> pending;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto tokens = split_ws(line);
    if (tokens.size() != 6) {
      fail(line_no, "expected 6 columns, got " + std::to_string(tokens.size()));
    }
    const std::string& query = tokens[0];
    const std::string& doc = tokens[2];
    const double score = parse_double(tokens[4], line_no, "score");
    auto [it, inserted] = pending.try_emplace(query);
    if (inserted) {
      query_order.push_back(query);
      it->second.tag = tokens[5];
    }
    if (!it->second.seen.insert(doc).second) {
      fail(line_no, "duplicate document '" + doc + "' for query '" + query + "'");
    }
    it->second.entries.emplace_back(doc, score);
  }
  RunData data;
  data.runs.reserve(query_order.size());
  for (const std::string& query : query_order) {
    PendingRun& p = pending[query];
    std::sort(p.entries.begin(), p.entries.end(),
              [](const auto& a, const auto& b) {
                if (a.second != b.second) return a.second > b.second;
                return a.first < b.first;
              });
    data.runs.push_back({query, std::move(p.entries), std::move(p.tag)});
  }
  return data;
}

QrelsData parse_qrels(std::istream& in) {
  struct PendingQrels {
    std::vector<std::pair<std::string, int>> docs;
    std::unordered_set<std::string> seen;
  };
  std::vector<std::string> query_order;
  std::unordered_map<std::string, PendingQrels> pending;
  QrelsData data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto tokens = split_ws(line);
    if (tokens.size() != 4) {
      fail(line_no, "expected 4 columns, got " + std::to_string(tokens.size()));
    }
    const std::string& query = tokens[0];
    const std::string& doc = tokens[2];
    long grade = parse_int(tokens[3], line_no, "grade");
    if (grade < 0) {
      grade = 0;  // TREC convention: -1 marks unjudged
      ++data.clamped_grades;
    }
    auto [it, inserted] = pending.try_emplace(query);
    if (inserted) query_order.push_back(query);
    if (!it->second.seen.insert(doc).second) {
      fail(line_no, "duplicate judgment for document '" + doc + "' in query '" +
                        query + "'");
    }
    it->second.docs.emplace_back(doc, static_cast<int>(grade));
  }
  data.queries.reserve(query_order.size());
  for (const std::string& query : query_order) {
    data.queries.emplace_back(query, std::move(pending[query].docs));
  }
  return data;
}

FeatureData parse_features(std::istream& in) {
  struct Row {
    int grade;
    std::vector<std::pair<int, double>> features;
    std::string doc_id;
  };
  std::vector<std::string> query_order;
  std::unordered_map<std::string, std::vector<Row>> pending;
  FeatureData data;
  int max_index = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    std::string doc_id;
    const auto hash_pos = line.find('#');
    if (hash_pos != std::string::npos) {
      const auto comment = split_ws(line.substr(hash_pos + 1));
      if (!comment.empty()) doc_id = comment[0];
      line.resize(hash_pos);
    }
    const auto tokens = split_ws(line);
    if (tokens.size() < 2) {
      fail(line_no, "expected 'grade qid:<id> index:value ...'");
    }
    Row row;
    long grade = parse_int(tokens[0], line_no, "grade");
    if (grade < 0) {
      grade = 0;
      ++data.clamped_grades;
    }
    row.grade = static_cast<int>(grade);
    if (tokens[1].rfind("qid:", 0) != 0 || tokens[1].size() <= 4) {
      fail(line_no, "second column must be qid:<id>, got '" + tokens[1] + "'");
    }
    const std::string query = tokens[1].substr(4);
    int prev_index = 0;
    for (std::size_t t = 2; t < tokens.size(); ++t) {
      const auto colon = tokens[t].find(':');
      if (colon == std::string::npos || colon == 0 ||
          colon + 1 == tokens[t].size()) {
        fail(line_no, "malformed feature pair '" + tokens[t] + "'");
      }
      const long index =
          parse_int(tokens[t].substr(0, colon), line_no, "feature index");
      if (index < 1) fail(line_no, "feature indices are 1-based");
      if (index <= prev_index) {
        fail(line_no, "feature indices must be strictly ascending");
      }
      const double value =
          parse_double(tokens[t].substr(colon + 1), line_no, "feature value");
      row.features.emplace_back(static_cast<int>(index), value);
      prev_index = static_cast<int>(index);
      max_index = std::max(max_index, static_cast<int>(index));
    }
    row.doc_id = std::move(doc_id);
    auto [it, inserted] = pending.try_emplace(query);
    if (inserted) query_order.push_back(query);
    it->second.push_back(std::move(row));
  }
  data.dataset.n_features = max_index;
  for (const std::string& query : query_order) {
    auto& rows = pending[query];
    if (rows.empty()) {
      ++data.dropped_queries;
      continue;
    }
    ltr::LtrQuery q;
    q.query_id = query;
    const auto n = static_cast<Eigen::Index>(rows.size());
    q.features = Eigen::MatrixXd::Zero(n, max_index);
    q.grades.resize(n);
    q.doc_ids.reserve(rows.size());
    for (Eigen::Index i = 0; i < n; ++i) {
      Row& row = rows[static_cast<std::size_t>(i)];
      q.grades[i] = row.grade;
      for (const auto& [index, value] : row.features) {
        q.features(i, index - 1) = value;
      }
      q.doc_ids.push_back(row.doc_id.empty() ? "d" + std::to_string(i)
                                             : std::move(row.doc_id));
    }
    data.dataset.queries.push_back(std::move(q));
  }
  return data;
}

GroupRows parse_groups(std::istream& in) {
  GroupRows rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skippable(line)) continue;
    const auto tokens = split_ws(line);
    if (tokens.size() != 3) {
      fail(line_no, "expected 3 columns, got " + std::to_string(tokens.size()));
    }
    rows[tokens[0]].emplace_back(tokens[1], tokens[2]);
  }
  return rows;
}

MinMaxScaler fit_minmax(const ltr::LtrDataset& train) {
  if (train.n_features < 1) {
    throw ConfigurationError("cannot fit a scaler without features");
  }
  MinMaxScaler scaler;
  scaler.min = Eigen::VectorXd::Constant(
      train.n_features, std::numeric_limits<double>::infinity());
  Eigen::VectorXd max = Eigen::VectorXd::Constant(
      train.n_features, -std::numeric_limits<double>::infinity());
  bool any = false;
  for (const ltr::LtrQuery& q : train.queries) {
    if (q.features.rows() == 0) continue;
    any = true;
    scaler.min =
        scaler.min.cwiseMin(q.features.colwise().minCoeff().transpose());
    max = max.cwiseMax(q.features.colwise().maxCoeff().transpose());
  }
  if (!any) throw ConfigurationError("cannot fit a scaler on an empty split");
  scaler.range = max - scaler.min;
  return scaler;
}

void apply_minmax(ltr::LtrDataset& dataset, const MinMaxScaler& scaler) {
  if (scaler.min.size() != dataset.n_features) {
    throw DimensionError("scaler was fit for " + std::to_string(scaler.min.size()) +
                         " features, dataset has " +
                         std::to_string(dataset.n_features));
  }
  for (ltr::LtrQuery& q : dataset.queries) {
    if (q.features.rows() == 0) continue;
    Eigen::ArrayXXd x = q.features.array();
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
      const double inv =
          scaler.range[c] > 0.0 ? 1.0 / scaler.range[c] : 0.0;
      x.col(c) = (x.col(c) - scaler.min[c]) * inv;
    }
    q.features = x.matrix();
  }
}

void write_run(std::ostream& out, std::span<const ScoredRun> runs) {
  for (const ScoredRun& run : runs) {
    int rank = 0;
    for (const auto& [doc, score] : run.entries) {
      out << run.query_id << " Q0 " << doc << " " << rank++ << " "
          << format_g6(score) << " "
          << (run.run_tag.empty() ? "expeval" : run.run_tag) << "\n";
    }
  }
}

void write_qrels(std::ostream& out,
                 std::span<const RelevanceJudgments> queries) {
  for (const RelevanceJudgments& j : queries) {
    for (int i = 0; i < j.size(); ++i) {
      out << j.query_id() << " 0 " << j.pool()[i] << " " << j.grade(i) << "\n";
    }
  }
}

void write_features(std::ostream& out, const ltr::LtrDataset& dataset) {
  for (const ltr::LtrQuery& q : dataset.queries) {
    for (Eigen::Index i = 0; i < q.features.rows(); ++i) {
      out << q.grades[i] << " qid:" << q.query_id;
      for (Eigen::Index c = 0; c < q.features.cols(); ++c) {
        out << " " << (c + 1) << ":" << format_g6(q.features(i, c));
      }
      if (!q.doc_ids.empty()) {
        out << " # " << q.doc_ids[static_cast<std::size_t>(i)];
      }
      out << "\n";
    }
  }
}

void write_groups(std::ostream& out, const GroupRows& groups) {
  for (const auto& [query, rows] : groups) {
    for (const auto& [doc, group] : rows) {
      out << query << " " << doc << " " << group << "\n";
    }
  }
}

void write_points_csv(std::ostream& out, std::span<const CurveRows> rows) {
  out << "query,policy,param,ee_l,ee_d,ee_r,d_norm,r_norm\n";
  for (const CurveRows& row : rows) {
    for (const CurvePoint& p : row.curve.points) {
      out << row.query << "," << row.policy << "," << format_g6(p.param) << ","
          << format_g6(p.ee.ee_l) << "," << format_g6(p.ee.ee_d) << ","
          << format_g6(p.ee.ee_r) << "," << format_g6(p.d_norm) << ","
          << format_g6(p.r_norm) << "\n";
    }
  }
}

void write_auc_csv(std::ostream& out, std::span<const AucRow> rows,
                   bool with_macro_average) {
  out << "query,policy,ee_auc\n";
  for (const AucRow& row : rows) {
    out << row.query << "," << row.policy << "," << format_g6(row.ee_auc)
        << "\n";
  }
  if (!with_macro_average) return;
  std::vector<std::string> policy_order;
  std::unordered_map<std::string, std::pair<double, int>> sums;
  for (const AucRow& row : rows) {
    auto [it, inserted] = sums.try_emplace(row.policy, 0.0, 0);
    if (inserted) policy_order.push_back(row.policy);
    it->second.first += row.ee_auc;
    it->second.second += 1;
  }
  for (const std::string& policy : policy_order) {
    const auto& [sum, count] = sums[policy];
    out << "ALL," << policy << "," << format_g6(sum / count) << "\n";
  }
}

void write_static_csv(std::ostream& out, std::span<const CurveRows> rows) {
  out << "query,policy,param,expected_rbp,expected_err,ee_r\n";
  for (const CurveRows& row : rows) {
    for (const CurvePoint& p : row.curve.points) {
      out << row.query << "," << row.policy << "," << format_g6(p.param) << ","
          << format_g6(p.expected_rbp) << "," << format_g6(p.expected_err)
          << "," << format_g6(p.ee.ee_r) << "\n";
    }
  }
}

void write_group_csv(std::ostream& out, std::span<const GroupLossRow> rows) {
  out << "query,policy,mode,ee_l,ee_d,ee_r,target_norm_sq\n";
  for (const GroupLossRow& row : rows) {
    out << row.query << "," << row.policy << "," << row.mode << ","
        << format_g6(row.ee.ee_l) << "," << format_g6(row.ee.ee_d) << ","
        << format_g6(row.ee.ee_r) << "," << format_g6(row.ee.target_norm_sq)
        << "\n";
  }
}

std::string format_g6(double value) {
  if (value == 0.0) value = 0.0;  // normalize -0
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

}  // namespace expeval::io
