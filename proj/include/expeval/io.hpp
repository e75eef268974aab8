#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "expeval/curve.hpp"
#include "expeval/judgments.hpp"
#include "expeval/ltr.hpp"
#include "expeval/policies.hpp"

namespace expeval::io {

/// TREC run file: whitespace-delimited lines of
///   query_id Q0 document_id rank score run_tag
/// Blank lines and lines starting with '#' are skipped. The rank column is
/// ignored for ordering; entries come out sorted by descending score with
/// ties broken by ascending document id. Duplicate (query, document) pairs,
/// malformed columns and non-finite scores raise ParseError with the line
/// number.
struct RunData {
  std::vector<ScoredRun> runs;  // first-appearance order
};
RunData parse_run(std::istream& in);

/// TREC qrels: lines of
///   query_id iteration document_id grade
/// The iteration column is ignored. Negative grades (TREC's -1 for unjudged)
/// clamp to 0 and are counted; duplicate (query, document) pairs are errors.
struct QrelsData {
  std::vector<RelevanceJudgments> queries;  // first-appearance order
  int clamped_grades = 0;
};
QrelsData parse_qrels(std::istream& in);

/// SVMlight-style feature file: lines of
///   grade qid:query_id index:value ... [# document_id]
/// Feature indices are 1-based and strictly ascending per line; missing
/// features default to 0. A trailing comment names the document, otherwise
/// documents are d0, d1, ... per query in line order.
struct FeatureData {
  ltr::LtrDataset dataset;
  int dropped_queries = 0;  // queries that ended up with no documents
  int clamped_grades = 0;
};
FeatureData parse_features(std::istream& in);

/// Group attribute file: lines of (query_id, document_id, group_id). A
/// document may appear on several lines with different groups.
using GroupRows =
    std::map<std::string, std::vector<std::pair<std::string, std::string>>>;
GroupRows parse_groups(std::istream& in);

/// Per-feature min-max scaling, fit on the training split and applied to all
/// splits. Constant features normalize to 0.
struct MinMaxScaler {
  Eigen::VectorXd min;
  Eigen::VectorXd range;
};
MinMaxScaler fit_minmax(const ltr::LtrDataset& train);
void apply_minmax(ltr::LtrDataset& dataset, const MinMaxScaler& scaler);

void write_run(std::ostream& out, std::span<const ScoredRun> runs);
void write_qrels(std::ostream& out, std::span<const RelevanceJudgments> queries);
void write_features(std::ostream& out, const ltr::LtrDataset& dataset);
void write_groups(std::ostream& out, const GroupRows& groups);

/// Result CSV schemas. Floats are rendered with 6 significant digits;
/// aggregate rows use the query id ALL.
///   points: query,policy,param,ee_l,ee_d,ee_r,d_norm,r_norm
///   auc:    query,policy,ee_auc
struct CurveRows {
  std::string query;
  std::string policy;
  SweepCurve curve;
};
void write_points_csv(std::ostream& out, std::span<const CurveRows> rows);

struct AucRow {
  std::string query;
  std::string policy;
  double ee_auc = 0.0;
};
void write_auc_csv(std::ostream& out, std::span<const AucRow> rows,
                   bool with_macro_average);

/// Companion file with the expected static metrics of the same samples:
/// query,policy,param,expected_rbp,expected_err,ee_r
void write_static_csv(std::ostream& out, std::span<const CurveRows> rows);

/// Group fairness breakdowns: query,policy,mode,ee_l,ee_d,ee_r,target_norm_sq
struct GroupLossRow {
  std::string query;
  std::string policy;
  std::string mode;
  EEBreakdown ee;
};
void write_group_csv(std::ostream& out, std::span<const GroupLossRow> rows);

/// "%.6g" with -0 normalized to 0.
std::string format_g6(double value);

}  // namespace expeval::io
