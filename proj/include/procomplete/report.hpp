#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "procomplete/evaluation.hpp"

namespace procomplete {

enum class ReportFormat { Csv, Markdown };

ReportFormat parse_report_format(std::string_view text);

/// CSV: header `dataset,algorithm,configuration,metric,mean,std,samples`, one
/// row per cell and metric, numbers in shortest round-trip form.
/// Markdown: metrics down the side, dataset/algorithm across, "mean±std".
std::string emit_report(const EvalReport& report, ReportFormat format);

struct ReportRow {
  std::string dataset;
  std::string algorithm;
  std::string configuration;
  std::string metric;
  double mean = 0.0;
  double std = 0.0;
  std::size_t samples = 0;
};

/// Reads back emit_report CSV. Throws Error(InvalidArgument) on bad input.
std::vector<ReportRow> parse_report_csv(std::string_view csv);

/// Slicing-to-random ratio per dataset, configuration and metric:
/// `dataset,configuration,metric,slicing_mean,random_mean,ratio`.
std::string emit_ratio_csv(const EvalReport& report);

/// One row per slice length:
/// `slice_length,precision@k,recall@k,bleu,meteor,cosine,samples,empty`.
std::string emit_study(std::span<const StudyRow> rows, ReportFormat format);

/// Shortest decimal that parses back to the same double.
std::string format_double(double v);

}  // namespace procomplete
