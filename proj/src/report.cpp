#include "procomplete/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "procomplete/error.hpp"

namespace procomplete {

ReportFormat parse_report_format(std::string_view text) {
  if (text == "csv") return ReportFormat::Csv;
  if (text == "markdown" || text == "md") return ReportFormat::Markdown;
  throw Error(ErrorCode::InvalidArgument,
              "unknown report format '" + std::string(text) + "'");
}

std::string format_double(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

namespace {

std::string fixed2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> fields(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        fields.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        fields.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.emplace_back();
    } else {
      fields.back() += c;
    }
  }
  return fields;
}

std::string emit_csv(const EvalReport& report) {
  std::string out = "dataset,algorithm,configuration,metric,mean,std,samples\n";
  for (const auto& cell : report.cells) {
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      const auto& st = cell.metrics[m];
      out += csv_field(cell.dataset);
      out += ',';
      out += to_string(cell.algorithm);
      out += ',';
      out += to_string(cell.configuration);
      out += ',';
      out += kMetricNames[m];
      out += ',';
      out += format_double(st.mean);
      out += ',';
      out += format_double(st.std);
      out += ',';
      out += std::to_string(st.samples);
      out += '\n';
    }
  }
  return out;
}

std::string emit_markdown(const EvalReport& report) {
  // Columns: (dataset, algorithm) in first-seen order.
  std::vector<std::pair<std::string, Algorithm>> columns;
  std::vector<Configuration> configs;
  for (const auto& c : report.cells) {
    std::pair<std::string, Algorithm> col{c.dataset, c.algorithm};
    if (std::find(columns.begin(), columns.end(), col) == columns.end())
      columns.push_back(col);
    if (std::find(configs.begin(), configs.end(), c.configuration) == configs.end())
      configs.push_back(c.configuration);
  }
  auto find_cell = [&](const auto& col, Configuration conf) -> const ReportCell* {
    for (const auto& c : report.cells)
      if (c.dataset == col.first && c.algorithm == col.second &&
          c.configuration == conf)
        return &c;
    return nullptr;
  };

  std::string out = "| Configuration | Metric |";
  for (const auto& [dataset, algo] : columns) {
    out += ' ';
    out += dataset;
    out += ' ';
    out += algo == Algorithm::Slicing ? "Slicing" : "Random";
    out += " |";
  }
  out += "\n|---|---|";
  for (std::size_t i = 0; i < columns.size(); ++i) out += "---|";
  out += '\n';
  for (auto conf : configs) {
    for (std::size_t m = 0; m < kMetricCount; ++m) {
      out += "| ";
      out += to_string(conf);
      out += " | ";
      out += kMetricNames[m];
      out += " |";
      for (const auto& col : columns) {
        const ReportCell* cell = find_cell(col, conf);
        out += ' ';
        if (cell == nullptr || cell->empty()) {
          out += "n/a";
        } else {
          out += fixed2(cell->metrics[m].mean);
          out += "±";
          out += fixed2(cell->metrics[m].std);
        }
        out += " |";
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace

std::string emit_report(const EvalReport& report, ReportFormat format) {
  return format == ReportFormat::Csv ? emit_csv(report) : emit_markdown(report);
}

std::vector<ReportRow> parse_report_csv(std::string_view csv) {
  std::vector<ReportRow> rows;
  std::size_t pos = 0;
  bool header = true;
  while (pos < csv.size()) {
    auto nl = csv.find('\n', pos);
    if (nl == std::string_view::npos) nl = csv.size();
    const auto line = csv.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.empty()) continue;
    if (header) {
      header = false;
      continue;
    }
    const auto f = split_csv_line(line);
    if (f.size() != 7)
      throw Error(ErrorCode::InvalidArgument,
                  "report row with " + std::to_string(f.size()) + " fields");
    ReportRow r{f[0], f[1], f[2], f[3]};
    auto parse = [&](const std::string& s, auto& value) {
      auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
      if (ec != std::errc() || ptr != s.data() + s.size())
        throw Error(ErrorCode::InvalidArgument, "bad number '" + s + "'");
    };
    parse(f[4], r.mean);
    parse(f[5], r.std);
    parse(f[6], r.samples);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::string emit_ratio_csv(const EvalReport& report) {
  std::string out =
      "dataset,configuration,metric,slicing_mean,random_mean,ratio\n";
  for (const auto& s : report.cells) {
    if (s.algorithm != Algorithm::Slicing) continue;
    for (const auto& r : report.cells) {
      if (r.algorithm != Algorithm::Random || r.dataset != s.dataset ||
          r.configuration != s.configuration)
        continue;
      for (std::size_t m = 0; m < kMetricCount; ++m) {
        const double a = s.metrics[m].mean, b = r.metrics[m].mean;
        out += csv_field(s.dataset);
        out += ',';
        out += to_string(s.configuration);
        out += ',';
        out += kMetricNames[m];
        out += ',';
        out += format_double(a);
        out += ',';
        out += format_double(b);
        out += ',';
        out += b == 0.0 ? std::string("inf") : format_double(a / b);
        out += '\n';
      }
    }
  }
  return out;
}

std::string emit_study(std::span<const StudyRow> rows, ReportFormat format) {
  std::string out;
  if (format == ReportFormat::Csv) {
    out = "slice_length";
    for (auto name : kMetricNames) {
      out += ',';
      out += name;
    }
    out += ",samples,empty\n";
    for (const auto& row : rows) {
      out += std::to_string(row.slice_length);
      for (const auto& st : row.cell.metrics) {
        out += ',';
        out += format_double(st.mean);
      }
      out += ',';
      out += std::to_string(row.cell.metrics[0].samples);
      out += row.cell.empty() ? ",true\n" : ",false\n";
    }
    return out;
  }
  out = "| n |";
  for (auto name : kMetricNames) {
    out += ' ';
    out += name;
    out += " |";
  }
  out += " samples |\n|---|";
  for (std::size_t i = 0; i <= kMetricCount; ++i) out += "---|";
  out += '\n';
  for (const auto& row : rows) {
    out += "| " + std::to_string(row.slice_length) + " |";
    for (const auto& st : row.cell.metrics) {
      out += ' ';
      out += row.cell.empty() ? "n/a" : fixed2(st.mean) + "±" + fixed2(st.std);
      out += " |";
    }
    out += ' ' + std::to_string(row.cell.metrics[0].samples) + " |\n";
  }
  return out;
}

}  // namespace procomplete
