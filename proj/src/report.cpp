#include "quantsched/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>

namespace quantsched {

namespace {

std::string percent(double gap) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f%%", 100.0 * gap);
  return buf;
}

std::string fixed(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", value);
  return buf;
}

// Renders a header plus rows as aligned text, a markdown table or CSV.
std::string render_grid(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows, TableFormat format) {
  std::string out;
  if (format == TableFormat::kCsv) {
    auto line = [&](const std::vector<std::string>& cells) {
      for (size_t c = 0; c < cells.size(); ++c) out += (c ? "," : "") + cells[c];
      out += '\n';
    };
    line(header);
    for (const auto& row : rows) line(row);
    return out;
  }
  std::vector<size_t> width(header.size(), 0);
  for (size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
  for (const auto& row : rows) {
    for (size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string text;
    for (size_t c = 0; c < cells.size(); ++c) {
      const std::string pad(width[c] - cells[c].size(), ' ');
      if (format == TableFormat::kMarkdown) {
        text += "| " + cells[c] + pad + " ";
      } else {
        // First column left-aligned, numbers right-aligned.
        text += (c ? "  " : "") + (c ? pad + cells[c] : cells[c] + pad);
      }
    }
    if (format == TableFormat::kMarkdown) text += "|";
    while (!text.empty() && text.back() == ' ') text.pop_back();
    out += text + '\n';
  };
  line(header);
  if (format == TableFormat::kMarkdown) {
    std::vector<std::string> rule;
    for (size_t c = 0; c < header.size(); ++c) {
      rule.push_back(c ? std::string(width[c] - 1, '-') + ":" : std::string(width[c], '-'));
    }
    line(rule);
  }
  for (const auto& row : rows) line(row);
  return out;
}

}  // namespace

std::optional<TableFormat> parse_format(std::string_view name) {
  if (name == "text") return TableFormat::kText;
  if (name == "csv") return TableFormat::kCsv;
  if (name == "markdown") return TableFormat::kMarkdown;
  return std::nullopt;
}

std::string format_number(double value) {
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, end);
}

BenchCell make_cell(std::string instance, const MethodResult& result) {
  BenchCell cell;
  cell.instance = std::move(instance);
  cell.method = result.method;
  if (result.has_schedule()) {
    cell.gap = result.gap;
    cell.objective = result.objective;
  }
  cell.seconds = result.seconds;
  return cell;
}

std::string render_bench(const std::vector<BenchCell>& cells, TableFormat format) {
  std::vector<std::string> instances;
  std::vector<Method> methods;
  std::map<std::pair<std::string, Method>, const BenchCell*> lookup;
  for (const auto& cell : cells) {
    if (std::find(instances.begin(), instances.end(), cell.instance) == instances.end()) {
      instances.push_back(cell.instance);
    }
    if (std::find(methods.begin(), methods.end(), cell.method) == methods.end()) {
      methods.push_back(cell.method);
    }
    lookup[{cell.instance, cell.method}] = &cell;
  }

  std::vector<std::string> header{"instance"};
  for (Method m : methods) header.emplace_back(method_name(m));
  std::vector<std::vector<std::string>> rows;
  for (const auto& name : instances) {
    std::vector<std::string> row{name};
    std::optional<double> best;
    for (Method m : methods) {
      auto it = lookup.find({name, m});
      if (it != lookup.end() && it->second->gap) best = std::min(best.value_or(kInfinity), *it->second->gap);
    }
    for (Method m : methods) {
      auto it = lookup.find({name, m});
      if (it == lookup.end() || !it->second->gap) {
        row.emplace_back("-");
        continue;
      }
      const double gap = *it->second->gap;
      if (format == TableFormat::kCsv) {
        row.push_back(format_number(gap));
      } else if (format == TableFormat::kMarkdown && percent(gap) == percent(*best)) {
        row.push_back("**" + percent(gap) + "**");
      } else {
        row.push_back(percent(gap));
      }
    }
    rows.push_back(std::move(row));
  }
  return render_grid(header, rows, format);
}

std::string render_breakdown(const ObjectiveBreakdown& breakdown, TableFormat format) {
  const auto number = [&](double v) { return format == TableFormat::kCsv ? format_number(v) : fixed(v); };
  std::vector<std::vector<std::string>> rows;
  for (size_t t = 0; t < breakdown.quantile.size(); ++t) {
    rows.push_back({std::to_string(t + 1), number(breakdown.mean_risk[t]), number(breakdown.quantile[t]),
                    number(breakdown.excess[t])});
  }
  const std::string table = render_grid({"t", "mean_risk", "quantile", "excess"}, rows, format);
  if (format == TableFormat::kCsv) return table;
  std::string out;
  out += "obj1 " + number(breakdown.obj1) + "\n";
  out += "obj2 " + number(breakdown.obj2) + "\n";
  out += "blended " + number(breakdown.blended) + "\n\n";
  return out + table;
}

}  // namespace quantsched
