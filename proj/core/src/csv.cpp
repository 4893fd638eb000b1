#include "ntkm/csv.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "ntkm/errors.hpp"

namespace ntkm::bench {

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::string opt_field(const std::optional<double>& v) {
  return v.has_value() ? format_double(*v) : std::string();
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double_field(const std::string& s, long line_no) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw ntkm::ParseError("bad numeric field '" + s + "'", line_no);
  }
  return v;
}

}  // namespace

std::string to_csv_line(const LossRow& row) {
  std::string out;
  out += row.run_id;
  out += ',';
  out += row.task;
  out += ',';
  out += row.model_kind;
  out += ',';
  out += row.width;
  out += ',';
  out += std::to_string(row.seed);
  out += ',';
  out += std::to_string(row.step);
  out += ',';
  out += opt_field(row.train_loss);
  out += ',';
  out += opt_field(row.eval_loss);
  out += ',';
  out += opt_field(row.wall_ms);
  return out;
}

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw InvalidArgumentError("cannot open '" + tmp + "' for writing");
    f << content;
  }
  std::filesystem::rename(tmp, path);
}

void write_csv_atomic(const std::string& path, const std::vector<LossRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const LossRow& row : rows) {
    out += to_csv_line(row);
    out += '\n';
  }
  write_text_atomic(path, out);
}

std::vector<LossRow> read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidArgumentError("cannot open '" + path + "'");
  std::string line;
  long line_no = 0;
  std::vector<LossRow> rows;
  while (std::getline(f, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line_no == 1) {
      if (line != kCsvHeader) throw ParseError("unexpected CSV header", line_no);
      continue;
    }
    if (line.empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != 9) {
      throw ParseError("expected 9 fields, got " + std::to_string(fields.size()), line_no);
    }
    LossRow row;
    row.run_id = fields[0];
    row.task = fields[1];
    row.model_kind = fields[2];
    row.width = fields[3];
    row.seed = static_cast<std::uint64_t>(parse_double_field(fields[4], line_no));
    row.step = static_cast<long>(parse_double_field(fields[5], line_no));
    if (!fields[6].empty()) row.train_loss = parse_double_field(fields[6], line_no);
    if (!fields[7].empty()) row.eval_loss = parse_double_field(fields[7], line_no);
    if (!fields[8].empty()) row.wall_ms = parse_double_field(fields[8], line_no);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace ntkm::bench
