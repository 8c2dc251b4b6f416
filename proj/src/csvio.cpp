#include "qfgan/csvio.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qfgan/errors.hpp"

namespace qfgan {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double parse_double(const std::string& token, long row) {
  const char* begin = token.c_str();
  char* end = nullptr;
  double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0')
    raise(Errc::parse_error, "bad number '" + token + "'", row);
  return v;
}

std::string Provenance::header_block() const {
  std::string out;
  out += "# tool_version " + tool_version + "\n";
  out += "# config_hash " + config_hash + "\n";
  out += "# seed " + std::to_string(seed) + "\n";
  for (const auto& [k, v] : extra) out += "# " + k + " " + v + "\n";
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::missing_file, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) raise(Errc::io_error, "cannot write " + tmp.string());
    out << content;
    if (!out) raise(Errc::io_error, "short write to " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) raise(Errc::io_error, "cannot rename " + tmp.string() + " -> " + path.string());
}

void write_matrix_csv(const std::filesystem::path& path, const Matrix& m,
                      const Provenance& prov, const std::string& column_header) {
  std::string out = prov.header_block();
  if (!column_header.empty()) out += column_header + "\n";
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.cols; ++c) {
      if (c) out += ',';
      out += fmt_double(m.at(r, c));
    }
    out += '\n';
  }
  write_text_file(path, out);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

bool all_numeric(const std::vector<std::string>& toks) {
  for (const std::string& t : toks) {
    const char* b = t.c_str();
    char* e = nullptr;
    std::strtod(b, &e);
    if (e == b || *e != '\0') return false;
  }
  return true;
}

}  // namespace

Matrix read_matrix_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::missing_file, "cannot open " + path.string());
  Matrix m;
  std::string line;
  long row = 0;
  bool header_checked = false;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto toks = split_csv(line);
    if (!header_checked) {
      header_checked = true;
      if (!all_numeric(toks)) continue;  // column header row
    }
    ++row;
    std::vector<double> vals(toks.size());
    for (std::size_t i = 0; i < toks.size(); ++i) vals[i] = parse_double(toks[i], row);
    if (!rows.empty() && vals.size() != rows.front().size())
      raise(Errc::parse_error, "ragged csv row", row);
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) raise(Errc::empty_input, "no data rows in " + path.string());
  m.rows = rows.size();
  m.cols = rows.front().size();
  m.data.reserve(m.rows * m.cols);
  for (const auto& r : rows) m.data.insert(m.data.end(), r.begin(), r.end());
  return m;
}

void write_kv_file(const std::filesystem::path& path,
                   const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + "=" + v + "\n";
  write_text_file(path, out);
}

std::vector<std::pair<std::string, std::string>> read_kv_file(
    const std::filesystem::path& path) {
  std::string text = read_text_file(path);
  std::vector<std::pair<std::string, std::string>> kv;
  std::istringstream ss(text);
  std::string line;
  long row = 0;
  while (std::getline(ss, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    ++row;
    auto eq = line.find('=');
    if (eq == std::string::npos) raise(Errc::parse_error, "expected key=value", row);
    kv.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return kv;
}

std::string kv_lookup(const std::vector<std::pair<std::string, std::string>>& kv,
                      const std::string& key) {
  for (const auto& [k, v] : kv)
    if (k == key) return v;
  raise(Errc::parse_error, "missing key " + key);
}

}  // namespace qfgan
