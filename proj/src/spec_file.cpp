#include <charconv>
#include <fstream>
#include <sstream>

#include "finslervol/catalog.hpp"

namespace finslervol {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::string_view unquote(std::string_view s) {
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') return s.substr(1, s.size() - 2);
  return s;
}

}  // namespace

MetricSpec parse_spec_text(std::string_view text, std::string_view origin) {
  auto fail = [&](int line, const std::string& msg) -> Error {
    return Error(ErrorCode::SpecFormat, std::string(origin) + ":" + std::to_string(line) + ": " + msg);
  };
  std::string section;
  std::string name, lagrangian, admissible = "1";
  int dim = 0;
  bool have_dim = false, have_lagrangian = false;
  std::map<std::string, std::string> meta;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw fail(line_no, "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section != "metric" && section != "lagrangian" && section != "admissible" && section != "meta") {
        throw fail(line_no, "unknown section [" + section + "]");
      }
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) throw fail(line_no, "expected key = value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(unquote(trim(line.substr(eq + 1))));
    if (section.empty()) throw fail(line_no, "key outside of any section");
    if (section == "meta") {
      meta[key] = value;
    } else if (section == "metric") {
      if (key == "name") {
        name = value;
      } else if (key == "dim") {
        const auto [end, ec] = std::from_chars(value.data(), value.data() + value.size(), dim);
        if (ec != std::errc() || end != value.data() + value.size()) throw fail(line_no, "dim must be an integer");
        have_dim = true;
      } else {
        throw fail(line_no, "unknown key '" + key + "' in [metric]");
      }
    } else if (key != "expr") {
      throw fail(line_no, "unknown key '" + key + "' in [" + section + "]");
    } else if (section == "lagrangian") {
      lagrangian = value;
      have_lagrangian = true;
    } else {
      admissible = value;
    }
  }
  if (!have_dim) throw fail(line_no, "missing [metric] dim");
  if (!have_lagrangian) throw fail(line_no, "missing [lagrangian] expr");
  if (name.empty()) name = std::string(origin);
  MetricSpec spec = MetricSpec::from_source(name, dim, lagrangian, admissible);
  spec.metadata = std::move(meta);
  return spec;
}

MetricSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::SpecFormat, "cannot open metric file '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_spec_text(ss.str(), path.string());
}

MetricSpec resolve_metric(std::string_view name_or_path) {
  try {
    return builtin(name_or_path).spec;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::UnknownMetric) throw;
    if (!std::filesystem::exists(std::filesystem::path(name_or_path))) throw;
  }
  return load_spec(std::filesystem::path(name_or_path));
}

}  // namespace finslervol
