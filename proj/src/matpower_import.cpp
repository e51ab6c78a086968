#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <string>

#include "dscopf/case_model.hpp"

namespace dscopf {

namespace {

// MATPOWER uses rateA = 0 for "unlimited".
constexpr double kUnlimitedMw = 9900.0;

using Matrix = std::vector<std::vector<double>>;

std::string strip_comments(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_comment = false;
  for (char ch : text) {
    if (ch == '%') in_comment = true;
    if (ch == '\n') in_comment = false;
    if (!in_comment) out.push_back(ch);
  }
  return out;
}

std::optional<Matrix> read_matrix(const std::string& text, const std::string& name) {
  const std::string key = "mpc." + name;
  std::size_t pos = 0;
  while ((pos = text.find(key, pos)) != std::string::npos) {
    std::size_t after = pos + key.size();
    std::size_t j = after;
    while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j < text.size() && text[j] == '=') break;
    pos = after;
  }
  if (pos == std::string::npos) return std::nullopt;
  const std::size_t open = text.find('[', pos);
  const std::size_t close = text.find(']', open);
  if (open == std::string::npos || close == std::string::npos)
    throw CaseError("matpower import: unterminated matrix " + key);

  Matrix rows(1);
  const char* p = text.data() + open + 1;
  const char* end = text.data() + close;
  while (p < end) {
    if (*p == ';' || *p == '\n') {
      if (!rows.back().empty()) rows.emplace_back();
      ++p;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(*p)) || *p == ',') {
      ++p;
      continue;
    }
    double v = 0.0;
    auto [next, ec] = std::from_chars(p, end, v);
    if (ec != std::errc()) throw CaseError("matpower import: bad number in " + key);
    rows.back().push_back(v);
    p = next;
  }
  if (rows.back().empty()) rows.pop_back();
  return rows;
}

double read_scalar(const std::string& text, const std::string& name) {
  const std::string key = "mpc." + name;
  const std::size_t pos = text.find(key);
  if (pos == std::string::npos) throw CaseError("matpower import: missing " + key);
  const std::size_t eq = text.find('=', pos);
  std::size_t j = eq + 1;
  while (j < text.size() && std::isspace(static_cast<unsigned char>(text[j]))) ++j;
  double v = 0.0;
  auto [next, ec] = std::from_chars(text.data() + j, text.data() + text.size(), v);
  if (ec != std::errc()) throw CaseError("matpower import: bad value for " + key);
  return v;
}

void require_columns(const Matrix& m, std::size_t cols, const std::string& name) {
  for (std::size_t r = 0; r < m.size(); ++r)
    if (m[r].size() < cols)
      throw CaseError("matpower import: mpc." + name + " row " + std::to_string(r + 1) + " has " +
                      std::to_string(m[r].size()) + " columns, need " + std::to_string(cols));
}

}  // namespace

Case import_matpower(std::string_view raw) {
  const std::string text = strip_comments(raw);
  Case c;
  c.base_mva = read_scalar(text, "baseMVA");
  if (!(c.base_mva > 0.0)) throw CaseError("matpower import: baseMVA must be > 0");
  const double base = c.base_mva;

  auto bus = read_matrix(text, "bus");
  auto gen = read_matrix(text, "gen");
  auto branch = read_matrix(text, "branch");
  if (!bus || !gen || !branch) throw CaseError("matpower import: need mpc.bus, mpc.gen and mpc.branch");
  require_columns(*bus, 3, "bus");
  require_columns(*gen, 10, "gen");
  require_columns(*branch, 11, "branch");
  auto gencost = read_matrix(text, "gencost");

  for (const auto& row : *bus) c.buses.push_back({static_cast<BusId>(row[0]), row[2] / base});

  for (std::size_t r = 0; r < gen->size(); ++r) {
    const auto& row = (*gen)[r];
    if (row[7] <= 0.0) continue;
    Generator g;
    g.id = "G" + std::to_string(r + 1);
    g.bus = static_cast<BusId>(row[0]);
    g.p_max = row[8] / base;
    g.p_min = row[9] / base;
    if (gencost && r < gencost->size()) {
      const auto& cost = (*gencost)[r];
      if (cost.size() < 4 || cost[0] != 2.0)
        throw CaseError("matpower import: gencost row " + std::to_string(r + 1) +
                        " is not a polynomial cost");
      const auto n = static_cast<std::size_t>(cost[3]);
      if (n > 3 || cost.size() < 4 + n)
        throw CaseError("matpower import: gencost row " + std::to_string(r + 1) +
                        " must be at most quadratic");
      // Coefficients are listed highest order first.
      double coeff[3] = {0.0, 0.0, 0.0};  // c2, c1, c0
      for (std::size_t i = 0; i < n; ++i) coeff[3 - n + i] = cost[4 + i];
      g.a = coeff[0] * base * base;
      g.b = coeff[1] * base;
      g.c = coeff[2];
    }
    c.generators.push_back(std::move(g));
  }

  std::map<std::string, int> seen;
  for (const auto& row : *branch) {
    if (row[10] <= 0.0) continue;
    Branch br;
    br.from = static_cast<BusId>(row[0]);
    br.to = static_cast<BusId>(row[1]);
    std::string id = "br" + std::to_string(br.from) + "-" + std::to_string(br.to);
    const int dup = ++seen[id];
    if (dup > 1) id += "#" + std::to_string(dup);
    br.id = std::move(id);
    br.reactance = row[3];
    const double rate = row[5] > 0.0 ? row[5] : kUnlimitedMw;
    br.capacity = rate / base;
    c.branches.push_back(std::move(br));
  }

  auto violations = validate_case(c);
  if (!violations.empty()) throw CaseError(std::move(violations));
  return c;
}

}  // namespace dscopf
