#include "ilmlab/fusion/report.hpp"

#include <cstdio>
#include <sstream>

#include "ilmlab/util/error.hpp"

namespace ilmlab::fusion {

namespace {

std::string display_name(Method m) { return m == Method::kNone ? "None" : method_name(m); }

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(line);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

}  // namespace

std::string format_table(const std::vector<ResultRow>& rows) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof buf, "%-10s %8s %8s %12s %13s %9s\n", "method", "lambda1", "lambda2", "dev WER[%]",
                "test WER[%]", "ILM PPL");
  out += buf;
  out += std::string(65, '-') + "\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-10s %8s %8s %12s %13s %9s\n", display_name(r.method).c_str(),
                  fixed(r.lambda1, 2).c_str(), fixed(r.lambda2, 2).c_str(), fixed(100.0 * r.dev_wer, 2).c_str(),
                  fixed(100.0 * r.test_wer, 2).c_str(), r.prior_ppl ? fixed(*r.prior_ppl, 2).c_str() : "-");
    out += buf;
  }
  return out;
}

std::string format_table_kv(const std::vector<ResultRow>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += "method=" + method_name(r.method) + " lambda1=" + util::format_double(r.lambda1) +
           " lambda2=" + util::format_double(r.lambda2) + " dev_wer=" + util::format_double(r.dev_wer) +
           " test_wer=" + util::format_double(r.test_wer) +
           " ilm_ppl=" + (r.prior_ppl ? util::format_double(*r.prior_ppl) : std::string("-")) + "\n";
  }
  return out;
}

std::vector<ResultRow> parse_table_kv(const std::string& text) {
  std::vector<ResultRow> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    ResultRow r;
    for (const auto& field : split(line, ' ')) {
      const auto eq = field.find('=');
      if (eq == std::string::npos) throw FormatError("table field without '=': " + field, 0);
      const std::string key = field.substr(0, eq);
      const std::string value = field.substr(eq + 1);
      if (key == "method") r.method = parse_method(value);
      else if (key == "lambda1") r.lambda1 = util::parse_double(value, key);
      else if (key == "lambda2") r.lambda2 = util::parse_double(value, key);
      else if (key == "dev_wer") r.dev_wer = util::parse_double(value, key);
      else if (key == "test_wer") r.test_wer = util::parse_double(value, key);
      else if (key == "ilm_ppl") { if (value != "-") r.prior_ppl = util::parse_double(value, key); }
      else throw FormatError("unknown table field '" + key + "'", 0);
    }
    rows.push_back(r);
  }
  return rows;
}

std::string format_nbest(const std::vector<std::string>& ids, const std::vector<std::vector<Hypothesis>>& nbests,
                         const data::Vocabulary& vocab, const util::KeyValues& header) {
  if (ids.size() != nbests.size()) throw InputError("n-best output needs one id per utterance");
  std::string out = "#ilmlab-nbest v1";
  for (const auto& [k, v] : header.entries()) out += " " + k + "=" + v;
  out += "\n";
  for (std::size_t u = 0; u < ids.size(); ++u) {
    for (std::size_t r = 0; r < nbests[u].size(); ++r) {
      const Hypothesis& h = nbests[u][r];
      out += ids[u] + "\t" + std::to_string(r + 1) + "\t" + util::format_double(h.score) + "\t" +
             util::format_double(h.aed) + "\t" + util::format_double(h.lm) + "\t" + util::format_double(h.prior) +
             "\t" + vocab.render(h.labels) + "\n";
    }
  }
  return out;
}

std::vector<NbestEntry> parse_nbest(const std::string& text, const data::Vocabulary& vocab) {
  std::vector<NbestEntry> out;
  std::size_t offset = 0;
  bool header = true;
  while (offset < text.size()) {
    std::size_t end = text.find('\n', offset);
    if (end == std::string::npos) throw FormatError("n-best file does not end with a newline", offset);
    const std::string line = text.substr(offset, end - offset);
    if (header) {
      if (line.rfind("#ilmlab-nbest v1", 0) != 0) throw FormatError("missing n-best header", offset);
      header = false;
    } else {
      auto f = split(line, '\t');
      if (f.size() != 7) throw FormatError("n-best record needs 7 tab-separated fields", offset);
      NbestEntry e;
      e.utterance = f[0];
      e.rank = static_cast<std::size_t>(util::parse_int(f[1], "rank"));
      e.score = util::parse_double(f[2], "score");
      e.aed = util::parse_double(f[3], "aed");
      e.lm = util::parse_double(f[4], "lm");
      e.prior = util::parse_double(f[5], "prior");
      std::istringstream tokens(f[6]);
      std::string tok;
      while (tokens >> tok) e.labels.push_back(vocab.id(tok));
      out.push_back(std::move(e));
    }
    offset = end + 1;
  }
  if (header) throw FormatError("empty n-best file", 0);
  return out;
}

}  // namespace ilmlab::fusion
