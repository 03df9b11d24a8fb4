#include <fstream>
#include <regex>
#include <sstream>

#include "swapjudge/errors.hpp"
#include "swapjudge/judge.hpp"

namespace swapjudge {

namespace {

constexpr std::string_view kContext = "{context}";
constexpr std::string_view kCandidate1 = "{candidate_1}";
constexpr std::string_view kCandidate2 = "{candidate_2}";

std::size_t occurrences(std::string_view text, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string_view::npos;
       pos = text.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

// The default wording is replaceable via --template / "template_path".
constexpr std::string_view kDefaultTemplate =
    "You are comparing two candidate responses for the following input.\n"
    "\n"
    "Input:\n"
    "{context}\n"
    "\n"
    "Candidate 1:\n"
    "{candidate_1}\n"
    "\n"
    "Candidate 2:\n"
    "{candidate_2}\n"
    "\n"
    "Which candidate is better? Reply on a single line in exactly this format:\n"
    "Answer: <1 or 2>, Confidence: <integer from 0 to 100>\n";

}  // namespace

PromptTemplate::PromptTemplate(std::string text) : text_(std::move(text)) {
  for (auto placeholder : {kCandidate1, kCandidate2}) {
    const std::size_t n = occurrences(text_, placeholder);
    if (n != 1) {
      throw ConfigError("prompt template must contain " + std::string(placeholder) +
                        " exactly once (found " + std::to_string(n) + ")");
    }
  }
}

PromptTemplate PromptTemplate::default_template() { return PromptTemplate(std::string(kDefaultTemplate)); }

PromptTemplate PromptTemplate::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open prompt template '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return PromptTemplate(ss.str());
}

std::string render_prompt(const PromptTemplate& tmpl, const JudgmentInstance& instance,
                          Ordering ordering) {
  const std::string& first = ordering == Ordering::AB ? instance.candidate_a : instance.candidate_b;
  const std::string& second = ordering == Ordering::AB ? instance.candidate_b : instance.candidate_a;

  // Single left-to-right pass: substituted text is never rescanned.
  const std::string_view text = tmpl.text();
  std::string out;
  out.reserve(text.size() + instance.context.size() + first.size() + second.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const std::string_view rest = text.substr(i);
    if (rest.starts_with(kContext)) {
      out += instance.context;
      i += kContext.size();
    } else if (rest.starts_with(kCandidate1)) {
      out += first;
      i += kCandidate1.size();
    } else if (rest.starts_with(kCandidate2)) {
      out += second;
      i += kCandidate2.size();
    } else {
      out += text[i++];
    }
  }
  return out;
}

ParsedResponse parse_response(std::string_view raw, Ordering ordering) {
  static const std::regex answer_re(R"(answer\s*[:=\-]?\s*[\(\[]?\s*(?:candidate\s*)?([12])(?![0-9.]))",
                                    std::regex::icase);
  static const std::regex confidence_re(R"(confidence\s*(?:level\s*)?[:=\-]?\s*([0-9]+(?:\.[0-9]+)?)\s*(%)?)",
                                        std::regex::icase);
  static const std::regex bare_index_re(R"((?:^|[^0-9.])([12])(?![0-9]|\.[0-9]))");

  const std::string text(raw);
  ParsedResponse out;

  std::string without_confidence = text;
  std::smatch m;
  if (std::regex_search(text, m, confidence_re)) {
    double value = std::stod(m[1].str());
    const bool percent = m[2].matched;
    if (percent || value > 1.0) value /= 100.0;
    if (value >= 0.0 && value <= 1.0) out.confidence = value;
    without_confidence.erase(static_cast<std::size_t>(m.position(0)),
                             static_cast<std::size_t>(m.length(0)));
  }

  int position = 0;
  if (std::regex_search(text, m, answer_re)) {
    position = m[1].str() == "1" ? 1 : 2;
  } else if (std::regex_search(without_confidence, m, bare_index_re)) {
    position = m[1].str() == "1" ? 1 : 2;
  }

  if (position == 0) {
    out.confidence.reset();
    return out;
  }
  out.verdict = to_verdict(candidate_at(ordering, position));
  return out;
}

}  // namespace swapjudge
