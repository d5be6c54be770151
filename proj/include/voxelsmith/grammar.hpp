#pragma once

// Deterministic tokenizer and keyword/slot grammar for the core command
// language, plus the `def:` definition syntax.
//
//   command     := build_cmd | destroy_cmd
//   build_cmd   := BUILD_VERB [ARTICLE] [SIZE | INT] LABEL [LOC_PHRASE]
//   destroy_cmd := DESTROY_VERB [ARTICLE] LABEL
//   LOC_PHRASE  := ("on top of" | "on" | "above" | "in front of" | "behind"
//                  | "left of" | "right of" | "next to") [ARTICLE] (LABEL | "house")

#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "voxelsmith/voxel_world.hpp"

namespace voxelsmith {

class GrammarError : public Error {
 public:
  using Error::Error;
};

using Token = std::string;

// Lowercases and splits on whitespace and every non-alphanumeric byte except
// the apostrophe. Bytes >= 0x80 are kept so UTF-8 words stay whole.
inline std::vector<Token> tokenize(std::string_view raw) {
  std::vector<Token> tokens;
  Token current;
  auto flush = [&] {
    if (current.find_first_not_of('\'') != std::string::npos) tokens.push_back(current);
    current.clear();
  };
  for (char ch : raw) {
    const auto u = static_cast<unsigned char>(ch);
    const bool keep = (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') ||
                      ch == '\'' || u >= 0x80;
    if (keep)
      current.push_back((u >= 'A' && u <= 'Z') ? static_cast<char>(u - 'A' + 'a') : ch);
    else
      flush();
  }
  flush();
  return tokens;
}

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Whitespace-separated word count of the raw text; the unit of expressiveness.
inline std::size_t word_count(std::string_view raw) {
  std::size_t n = 0;
  bool in_word = false;
  for (char c : raw) {
    const bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

struct Utterance {
  std::string raw;
  std::vector<Token> tokens;

  Utterance() = default;
  explicit Utterance(std::string_view text) : raw(trim(text)), tokens(tokenize(text)) {}

  bool empty() const { return tokens.empty(); }

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

enum class SizeWord { tiny, small, default_size, large, huge };

inline std::string_view size_name(SizeWord s) {
  switch (s) {
    case SizeWord::tiny: return "tiny";
    case SizeWord::small: return "small";
    case SizeWord::default_size: return "default";
    case SizeWord::large: return "large";
    case SizeWord::huge: return "huge";
  }
  return "default";
}

// A qualitative size, optionally overridden by an explicit block count.
struct Length {
  SizeWord word = SizeWord::default_size;
  std::optional<int> count;

  friend bool operator==(const Length&, const Length&) = default;
};

enum class Relation { on_top_of, in_front_of, behind, left_of, right_of, next_to };

inline std::string_view relation_name(Relation r) {
  switch (r) {
    case Relation::on_top_of: return "on_top_of";
    case Relation::in_front_of: return "in_front_of";
    case Relation::behind: return "behind";
    case Relation::left_of: return "left_of";
    case Relation::right_of: return "right_of";
    case Relation::next_to: return "next_to";
  }
  return "next_to";
}

struct RelLoc {
  Relation relation = Relation::on_top_of;
  std::optional<SegmentLabel> anchor;  // nullopt anchors on the whole house

  friend bool operator==(const RelLoc&, const RelLoc&) = default;
};

struct BuildCmd {
  SegmentLabel label;
  Length size;
  std::optional<RelLoc> relloc;

  friend bool operator==(const BuildCmd&, const BuildCmd&) = default;
};

struct DestroyCmd {
  SegmentLabel label;

  friend bool operator==(const DestroyCmd&, const DestroyCmd&) = default;
};

struct DefineCmd {
  Utterance head;
  std::vector<Utterance> body;

  friend bool operator==(const DefineCmd&, const DefineCmd&) = default;
};

struct Conversational {
  friend bool operator==(const Conversational&, const Conversational&) = default;
};

enum class ParseFailure { empty, unknown_verb, unknown_label, bad_size, bad_location };

struct Unparsable {
  ParseFailure slot;
  std::string reason;

  friend bool operator==(const Unparsable&, const Unparsable&) = default;
};

using CommandAst = std::variant<BuildCmd, DestroyCmd, DefineCmd, Conversational, Unparsable>;

inline constexpr int kMaxExplicitLength = 4096;

namespace grammar_detail {

inline bool one_of(std::string_view t, std::initializer_list<std::string_view> set) {
  for (auto s : set)
    if (s == t) return true;
  return false;
}

inline bool is_filler(std::string_view t) { return one_of(t, {"a", "an", "the", "some", "me", "please"}); }
inline bool is_build_verb(std::string_view t) { return one_of(t, {"build", "make", "construct", "add"}); }
inline bool is_destroy_verb(std::string_view t) { return one_of(t, {"destroy", "remove", "delete"}); }
inline bool is_greeting(std::string_view t) {
  return one_of(t, {"hello", "hi", "hey", "thanks", "thank", "bye", "goodbye"});
}

inline std::optional<SegmentLabel> label_word(std::string_view t) {
  if (t == "stairs") return SegmentLabel::stair;
  if (t == "windows") return SegmentLabel::window;
  if (t == "walls") return SegmentLabel::wall;
  if (t == "fences") return SegmentLabel::fence;
  if (t == "doors") return SegmentLabel::door;
  if (t == "light") return SegmentLabel::lights;
  return parse_label(t);
}

inline std::optional<SizeWord> size_word(std::string_view t) {
  if (t == "tiny") return SizeWord::tiny;
  if (t == "small") return SizeWord::small;
  if (t == "default") return SizeWord::default_size;
  if (t == "large") return SizeWord::large;
  if (t == "huge") return SizeWord::huge;
  return std::nullopt;
}

struct Cursor {
  const std::vector<Token>& tokens;
  std::size_t pos = 0;

  bool done() const { return pos >= tokens.size(); }
  const Token& peek() const { return tokens[pos]; }
  void skip_fillers() {
    while (!done() && is_filler(peek())) ++pos;
  }
  template <typename Words>
  bool match(const Words& phrase) {
    std::size_t i = pos;
    for (auto word : phrase) {
      if (i >= tokens.size() || tokens[i] != word) return false;
      ++i;
    }
    pos = i;
    return true;
  }
};

inline Unparsable fail(ParseFailure slot, std::string reason) { return Unparsable{slot, std::move(reason)}; }

inline std::variant<RelLoc, Unparsable> parse_location(Cursor& in) {
  struct Phrase {
    std::vector<std::string_view> words;
    Relation relation;
  };
  // Longest phrases first so "on top of" wins over "on".
  static const std::vector<Phrase> phrases = {
      {{"on", "top", "of"}, Relation::on_top_of}, {{"in", "front", "of"}, Relation::in_front_of},
      {{"left", "of"}, Relation::left_of},        {{"right", "of"}, Relation::right_of},
      {{"next", "to"}, Relation::next_to},        {{"behind"}, Relation::behind},
      {{"above"}, Relation::on_top_of},           {{"on"}, Relation::on_top_of},
  };
  RelLoc loc;
  bool matched = false;
  for (const auto& p : phrases) {
    if (in.match(p.words)) {
      loc.relation = p.relation;
      matched = true;
      break;
    }
  }
  if (!matched) return fail(ParseFailure::bad_location, "bad location phrase at '" + in.peek() + "'");
  in.skip_fillers();
  if (in.done()) return fail(ParseFailure::bad_location, "bad location phrase: missing reference object");
  const Token& anchor = in.peek();
  if (anchor != "house") {
    auto label = label_word(anchor);
    if (!label) return fail(ParseFailure::bad_location, "bad location phrase: unknown reference '" + anchor + "'");
    loc.anchor = label;
  }
  ++in.pos;
  if (!in.done()) return fail(ParseFailure::bad_location, "bad location phrase: trailing '" + in.peek() + "'");
  return loc;
}

}  // namespace grammar_detail

inline CommandAst parse_core(const Utterance& u) {
  using namespace grammar_detail;
  if (u.tokens.empty()) return fail(ParseFailure::empty, "empty utterance");
  if (is_greeting(u.tokens.front())) return Conversational{};

  Cursor in{u.tokens};
  in.skip_fillers();
  if (in.done()) return fail(ParseFailure::unknown_verb, "no verb");
  const Token verb = in.peek();
  ++in.pos;
  const bool build = is_build_verb(verb);
  if (!build && !is_destroy_verb(verb)) return fail(ParseFailure::unknown_verb, "unknown verb '" + verb + "'");

  in.skip_fillers();
  Length size;
  if (build && !in.done()) {
    if (auto w = size_word(in.peek())) {
      size.word = *w;
      ++in.pos;
    } else if (in.peek().find_first_not_of("0123456789") == std::string::npos) {
      int n = 0;
      const Token& t = in.peek();
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), n);
      if (ec != std::errc() || n < 1 || n > kMaxExplicitLength)
        return fail(ParseFailure::bad_size, "bad block count '" + t + "'");
      size.count = n;
      ++in.pos;
      using Words = std::vector<std::string_view>;
      if (!in.match(Words{"blocks"})) in.match(Words{"block"});
      in.match(Words{"of"});
    }
    in.skip_fillers();
  }

  if (in.done()) return fail(ParseFailure::unknown_label, "missing object");
  auto label = label_word(in.peek());
  if (!label) return fail(ParseFailure::unknown_label, "unknown label '" + in.peek() + "'");
  ++in.pos;

  if (!build) {
    if (!in.done()) return fail(ParseFailure::bad_location, "unexpected '" + in.peek() + "' after object");
    return DestroyCmd{*label};
  }
  BuildCmd cmd{*label, size, std::nullopt};
  if (!in.done()) {
    auto loc = parse_location(in);
    if (auto* bad = std::get_if<Unparsable>(&loc)) return *bad;
    cmd.relloc = std::get<RelLoc>(loc);
  }
  return cmd;
}

inline CommandAst parse_core(std::string_view raw) { return parse_core(Utterance(raw)); }

// True when the text carries the `def:` prefix (case-insensitive, leading
// whitespace allowed).
inline bool is_definition(std::string_view raw) {
  const std::string_view t = trim(raw);
  return t.size() >= 4 && ascii_lower(t.substr(0, 4)) == "def:";
}

inline DefineCmd parse_definition(std::string_view raw) {
  if (!is_definition(raw)) throw GrammarError("definition must start with 'def:'");
  std::string_view rest = trim(raw).substr(4);
  std::vector<std::string_view> segments;
  for (;;) {
    const auto semi = rest.find(';');
    segments.push_back(trim(rest.substr(0, semi)));
    if (semi == std::string_view::npos) break;
    rest.remove_prefix(semi + 1);
  }
  if (segments.size() < 2) throw GrammarError("definition needs a body: def: new command; sub command 1; ...");
  DefineCmd cmd;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    if (segments[i].empty())
      throw GrammarError(i == 0 ? "definition head is empty" : "definition body command " + std::to_string(i) + " is empty");
    Utterance u(segments[i]);
    if (u.empty())
      throw GrammarError(i == 0 ? "definition head has no words"
                                : "definition body command " + std::to_string(i) + " has no words");
    if (i == 0)
      cmd.head = std::move(u);
    else
      cmd.body.push_back(std::move(u));
  }
  return cmd;
}

inline std::string serialize_definition(const DefineCmd& cmd) {
  std::string out = "def: " + cmd.head.raw;
  for (const auto& b : cmd.body) out += "; " + b.raw;
  return out;
}

}  // namespace voxelsmith
