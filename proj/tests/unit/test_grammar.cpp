#include <gtest/gtest.h>

#include <random>

#include "voxelsmith/grammar.hpp"

using namespace voxelsmith;

TEST(Tokenize, LowercasesAndDropsPunctuation) {
  EXPECT_EQ(tokenize("Build a TINY window!"), (std::vector<Token>{"build", "a", "tiny", "window"}));
}

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(tokenize("").empty()); }

TEST(Tokenize, SevenWordUtterance) { EXPECT_EQ(tokenize("build a tiny window on the roof").size(), 7u); }

TEST(Tokenize, KeepsApostrophesSplitsOtherPunctuation) {
  EXPECT_EQ(tokenize("don't stop,now;ok-then"), (std::vector<Token>{"don't", "stop", "now", "ok", "then"}));
  EXPECT_EQ(tokenize("  ' , '' "), std::vector<Token>{});
  EXPECT_EQ(tokenize("\t12 blocks\n"), (std::vector<Token>{"12", "blocks"}));
}

TEST(Tokenize, TokensNeverContainWhitespaceOrPunctuation) {
  std::mt19937 rng(5);
  const std::string alphabet = "abcXYZ019 \t\n.,;:!?'\"-_()[]";
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    for (int i = 0; i < 30; ++i) s += alphabet[rng() % alphabet.size()];
    for (const auto& t : tokenize(s)) {
      ASSERT_FALSE(t.empty());
      for (char c : t) ASSERT_TRUE(std::islower(static_cast<unsigned char>(c)) || std::isdigit(static_cast<unsigned char>(c)) || c == '\'');
    }
  }
}

TEST(WordCount, WhitespaceWords) {
  EXPECT_EQ(word_count("build a skylight"), 3u);
  EXPECT_EQ(word_count("build a tiny window on the roof"), 7u);
  EXPECT_EQ(word_count("build an awning on house"), 5u);
  EXPECT_EQ(word_count("build a roof"), 3u);
  EXPECT_EQ(word_count("  spaced   out\twords \n"), 3u);
  EXPECT_EQ(word_count(""), 0u);
}

TEST(ParseCore, BuildWithSizeAndLocation) {
  const auto ast = parse_core("build a tiny window on top of the roof");
  const auto* b = std::get_if<BuildCmd>(&ast);
  ASSERT_TRUE(b);
  EXPECT_EQ(b->label, SegmentLabel::window);
  EXPECT_EQ(b->size.word, SizeWord::tiny);
  EXPECT_FALSE(b->size.count);
  ASSERT_TRUE(b->relloc);
  EXPECT_EQ(b->relloc->relation, Relation::on_top_of);
  EXPECT_EQ(b->relloc->anchor, SegmentLabel::roof);
}

TEST(ParseCore, Destroy) { EXPECT_EQ(parse_core("remove the roof"), CommandAst(DestroyCmd{SegmentLabel::roof})); }

TEST(ParseCore, UnknownVerb) {
  const auto ast = parse_core("frobnicate the yard");
  const auto* u = std::get_if<Unparsable>(&ast);
  ASSERT_TRUE(u);
  EXPECT_EQ(u->slot, ParseFailure::unknown_verb);
  EXPECT_NE(u->reason.find("verb"), std::string::npos);
}

TEST(ParseCore, UnknownLabelAndBadLocation) {
  auto a = parse_core("build an awning");
  ASSERT_TRUE(std::holds_alternative<Unparsable>(a));
  EXPECT_EQ(std::get<Unparsable>(a).slot, ParseFailure::unknown_label);
  auto b = parse_core("build a wall under the roof");
  ASSERT_TRUE(std::holds_alternative<Unparsable>(b));
  EXPECT_EQ(std::get<Unparsable>(b).slot, ParseFailure::bad_location);
  auto c = parse_core("build a wall next to the garage");
  ASSERT_TRUE(std::holds_alternative<Unparsable>(c));
  EXPECT_EQ(std::get<Unparsable>(c).slot, ParseFailure::bad_location);
}

TEST(ParseCore, DefaultSize) {
  const auto ast = parse_core("make a wall");
  ASSERT_TRUE(std::holds_alternative<BuildCmd>(ast));
  EXPECT_EQ(std::get<BuildCmd>(ast).size, Length{});
  EXPECT_EQ(std::get<BuildCmd>(ast).size.word, SizeWord::default_size);
}

TEST(ParseCore, ExplicitCountOverridesSize) {
  const auto ast = parse_core("build 12 blocks of wall");
  ASSERT_TRUE(std::holds_alternative<BuildCmd>(ast));
  EXPECT_EQ(std::get<BuildCmd>(ast).size.count, 12);
  EXPECT_TRUE(std::holds_alternative<Unparsable>(parse_core("build 0 blocks of wall")));
}

TEST(ParseCore, AllLocationPhrases) {
  const std::vector<std::pair<std::string, Relation>> cases = {
      {"on top of", Relation::on_top_of}, {"on", Relation::on_top_of},        {"above", Relation::on_top_of},
      {"in front of", Relation::in_front_of}, {"behind", Relation::behind}, {"left of", Relation::left_of},
      {"right of", Relation::right_of},   {"next to", Relation::next_to}};
  for (const auto& [phrase, rel] : cases) {
    const auto ast = parse_core("build a door " + phrase + " the house");
    ASSERT_TRUE(std::holds_alternative<BuildCmd>(ast)) << phrase;
    const auto& loc = *std::get<BuildCmd>(ast).relloc;
    EXPECT_EQ(loc.relation, rel) << phrase;
    EXPECT_FALSE(loc.anchor) << phrase;
  }
}

TEST(ParseCore, SynonymsAndFillers) {
  EXPECT_EQ(parse_core("please build me some stairs"),
            CommandAst(BuildCmd{SegmentLabel::stair, Length{}, std::nullopt}));
  EXPECT_EQ(parse_core("delete the windows"), CommandAst(DestroyCmd{SegmentLabel::window}));
  EXPECT_EQ(parse_core("add a light"), CommandAst(BuildCmd{SegmentLabel::lights, Length{}, std::nullopt}));
}

TEST(ParseCore, Conversational) {
  for (auto s : {"hello", "Hi there", "thanks!", "bye", "thank you"})
    EXPECT_TRUE(std::holds_alternative<Conversational>(parse_core(s))) << s;
  EXPECT_TRUE(std::holds_alternative<Unparsable>(parse_core("")));
}

TEST(ParseCore, DestroyRejectsTrailingWords) {
  EXPECT_TRUE(std::holds_alternative<Unparsable>(parse_core("remove the roof now")));
}

TEST(ParseCore, TotalAndDeterministic) {
  std::mt19937 rng(9);
  const std::vector<std::string> words = {"build", "remove", "a",    "the",   "tiny", "huge", "wall", "roof", "on",
                                          "top",   "of",     "next", "to",    "house", "12",  "blocks", "hello", "xyz"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::string s;
    const int n = static_cast<int>(rng() % 8);
    for (int i = 0; i < n; ++i) s += words[rng() % words.size()] + " ";
    EXPECT_EQ(parse_core(s), parse_core(s));
  }
}

TEST(ParseDefinition, ThreeBodyCommands) {
  const auto d = parse_definition("def: make the house taller; remove the roof; build a huge wall; build a large roof");
  EXPECT_EQ(d.head.raw, "make the house taller");
  ASSERT_EQ(d.body.size(), 3u);
  EXPECT_EQ(d.body[0].raw, "remove the roof");
  EXPECT_EQ(d.body[1].raw, "build a huge wall");
  EXPECT_EQ(d.body[2].raw, "build a large roof");
}

TEST(ParseDefinition, SingleBodyCommand) {
  const auto d = parse_definition("def: build a skylight; build a tiny window on the roof");
  EXPECT_EQ(d.head.raw, "build a skylight");
  ASSERT_EQ(d.body.size(), 1u);
  EXPECT_EQ(d.body[0].raw, "build a tiny window on the roof");
}

TEST(ParseDefinition, Errors) {
  EXPECT_THROW(parse_definition("def: build a skylight;"), GrammarError);
  EXPECT_THROW(parse_definition("def: build a skylight"), GrammarError);
  EXPECT_THROW(parse_definition("def: ; build a roof"), GrammarError);
  EXPECT_THROW(parse_definition("def: x;; build a roof"), GrammarError);
  EXPECT_THROW(parse_definition("def: !!!; build a roof"), GrammarError);
  EXPECT_THROW(parse_definition("build a roof; build a wall"), GrammarError);
}

TEST(ParseDefinition, PrefixIsCaseInsensitiveWithWhitespace) {
  EXPECT_TRUE(is_definition("  DEF: a; b"));
  EXPECT_EQ(parse_definition("  Def:a;b ").head.raw, "a");
  EXPECT_FALSE(is_definition("define: a; b"));
}

TEST(ParseDefinition, SerializeRoundTrip) {
  std::mt19937 rng(3);
  const std::vector<std::string> words = {"build", "a", "wall", "roof", "Tiny", "window", "on", "the", "house", "x"};
  for (int trial = 0; trial < 300; ++trial) {
    std::string text = "def:";
    const int segments = 2 + static_cast<int>(rng() % 4);
    for (int s = 0; s < segments; ++s) {
      if (s) text += ';';
      text += "  ";
      const int n = 1 + static_cast<int>(rng() % 5);
      for (int i = 0; i < n; ++i) text += words[rng() % words.size()] + (i + 1 < n ? " " : "");
      text += ' ';
    }
    const auto d = parse_definition(text);
    EXPECT_EQ(parse_definition(serialize_definition(d)), d);
  }
}
