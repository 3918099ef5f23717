// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include "kombo/error.hpp"
#include "kombo/hangul/bts_tables.hpp"
#include "kombo/hangul/jamo.hpp"
#include "kombo/hangul/scheme.hpp"
#include "kombo/hangul/utf8.hpp"
#include "kombo/nn/rng.hpp"

using namespace kombo;
using namespace kombo::hangul;

namespace {

char32_t first_scalar(std::string_view s) { return utf8::decode_or_throw(s).at(0); }

std::vector<std::string> split_symbols(std::string_view s) {
  std::vector<std::string> out;
  for (char32_t c : utf8::decode_or_throw(s)) out.push_back(utf8::encode(c));
  return out;
}

}  // namespace

TEST(Syllable, BaseCodePointIsZeroTriple) {
  EXPECT_EQ(decompose_syllable(0xAC00), (SyllableDecomposition{0, 0, 0}));
  EXPECT_EQ(compose_syllable({0, 0, 0}), U'가');
}

TEST(Syllable, NfdOracleTriples) {
  // Index triples taken from Python's unicodedata NFD decomposition.
  EXPECT_EQ(decompose_syllable(first_scalar("훈")), (SyllableDecomposition{18, 13, 4}));
  EXPECT_EQ(decompose_syllable(first_scalar("차")), (SyllableDecomposition{14, 0, 0}));
  EXPECT_EQ(compose_syllable({18, 13, 4}), first_scalar("훈"));
  const std::vector<SyllableDecomposition> gichatgil{{0, 20, 0}, {14, 0, 19}, {0, 20, 8}};
  std::u32string text;
  for (const auto& d : gichatgil) text.push_back(compose_syllable(d));
  EXPECT_EQ(utf8::encode(text), "기찻길");
}

TEST(Syllable, HunDecomposesToHieutUNieun) {
  const auto d = decompose_syllable(first_scalar("훈"));
  EXPECT_EQ(utf8::encode(compat_of_cho(d.cho)), "ㅎ");
  EXPECT_EQ(utf8::encode(compat_of_jung(d.jung)), "ㅜ");
  EXPECT_EQ(utf8::encode(compat_of_jong(d.jong)), "ㄴ");
}

TEST(Syllable, RoundTripOverEverySyllableAndTriple) {
  for (char32_t ch = kSyllableFirst; ch <= kSyllableLast; ++ch) {
    ASSERT_EQ(compose_syllable(decompose_syllable(ch)), ch);
  }
  for (int c = 0; c < kChoCount; ++c) {
    for (int v = 0; v < kJungCount; ++v) {
      for (int f = 0; f < kJongCount; ++f) {
        const SyllableDecomposition d{c, v, f};
        ASSERT_EQ(decompose_syllable(compose_syllable(d)), d);
      }
    }
  }
}

TEST(Syllable, NonSyllableIsRejected) {
  try {
    decompose_syllable(U'a');
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotHangulSyllable);
  }
  EXPECT_THROW(decompose_syllable(kSyllableLast + 1), Error);
}

TEST(Syllable, OutOfRangeIndexIsRejected) {
  for (const SyllableDecomposition& d :
       {SyllableDecomposition{19, 0, 0}, SyllableDecomposition{0, 21, 0}, SyllableDecomposition{0, 0, 28},
        SyllableDecomposition{-1, 0, 0}}) {
    try {
      compose_syllable(d);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::InvalidJamoIndex);
    }
  }
}

TEST(Classify, Examples) {
  EXPECT_EQ(classify_char(first_scalar("훈")), CharClass::HangulSyllable);
  EXPECT_EQ(classify_char(U'a'), CharClass::Ascii);
  EXPECT_EQ(classify_char(U'7'), CharClass::Ascii);
  EXPECT_EQ(classify_char(U'.'), CharClass::Punct);
  EXPECT_EQ(classify_char(first_scalar("♞")), CharClass::Other);
}

TEST(Schemes, SlotGroupsSumToWidth) {
  const std::vector<std::tuple<SchemeKind, int, int, int, int>> expected{
      {SchemeKind::Jamo, 3, 1, 1, 1},  {SchemeKind::Stroke, 9, 4, 1, 4}, {SchemeKind::Cji, 7, 1, 5, 1},
      {SchemeKind::Bts, 13, 4, 5, 4}, {SchemeKind::Character, 1, 1, 0, 0}};
  for (const auto& [kind, width, cho, jung, jong] : expected) {
    const auto s = UnitScheme::of(kind);
    EXPECT_EQ(s.tokens_per_char, width);
    EXPECT_EQ(s.cho_slots, cho);
    EXPECT_EQ(s.jung_slots, jung);
    EXPECT_EQ(s.jong_slots, jong);
    EXPECT_EQ(cho + jung + jong, width);
    EXPECT_EQ(UnitScheme::parse(s.name()), s);
  }
}

TEST(Schemes, UnknownNameIsConfigError) {
  try {
    UnitScheme::parse("morpheme");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
}

TEST(Expansion, HunminjeongeumIsTwelveJamo) {
  std::size_t total = 0;
  for (char32_t ch : utf8::decode_or_throw("훈민정음")) {
    total += expand_to_scheme(decompose_syllable(ch), UnitScheme::of(SchemeKind::Jamo)).size();
  }
  EXPECT_EQ(total, 12u);
}

TEST(Expansion, ChaUnderJamoHasEmptyFinal) {
  const auto sym = expand_to_scheme(decompose_syllable(first_scalar("차")), UnitScheme::of(SchemeKind::Jamo));
  ASSERT_EQ(sym.size(), 3u);
  EXPECT_EQ(sym[0], utf8::encode(choseong(14)));
  EXPECT_EQ(sym[1], utf8::encode(jungseong(0)));
  EXPECT_EQ(sym[2], kEmptySymbol);
}

TEST(Expansion, KieukUnderStrokeIsGiyeokPlusStroke) {
  // 카: the initial group of the Stroke expansion.
  const auto sym = expand_to_scheme(decompose_syllable(first_scalar("카")), UnitScheme::of(SchemeKind::Stroke));
  ASSERT_EQ(sym.size(), 9u);
  EXPECT_EQ(std::vector<std::string>(sym.begin(), sym.begin() + 4),
            (std::vector<std::string>{"ㄱ", "-", kEmptySymbol, kEmptySymbol}));
}

TEST(Expansion, AUnderCjiIsPersonPlusHeaven) {
  const auto sym = expand_to_scheme(decompose_syllable(first_scalar("가")), UnitScheme::of(SchemeKind::Cji));
  ASSERT_EQ(sym.size(), 7u);
  EXPECT_EQ(std::vector<std::string>(sym.begin() + 1, sym.begin() + 6),
            (std::vector<std::string>{"ㅣ", "ㆍ", kEmptySymbol, kEmptySymbol, kEmptySymbol}));
}

TEST(Expansion, CharacterSchemeIsRejected) {
  try {
    expand_to_scheme({0, 0, 0}, UnitScheme::of(SchemeKind::Character));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ConfigError);
  }
}

TEST(Expansion, EverySyllableHasFixedWidthAndInverts) {
  for (auto kind : {SchemeKind::Jamo, SchemeKind::Stroke, SchemeKind::Cji, SchemeKind::Bts}) {
    const SchemeCodec codec(UnitScheme::of(kind));
    const std::set<std::string> alphabet = [&] {
      auto a = codec.alphabet();
      return std::set<std::string>(a.begin(), a.end());
    }();
    for (char32_t ch = kSyllableFirst; ch <= kSyllableLast; ++ch) {
      const auto d = decompose_syllable(ch);
      const auto sym = codec.expand(d);
      ASSERT_EQ(static_cast<int>(sym.size()), codec.scheme().tokens_per_char);
      for (const auto& s : sym) ASSERT_TRUE(alphabet.count(s)) << s;
      const auto back = codec.invert(sym);
      ASSERT_TRUE(back.has_value());
      ASSERT_EQ(*back, d);
    }
  }
}

TEST(Expansion, GroupsAreLeftFilledThenPadded) {
  const SchemeCodec codec(UnitScheme::of(SchemeKind::Bts));
  const auto s = codec.scheme();
  for (char32_t ch = kSyllableFirst; ch <= kSyllableLast; ch += 37) {
    const auto sym = codec.expand(decompose_syllable(ch));
    for (auto [begin, count] : {std::pair{s.cho_begin(), s.cho_slots}, std::pair{s.jung_begin(), s.jung_slots},
                                std::pair{s.jong_begin(), s.jong_slots}}) {
      bool seen_empty = false;
      for (int i = begin; i < begin + count; ++i) {
        if (sym[static_cast<std::size_t>(i)] == kEmptySymbol) seen_empty = true;
        else ASSERT_FALSE(seen_empty) << "atom after padding";
      }
    }
  }
}

TEST(Expansion, AlphabetSizes) {
  EXPECT_EQ(SchemeCodec(UnitScheme::of(SchemeKind::Jamo)).alphabet().size(), 19u + 21u + 27u + 1u);
  const auto& t = BtsTables::builtin();
  EXPECT_EQ(t.consonant_atoms().size(), 7u);  // five basic consonants, the variant ㄹ, and the added stroke
  EXPECT_EQ(t.vowel_atoms().size(), 3u);      // the three basic vowel elements
  EXPECT_EQ(SchemeCodec(UnitScheme::of(SchemeKind::Bts)).alphabet().size(), 7u + 3u + 1u);
}

TEST(Expansion, InvertRejectsUnknownGroup) {
  const SchemeCodec codec(UnitScheme::of(SchemeKind::Jamo));
  const std::vector<std::string> bad{utf8::encode(choseong(14)), kEmptySymbol, utf8::encode(jongseong(4))};
  EXPECT_FALSE(codec.invert(bad).has_value());
}

TEST(BtsTablesTest, ShippedFileMatchesBuiltin) {
  const auto loaded = BtsTables::load(std::string(KOMBO_SOURCE_DIR) + "/data/bts_tables.txt");
  for (int i = 0; i < kChoCount; ++i) EXPECT_EQ(loaded.cho(i), BtsTables::builtin().cho(i));
  for (int i = 1; i < kJongCount; ++i) EXPECT_EQ(loaded.jong(i), BtsTables::builtin().jong(i));
}

TEST(BtsTablesTest, WrongHeaderIsParseError) {
  try {
    BtsTables::parse("kombo-bts-tables v2\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ParseError);
  }
}

TEST(BtsTablesTest, MissingEntryIsTableGap) {
  std::ifstream in(std::string(KOMBO_SOURCE_DIR) + "/data/bts_tables.txt");
  std::string text, line;
  while (std::getline(in, line)) {
    if (line.rfind(utf8::encode(choseong(18)) + "\t", 0) == 0) continue;  // drop the ᄒ row
    text += line + "\n";
  }
  try {
    BtsTables::parse(text);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TableGap);
  }
}

TEST(BtsTablesTest, OverlongOrNonInjectiveEntryIsTableGap) {
  std::ifstream in(std::string(KOMBO_SOURCE_DIR) + "/data/bts_tables.txt");
  std::string base((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string khieuk = utf8::encode(choseong(15)) + "\tㄱ,-\n";
  ASSERT_NE(base.find(khieuk), std::string::npos);
  for (const std::string& replacement : {utf8::encode(choseong(15)) + "\tㄱ,-,-,-,-\n",
                                         utf8::encode(choseong(15)) + "\tㄱ\n"}) {
    std::string text = base;
    text.replace(text.find(khieuk), khieuk.size(), replacement);
    try {
      BtsTables::parse(text);
      FAIL() << replacement;
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::TableGap);
    }
  }
}

TEST(Utf8, RejectsMalformedInput) {
  EXPECT_FALSE(utf8::decode("\xC0\xAF").has_value());      // overlong
  EXPECT_FALSE(utf8::decode("\xED\xA0\x80").has_value());  // surrogate
  EXPECT_FALSE(utf8::decode("\xEA\xB0").has_value());      // truncated
  EXPECT_EQ(utf8::encode(*utf8::decode("훈a")), "훈a");
}

TEST(Utf8, RandomScalarsRoundTrip) {
  nn::Rng rng(5);
  std::u32string text;
  while (text.size() < 2000) {
    const auto cp = static_cast<char32_t>(rng.uniform_index(0x110000));
    if (cp >= 0xD800 && cp <= 0xDFFF) continue;
    text.push_back(cp);
  }
  EXPECT_EQ(*utf8::decode(utf8::encode(text)), text);
}
