// SPDX-License-Identifier: Apache-2.0
#include "kombo/harness/toy_corpus.hpp"

#include <array>
#include <vector>

#include "kombo/hangul/jamo.hpp"
#include "kombo/hangul/utf8.hpp"
#include "kombo/nn/rng.hpp"

namespace kombo::harness {
namespace {

// Finite forms in four registers: past, plain present, polite, formal.
using Forms = std::array<const char*, 4>;

struct Verb {
  Forms forms;
};

struct Object {
  const char* word;
  std::vector<int> verbs;  // indices into kTransitive
};

const std::vector<Verb> kTransitive{
    {{"먹었다", "먹는다", "먹어요", "먹습니다"}},       // 0
    {{"읽었다", "읽는다", "읽어요", "읽습니다"}},       // 1
    {{"봤다", "본다", "봐요", "봅니다"}},               // 2
    {{"만들었다", "만든다", "만들어요", "만듭니다"}},   // 3
    {{"샀다", "산다", "사요", "삽니다"}},               // 4
    {{"마셨다", "마신다", "마셔요", "마십니다"}},       // 5
    {{"썼다", "쓴다", "써요", "씁니다"}},               // 6
    {{"들었다", "듣는다", "들어요", "듣습니다"}},       // 7
    {{"좋아했다", "좋아한다", "좋아해요", "좋아합니다"}}, // 8
    {{"찾았다", "찾는다", "찾아요", "찾습니다"}},       // 9
    {{"그렸다", "그린다", "그려요", "그립니다"}},       // 10
    {{"받았다", "받는다", "받아요", "받습니다"}},       // 11
};

const std::vector<Object> kObjects{
    {"사과", {0, 4, 8}},     {"밥", {0, 3}},          {"빵", {0, 3, 4}},       {"김치", {0, 3, 8}},
    {"라면", {0, 3, 4}},     {"과일", {0, 4, 8}},     {"물", {5, 4}},          {"커피", {5, 4, 8}},
    {"우유", {5, 4}},        {"차", {5, 8}},          {"책", {1, 4, 6, 9}},    {"신문", {1, 4}},
    {"편지", {1, 6, 11}},    {"소설", {1, 6, 8}},     {"노래", {7, 8, 3}},     {"음악", {7, 8}},
    {"영화", {2, 8, 3}},     {"사진", {2, 9, 11}},    {"그림", {2, 10, 8}},    {"꽃", {4, 11, 10}},
    {"선물", {4, 11, 9}},    {"숙제", {9, 11}},       {"열쇠", {9, 4}},        {"옷", {4, 3, 9}},
};

const std::vector<Verb> kMotion{
    {{"갔다", "간다", "가요", "갑니다"}},
    {{"왔다", "온다", "와요", "옵니다"}},
    {{"돌아갔다", "돌아간다", "돌아가요", "돌아갑니다"}},
};

const std::vector<Verb> kIntransitive{
    {{"놀았다", "논다", "놀아요", "놉니다"}},
    {{"일했다", "일한다", "일해요", "일합니다"}},
    {{"공부했다", "공부한다", "공부해요", "공부합니다"}},
    {{"쉬었다", "쉰다", "쉬어요", "쉽니다"}},
    {{"걸었다", "걷는다", "걸어요", "걷습니다"}},
    {{"기다렸다", "기다린다", "기다려요", "기다립니다"}},
};

const std::vector<const char*> kSubjects{"학생", "선생님", "친구", "어머니", "아버지", "동생",   "고양이",
                                         "강아지", "사람",  "아이", "할머니", "의사",   "가수",   "경찰관",
                                         "농부",  "요리사", "기자", "작가",   "화가",   "소년",   "소녀",
                                         "민준",  "서연",  "지훈", "하은",   "언니",   "형",     "손님"};
const std::vector<const char*> kPlaces{"학교", "집",   "시장", "공원",   "도서관", "병원", "식당", "회사",
                                       "교실", "부엌", "바다", "산",     "서울",   "부산", "카페", "역",
                                       "마을", "극장", "정원", "백화점", "호텔",   "강"};
const std::vector<const char*> kTimes{"오늘", "어제", "내일", "아침에", "저녁에", "주말에", "매일", "가끔", "밤에"};
const std::vector<const char*> kAdverbs{"천천히", "빨리", "조용히", "열심히", "함께", "다시", "많이", "혼자"};

template <typename V>
const auto& pick(const V& v, nn::Rng& rng) {
  return v[rng.uniform_index(v.size())];
}

int last_jong(const std::string& word) {
  const auto u = utf8::decode_or_throw(word);
  if (u.empty() || !hangul::is_syllable(u.back())) return 0;
  return hangul::decompose_syllable(u.back()).jong;
}

std::string sentence(const std::string& subject, int tense, nn::Rng& rng) {
  std::string s;
  const auto maybe_time = [&] {
    if (rng.bernoulli(0.4)) s += std::string(pick(kTimes, rng)) + " ";
  };
  const auto maybe_adverb = [&] {
    if (rng.bernoulli(0.3)) s += std::string(pick(kAdverbs, rng)) + " ";
  };
  switch (rng.uniform_index(5)) {
    case 0: {
      maybe_time();
      const auto& obj = pick(kObjects, rng);
      s += with_particle(subject, "은", "는") + " " + with_particle(obj.word, "을", "를") + " ";
      maybe_adverb();
      s += kTransitive[static_cast<std::size_t>(pick(obj.verbs, rng))].forms[tense];
      break;
    }
    case 1: {
      const auto& obj = pick(kObjects, rng);
      s += with_particle(subject, "이", "가") + " " + std::string(pick(kPlaces, rng)) + "에서 " +
           with_particle(obj.word, "을", "를") + " " +
           kTransitive[static_cast<std::size_t>(pick(obj.verbs, rng))].forms[tense];
      break;
    }
    case 2: {
      s += with_particle(subject, "은", "는") + " ";
      maybe_time();
      s += with_particle(pick(kPlaces, rng), "으로", "로") + " " + pick(kMotion, rng).forms[tense];
      break;
    }
    case 3: {
      s += with_particle(subject, "이", "가") + " " + std::string(pick(kPlaces, rng)) + "에서 ";
      maybe_adverb();
      s += pick(kIntransitive, rng).forms[tense];
      break;
    }
    default: {
      std::string other = pick(kSubjects, rng);
      if (other == subject) other = "친구";
      s += with_particle(subject, "은", "는") + " " + with_particle(other, "과", "와") + " 함께 " +
           std::string(pick(kPlaces, rng)) + "에 " + pick(kMotion, rng).forms[tense];
      break;
    }
  }
  return s + ".";
}

}  // namespace

std::string with_particle(const std::string& word, const std::string& after_consonant,
                          const std::string& after_vowel) {
  const int jong = last_jong(word);
  // 으로 drops its 으 after ㄹ as well as after a vowel.
  constexpr int kRieulJong = 8;
  if (after_consonant == "으로" && jong == kRieulJong) return word + after_vowel;
  return word + (jong != 0 ? after_consonant : after_vowel);
}

std::string generate_toy_corpus(const ToyCorpusOptions& options) {
  nn::Rng rng(options.seed);
  std::string out;
  out.reserve(options.target_bytes + 1024);
  while (out.size() < options.target_bytes) {
    if (!out.empty()) out += "\n";
    const std::string subject = pick(kSubjects, rng);
    const int tense = static_cast<int>(rng.uniform_index(4));
    const std::size_t sentences = 3 + rng.uniform_index(5);
    for (std::size_t i = 0; i < sentences; ++i) out += sentence(subject, tense, rng) + "\n";
  }
  return out;
}

}  // namespace kombo::harness
