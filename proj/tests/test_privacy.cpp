#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "logsieve/codec.hpp"
#include "logsieve/errors.hpp"
#include "logsieve/minhash.hpp"
#include "logsieve/privacy.hpp"

using namespace logsieve;
using testing::pat;

namespace {

std::string random_word(std::mt19937_64& rng, std::size_t len) {
  std::string w;
  for (std::size_t i = 0; i < len; ++i) w.push_back(static_cast<char>('a' + rng() % 26));
  return w;
}

Pattern random_pattern(std::mt19937_64& rng, std::size_t len, std::size_t word_len = 6) {
  Pattern p;
  for (std::size_t i = 0; i < len; ++i) p.tokens.push_back(Token::constant(random_word(rng, word_len)));
  return p;
}

// Shares the first `shared` tokens.
std::pair<Pattern, Pattern> overlapping(std::mt19937_64& rng, std::size_t len, std::size_t shared) {
  Pattern a = random_pattern(rng, len), b = a;
  for (std::size_t i = shared; i < len; ++i) b.tokens[i] = Token::constant(random_word(rng, 7));
  return {a, b};
}

}  // namespace

TEST_CASE("config validation") {
  BloomConfig c;
  CHECK_NOTHROW(c.validate());
  c.m = 100;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c.m = 32;
  CHECK_THROWS_AS(c.validate(), UsageError);
  c = {};
  c.k = 0;
  CHECK_THROWS_AS(c.validate(), UsageError);
}

TEST_CASE("encode_pattern") {
  BloomConfig c;
  const auto p = pat("Registering block * on host *");
  CHECK(encode_pattern(p, c) == encode_pattern(p, c));
  CHECK(encode_pattern(pat("single"), c).set_bits() <= 2);
  const auto e = encode_pattern(p, c, 7);
  CHECK(e.frequency() == 7);
  CHECK(e.set_bits() == e.positions().size());
  CHECK_THROWS_AS(encode_pattern(Pattern{}, c), UsageError);
}

TEST_CASE("bytes round trip in big-endian bit order") {
  BloomConfig c;
  c.m = 64;
  BloomEncoding e(c, 1);
  e.set(0);
  e.set(9);
  const auto bytes = e.to_bytes();
  CHECK(bytes[0] == 0x80);
  CHECK(bytes[1] == 0x40);
  CHECK(BloomEncoding::from_bytes(c, bytes, 1) == e);
}

TEST_CASE("encoding_jaccard") {
  BloomConfig c;
  std::mt19937_64 rng(1);
  const auto a = encode_pattern(random_pattern(rng, 8), c);
  CHECK(encoding_jaccard(a, a) == 1.0);
  CHECK(encoding_jaccard(a, encode_pattern(random_pattern(rng, 8), c)) <= 0.1);
  BloomConfig other = c;
  other.seed = 2;
  CHECK_THROWS_AS(encoding_jaccard(a, encode_pattern(pat("x y"), other)), UsageError);
  CHECK(encoding_jaccard(BloomEncoding(c, 1), BloomEncoding(c, 1)) == 1.0);

  // 6 of 8 shared prefix tokens give 5 shared shingles out of 7 + 7 - 5 = 9...
  // the oracle is the exact shingle Jaccard either way.
  for (int i = 0; i < 50; ++i) {
    auto [p, q] = overlapping(rng, 9, 5);
    const double truth = exact_jaccard(shingle(p, 2), shingle(q, 2));
    CHECK(std::abs(encoding_jaccard(encode_pattern(p, c), encode_pattern(q, c)) - truth) <= 0.15);
  }
}

TEST_CASE("mean bitmap distortion stays small") {
  BloomConfig c;
  std::mt19937_64 rng(77);
  double total = 0;
  for (int i = 0; i < 300; ++i) {
    const std::size_t len = 4 + rng() % 20;
    auto [p, q] = overlapping(rng, len, rng() % (len + 1));
    auto ep = encode_pattern(p, c), eq = encode_pattern(q, c);
    REQUIRE(ep.fill_ratio() <= 0.25);
    total += std::abs(encoding_jaccard(ep, eq) - exact_jaccard(shingle(p, 2), shingle(q, 2)));
  }
  CHECK(total / 300 <= 0.08);
}

TEST_CASE("aggregate") {
  BloomConfig c;
  const auto p = pat("Registering block * on host *");

  SUBCASE("identical encodings from two clients merge") {
    std::vector<Submission> subs = {{encode_pattern(p, c, 10), "a"}, {encode_pattern(p, c, 5), "b"}};
    auto store = aggregate(subs, c, 1.0);
    REQUIRE(store.size() == 1);
    CHECK(store.encodings()[0].frequency() == 15);
  }
  SUBCASE("empty") { CHECK(aggregate({}, c, 1.0).empty()); }
  SUBCASE("disjoint encodings stay apart") {
    std::vector<Submission> subs = {{encode_pattern(p, c, 3), "a"},
                                    {encode_pattern(pat("disk full on volume *"), c, 2), "b"}};
    CHECK(aggregate(subs, c, 1.0).size() == 2);
  }
  SUBCASE("mixed configs name the offenders") {
    BloomConfig other = c;
    other.m = 2048;
    std::vector<Submission> subs = {{encode_pattern(p, c), "good"},
                                    {encode_pattern(p, other), "bad1"},
                                    {encode_pattern(p, other), "bad2"}};
    try {
      aggregate(subs, c, 1.0);
      FAIL("expected rejection");
    } catch (const UsageError& e) {
      const std::string msg = e.what();
      CHECK(msg.find("bad1") != std::string::npos);
      CHECK(msg.find("bad2") != std::string::npos);
      CHECK(msg.find("good") == std::string::npos);
    }
  }
  SUBCASE("coverage keeps the frequent blocks") {
    std::vector<Submission> subs = {{encode_pattern(p, c, 90), "a"},
                                    {encode_pattern(pat("disk full on volume *"), c, 10), "b"}};
    CHECK(aggregate(subs, c, 0.5).size() == 1);
  }
  SUBCASE("aggregating a store's own encodings reproduces it") {
    std::mt19937_64 rng(3);
    std::vector<Submission> subs;
    for (int i = 0; i < 40; ++i) {
      auto q = random_pattern(rng, 6 + rng() % 6);
      subs.push_back({encode_pattern(q, c, 1 + rng() % 9), "x"});
      subs.push_back({encode_pattern(q, c, 1 + rng() % 9), "y"});
    }
    auto store = aggregate(subs, c, 1.0);
    std::vector<Submission> again;
    for (const auto& e : store.encodings()) again.push_back({e, "s"});
    CHECK(aggregate(again, c, 1.0).encodings() == store.encodings());
  }
}

TEST_CASE("match_encoded") {
  BloomConfig c;
  std::mt19937_64 rng(5);
  std::vector<Submission> subs;
  std::vector<Pattern> known;
  for (int i = 0; i < 30; ++i) {
    known.push_back(random_pattern(rng, 8 + rng() % 8));
    subs.push_back({encode_pattern(known.back(), c), "a"});
  }
  auto store = aggregate(subs, c, 1.0);
  for (const auto& p : known) CHECK(match_encoded(store, p));
  CHECK_FALSE(match_encoded(store, random_pattern(rng, 10)));
  CHECK_FALSE(match_encoded(EncodingStore(c, {}, {}), known[0]));
}

TEST_CASE("near-duplicates at shingle Jaccard 0.95 match in at least 95% of seeds") {
  // 40 tokens; one changed final token: 38 shared of 40 shingles.
  std::mt19937_64 rng(9);
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    BloomConfig c;
    c.seed = seed;
    Pattern p = random_pattern(rng, 40);
    Pattern q = p;
    q.tokens.back() = Token::constant("changedtoken");
    REQUIRE(exact_jaccard(shingle(p, 2), shingle(q, 2)) == doctest::Approx(38.0 / 40.0));
    std::vector<Submission> subs = {{encode_pattern(p, c), "a"}};
    hits += match_encoded(aggregate(subs, c, 1.0), q);
  }
  CHECK(hits >= 95);
}

TEST_CASE("encoding files") {
  BloomConfig c;
  std::vector<Submission> subs = {{encode_pattern(pat("a b c"), c, 4), "a"},
                                  {encode_pattern(pat("d e f g"), c, 2), "a"}};
  auto store = aggregate(subs, c, 1.0);
  const std::string text = serialize_encodings(to_file(store));
  auto back = store_from_file(parse_encodings(text));
  CHECK(back.encodings() == store.encodings());
  CHECK(back.options() == store.options());
  CHECK(serialize_encodings(to_file(back)) == text);

  EncodingFile client{c, std::nullopt, {encode_pattern(pat("a b"), c)}};
  const auto ct = serialize_encodings(client);
  CHECK(ct.find("jaccard_threshold") == std::string::npos);
  CHECK(parse_encodings(ct).encodings == client.encodings);

  std::string bad = ct.substr(0, ct.rfind("{\"sha256\""));
  bad += "{\"bitmap\":\"AAAA\",\"frequency\":1}\n";
  try {
    parse_encodings(with_checksum(bad));
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(e.offset() == 3);
  }
}

TEST_CASE("serialized stores hold no token text") {
  BloomConfig c;
  std::mt19937_64 rng(21);
  for (int round = 0; round < 10; ++round) {
    std::vector<Submission> subs;
    std::vector<std::string> tokens;
    for (int i = 0; i < 50; ++i) {
      Pattern p;
      for (std::size_t k = 0, n = 4 + rng() % 8; k < n; ++k) {
        tokens.push_back(random_word(rng, 8 + rng() % 5));
        p.tokens.push_back(Token::constant(tokens.back()));
      }
      subs.push_back({encode_pattern(p, c, 1 + rng() % 5), "x"});
    }
    const std::string text = serialize_encodings(to_file(aggregate(subs, c, 1.0)));
    for (const auto& t : tokens) CHECK(text.find(t) == std::string::npos);
  }
}
