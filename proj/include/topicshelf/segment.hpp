#pragma once

// Dictionary-driven segmentation of unspaced Chinese text using the
// "complex" maximum-matching algorithm (mmseg). At each position every chunk
// of up to three candidate words is scored by, in order:
//   1. largest total length
//   2. largest average word length
//   3. smallest variance of word lengths
//   4. largest sum of log frequency over single-character words
// and the first word of the best chunk is emitted. Remaining ties go to the
// lexicographically smallest chunk.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "topicshelf/error.hpp"
#include "topicshelf/utf8.hpp"

namespace topicshelf {

class Lexicon {
 public:
  Lexicon() = default;

  template <typename Range>
  explicit Lexicon(const Range& words) {
    for (const auto& w : words) add(w);
  }

  /// Adds a multi-character word. Single characters are always candidates
  /// during segmentation, so they are not stored. Returns false for
  /// duplicates and entries shorter than two characters.
  bool add(std::string_view word) {
    std::u32string cps = utf8::decode(word);
    if (cps.size() < 2) return false;
    const auto len = cps.size();
    if (!words_.insert(std::move(cps)).second) return false;
    max_len_ = std::max(max_len_, len);
    return true;
  }

  bool contains(const std::u32string& word) const { return words_.contains(word); }
  bool contains(std::string_view word) const { return contains(utf8::decode(word)); }

  std::size_t size() const noexcept { return words_.size(); }
  bool empty() const noexcept { return words_.empty(); }
  std::size_t max_word_length() const noexcept { return max_len_; }

  std::vector<std::string> sorted_words() const {
    std::vector<std::string> out;
    out.reserve(words_.size());
    for (const auto& w : words_) out.push_back(utf8::encode(w));
    std::sort(out.begin(), out.end());
    return out;
  }

  void set_char_freq(std::unordered_map<char32_t, std::uint64_t> freq) {
    char_freq_ = std::move(freq);
  }
  std::uint64_t char_freq(char32_t c) const {
    auto it = char_freq_.find(c);
    return it == char_freq_.end() ? 0 : it->second;
  }
  bool has_char_freq() const noexcept { return !char_freq_.empty(); }

  /// Morphemic freedom of a single character: log of its frequency, with
  /// unseen characters (and zero counts) contributing 0.
  double freedom(char32_t c) const {
    const std::uint64_t f = char_freq(c);
    return f <= 1 ? 0.0 : std::log(static_cast<double>(f));
  }

 private:
  std::unordered_set<std::u32string> words_;
  std::unordered_map<char32_t, std::uint64_t> char_freq_;
  std::size_t max_len_ = 0;
};

struct TokenSequence {
  std::string doc_id;
  std::vector<std::string> tokens;
};

namespace detail {

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw Error(ErrorKind::IoError, "cannot read " + path.string());
  return std::move(buf).str();
}

inline std::string_view trim(std::string_view s) {
  const auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_ws(s.back())) s.remove_suffix(1);
  return s;
}

inline std::string_view strip_bom(std::string_view s) {
  if (s.starts_with("\xEF\xBB\xBF")) s.remove_prefix(3);
  return s;
}

template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    fn(text.substr(start, end - start));
    start = end + 1;
  }
}

}  // namespace detail

/// One word per line, UTF-8. Lines of the form "<length> <word>" (the
/// rmmseg dictionary layout) are also accepted.
inline Lexicon load_lexicon(const std::filesystem::path& path) {
  const std::string raw = detail::read_text_file(path);
  const std::string_view text = detail::strip_bom(raw);
  if (!utf8::is_valid(text)) {
    throw Error(ErrorKind::EncodingError, path.string() + " is not valid UTF-8");
  }
  Lexicon lex;
  detail::for_each_line(text, [&](std::string_view line) {
    line = detail::trim(line);
    if (line.empty() || line.starts_with('#')) return;
    if (auto sp = line.find_first_of(" \t"); sp != std::string_view::npos) {
      const auto head = line.substr(0, sp);
      if (std::all_of(head.begin(), head.end(), [](char c) { return c >= '0' && c <= '9'; })) {
        line = detail::trim(line.substr(sp));
      }
    }
    lex.add(line);
  });
  return lex;
}

/// Character frequency table: "<char><ws><count>" or "<count><ws><char>".
inline std::unordered_map<char32_t, std::uint64_t> load_char_freq(
    const std::filesystem::path& path) {
  const std::string raw = detail::read_text_file(path);
  const std::string_view text = detail::strip_bom(raw);
  if (!utf8::is_valid(text)) {
    throw Error(ErrorKind::EncodingError, path.string() + " is not valid UTF-8");
  }
  std::unordered_map<char32_t, std::uint64_t> freq;
  const auto is_number = [](std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
  };
  detail::for_each_line(text, [&](std::string_view line) {
    line = detail::trim(line);
    if (line.empty() || line.starts_with('#')) return;
    const auto sp = line.find_first_of(" \t");
    if (sp == std::string_view::npos) return;
    auto a = line.substr(0, sp);
    auto b = detail::trim(line.substr(sp));
    if (is_number(a)) std::swap(a, b);
    if (!is_number(b)) return;
    const std::u32string ch = utf8::decode(a);
    if (ch.size() != 1) return;
    freq[ch[0]] = std::stoull(std::string(b));
  });
  return freq;
}

namespace mmseg {

inline constexpr std::size_t kChunkWords = 3;

struct Chunk {
  std::array<std::uint32_t, kChunkWords> lengths{};
  std::size_t count = 0;

  std::uint32_t total() const {
    std::uint32_t t = 0;
    for (std::size_t i = 0; i < count; ++i) t += lengths[i];
    return t;
  }
  std::uint64_t sum_squares() const {
    std::uint64_t s = 0;
    for (std::size_t i = 0; i < count; ++i) s += std::uint64_t{lengths[i]} * lengths[i];
    return s;
  }
};

/// Segments one run of consecutive Han characters.
class RunSegmenter {
 public:
  RunSegmenter(const Lexicon& lexicon, std::u32string_view run)
      : lexicon_(lexicon), run_(run), candidates_(run.size()) {
    // candidate word lengths starting at each position, ascending
    std::u32string key;
    for (std::size_t i = 0; i < run_.size(); ++i) {
      auto& c = candidates_[i];
      c.push_back(1);
      const std::size_t max_len = std::min(lexicon_.max_word_length(), run_.size() - i);
      for (std::size_t len = 2; len <= max_len; ++len) {
        key.assign(run_.substr(i, len));
        if (lexicon_.contains(key)) c.push_back(static_cast<std::uint32_t>(len));
      }
    }
  }

  template <typename Emit>
  void run(Emit&& emit) {
    std::size_t pos = 0;
    while (pos < run_.size()) {
      best_valid_ = false;
      chunk_start_ = pos;
      Chunk chunk;
      enumerate(pos, chunk);
      const std::size_t len = best_.lengths[0];
      emit(run_.substr(pos, len));
      pos += len;
    }
  }

 private:
  void enumerate(std::size_t pos, Chunk& chunk) {
    if (chunk.count == kChunkWords || pos == run_.size()) {
      consider(chunk);
      return;
    }
    for (std::uint32_t len : candidates_[pos]) {
      chunk.lengths[chunk.count++] = len;
      enumerate(pos + len, chunk);
      --chunk.count;
    }
  }

  double freedom(const Chunk& chunk, std::size_t start) const {
    double sum = 0.0;
    std::size_t pos = start;
    for (std::size_t i = 0; i < chunk.count; ++i) {
      if (chunk.lengths[i] == 1) sum += lexicon_.freedom(run_[pos]);
      pos += chunk.lengths[i];
    }
    return sum;
  }

  // Word-by-word comparison of the two chunks' text as UTF-8 byte strings.
  bool lexicographically_less(const Chunk& a, const Chunk& b, std::size_t start) const {
    std::size_t pa = start;
    std::size_t pb = start;
    for (std::size_t i = 0; i < std::min(a.count, b.count); ++i) {
      const std::string wa = utf8::encode(std::u32string(run_.substr(pa, a.lengths[i])));
      const std::string wb = utf8::encode(std::u32string(run_.substr(pb, b.lengths[i])));
      if (wa != wb) return wa < wb;
      pa += a.lengths[i];
      pb += b.lengths[i];
    }
    return a.count < b.count;
  }

  void consider(const Chunk& chunk) {
    const std::size_t start = chunk_start_;
    if (!best_valid_) {
      best_ = chunk;
      best_valid_ = true;
      return;
    }
    if (better(chunk, best_, start)) best_ = chunk;
  }

  bool better(const Chunk& a, const Chunk& b, std::size_t start) const {
    const auto ta = a.total();
    const auto tb = b.total();
    if (ta != tb) return ta > tb;
    // equal totals: larger average length means fewer words
    if (a.count != b.count) return a.count < b.count;
    // equal totals and counts: variance is ordered by the sum of squares
    const auto sa = a.sum_squares();
    const auto sb = b.sum_squares();
    if (sa != sb) return sa < sb;
    const double fa = freedom(a, start);
    const double fb = freedom(b, start);
    if (fa != fb) return fa > fb;
    return lexicographically_less(a, b, start);
  }

  const Lexicon& lexicon_;
  std::u32string_view run_;
  std::vector<std::vector<std::uint32_t>> candidates_;
  Chunk best_;
  bool best_valid_ = false;
  std::size_t chunk_start_ = 0;
};

}  // namespace mmseg

/// Segments `text` into words. Only Han characters are emitted; every other
/// character (punctuation, whitespace, Latin, digits) ends the current run
/// and is dropped.
inline std::vector<std::string> segment(std::string_view text, const Lexicon& lexicon) {
  std::vector<std::string> tokens;
  const std::u32string cps = utf8::decode(text);
  std::size_t i = 0;
  while (i < cps.size()) {
    if (!utf8::is_cjk(cps[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < cps.size() && utf8::is_cjk(cps[j])) ++j;
    const std::u32string_view run(cps.data() + i, j - i);
    mmseg::RunSegmenter seg(lexicon, run);
    seg.run([&](std::u32string_view word) {
      tokens.push_back(utf8::encode(std::u32string(word)));
    });
    i = j;
  }
  return tokens;
}

inline TokenSequence segment_document(std::string doc_id, std::string_view text,
                                      const Lexicon& lexicon) {
  return {std::move(doc_id), segment(text, lexicon)};
}

/// Whitespace tokenizer used for pre-segmented or alphabetic corpora.
inline std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> tokens;
  const std::u32string cps = utf8::decode(text);
  std::u32string cur;
  for (char32_t c : cps) {
    if (utf8::is_space(c)) {
      if (!cur.empty()) tokens.push_back(utf8::encode(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) tokens.push_back(utf8::encode(cur));
  return tokens;
}

}  // namespace topicshelf
