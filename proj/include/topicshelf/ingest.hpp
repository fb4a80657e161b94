#pragma once

// Raw download -> clean UTF-8 plain text. Covers decoding, extraction of the
// main text container from saved HTML pages, traditional-to-simplified
// normalization and the empty/modern-text/index-page screening that precedes
// corpus construction.

#include <iconv.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cerrno>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "topicshelf/error.hpp"
#include "topicshelf/segment.hpp"
#include "topicshelf/utf8.hpp"

namespace topicshelf::ingest {

struct RawDocument {
  std::filesystem::path source_path;
  std::string payload;
  std::optional<std::string> encoding_hint;
};

struct CleanDocument {
  std::string doc_id;  // relative path, ".txt" extension
  std::string label;
  std::string text;
  double link_line_ratio = 0.0;
};

// ---------------------------------------------------------------------------
// Decoding

namespace detail {

inline std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

class Iconv {
 public:
  Iconv(const std::string& from) : cd_(iconv_open("UTF-8", from.c_str())) {}
  ~Iconv() {
    if (valid()) iconv_close(cd_);
  }
  Iconv(const Iconv&) = delete;
  Iconv& operator=(const Iconv&) = delete;

  bool valid() const { return cd_ != reinterpret_cast<iconv_t>(-1); }

  std::optional<std::string> convert(std::string_view in) {
    std::string out(in.size() * 4 + 16, '\0');
    char* src = const_cast<char*>(in.data());
    std::size_t src_left = in.size();
    char* dst = out.data();
    std::size_t dst_left = out.size();
    while (src_left > 0) {
      if (iconv(cd_, &src, &src_left, &dst, &dst_left) == static_cast<std::size_t>(-1)) {
        if (errno == E2BIG) {
          const std::size_t used = out.size() - dst_left;
          out.resize(out.size() * 2);
          dst = out.data() + used;
          dst_left = out.size() - used;
          continue;
        }
        return std::nullopt;
      }
    }
    out.resize(out.size() - dst_left);
    return out;
  }

 private:
  iconv_t cd_;
};

inline std::optional<std::string> convert_to_utf8(std::string_view bytes,
                                                  const std::string& encoding) {
  const std::string enc = lower_ascii(encoding);
  if (enc == "utf-8" || enc == "utf8") {
    if (utf8::is_valid(bytes)) return std::string(bytes);
    return std::nullopt;
  }
  // gb2312/gbk declarations are routinely applied to GB18030 content
  const std::string target = (enc == "gb2312" || enc == "gbk") ? "GB18030" : encoding;
  Iconv cd(target);
  if (!cd.valid()) return std::nullopt;
  auto out = cd.convert(bytes);
  if (out && !utf8::is_valid(*out)) return std::nullopt;
  return out;
}

/// The charset named by an HTML meta declaration in the first 2 KiB.
inline std::optional<std::string> declared_charset(std::string_view payload) {
  const std::string head = lower_ascii(payload.substr(0, 2048));
  const auto pos = head.find("charset=");
  if (pos == std::string::npos) return std::nullopt;
  std::size_t i = pos + 8;
  while (i < head.size() && (head[i] == '"' || head[i] == '\'')) ++i;
  std::size_t j = i;
  while (j < head.size() && (std::isalnum(static_cast<unsigned char>(head[j])) ||
                             head[j] == '-' || head[j] == '_')) {
    ++j;
  }
  if (j == i) return std::nullopt;
  return head.substr(i, j - i);
}

}  // namespace detail

inline constexpr std::string_view kLegacyCjkEncoding = "GB18030";

/// Decodes to UTF-8 trying, in order: the explicit hint, a charset declared
/// in the document, UTF-8, then GB18030. A leading BOM is removed.
inline std::string decode_payload(const RawDocument& raw) {
  std::vector<std::string> attempts;
  if (raw.encoding_hint) attempts.push_back(*raw.encoding_hint);
  if (auto declared = detail::declared_charset(raw.payload)) attempts.push_back(*declared);
  attempts.emplace_back("UTF-8");
  attempts.emplace_back(kLegacyCjkEncoding);
  for (const auto& enc : attempts) {
    if (auto out = detail::convert_to_utf8(raw.payload, enc)) {
      if (out->starts_with("\xEF\xBB\xBF")) out->erase(0, 3);
      return *out;
    }
  }
  throw Error(ErrorKind::DecodeError,
              raw.source_path.string() + ": no encoding decodes the payload");
}

// ---------------------------------------------------------------------------
// HTML container extraction

/// Parsed form of the small selector language accepted by extract_text:
/// "tag", ".class", "#id", "tag.class", "tag#id", or a bare name that
/// matches a tag, a class token or an id.
struct Selector {
  std::string tag;
  std::string cls;
  std::string id;
  std::string any;

  static Selector parse(std::string_view text) {
    Selector sel;
    text = topicshelf::detail::trim(text);
    if (text.empty()) throw Error(ErrorKind::InvalidArgument, "empty selector");
    const auto mark = text.find_first_of(".#");
    if (mark == std::string_view::npos) {
      sel.any = detail::lower_ascii(text);
      return sel;
    }
    sel.tag = detail::lower_ascii(text.substr(0, mark));
    const auto rest = text.substr(mark + 1);
    if (text[mark] == '.') {
      sel.cls = std::string(rest);
    } else {
      sel.id = std::string(rest);
    }
    return sel;
  }
};

inline constexpr std::string_view kDefaultSelector = "snr2";

struct ExtractedText {
  std::string text;
  std::size_t lines = 0;
  std::size_t link_lines = 0;

  double link_line_ratio() const {
    return lines == 0 ? 0.0 : static_cast<double>(link_lines) / static_cast<double>(lines);
  }
};

namespace detail {

struct Tag {
  std::string name;  // lower case
  bool closing = false;
  bool self_closing = false;
  std::map<std::string, std::string> attrs;
  std::size_t end = 0;  // offset one past '>'
};

inline bool is_void_element(std::string_view name) {
  static const std::set<std::string_view> kVoid = {
      "area", "base", "br", "col", "embed", "hr", "img", "input",
      "link", "meta", "param", "source", "track", "wbr"};
  return kVoid.contains(name);
}

inline bool is_block_element(std::string_view name) {
  static const std::set<std::string_view> kBlock = {
      "address", "article", "blockquote", "br", "dd", "div", "dl", "dt",
      "footer", "h1", "h2", "h3", "h4", "h5", "h6", "header", "hr", "li",
      "ol", "p", "pre", "section", "table", "td", "th", "tr", "ul"};
  return kBlock.contains(name);
}

inline bool is_name_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == ':';
}

/// Parses a tag starting at html[pos] == '<'. Returns nullopt for text that
/// only looks like a tag (e.g. "a < b").
inline std::optional<Tag> parse_tag(std::string_view html, std::size_t pos) {
  Tag tag;
  std::size_t i = pos + 1;
  if (i < html.size() && html[i] == '/') {
    tag.closing = true;
    ++i;
  }
  const std::size_t name_start = i;
  while (i < html.size() && is_name_char(html[i])) ++i;
  if (i == name_start || !std::isalpha(static_cast<unsigned char>(html[name_start]))) {
    return std::nullopt;
  }
  tag.name = lower_ascii(html.substr(name_start, i - name_start));
  while (i < html.size()) {
    const char c = html[i];
    if (c == '>') {
      tag.end = i + 1;
      return tag;
    }
    if (c == '/') {
      tag.self_closing = true;
      ++i;
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    const std::size_t attr_start = i;
    while (i < html.size() && html[i] != '=' && html[i] != '>' &&
           !std::isspace(static_cast<unsigned char>(html[i])) && html[i] != '/') {
      ++i;
    }
    std::string attr = lower_ascii(html.substr(attr_start, i - attr_start));
    while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i]))) ++i;
    std::string value;
    if (i < html.size() && html[i] == '=') {
      ++i;
      while (i < html.size() && std::isspace(static_cast<unsigned char>(html[i]))) ++i;
      if (i < html.size() && (html[i] == '"' || html[i] == '\'')) {
        const char quote = html[i++];
        const std::size_t vstart = i;
        while (i < html.size() && html[i] != quote) ++i;
        value = std::string(html.substr(vstart, i - vstart));
        if (i < html.size()) ++i;
      } else {
        const std::size_t vstart = i;
        while (i < html.size() && !std::isspace(static_cast<unsigned char>(html[i])) &&
               html[i] != '>') {
          ++i;
        }
        value = std::string(html.substr(vstart, i - vstart));
      }
    }
    if (!attr.empty()) tag.attrs.emplace(std::move(attr), std::move(value));
  }
  return std::nullopt;
}

inline bool has_token(std::string_view list, std::string_view token) {
  std::size_t i = 0;
  while (i < list.size()) {
    while (i < list.size() && std::isspace(static_cast<unsigned char>(list[i]))) ++i;
    std::size_t j = i;
    while (j < list.size() && !std::isspace(static_cast<unsigned char>(list[j]))) ++j;
    if (list.substr(i, j - i) == token) return true;
    i = j;
  }
  return false;
}

inline bool matches(const Tag& tag, const Selector& sel) {
  const auto attr = [&](const char* name) -> std::string_view {
    auto it = tag.attrs.find(name);
    return it == tag.attrs.end() ? std::string_view{} : std::string_view(it->second);
  };
  if (!sel.any.empty()) {
    return tag.name == sel.any || has_token(attr("class"), sel.any) || attr("id") == sel.any;
  }
  if (!sel.tag.empty() && tag.name != sel.tag) return false;
  if (!sel.cls.empty() && !has_token(attr("class"), sel.cls)) return false;
  if (!sel.id.empty() && attr("id") != sel.id) return false;
  return true;
}

// Skips comments, doctype and processing instructions starting at '<'.
inline std::size_t skip_markup_declaration(std::string_view html, std::size_t pos) {
  if (html.substr(pos, 4) == "<!--") {
    const auto end = html.find("-->", pos + 4);
    return end == std::string_view::npos ? html.size() : end + 3;
  }
  const auto end = html.find('>', pos);
  return end == std::string_view::npos ? html.size() : end + 1;
}

inline void append_entity(std::string& out, std::string_view entity) {
  static const std::unordered_map<std::string_view, char32_t> kNamed = {
      {"amp", '&'},     {"lt", '<'},      {"gt", '>'},      {"quot", '"'},
      {"apos", '\''},   {"nbsp", ' '},    {"ensp", ' '},    {"emsp", ' '},
      {"middot", 0xB7}, {"hellip", 0x2026}, {"mdash", 0x2014}, {"ndash", 0x2013},
      {"ldquo", 0x201C}, {"rdquo", 0x201D}, {"lsquo", 0x2018}, {"rsquo", 0x2019},
      {"copy", 0xA9}};
  if (!entity.empty() && entity[0] == '#') {
    std::uint32_t cp = 0;
    bool ok = entity.size() > 1;
    if (entity.size() > 1 && (entity[1] == 'x' || entity[1] == 'X')) {
      ok = entity.size() > 2;
      for (char c : entity.substr(2)) {
        if (!std::isxdigit(static_cast<unsigned char>(c))) ok = false;
        else cp = cp * 16 + static_cast<std::uint32_t>(std::isdigit(static_cast<unsigned char>(c)) ? c - '0' : (c | 0x20) - 'a' + 10);
        if (cp > 0x10FFFF) ok = false;
      }
    } else {
      for (char c : entity.substr(1)) {
        if (!std::isdigit(static_cast<unsigned char>(c))) ok = false;
        else cp = cp * 10 + static_cast<std::uint32_t>(c - '0');
        if (cp > 0x10FFFF) ok = false;
      }
    }
    if (ok && cp != 0 && !(cp >= 0xD800 && cp <= 0xDFFF)) {
      utf8::append(out, cp);
      return;
    }
  } else if (auto it = kNamed.find(entity); it != kNamed.end()) {
    utf8::append(out, it->second);
    return;
  }
  out += '&';
  out += entity;
  out += ';';
}

// Accumulates container text line by line, remembering whether each line's
// visible characters all came from inside <a> elements.
class TextSink {
 public:
  void text(std::string_view chunk, bool in_link) {
    for (std::size_t i = 0; i < chunk.size(); ++i) {
      const char c = chunk[i];
      if (c == '\n' || c == '\r') {
        newline();
        continue;
      }
      if (c == '&') {
        const auto semi = chunk.find(';', i + 1);
        if (semi != std::string_view::npos && semi - i <= 10) {
          append_entity(line_, chunk.substr(i + 1, semi - i - 1));
          note_visible(in_link);
          i = semi;
          continue;
        }
      }
      line_ += (c == '\t') ? ' ' : c;
      if (c != ' ' && c != '\t') note_visible(in_link);
    }
  }

  void newline() {
    std::string_view trimmed = topicshelf::detail::trim(line_);
    // collapse full-width spaces at the edges too
    while (trimmed.starts_with("\xE3\x80\x80")) trimmed.remove_prefix(3);
    while (trimmed.ends_with("\xE3\x80\x80")) trimmed.remove_suffix(3);
    trimmed = topicshelf::detail::trim(trimmed);
    if (!trimmed.empty()) {
      if (!out_.text.empty()) out_.text += '\n';
      out_.text += trimmed;
      ++out_.lines;
      if (visible_ && all_link_) ++out_.link_lines;
    }
    line_.clear();
    visible_ = false;
    all_link_ = true;
  }

  ExtractedText finish() {
    newline();
    return std::move(out_);
  }

 private:
  void note_visible(bool in_link) {
    visible_ = true;
    if (!in_link) all_link_ = false;
  }

  ExtractedText out_;
  std::string line_;
  bool visible_ = false;
  bool all_link_ = true;
};

inline ExtractedText collect_text(std::string_view html, std::size_t begin,
                                  std::string_view container_tag) {
  TextSink sink;
  int depth = 1;
  int link_depth = 0;
  std::size_t i = begin;
  while (i < html.size()) {
    const auto lt = html.find('<', i);
    const std::size_t text_end = lt == std::string_view::npos ? html.size() : lt;
    sink.text(html.substr(i, text_end - i), link_depth > 0);
    if (lt == std::string_view::npos) break;
    if (html.substr(lt, 2) == "<!" || html.substr(lt, 2) == "<?") {
      i = skip_markup_declaration(html, lt);
      continue;
    }
    auto tag = parse_tag(html, lt);
    if (!tag) {
      sink.text("<", link_depth > 0);
      i = lt + 1;
      continue;
    }
    i = tag->end;
    if (!tag->closing && (tag->name == "script" || tag->name == "style")) {
      const std::string close = "</" + tag->name;
      const auto end = lower_ascii(html.substr(i)).find(close);
      if (end == std::string::npos) break;
      i += end;
      continue;
    }
    if (tag->name == "a") link_depth = std::max(0, link_depth + (tag->closing ? -1 : 1));
    if (tag->name == container_tag && !is_void_element(tag->name) && !tag->self_closing) {
      depth += tag->closing ? -1 : 1;
      if (depth == 0) break;
    }
    if (is_block_element(tag->name)) sink.newline();
  }
  return sink.finish();
}

}  // namespace detail

/// Text inside the first element matching `selector`, with nested markup
/// removed and character references decoded. Also reports how many lines
/// consist solely of link text, which index pages have in abundance.
inline ExtractedText extract_container(std::string_view html, const Selector& selector) {
  std::size_t i = 0;
  while (i < html.size()) {
    const auto lt = html.find('<', i);
    if (lt == std::string_view::npos) break;
    if (html.substr(lt, 2) == "<!" || html.substr(lt, 2) == "<?") {
      i = detail::skip_markup_declaration(html, lt);
      continue;
    }
    auto tag = detail::parse_tag(html, lt);
    if (!tag) {
      i = lt + 1;
      continue;
    }
    if (!tag->closing && detail::matches(*tag, selector)) {
      if (tag->self_closing || detail::is_void_element(tag->name)) return {};
      return detail::collect_text(html, tag->end, tag->name);
    }
    i = tag->end;
    if (!tag->closing && (tag->name == "script" || tag->name == "style")) {
      const auto end = detail::lower_ascii(html.substr(i)).find("</" + tag->name);
      if (end == std::string::npos) break;
      i += end;
    }
  }
  throw Error(ErrorKind::NoContainer, "no element matches the container selector");
}

inline std::string extract_text(const RawDocument& raw,
                                std::string_view container_selector = kDefaultSelector) {
  const std::string html = decode_payload(raw);
  return extract_container(html, Selector::parse(container_selector)).text;
}

/// Line-normalized plain text: LF endings, trimmed lines, blank lines removed.
inline std::string normalize_plain_text(std::string_view text) {
  std::string out;
  topicshelf::detail::for_each_line(text, [&](std::string_view line) {
    line = topicshelf::detail::trim(line);
    if (line.empty()) return;
    if (!out.empty()) out += '\n';
    out += line;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Traditional -> simplified

/// Single-character traditional-to-simplified table. Chains (a->b, b->c) are
/// resolved to their end point and cycles to the smallest code point in the
/// cycle, so conversion is idempotent. Lines whose target lists several
/// candidates keep the first and record a note.
class SimplifiedMap {
 public:
  SimplifiedMap() = default;

  static SimplifiedMap load(const std::filesystem::path& path) {
    const std::string raw = topicshelf::detail::read_text_file(path);
    const std::string_view text = topicshelf::detail::strip_bom(raw);
    if (!utf8::is_valid(text)) {
      throw Error(ErrorKind::EncodingError, path.string() + " is not valid UTF-8");
    }
    std::vector<std::pair<char32_t, std::u32string>> rows;
    topicshelf::detail::for_each_line(text, [&](std::string_view line) {
      line = topicshelf::detail::trim(line);
      if (line.empty() || line.starts_with('#')) return;
      const auto tab = line.find_first_of(" \t");
      if (tab == std::string_view::npos) {
        throw Error(ErrorKind::FormatError, "bad mapping line in " + path.string());
      }
      const std::u32string from = utf8::decode(line.substr(0, tab));
      std::u32string to;
      for (char32_t c : utf8::decode(line.substr(tab + 1))) {
        if (!utf8::is_space(c) && c != ',') to.push_back(c);
      }
      if (from.size() != 1 || to.empty()) {
        throw Error(ErrorKind::FormatError, "bad mapping line in " + path.string());
      }
      rows.emplace_back(from[0], std::move(to));
    });
    return SimplifiedMap(rows);
  }

  explicit SimplifiedMap(const std::vector<std::pair<char32_t, std::u32string>>& rows) {
    std::unordered_map<char32_t, char32_t> direct;
    for (const auto& [from, to] : rows) {
      if (to.size() > 1) {
        notes_.push_back(utf8::encode(from) + ": multiple candidates " + utf8::encode(to) +
                         ", using " + utf8::encode(to[0]));
      }
      if (!direct.emplace(from, to[0]).second) {
        notes_.push_back(utf8::encode(from) + ": duplicate entry ignored");
      }
    }
    for (const auto& [from, to] : direct) {
      if (from == to) continue;
      std::vector<char32_t> path{from};
      char32_t cur = to;
      while (true) {
        auto it = direct.find(cur);
        if (it == direct.end() || it->second == cur) break;
        if (std::find(path.begin(), path.end(), cur) != path.end()) {
          const auto start = std::find(path.begin(), path.end(), cur);
          cur = *std::min_element(start, path.end());
          notes_.push_back(utf8::encode(from) + ": cyclic mapping resolved to " +
                           utf8::encode(cur));
          break;
        }
        path.push_back(cur);
        cur = it->second;
      }
      if (from != cur) map_[from] = cur;
    }
    std::sort(notes_.begin(), notes_.end());
  }

  char32_t map(char32_t c) const {
    auto it = map_.find(c);
    return it == map_.end() ? c : it->second;
  }

  std::string to_simplified(std::string_view text) const {
    std::string out;
    out.reserve(text.size());
    std::size_t pos = 0;
    while (pos < text.size()) {
      const std::size_t start = pos;
      if (auto cp = utf8::next(text, pos)) {
        utf8::append(out, map(*cp));
      } else {
        out.push_back(text[start]);
        pos = start + 1;
      }
    }
    return out;
  }

  std::size_t size() const noexcept { return map_.size(); }
  const std::vector<std::string>& notes() const noexcept { return notes_; }

 private:
  std::unordered_map<char32_t, char32_t> map_;
  std::vector<std::string> notes_;
};

// ---------------------------------------------------------------------------
// Screening

struct FilterOptions {
  std::vector<std::string> modern_markers;
  /// A document is reported as a probable index page when at least this
  /// share of its lines are pure link text.
  double index_link_ratio = 0.5;
  std::size_t index_min_lines = 5;
};

struct FlaggedDocument {
  CleanDocument doc;
  std::string reason;
};

struct FilterResult {
  std::vector<CleanDocument> kept;
  std::vector<FlaggedDocument> flagged;
  std::vector<std::string> dropped;  // doc_ids of empty documents
};

inline std::vector<std::string> default_modern_markers() {
  return {"我们", "你们", "他们", "什么", "这个", "那个", "这样", "怎么",
          "没有", "现在", "但是", "因为", "所以", "已经", "的话", "一些"};
}

inline FilterResult filter_documents(std::vector<CleanDocument> docs,
                                     const FilterOptions& options) {
  std::sort(docs.begin(), docs.end(),
            [](const auto& a, const auto& b) { return a.doc_id < b.doc_id; });
  FilterResult result;
  for (auto& doc : docs) {
    if (topicshelf::detail::trim(doc.text).empty()) {
      result.dropped.push_back(doc.doc_id);
      continue;
    }
    std::string reason;
    for (const auto& marker : options.modern_markers) {
      if (!marker.empty() && doc.text.find(marker) != std::string::npos) {
        reason = "modern marker " + marker;
        break;
      }
    }
    if (reason.empty() && doc.link_line_ratio >= options.index_link_ratio) {
      const auto lines = 1 + static_cast<std::size_t>(std::count(doc.text.begin(), doc.text.end(), '\n'));
      if (lines >= options.index_min_lines) reason = "probable index page";
    }
    if (reason.empty()) {
      result.kept.push_back(std::move(doc));
    } else {
      result.flagged.push_back({std::move(doc), std::move(reason)});
    }
  }
  return result;
}

inline FilterResult filter_documents(std::vector<CleanDocument> docs,
                                     const std::vector<std::string>& modern_markers) {
  FilterOptions options;
  options.modern_markers = modern_markers;
  return filter_documents(std::move(docs), options);
}

// ---------------------------------------------------------------------------
// Directory pipeline

inline std::string label_for(const std::filesystem::path& relative) {
  std::filesystem::path p = relative;
  p.replace_extension();
  return p.generic_string();
}

inline std::string doc_id_for(const std::filesystem::path& relative) {
  std::filesystem::path p = relative;
  p.replace_extension(".txt");
  return p.generic_string();
}

struct IngestOptions {
  std::string selector{kDefaultSelector};
  std::optional<std::string> encoding_hint;
  /// Relative path prefixes skipped entirely (e.g. a modern-fiction folder).
  std::vector<std::string> exclude_prefixes;
  FilterOptions filter{default_modern_markers()};
  unsigned workers = 0;  // 0: hardware concurrency
};

struct IngestRecord {
  std::string source;  // relative path of the input
  std::string doc_id;
  std::string action;  // kept | flagged | dropped | excluded | error
  std::string reason;
};

struct IngestReport {
  std::vector<IngestRecord> records;

  std::size_t count(std::string_view action) const {
    return static_cast<std::size_t>(std::count_if(
        records.begin(), records.end(), [&](const auto& r) { return r.action == action; }));
  }
};

inline bool is_html_path(const std::filesystem::path& p) {
  const std::string ext = detail::lower_ascii(p.extension().string());
  return ext == ".html" || ext == ".htm" || ext == ".xhtml";
}

/// Converts one input file. Throws on decode/extraction failure.
inline CleanDocument clean_file(const RawDocument& raw, const std::filesystem::path& relative,
                                const IngestOptions& options, const SimplifiedMap& t2s) {
  CleanDocument doc;
  doc.doc_id = doc_id_for(relative);
  doc.label = label_for(relative);
  const std::string decoded = decode_payload(raw);
  if (is_html_path(raw.source_path)) {
    auto extracted = extract_container(decoded, Selector::parse(options.selector));
    doc.text = std::move(extracted.text);
    doc.link_line_ratio = extracted.link_line_ratio();
  } else {
    doc.text = normalize_plain_text(decoded);
  }
  doc.text = t2s.to_simplified(doc.text);
  return doc;
}

inline void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
}

/// Walks `src`, writes kept documents to `dst` (mirrored paths, .txt) and
/// flagged ones to `review_dir`, and returns one record per input file.
inline IngestReport ingest_directory(const std::filesystem::path& src,
                                     const std::filesystem::path& dst,
                                     const std::filesystem::path& review_dir,
                                     const IngestOptions& options,
                                     const SimplifiedMap& t2s) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(src)) throw Error(ErrorKind::IoError, src.string() + " is not a directory");

  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(src)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = detail::lower_ascii(entry.path().extension().string());
    if (ext == ".txt" || is_html_path(entry.path())) files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());

  IngestReport report;
  std::vector<std::optional<CleanDocument>> cleaned(files.size());
  std::vector<IngestRecord> records(files.size());
  std::atomic<std::size_t> next{0};

  const auto work = [&] {
    for (std::size_t i = next++; i < files.size(); i = next++) {
      const fs::path rel = fs::relative(files[i], src);
      IngestRecord& rec = records[i];
      rec.source = rel.generic_string();
      rec.doc_id = doc_id_for(rel);
      const bool excluded = std::any_of(
          options.exclude_prefixes.begin(), options.exclude_prefixes.end(),
          [&](const std::string& prefix) { return rec.source.starts_with(prefix); });
      if (excluded) {
        rec.action = "excluded";
        rec.reason = "excluded path";
        continue;
      }
      try {
        RawDocument raw{files[i], topicshelf::detail::read_text_file(files[i]),
                        options.encoding_hint};
        cleaned[i] = clean_file(raw, rel, options, t2s);
      } catch (const Error& e) {
        rec.action = "error";
        rec.reason = e.what();
      }
    }
  };
  unsigned workers = options.workers ? options.workers : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(files.size())));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
  }

  std::vector<CleanDocument> docs;
  std::unordered_map<std::string, std::size_t> index_of;
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!cleaned[i]) continue;
    if (!index_of.emplace(cleaned[i]->doc_id, i).second) {
      records[i].action = "error";
      records[i].reason = "another input already produced " + cleaned[i]->doc_id;
      continue;
    }
    docs.push_back(std::move(*cleaned[i]));
  }
  FilterResult filtered = filter_documents(std::move(docs), options.filter);
  for (const auto& doc : filtered.kept) {
    write_text_file(dst / doc.doc_id, doc.text);
    records[index_of.at(doc.doc_id)].action = "kept";
  }
  for (const auto& f : filtered.flagged) {
    write_text_file(review_dir / f.doc.doc_id, f.doc.text);
    auto& rec = records[index_of.at(f.doc.doc_id)];
    rec.action = "flagged";
    rec.reason = f.reason;
  }
  for (const auto& id : filtered.dropped) {
    auto& rec = records[index_of.at(id)];
    rec.action = "dropped";
    rec.reason = "empty text";
  }
  report.records = std::move(records);
  return report;
}

/// One JSON object per line: {"source","doc_id","action","reason"}.
inline void write_report(const IngestReport& report, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  for (const auto& r : report.records) {
    nlohmann::ordered_json j;
    j["source"] = r.source;
    j["doc_id"] = r.doc_id;
    j["action"] = r.action;
    j["reason"] = r.reason;
    out << j.dump() << '\n';
  }
}

}  // namespace topicshelf::ingest
