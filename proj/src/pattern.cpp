#include "seqfuzz/pattern.hpp"

#include <bitset>
#include <cstddef>
#include <limits>
#include <memory>
#include <vector>

namespace seqfuzz {
namespace {

constexpr std::size_t kUnbounded = std::numeric_limits<std::size_t>::max();
// Extra repetitions drawn beyond the minimum for open-ended quantifiers.
constexpr std::size_t kOpenSlack = 4;

using CharSet = std::bitset<256>;

struct Alternation;

struct Atom {
  enum class Kind { Set, Group } kind = Kind::Set;
  CharSet set;
  std::shared_ptr<Alternation> group;
  std::size_t min = 1;
  std::size_t max = 1;
};

struct Alternation {
  std::vector<std::vector<Atom>> branches;
};

struct Unsupported {};

CharSet printable() {
  CharSet s;
  for (int c = 0x20; c < 0x7f; ++c) s.set(static_cast<std::size_t>(c));
  return s;
}

CharSet range(int lo, int hi) {
  CharSet s;
  for (int c = lo; c <= hi; ++c) s.set(static_cast<std::size_t>(c));
  return s;
}

CharSet digits() { return range('0', '9'); }

CharSet word() {
  CharSet s = range('a', 'z') | range('A', 'Z') | digits();
  s.set('_');
  return s;
}

CharSet spaces() {
  CharSet s;
  for (char c : {' ', '\t', '\n', '\r', '\f', '\v'}) s.set(static_cast<unsigned char>(c));
  return s;
}

class Parser {
public:
  explicit Parser(std::string_view text) : text_(text) {}

  Alternation parse() {
    if (peek() == '^') ++pos_;
    Alternation alt = alternation();
    if (pos_ != text_.size()) throw Unsupported{};
    return alt;
  }

private:
  bool done() const { return pos_ >= text_.size(); }
  char peek() const { return done() ? '\0' : text_[pos_]; }

  Alternation alternation() {
    Alternation alt;
    alt.branches.push_back(sequence());
    while (!done() && peek() == '|') {
      ++pos_;
      alt.branches.push_back(sequence());
    }
    return alt;
  }

  std::vector<Atom> sequence() {
    std::vector<Atom> atoms;
    while (!done() && peek() != '|' && peek() != ')') {
      if (peek() == '$' && pos_ + 1 == text_.size()) {
        ++pos_;
        break;
      }
      Atom atom = primary();
      quantifier(atom);
      atoms.push_back(std::move(atom));
    }
    return atoms;
  }

  Atom primary() {
    Atom atom;
    char c = text_[pos_++];
    switch (c) {
    case '(': {
      if (peek() == '?') {
        // Only non-capturing groups are understood.
        if (pos_ + 1 < text_.size() && text_[pos_ + 1] == ':') {
          pos_ += 2;
        } else {
          throw Unsupported{};
        }
      }
      atom.kind = Atom::Kind::Group;
      atom.group = std::make_shared<Alternation>(alternation());
      if (peek() != ')') throw Unsupported{};
      ++pos_;
      return atom;
    }
    case '[':
      atom.set = char_class();
      return atom;
    case '.':
      atom.set = printable();
      return atom;
    case '\\':
      atom.set = escape(false);
      return atom;
    case '*':
    case '+':
    case '?':
    case '{':
    case ')':
    case '^':
    case '$':
      throw Unsupported{};
    default:
      atom.set.set(static_cast<unsigned char>(c));
      return atom;
    }
  }

  CharSet escape(bool in_class) {
    if (done()) throw Unsupported{};
    char c = text_[pos_++];
    switch (c) {
    case 'd': return digits();
    case 'D': return printable() & ~digits();
    case 'w': return word();
    case 'W': return printable() & ~word();
    case 's': return spaces();
    case 'S': return printable() & ~spaces();
    case 'n': return range('\n', '\n');
    case 't': return range('\t', '\t');
    case 'r': return range('\r', '\r');
    case 'x': {
      if (pos_ + 2 > text_.size()) throw Unsupported{};
      int value = std::stoi(std::string(text_.substr(pos_, 2)), nullptr, 16);
      pos_ += 2;
      return range(value, value);
    }
    case 'b':
      if (in_class) return range('\b', '\b');
      throw Unsupported{};
    default:
      if ((c >= '0' && c <= '9') || c == 'B') throw Unsupported{};
      return range(static_cast<unsigned char>(c), static_cast<unsigned char>(c));
    }
  }

  int class_char() {
    if (done()) throw Unsupported{};
    char c = text_[pos_++];
    if (c == '\\') {
      CharSet s = escape(true);
      if (s.count() != 1) return -1 - static_cast<int>(pos_);
      for (std::size_t i = 0; i < 256; ++i)
        if (s.test(i)) return static_cast<int>(i);
    }
    return static_cast<unsigned char>(c);
  }

  CharSet char_class() {
    bool negate = false;
    if (peek() == '^') {
      negate = true;
      ++pos_;
    }
    CharSet s;
    bool first = true;
    while (true) {
      if (done()) throw Unsupported{};
      if (peek() == ']' && !first) {
        ++pos_;
        break;
      }
      first = false;
      std::size_t start = pos_;
      if (peek() == '\\') {
        ++pos_;
        CharSet esc = escape(true);
        if (esc.count() != 1) {
          s |= esc;
          continue;
        }
        pos_ = start;
      }
      int lo = class_char();
      if (peek() == '-' && pos_ + 1 < text_.size() && text_[pos_ + 1] != ']') {
        ++pos_;
        int hi = class_char();
        if (lo < 0 || hi < 0 || hi < lo) throw Unsupported{};
        s |= range(lo, hi);
      } else {
        s.set(static_cast<std::size_t>(lo));
      }
    }
    if (negate) s = printable() & ~s;
    return s;
  }

  std::size_t number() {
    std::size_t value = 0;
    bool any = false;
    while (!done() && peek() >= '0' && peek() <= '9') {
      value = value * 10 + static_cast<std::size_t>(peek() - '0');
      if (value > 100000) throw Unsupported{};
      ++pos_;
      any = true;
    }
    if (!any) throw Unsupported{};
    return value;
  }

  void quantifier(Atom& atom) {
    if (done()) return;
    switch (peek()) {
    case '*': atom.min = 0; atom.max = kUnbounded; ++pos_; break;
    case '+': atom.min = 1; atom.max = kUnbounded; ++pos_; break;
    case '?': atom.min = 0; atom.max = 1; ++pos_; break;
    case '{': {
      ++pos_;
      atom.min = number();
      atom.max = atom.min;
      if (peek() == ',') {
        ++pos_;
        atom.max = peek() == '}' ? kUnbounded : number();
      }
      if (peek() != '}' || atom.max < atom.min) throw Unsupported{};
      ++pos_;
      break;
    }
    default: return;
    }
    // Lazy/possessive suffixes do not change the language.
    if (!done() && (peek() == '?' || peek() == '+')) ++pos_;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::size_t saturating_mul(std::size_t a, std::size_t b) {
  if (a != 0 && b > kUnbounded / a) return kUnbounded;
  return a * b;
}

std::size_t saturating_add(std::size_t a, std::size_t b) {
  return a > kUnbounded - b ? kUnbounded : a + b;
}

// Returns kUnbounded when the sub-expression can match nothing at all.
std::size_t min_length(const Alternation& alt);

std::size_t min_length(const Atom& atom) {
  if (atom.min == 0) return 0;
  std::size_t one = 1;
  if (atom.kind == Atom::Kind::Set) {
    if (atom.set.none()) return kUnbounded;
  } else {
    one = min_length(*atom.group);
  }
  return saturating_mul(one, atom.min);
}

std::size_t min_length(const Alternation& alt) {
  std::size_t best = kUnbounded;
  for (const auto& branch : alt.branches) {
    std::size_t total = 0;
    for (const auto& atom : branch) total = saturating_add(total, min_length(atom));
    best = std::min(best, total);
  }
  return best;
}

char pick(const CharSet& set, Rng& rng) {
  std::size_t n = rng.below(set.count());
  for (std::size_t i = 0; i < 256; ++i) {
    if (!set.test(i)) continue;
    if (n-- == 0) return static_cast<char>(i);
  }
  return '\0';
}

void emit(const Alternation& alt, Rng& rng, bool minimal, std::string& out);

void emit(const Atom& atom, Rng& rng, bool minimal, std::string& out) {
  if (atom.kind == Atom::Kind::Set && atom.set.none()) return;
  std::size_t count = atom.min;
  if (!minimal) {
    std::size_t hi = atom.max == kUnbounded ? atom.min + kOpenSlack : atom.max;
    hi = std::min(hi, atom.min + kOpenSlack);
    count = rng.between(atom.min, hi);
  }
  for (std::size_t i = 0; i < count; ++i) {
    if (atom.kind == Atom::Kind::Set) {
      out.push_back(pick(atom.set, rng));
    } else {
      emit(*atom.group, rng, minimal, out);
    }
  }
}

void emit(const Alternation& alt, Rng& rng, bool minimal, std::string& out) {
  std::vector<std::size_t> viable;
  for (std::size_t b = 0; b < alt.branches.size(); ++b) {
    Alternation single;
    single.branches.push_back(alt.branches[b]);
    if (min_length(single) != kUnbounded) viable.push_back(b);
  }
  if (viable.empty()) return;
  std::size_t chosen = viable[minimal ? 0 : rng.below(viable.size())];
  if (minimal) {
    std::size_t best = kUnbounded;
    for (std::size_t b : viable) {
      Alternation single;
      single.branches.push_back(alt.branches[b]);
      std::size_t len = min_length(single);
      if (len < best) {
        best = len;
        chosen = b;
      }
    }
  }
  for (const auto& atom : alt.branches[chosen]) emit(atom, rng, minimal, out);
}

} // namespace

std::optional<std::string> generate_from_pattern(std::string_view pattern, Rng& rng,
                                                 std::size_t max_length) {
  Alternation root;
  try {
    root = Parser(pattern).parse();
  } catch (const Unsupported&) {
    return std::nullopt;
  } catch (const std::exception&) {
    return std::nullopt;
  }
  std::size_t shortest = min_length(root);
  if (shortest == kUnbounded || shortest > max_length) return std::nullopt;

  std::string out;
  emit(root, rng, false, out);
  if (out.size() > max_length) {
    out.clear();
    emit(root, rng, true, out);
  }
  return out;
}

} // namespace seqfuzz
