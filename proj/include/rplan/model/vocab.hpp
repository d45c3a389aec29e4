#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace rplan::model {

// Closed domain vocabulary: specials, punctuation, digits, catalog symbols,
// and every template word the renderers can produce. Ids are stable across
// save/load (the token list is stored in checkpoints).
class Vocab {
 public:
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kGo = 3;
  static constexpr int kSep = 4;

  static Vocab domain();                       // built from the catalog + templates
  static Vocab from_tokens(std::vector<std::string> tokens);

  int id(std::string_view token) const;        // throws VocabError on unknown
  const std::string& token(int id) const;
  int size() const { return static_cast<int>(tokens_.size()); }

  int marker(int query_index) const;           // rationale stream marker <r1>..<rm>
  int num_markers() const { return num_markers_; }

  std::vector<int> encode(std::string_view text) const;
  // inverse of tokenize for template text: no space before ,.;:)? or after (,
  // none around -; special tokens are skipped
  std::string decode(const std::vector<int>& ids) const;

  const std::vector<std::string>& tokens() const { return tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> index_;
  int num_markers_ = 0;
  void rebuild_index();
};

}  // namespace rplan::model
