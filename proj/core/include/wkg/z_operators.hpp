#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "wkg/history.hpp"

namespace wkg {

// Canonical word ∂_t^a ∂_r^b L_r^j; the boosts act first.
struct Word {
  int a = 0;
  int b = 0;
  int j = 0;

  int order() const { return a + b + j; }
  int rank() const { return j; }
  std::string label() const;  // e.g. "t1r0L2"
};

// All canonical words of order ≤ max_order, sorted by order then rank.
std::vector<Word> canonical_words(int max_order);

// L_r = r∂_t + t∂_r on a jet at (t, r); the result has order g.order − 1.
Jet boost_jet(const Jet& g, double t, double r);

// Jet of Z·f for the word Z; order drops by Z's order.
Jet apply_word(const Jet& f, double t, double r, const Word& w);

// Nested finite differences of an arbitrary word over {'t','r','L'} applied
// right to left (so "tL" is ∂_t L_r). Independent of the jet algebra and used
// to cross-check it.
class ZField {
 public:
  static constexpr int kMaxLength = 3;

  ZField(const History& h, Channel c, std::string_view word);  // throws CapabilityError

  double value(double t, double r) const;
  const std::string& word() const { return word_; }

 private:
  double eval(std::size_t depth, double t, double r) const;

  const History* h_;
  Channel c_;
  std::string word_;
  double ht_;
  double hr_;
};

}  // namespace wkg
