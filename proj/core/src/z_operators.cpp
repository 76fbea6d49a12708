#include "wkg/z_operators.hpp"

#include <algorithm>
#include <cmath>

#include "wkg/errors.hpp"

namespace wkg {

std::string Word::label() const {
  return "t" + std::to_string(a) + "r" + std::to_string(b) + "L" + std::to_string(j);
}

std::vector<Word> canonical_words(int max_order) {
  std::vector<Word> out;
  for (int ord = 0; ord <= max_order; ++ord)
    for (int j = 0; j <= ord; ++j)
      for (int a = ord - j; a >= 0; --a) out.push_back({a, ord - j - a, j});
  return out;
}

Jet boost_jet(const Jet& g, double t, double r) {
  Jet out;
  out.order = g.order - 1;
  for (int a = 0; a <= out.order; ++a)
    for (int b = 0; a + b <= out.order; ++b) {
      double x = r * g(a + 1, b) + t * g(a, b + 1);
      if (b > 0) x += b * g(a + 1, b - 1);
      if (a > 0) x += a * g(a - 1, b + 1);
      out.at(a, b) = x;
    }
  return out;
}

Jet apply_word(const Jet& f, double t, double r, const Word& w) {
  if (w.order() > f.order) throw CapabilityError("jet order too low for word " + w.label());
  Jet g = f;
  for (int i = 0; i < w.j; ++i) g = boost_jet(g, t, r);
  Jet out;
  out.order = g.order - w.a - w.b;
  for (int a = 0; a <= out.order; ++a)
    for (int b = 0; a + b <= out.order; ++b) out.at(a, b) = g(a + w.a, b + w.b);
  return out;
}

ZField::ZField(const History& h, Channel c, std::string_view word)
    : h_(&h), c_(c), word_(word), ht_(h.dt()), hr_(h.grid().dr()) {
  if (word_.size() > static_cast<std::size_t>(kMaxLength))
    throw CapabilityError("words longer than " + std::to_string(kMaxLength) +
                          " exceed the finite-difference noise floor");
  for (char ch : word_)
    if (ch != 't' && ch != 'r' && ch != 'L')
      throw ArgumentError(std::string("unknown word letter '") + ch + "'");
}

double ZField::value(double t, double r) const { return eval(0, t, r); }

double ZField::eval(std::size_t depth, double t, double r) const {
  // Words act on the even extension along a line through the origin, so
  // intermediate evaluations may sit at r < 0.
  if (depth == word_.size()) return h_->interp(c_, t, std::abs(r));
  const char letter = word_[depth];
  auto dt = [&] {
    return (eval(depth + 1, t + ht_, r) - eval(depth + 1, t - ht_, r)) / (2.0 * ht_);
  };
  auto dr = [&] {
    return (eval(depth + 1, t, r + hr_) - eval(depth + 1, t, r - hr_)) / (2.0 * hr_);
  };
  switch (letter) {
    case 't':
      return dt();
    case 'r':
      return dr();
    default:
      return r * dt() + t * dr();
  }
}

}  // namespace wkg
