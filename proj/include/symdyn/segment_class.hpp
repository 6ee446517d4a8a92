#pragma once

#include <functional>
#include <span>
#include <string>
#include <utility>

#include "symdyn/shift_system.hpp"

namespace symdyn {

/// A collection of orbit segments (x, n), decided from a finite prefix of x.
///
/// The membership predicate receives a word of length >= n that is a prefix
/// of x; it must give the same answer for every such prefix it is called on.
/// Segments of length 0 belong to every class.
class SegmentClass {
 public:
  using Predicate = std::function<bool(std::span<const Symbol> word, int n)>;
  enum class Kind { kAll, kEmpty, kPredicate };

  static SegmentClass all(std::string label = "all") {
    return SegmentClass(Kind::kAll, std::move(label), {});
  }
  static SegmentClass empty(std::string label = "empty") {
    return SegmentClass(Kind::kEmpty, std::move(label), {});
  }
  static SegmentClass from_predicate(std::string label, Predicate p) {
    return SegmentClass(Kind::kPredicate, std::move(label), std::move(p));
  }

  [[nodiscard]] bool contains(std::span<const Symbol> word, int n) const {
    if (n == 0) return true;
    switch (kind_) {
      case Kind::kAll: return true;
      case Kind::kEmpty: return false;
      case Kind::kPredicate: return predicate_(word, n);
    }
    return false;
  }

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] const std::string& label() const { return label_; }

  /// Segments of positive length outside this class.
  [[nodiscard]] SegmentClass complement() const {
    switch (kind_) {
      case Kind::kAll: return empty("not(" + label_ + ")");
      case Kind::kEmpty: return all("not(" + label_ + ")");
      case Kind::kPredicate: break;
    }
    return from_predicate("not(" + label_ + ")",
                          [self = *this](std::span<const Symbol> w, int n) { return !self.contains(w, n); });
  }

  /// Union of two classes.
  friend SegmentClass operator|(const SegmentClass& a, const SegmentClass& b) {
    if (a.kind_ == Kind::kAll || b.kind_ == Kind::kAll) return all(a.label_ + "|" + b.label_);
    if (a.kind_ == Kind::kEmpty) return b;
    if (b.kind_ == Kind::kEmpty) return a;
    return from_predicate(a.label_ + "|" + b.label_,
                          [a, b](std::span<const Symbol> w, int n) { return a.contains(w, n) || b.contains(w, n); });
  }

 private:
  SegmentClass(Kind kind, std::string label, Predicate p)
      : kind_(kind), label_(std::move(label)), predicate_(std::move(p)) {}

  Kind kind_;
  std::string label_;
  Predicate predicate_;
};

}  // namespace symdyn
