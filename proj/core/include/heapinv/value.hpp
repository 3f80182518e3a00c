#pragma once

#include <cstdint>
#include <string>

namespace heapinv {

/// A runtime value observed in a trace: a heap address, the null pointer,
/// or an integer payload. Addresses are opaque tokens; they are compared
/// for equality and ordered only to make enumeration deterministic.
class Value {
public:
  enum class Kind { Nil, Int, Addr };

  Value() : kind_(Kind::Nil), bits_(0) {}

  static Value nil() { return Value(); }
  static Value addr(std::uint64_t a) { return Value(Kind::Addr, a); }
  static Value integer(std::int64_t k) {
    return Value(Kind::Int, static_cast<std::uint64_t>(k));
  }

  Kind kind() const { return kind_; }
  bool is_nil() const { return kind_ == Kind::Nil; }
  bool is_addr() const { return kind_ == Kind::Addr; }
  bool is_int() const { return kind_ == Kind::Int; }

  std::uint64_t addr_token() const { return bits_; }
  std::int64_t int_value() const { return static_cast<std::int64_t>(bits_); }

  bool operator==(const Value& o) const {
    return kind_ == o.kind_ && bits_ == o.bits_;
  }
  bool operator!=(const Value& o) const { return !(*this == o); }

  // Enumeration order: nil, then ints by value, then addresses by token.
  bool operator<(const Value& o) const {
    if (kind_ != o.kind_) return rank() < o.rank();
    if (kind_ == Kind::Int) return int_value() < o.int_value();
    return bits_ < o.bits_;
  }

  std::string str() const;

private:
  Value(Kind k, std::uint64_t b) : kind_(k), bits_(b) {}
  int rank() const {
    switch (kind_) {
      case Kind::Nil: return 0;
      case Kind::Int: return 1;
      case Kind::Addr: return 2;
    }
    return 3;
  }

  Kind kind_;
  std::uint64_t bits_;
};

}  // namespace heapinv
