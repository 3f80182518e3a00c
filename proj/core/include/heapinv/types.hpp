#pragma once

#include <optional>
#include <string>
#include <vector>

namespace heapinv {

/// A field is either a pointer to a named struct type or an integer.
struct FieldType {
  bool is_pointer = true;
  std::string pointee;  // empty when is_pointer == false

  bool operator==(const FieldType& o) const {
    return is_pointer == o.is_pointer && pointee == o.pointee;
  }
};

struct TypeDecl {
  std::string name;
  std::vector<std::pair<std::string, FieldType>> fields;  // declared order

  std::optional<std::size_t> field_index(const std::string& fname) const {
    for (std::size_t i = 0; i < fields.size(); ++i)
      if (fields[i].first == fname) return i;
    return std::nullopt;
  }
};

class TypeEnv {
public:
  void add(TypeDecl t) { decls_.push_back(std::move(t)); }

  const TypeDecl* find(const std::string& name) const {
    for (const auto& d : decls_)
      if (d.name == name) return &d;
    return nullptr;
  }

  const std::vector<TypeDecl>& all() const { return decls_; }

private:
  std::vector<TypeDecl> decls_;
};

}  // namespace heapinv
