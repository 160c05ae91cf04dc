#include "dimfuse/labels.hpp"

#include <set>

#include "dimfuse/error.hpp"

namespace dimfuse {

LabelSet::LabelSet(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) {
    throw ValidationError("label set needs at least 2 labels, got " +
                          std::to_string(names_.size()));
  }
  std::set<std::string_view> seen;
  for (const auto& name : names_) {
    if (name.empty()) throw ValidationError("label names must be non-empty");
    if (!seen.insert(name).second) throw ValidationError("duplicate label '" + name + "'");
  }
}

ClassLabel LabelSet::at(std::size_t index) const {
  if (index >= names_.size()) {
    throw std::out_of_range("label index " + std::to_string(index) + " out of range");
  }
  return {index, names_[index]};
}

std::optional<ClassLabel> LabelSet::find(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return ClassLabel{i, names_[i]};
  }
  return std::nullopt;
}

ClassLabel LabelSet::require(std::string_view name) const {
  auto label = find(name);
  if (!label) throw ValidationError("unknown label '" + std::string(name) + "'");
  return *label;
}

LabelSet reference_labels() { return LabelSet({"machinery", "music", "sport", "tourism"}); }

LabelSet synthetic_labels(std::size_t count) {
  if (count == 4) return reference_labels();
  std::vector<std::string> names;
  for (std::size_t i = 1; i <= count; ++i) names.push_back("class_" + std::to_string(i));
  return LabelSet(std::move(names));
}

}  // namespace dimfuse
