#pragma once
#include <optional>

#include "convint/errors.hpp"

// kind of the convint::Error thrown by f, if any
template <class F>
std::optional<convint::ErrorKind> thrown_kind(F&& f) {
  try {
    f();
  } catch (const convint::Error& e) {
    return e.kind();
  }
  return std::nullopt;
}
