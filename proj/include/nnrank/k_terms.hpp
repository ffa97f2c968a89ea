#pragma once

// Monomials of the degree-6 polynomial K on 3x3x2 tensors: a coefficient and
// six entries p_{ijk}, each written as the integer ijk (1-based).

#include <array>

namespace nnrank::detail {

struct KTerm {
  int coef;
  std::array<int, 6> entries;
};

inline constexpr std::array<KTerm, 66> kKTerms{{
    {1, {111, 212, 321, 321, 332, 332}},
    {-2, {111, 212, 321, 322, 331, 332}},
    {1, {111, 212, 322, 322, 331, 331}},
    {-1, {111, 222, 311, 321, 332, 332}},
    {1, {111, 222, 311, 322, 331, 332}},
    {-1, {111, 222, 312, 322, 331, 331}},
    {1, {111, 222, 312, 321, 331, 332}},
    {1, {111, 232, 311, 321, 322, 332}},
    {-1, {112, 211, 321, 321, 332, 332}},
    {-1, {111, 232, 311, 322, 322, 331}},
    {1, {111, 232, 312, 321, 322, 331}},
    {-1, {111, 232, 312, 321, 321, 332}},
    {2, {112, 211, 321, 322, 331, 332}},
    {-1, {112, 211, 322, 322, 331, 331}},
    {1, {112, 221, 311, 321, 332, 332}},
    {-1, {112, 221, 311, 322, 331, 332}},
    {-1, {112, 221, 312, 321, 331, 332}},
    {1, {112, 221, 312, 322, 331, 331}},
    {-1, {112, 231, 311, 321, 322, 332}},
    {1, {112, 231, 311, 322, 322, 331}},
    {1, {112, 231, 312, 321, 321, 332}},
    {-1, {112, 231, 312, 321, 322, 331}},
    {-1, {121, 212, 311, 321, 332, 332}},
    {1, {121, 212, 311, 322, 331, 332}},
    {1, {121, 212, 312, 321, 331, 332}},
    {-1, {121, 212, 312, 322, 331, 331}},
    {1, {121, 222, 311, 311, 332, 332}},
    {-2, {121, 222, 311, 312, 331, 332}},
    {1, {121, 222, 312, 312, 331, 331}},
    {-1, {121, 232, 311, 311, 322, 332}},
    {1, {121, 232, 311, 312, 321, 332}},
    {1, {121, 232, 311, 312, 322, 331}},
    {-1, {121, 232, 312, 312, 321, 331}},
    {1, {122, 211, 311, 321, 332, 332}},
    {-1, {122, 211, 311, 322, 331, 332}},
    {-1, {122, 211, 312, 321, 331, 332}},
    {1, {122, 211, 312, 322, 331, 331}},
    {-1, {122, 221, 311, 311, 332, 332}},
    {2, {122, 221, 311, 312, 331, 332}},
    {-1, {122, 221, 312, 312, 331, 331}},
    {1, {122, 231, 311, 311, 322, 332}},
    {-1, {122, 231, 311, 312, 321, 332}},
    {-1, {122, 231, 311, 312, 322, 331}},
    {1, {122, 231, 312, 312, 321, 331}},
    {1, {131, 212, 311, 321, 322, 332}},
    {-1, {131, 212, 311, 322, 322, 331}},
    {-1, {131, 212, 312, 321, 321, 332}},
    {1, {131, 212, 312, 321, 322, 331}},
    {-1, {131, 222, 311, 311, 322, 332}},
    {1, {131, 222, 311, 312, 321, 332}},
    {1, {131, 222, 311, 312, 322, 331}},
    {-1, {131, 222, 312, 312, 321, 331}},
    {1, {131, 232, 311, 311, 322, 322}},
    {-2, {131, 232, 311, 312, 321, 322}},
    {1, {131, 232, 312, 312, 321, 321}},
    {-1, {132, 211, 311, 321, 322, 332}},
    {1, {132, 211, 311, 322, 322, 331}},
    {1, {132, 211, 312, 321, 321, 332}},
    {-1, {132, 211, 312, 321, 322, 331}},
    {1, {132, 221, 311, 311, 322, 332}},
    {-1, {132, 221, 311, 312, 321, 332}},
    {-1, {132, 221, 311, 312, 322, 331}},
    {1, {132, 221, 312, 312, 321, 331}},
    {-1, {132, 231, 311, 311, 322, 322}},
    {2, {132, 231, 311, 312, 321, 322}},
    {-1, {132, 231, 312, 312, 321, 321}},
}};

}  // namespace nnrank::detail
