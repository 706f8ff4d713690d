#pragma once

#include <algorithm>
#include <cstdint>
#include <span>
#include <tuple>
#include <utility>
#include <vector>

namespace misalign {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;
    friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
    friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
    friend Vec2 operator*(Vec2 a, double k) { return {a.x * k, a.y * k}; }
    double norm() const;
};

double distance(Vec2 a, Vec2 b);

/// One-to-one greedy matching in ascending distance, pairs farther than
/// `gate` are never formed. Equal distances are ordered by (key_a, key_b).
/// Returns (index into a, index into b) in the order the pairs were formed.
std::vector<std::pair<std::size_t, std::size_t>> greedy_match(std::span<const Vec2> a, std::span<const std::int64_t> key_a,
                                                              std::span<const Vec2> b, std::span<const std::int64_t> key_b,
                                                              double gate);

}  // namespace misalign
