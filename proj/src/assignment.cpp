#include "misalign/assignment.hpp"

#include <cmath>

namespace misalign {

double Vec2::norm() const { return std::hypot(x, y); }

double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

std::vector<std::pair<std::size_t, std::size_t>> greedy_match(std::span<const Vec2> a, std::span<const std::int64_t> key_a,
                                                              std::span<const Vec2> b, std::span<const std::int64_t> key_b,
                                                              double gate) {
    struct Candidate {
        double d;
        std::int64_t ka;
        std::int64_t kb;
        std::size_t i;
        std::size_t j;
    };
    std::vector<Candidate> cands;
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            const double d = distance(a[i], b[j]);
            if (d <= gate) {
                cands.push_back({d, key_a[i], key_b[j], i, j});
            }
        }
    }
    std::sort(cands.begin(), cands.end(), [](const Candidate& l, const Candidate& r) {
        return std::tie(l.d, l.ka, l.kb, l.i, l.j) < std::tie(r.d, r.ka, r.kb, r.i, r.j);
    });

    std::vector<bool> used_a(a.size(), false);
    std::vector<bool> used_b(b.size(), false);
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& c : cands) {
        if (!used_a[c.i] && !used_b[c.j]) {
            used_a[c.i] = true;
            used_b[c.j] = true;
            out.emplace_back(c.i, c.j);
        }
    }
    return out;
}

}  // namespace misalign
