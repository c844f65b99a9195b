// Exact minimizer of the partial-sum spread N*sum(b^2) - (sum b)^2.
//
// Optimal sequences are V-shaped (non-increasing, then non-decreasing), so the
// elements are placed largest first at the next free slot on the left or the
// right and the smallest one ends up in the middle. For a fixed slope p/q the
// separable objective q*sum(b^2) - p*sum(b) is minimized by a DP over the left
// sum. The true objective is concave in (sum b, sum b^2), so its minimum sits
// on a vertex of the lower convex hull of reachable points; the hull is walked
// with the usual parametric bisection on slopes.

#include <algorithm>
#include <limits>
#include <numeric>
#include <string>

#include "mfi/design.hpp"

namespace mfi {

namespace {

using i128 = __int128;

struct Candidate {
  i128 sum = 0;     // A = sum of partial sums
  i128 sumsq = 0;   // sum of squared partial sums
  std::vector<std::int64_t> seq;
};

class VShapeSolver {
 public:
  explicit VShapeSolver(std::vector<std::int64_t> desc) : x_(std::move(desc)) {
    n_ = x_.size();
    total_ = std::accumulate(x_.begin(), x_.end(), std::int64_t{0});
    prefix_.assign(n_ + 1, 0);
    for (std::size_t t = 0; t < n_; ++t) prefix_[t + 1] = prefix_[t] + x_[t];
    const auto width = static_cast<std::size_t>(total_) + 1;
    choice_.assign(n_ * width, 0);
  }

  Candidate solve(i128 p, i128 q) {
    const auto width = static_cast<std::size_t>(total_) + 1;
    const i128 inf = std::numeric_limits<i128>::max() / 4;
    std::vector<i128> cur(width, inf), nxt(width, inf);
    cur[0] = 0;
    // last element (smallest) goes to the middle and contributes no point
    for (std::size_t t = 0; t + 1 < n_; ++t) {
      std::fill(nxt.begin(), nxt.end(), inf);
      const std::int64_t xt = x_[t];
      const std::int64_t st = prefix_[t + 1];
      for (std::int64_t P = 0; P <= prefix_[t]; ++P) {
        const i128 v = cur[static_cast<std::size_t>(P)];
        if (v == inf) continue;
        {
          const i128 b = P + xt;
          const i128 w = v + q * b * b - p * b;
          auto& slot = nxt[static_cast<std::size_t>(P + xt)];
          if (w < slot) {
            slot = w;
            choice_[t * width + static_cast<std::size_t>(P + xt)] = 1;
          }
        }
        {
          const i128 b = total_ - (st - P);
          const i128 w = v + q * b * b - p * b;
          auto& slot = nxt[static_cast<std::size_t>(P)];
          if (w < slot) {
            slot = w;
            choice_[t * width + static_cast<std::size_t>(P)] = 0;
          }
        }
      }
      std::swap(cur, nxt);
    }
    std::size_t best = 0;
    for (std::size_t P = 1; P < width; ++P)
      if (cur[P] < cur[best]) best = P;

    std::vector<std::int64_t> left, right;
    auto P = static_cast<std::int64_t>(best);
    for (std::size_t t = n_ - 1; t-- > 0;) {
      if (choice_[t * width + static_cast<std::size_t>(P)]) {
        left.push_back(x_[t]);
        P -= x_[t];
      } else {
        right.push_back(x_[t]);
      }
    }
    std::reverse(left.begin(), left.end());
    // right holds placements innermost first, which is already left-to-right
    Candidate c;
    c.seq = std::move(left);
    c.seq.push_back(x_[n_ - 1]);
    c.seq.insert(c.seq.end(), right.begin(), right.end());
    i128 b = 0;
    for (auto k : c.seq) {
      b += k;
      c.sum += b;
      c.sumsq += b * b;
    }
    return c;
  }

  std::size_t size() const { return n_; }
  std::int64_t total() const { return total_; }

 private:
  std::vector<std::int64_t> x_;
  std::vector<std::int64_t> prefix_;
  std::vector<unsigned char> choice_;
  std::size_t n_ = 0;
  std::int64_t total_ = 0;
};

i128 line_value(const Candidate& c, i128 p, i128 q) { return q * c.sumsq - p * c.sum; }

void walk_hull(VShapeSolver& s, const Candidate& u, const Candidate& v,
               std::vector<Candidate>& out, int depth) {
  const i128 q = v.sum - u.sum;
  if (q <= 0 || depth > 200) return;
  const i128 p = v.sumsq - u.sumsq;
  Candidate w = s.solve(p, q);
  if (line_value(w, p, q) < line_value(u, p, q)) {
    walk_hull(s, u, w, out, depth + 1);
    out.push_back(w);
    walk_hull(s, w, v, out, depth + 1);
  }
}

constexpr std::int64_t kMaxStates = 400'000'000;

}  // namespace

std::vector<std::int64_t> permute_max_error(const SpacingMultiset& sorted) {
  const auto& a = sorted.values();
  if (a.size() <= 2) return a;
  const std::int64_t g = gcd_of(a);
  std::vector<std::int64_t> desc;
  desc.reserve(a.size());
  for (auto k : a) desc.push_back(k / g);
  std::stable_sort(desc.begin(), desc.end(), std::greater<>());
  const std::int64_t total = std::accumulate(desc.begin(), desc.end(), std::int64_t{0});
  if ((total + 1) > kMaxStates / static_cast<std::int64_t>(desc.size()))
    throw Error(ErrorCode::infeasible,
                "max-error search too large: " + std::to_string(desc.size()) +
                    " spacings with reduced sum " + std::to_string(total));

  VShapeSolver solver(std::move(desc));
  const i128 big = static_cast<i128>(a.size() + 1) * total * total + 1;
  Candidate lo = solver.solve(-big, 1);
  Candidate hi = solver.solve(big, 1);
  std::vector<Candidate> hull{lo};
  walk_hull(solver, lo, hi, hull, 0);
  hull.push_back(hi);

  const i128 npts = static_cast<i128>(a.size()) + 1;
  const Candidate* best = &hull.front();
  i128 best_val = npts * best->sumsq - best->sum * best->sum;
  for (const auto& c : hull) {
    const i128 val = npts * c.sumsq - c.sum * c.sum;
    if (val < best_val) {
      best_val = val;
      best = &c;
    }
  }
  auto out = best->seq;
  for (auto& k : out) k *= g;
  return out;
}

}  // namespace mfi
