#include "prbi/detections.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace prbi {

double iou(const Box2D& a, const Box2D& b) {
  const double ax0 = a.cx - 0.5 * a.w, ax1 = a.cx + 0.5 * a.w;
  const double ay0 = a.cy - 0.5 * a.h, ay1 = a.cy + 0.5 * a.h;
  const double bx0 = b.cx - 0.5 * b.w, bx1 = b.cx + 0.5 * b.w;
  const double by0 = b.cy - 0.5 * b.h, by1 = b.cy + 0.5 * b.h;
  const double ox = std::min(ax1, bx1) - std::max(ax0, bx0);
  const double oy = std::min(ay1, by1) - std::max(ay0, by0);
  if (ox <= 0.0 || oy <= 0.0) return 0.0;
  const double inter = ox * oy;
  const double uni = a.w * a.h + b.w * b.h - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

namespace {

// minimum-cost perfect assignment on a square matrix (potentials method).
// returns row_of_col: for each column, the assigned row (0-based).
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = inf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> row_of_col(n, -1);
  for (int j = 1; j <= n; ++j) row_of_col[j - 1] = p[j] - 1;
  return row_of_col;
}

}  // namespace

MatchResult hungarian_match(const DetectionSet& a, const DetectionSet& b, double tau_match) {
  if (!(tau_match > 0.0 && tau_match <= 1.0))
    throw std::invalid_argument("hungarian_match: tau_match must be in (0,1]");
  MatchResult out;
  const int na = static_cast<int>(a.boxes.size());
  const int nb = static_cast<int>(b.boxes.size());
  if (na == 0 || nb == 0) {
    for (int i = 0; i < na; ++i) out.unmatched_a.push_back(i);
    for (int j = 0; j < nb; ++j) out.unmatched_b.push_back(j);
    return out;
  }

  const int n = std::max(na, nb);
  // invalid pairs (below threshold or class mismatch) cost the same as the
  // padding entries, so only valid pairs compete for the assignment
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 1.0));
  std::vector<std::vector<double>> ious(na, std::vector<double>(nb, 0.0));
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nb; ++j) {
      const double v = iou(a.boxes[i], b.boxes[j]);
      ious[i][j] = v;
      if (v >= tau_match && a.boxes[i].class_id == b.boxes[j].class_id) cost[i][j] = 1.0 - v;
    }
  }

  const std::vector<int> row_of_col = min_cost_assignment(cost);
  std::vector<char> a_matched(na, 0), b_matched(nb, 0);
  for (int j = 0; j < nb; ++j) {
    const int i = row_of_col[j];
    if (i < 0 || i >= na) continue;
    const double v = ious[i][j];
    if (v >= tau_match && a.boxes[i].class_id == b.boxes[j].class_id) {
      out.pairs.push_back({i, j, v});
      a_matched[i] = 1;
      b_matched[j] = 1;
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end(),
            [](const MatchedPair& x, const MatchedPair& y) { return x.index_a < y.index_a; });
  for (int i = 0; i < na; ++i)
    if (!a_matched[i]) out.unmatched_a.push_back(i);
  for (int j = 0; j < nb; ++j)
    if (!b_matched[j]) out.unmatched_b.push_back(j);
  return out;
}

namespace {

bool boxes_lex_less(const DetectionSet& x, const DetectionSet& y) {
  if (x.boxes.size() != y.boxes.size()) return x.boxes.size() < y.boxes.size();
  for (std::size_t i = 0; i < x.boxes.size(); ++i) {
    const Box2D& p = x.boxes[i];
    const Box2D& q = y.boxes[i];
    const auto tp = std::tie(p.cx, p.cy, p.w, p.h, p.class_id, p.score);
    const auto tq = std::tie(q.cx, q.cy, q.w, q.h, q.class_id, q.score);
    if (tp != tq) return tp < tq;
  }
  return false;
}

}  // namespace

double jaccard(const DetectionSet& a, const DetectionSet& b, double tau_match) {
  const std::size_t na = a.boxes.size();
  const std::size_t nb = b.boxes.size();
  if (na == 0 && nb == 0) return 1.0;
  // evaluate in a canonical argument order so ties in the assignment can
  // never make the measure asymmetric
  const DetectionSet* first = &a;
  const DetectionSet* second = &b;
  if (boxes_lex_less(b, a)) std::swap(first, second);
  const MatchResult mr = hungarian_match(*first, *second, tau_match);
  const double matched = static_cast<double>(mr.pairs.size());
  return matched / (static_cast<double>(na + nb) - matched);
}

std::string to_text(const DetectionSet& ds) {
  std::string out;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d\n", ds.frame);
  out += buf;
  for (const Box2D& box : ds.boxes) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %d %.17g\n", box.cx, box.cy, box.w,
                  box.h, box.class_id, box.score);
    out += buf;
  }
  return out;
}

DetectionSet detection_set_from_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("detection set record: empty input");
  DetectionSet ds;
  {
    std::istringstream ls(line);
    if (!(ls >> ds.frame)) throw std::runtime_error("detection set record: bad frame line");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    Box2D box;
    if (!(ls >> box.cx >> box.cy >> box.w >> box.h >> box.class_id >> box.score))
      throw std::runtime_error("detection set record: bad box line: " + line);
    ds.boxes.push_back(box);
  }
  return ds;
}

}  // namespace prbi
