#pragma once

#include <string>
#include <vector>

namespace prbi {

// axis-aligned box given by center, extents, class label and confidence
struct Box2D {
  double cx = 0.0;
  double cy = 0.0;
  double w = 1.0;
  double h = 1.0;
  int class_id = 0;
  double score = 1.0;
};

struct DetectionSet {
  int frame = 0;
  std::vector<Box2D> boxes;
};

struct MatchedPair {
  int index_a = -1;
  int index_b = -1;
  double iou = 0.0;
};

struct MatchResult {
  std::vector<MatchedPair> pairs;
  std::vector<int> unmatched_a;
  std::vector<int> unmatched_b;
};

double iou(const Box2D& a, const Box2D& b);

// One-to-one assignment maximizing total IoU over valid pairs. A pair is
// valid when iou >= tau_match and the class labels agree; invalid pairs are
// costed like padding so they never displace a valid assignment.
MatchResult hungarian_match(const DetectionSet& a, const DetectionSet& b, double tau_match);

// |matched| / (|a| + |b| - |matched|); two empty sets agree perfectly (1.0)
double jaccard(const DetectionSet& a, const DetectionSet& b, double tau_match);

// line-oriented record: first line the frame index, then one box per line
// as "cx cy w h class score"
std::string to_text(const DetectionSet& ds);
DetectionSet detection_set_from_text(const std::string& text);

}  // namespace prbi
