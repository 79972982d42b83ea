#pragma once

#include <string>

#include "epicoord/geometry.hpp"

namespace epicoord {

enum class BehaviorTag { Explore, CompleteTask, Fetch, ModifiedExplore };

/// One of the four behavior primitives a robot (or a believed robot) can run.
struct BehaviorPrimitive {
  BehaviorTag tag = BehaviorTag::Explore;
  int robot = -1;      // Fetch: target robot; ModifiedExplore: the robot repelled from
  Vec2 repel_point;    // ModifiedExplore: where that robot was seen
  double expiry_s = 0; // ModifiedExplore: absolute time it reverts to Explore

  static BehaviorPrimitive explore() { return {}; }
  static BehaviorPrimitive complete_task() { return {BehaviorTag::CompleteTask, -1, {}, 0}; }
  static BehaviorPrimitive fetch(int target) { return {BehaviorTag::Fetch, target, {}, 0}; }
  static BehaviorPrimitive modified_explore(int from, Vec2 at, double expiry_s) {
    return {BehaviorTag::ModifiedExplore, from, at, expiry_s};
  }

  bool is_exploring() const { return tag == BehaviorTag::Explore || tag == BehaviorTag::ModifiedExplore; }
  friend bool operator==(const BehaviorPrimitive&, const BehaviorPrimitive&) = default;
};

/// Short label: "e", "c", "f2", "ebar1".
std::string to_string(const BehaviorPrimitive& b);

}  // namespace epicoord
