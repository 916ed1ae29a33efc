#pragma once

#include <array>
#include <cstdint>

// Pinned game constants. Speeds are integer pixels per frame and sprite
// boxes are integer rectangles so that replays are bit-exact and object
// motion is piecewise linear with sparse interactions.

namespace axiom::gw::constants {

// 12-color palette shared by all games. The color perturbation applies the
// fixed permutation i -> (i + 5) mod 12, which has no fixed point, so no
// pre-perturbation color survives.
struct Rgb {
    uint8_t r, g, b;
};
inline constexpr std::array<Rgb, 12> kPalette = {{
    {0, 0, 0},        // 0 black
    {236, 236, 236},  // 1 white
    {200, 72, 72},    // 2 red
    {72, 160, 72},    // 3 green
    {72, 72, 200},    // 4 blue
    {232, 204, 99},   // 5 yellow
    {198, 108, 58},   // 6 orange
    {146, 70, 192},   // 7 purple
    {66, 186, 198},   // 8 cyan
    {214, 92, 214},   // 9 magenta
    {128, 128, 128},  // 10 gray
    {170, 121, 66},   // 11 brown
}};
inline constexpr int kColorRemapShift = 5;

// ---------------------------------------------------------------- Explode
// Bucket catches bombs dropped by a bomber patrolling the top edge.
namespace explode {
inline constexpr int kBucketW = 24, kBucketH = 6, kBucketY = 198, kBucketSpeed = 4, kBucketPal = 5;
inline constexpr int kBomberW = 16, kBomberH = 10, kBomberY = 18, kBomberSpeed = 2, kBomberPal = 6;
inline constexpr int kBomberXMin = 4, kBomberXMax = 160 - 4 - kBomberW;
inline constexpr int kBombW = 8, kBombH = 8, kBombVy = 4, kBombPal = 2;
inline constexpr int kDropCooldown = 10;
inline constexpr int kFirstDropDelay = 30;  // scene settles before the first bomb
inline constexpr int kDropGap = 6;          // air gap between bomber and a fresh bomb
inline constexpr int kFlipOdds = 48;  // bomber direction flips w.p. 1/48 per frame
}  // namespace explode

// ----------------------------------------------------------------- Bounce
// Pong-like rally; the right paddle is the player.
namespace bounce {
inline constexpr int kPaddleW = 4, kPaddleH = 28;
inline constexpr int kPlayerX = 150, kOppX = 6;
inline constexpr int kPlayerSpeed = 4, kOppSpeed = 2, kOppDeadzone = 6;
inline constexpr int kOppTrackX = 100;  // opponent tracks only while ball is left of this
inline constexpr int kBall = 4, kBallVx = 2;
inline constexpr int kWall = 10;  // gray bands at top and bottom
inline constexpr int kPlayerPal = 3, kOppPal = 2, kBallPal = 1, kWallPal = 10;
}  // namespace bounce

// ------------------------------------------------------------------ Cross
// Freeway-like road crossing; eight car lanes.
namespace cross {
inline constexpr int kLanes = 8, kLaneH = 18, kLaneY0 = 22;
inline constexpr int kCarW = 20, kCarH = 12;
inline constexpr std::array<int, 8> kCarSpeed = {2, -1, 3, -2, 1, -3, 2, -1};
inline constexpr std::array<int, 8> kCarPal = {2, 3, 4, 6, 7, 8, 9, 11};
inline constexpr int kPlayerW = 12, kPlayerH = 12, kPlayerX = 74, kPlayerY0 = 192;
inline constexpr int kPlayerSpeed = 3, kPlayerPal = 5;
inline constexpr int kGoalY = 8;
}  // namespace cross

// ----------------------------------------------------------------- Fruits
// Catch falling fruit, avoid falling rocks.
namespace fruits {
inline constexpr int kPlayerW = 20, kPlayerH = 8, kPlayerY = 196, kPlayerSpeed = 4, kPlayerPal = 8;
inline constexpr int kSpawnPeriod = 34;
inline constexpr int kFruitW = 10, kFruitH = 10;
inline constexpr std::array<int, 3> kFruitPal = {2, 9, 3};
inline constexpr int kRockW = 12, kRockH = 12, kRockPal = 10;
inline constexpr int kFallVy = 2;
inline constexpr int kFruitOdds = 7;  // fruit w.p. 7/10, rock otherwise
}  // namespace fruits

// ------------------------------------------------------------------- Hunt
// Free 2-D movement; collect good items flowing along four lanes.
namespace hunt {
inline constexpr int kPlayerW = 14, kPlayerH = 14, kPlayerSpeed = 4, kPlayerPal = 4;
inline constexpr std::array<int, 4> kLaneY = {30, 74, 118, 162};
inline constexpr int kGoodW = 12, kGoodH = 12, kGoodPal = 3;
inline constexpr int kBadW = 14, kBadH = 14, kBadPal = 2;
inline constexpr int kItemSpeed = 2;
inline constexpr int kSpawnPeriod = 56, kSpawnLaneOffset = 14;
inline constexpr int kGoodOdds = 3;  // good w.p. 3/5
inline constexpr int kYMin = 18, kYMax = 210 - kPlayerH - 6;
}  // namespace hunt

}  // namespace axiom::gw::constants
