#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace axiom::gw {

constexpr int kW = 160;
constexpr int kH = 210;
constexpr int kFrameBytes = kW * kH * 3;

enum class GameId { Explode, Bounce, Cross, Fruits, Hunt };

GameId game_from_name(const std::string& name);
const char* game_name(GameId id);

// RGB bytes, row-major, rows top to bottom.
struct Frame {
    std::vector<uint8_t> px;
    Frame() : px(kFrameBytes, 0) {}
    uint8_t* at(int row, int col) { return px.data() + (row * kW + col) * 3; }
    const uint8_t* at(int row, int col) const { return px.data() + (row * kW + col) * 3; }
};

struct StepResult {
    int reward = 0;  // in {-1, 0, +1}
    bool episode_reset = false;
};

enum class PerturbKind { Color, Shape };

uint64_t fnv1a64(const uint8_t* data, std::size_t n);

// One deterministic game instance. All randomness is a pure function of
// (seed, step index, stream), so perturbed replays share the pre-perturbation
// draws. A single instance is single-threaded; instances are independent.
class Env {
public:
    Env(GameId id, uint64_t seed);

    static int action_count(GameId id);
    int action_count() const { return action_count(id_); }

    // Advances one frame of game logic. Terminal events reset internally and
    // set episode_reset; the environment is continuing.
    StepResult step(int action);

    // Throws on double application of the same kind.
    void apply_perturbation(PerturbKind kind);

    const Frame& frame() const { return frame_; }
    uint64_t frame_hash() const { return fnv1a64(frame_.px.data(), frame_.px.size()); }

    GameId id() const { return id_; }
    uint64_t seed() const { return seed_; }
    int64_t step_index() const { return step_index_; }
    bool color_perturbed() const { return color_perturbed_; }
    bool shape_perturbed() const { return shape_perturbed_; }

private:
    struct Object {
        int kind = 0;  // game-specific sprite kind, also selects perturbed shape
        int x = 0, y = 0, w = 0, h = 0;
        int pal = 0;  // palette index
    };

    uint64_t draw(uint64_t stream) const;
    void render();
    void reset_layout();

    void step_explode(int a, StepResult& r);
    void step_bounce(int a, StepResult& r);
    void step_cross(int a, StepResult& r);
    void step_fruits(int a, StepResult& r);
    void step_hunt(int a, StepResult& r);

    GameId id_;
    uint64_t seed_;
    int64_t step_index_ = 0;
    bool color_perturbed_ = false;
    bool shape_perturbed_ = false;
    Frame frame_;

    // Entity state shared across the five games; unused fields stay zero.
    int player_x_ = 0, player_y_ = 0;
    int bomber_x_ = 0, bomber_vx_ = 0;
    bool bomb_active_ = false;
    int bomb_x_ = 0, bomb_y_ = 0, cooldown_ = 0;
    int opp_y_ = 0, ball_x_ = 0, ball_y_ = 0, ball_vx_ = 0, ball_vy_ = 0;
    int64_t rally_ = 0;
    std::vector<Object> objects_;  // cars / fruits / rocks / lane items
    int64_t spawn_count_ = 0;
};

}  // namespace axiom::gw
