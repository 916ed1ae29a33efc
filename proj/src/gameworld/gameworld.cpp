#include "axiom/gameworld/gameworld.hpp"

#include <algorithm>
#include <cstring>

#include "axiom/core/rng.hpp"
#include "axiom/gameworld/constants.hpp"

namespace axiom::gw {

namespace cn = constants;

GameId game_from_name(const std::string& name) {
    if (name == "explode") return GameId::Explode;
    if (name == "bounce") return GameId::Bounce;
    if (name == "cross") return GameId::Cross;
    if (name == "fruits") return GameId::Fruits;
    if (name == "hunt") return GameId::Hunt;
    throw std::invalid_argument("unknown game: " + name);
}

const char* game_name(GameId id) {
    switch (id) {
        case GameId::Explode: return "explode";
        case GameId::Bounce: return "bounce";
        case GameId::Cross: return "cross";
        case GameId::Fruits: return "fruits";
        case GameId::Hunt: return "hunt";
    }
    return "?";
}

uint64_t fnv1a64(const uint8_t* data, std::size_t n) {
    uint64_t h = 14695981039346656037ULL;
    for (std::size_t i = 0; i < n; ++i) {
        h ^= data[i];
        h *= 1099511628211ULL;
    }
    return h;
}

int Env::action_count(GameId id) {
    switch (id) {
        case GameId::Explode: return 3;  // stay, left, right
        case GameId::Bounce: return 3;   // stay, up, down
        case GameId::Cross: return 3;    // stay, up, down
        case GameId::Fruits: return 3;   // stay, left, right
        case GameId::Hunt: return 4;     // left, right, up, down
    }
    return 0;
}

Env::Env(GameId id, uint64_t seed) : id_(id), seed_(seed) {
    reset_layout();
    render();
}

uint64_t Env::draw(uint64_t stream) const {
    return core::hash3(seed_, static_cast<uint64_t>(step_index_), stream);
}

namespace {

inline bool overlap(int ax, int ay, int aw, int ah, int bx, int by, int bw, int bh) {
    return ax < bx + bw && bx < ax + aw && ay < by + bh && by < ay + ah;
}

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

}  // namespace

void Env::reset_layout() {
    objects_.clear();
    bomb_active_ = false;
    cooldown_ = 0;
    spawn_count_ = 0;
    switch (id_) {
        case GameId::Explode:
            player_x_ = 68;
            bomber_x_ = 72;
            bomber_vx_ = cn::explode::kBomberSpeed;
            cooldown_ = cn::explode::kFirstDropDelay;
            break;
        case GameId::Bounce: {
            player_y_ = (kH - cn::bounce::kPaddleH) / 2;
            opp_y_ = player_y_;
            rally_ = 0;
            ball_x_ = kW / 2 - cn::bounce::kBall / 2;
            ball_y_ = kH / 2 - cn::bounce::kBall / 2;
            ball_vx_ = -cn::bounce::kBallVx;
            static constexpr int vys[4] = {-2, -1, 1, 2};
            ball_vy_ = vys[core::hash3(seed_, static_cast<uint64_t>(rally_), 7) % 4];
            break;
        }
        case GameId::Cross:
            player_x_ = cn::cross::kPlayerX;
            player_y_ = cn::cross::kPlayerY0;
            for (int i = 0; i < cn::cross::kLanes; ++i) {
                Object car;
                car.kind = 10 + i;
                car.w = cn::cross::kCarW;
                car.h = cn::cross::kCarH;
                car.x = static_cast<int>(core::hash3(seed_, 100 + i, 3) % kW) - cn::cross::kCarW;
                car.y = cn::cross::kLaneY0 + i * cn::cross::kLaneH + 3;
                car.pal = cn::cross::kCarPal[i];
                objects_.push_back(car);
            }
            break;
        case GameId::Fruits:
            player_x_ = 70;
            break;
        case GameId::Hunt:
            player_x_ = 73;
            player_y_ = 98;
            break;
    }
}

StepResult Env::step(int action) {
    if (action < 0 || action >= action_count())
        throw std::out_of_range("action out of range for " + std::string(game_name(id_)));
    StepResult r;
    switch (id_) {
        case GameId::Explode: step_explode(action, r); break;
        case GameId::Bounce: step_bounce(action, r); break;
        case GameId::Cross: step_cross(action, r); break;
        case GameId::Fruits: step_fruits(action, r); break;
        case GameId::Hunt: step_hunt(action, r); break;
    }
    ++step_index_;
    render();
    return r;
}

void Env::apply_perturbation(PerturbKind kind) {
    if (kind == PerturbKind::Color) {
        if (color_perturbed_) throw std::logic_error("color perturbation already applied");
        color_perturbed_ = true;
    } else {
        if (shape_perturbed_) throw std::logic_error("shape perturbation already applied");
        shape_perturbed_ = true;
    }
    render();
}

// ------------------------------------------------------------------ Explode

void Env::step_explode(int a, StepResult& r) {
    using namespace cn::explode;
    if (a == 1) player_x_ -= kBucketSpeed;
    if (a == 2) player_x_ += kBucketSpeed;
    player_x_ = clampi(player_x_, 0, kW - kBucketW);

    bomber_x_ += bomber_vx_;
    if (bomber_x_ <= kBomberXMin) {
        bomber_x_ = kBomberXMin;
        bomber_vx_ = kBomberSpeed;
    } else if (bomber_x_ >= kBomberXMax) {
        bomber_x_ = kBomberXMax;
        bomber_vx_ = -kBomberSpeed;
    } else if (draw(0) % kFlipOdds == 0) {
        bomber_vx_ = -bomber_vx_;
    }

    if (bomb_active_) {
        bomb_y_ += kBombVy;
        if (overlap(bomb_x_, bomb_y_, kBombW, kBombH, player_x_, kBucketY, kBucketW, kBucketH)) {
            r.reward = 1;
            bomb_active_ = false;
            cooldown_ = kDropCooldown;
        } else if (bomb_y_ >= kH) {
            r.reward = -1;
            bomb_active_ = false;
            cooldown_ = kDropCooldown;
        }
    } else if (cooldown_ > 0) {
        --cooldown_;
    } else {
        bomb_active_ = true;
        bomb_x_ = clampi(bomber_x_ + kBomberW / 2 - kBombW / 2, 0, kW - kBombW);
        bomb_y_ = kBomberY + kBomberH + kDropGap;
    }
}

// ------------------------------------------------------------------- Bounce

void Env::step_bounce(int a, StepResult& r) {
    using namespace cn::bounce;
    if (a == 1) player_y_ -= kPlayerSpeed;
    if (a == 2) player_y_ += kPlayerSpeed;
    player_y_ = clampi(player_y_, kWall, kH - kWall - kPaddleH);

    if (ball_vx_ < 0 && ball_x_ < kOppTrackX) {
        const int target = ball_y_ + kBall / 2 - kPaddleH / 2;
        const int dy = target - opp_y_;
        if (dy > kOppDeadzone) opp_y_ += kOppSpeed;
        if (dy < -kOppDeadzone) opp_y_ -= kOppSpeed;
        opp_y_ = clampi(opp_y_, kWall, kH - kWall - kPaddleH);
    }

    ball_x_ += ball_vx_;
    ball_y_ += ball_vy_;
    if (ball_y_ <= kWall) {
        ball_y_ = kWall;
        ball_vy_ = -ball_vy_;
    }
    if (ball_y_ + kBall >= kH - kWall) {
        ball_y_ = kH - kWall - kBall;
        ball_vy_ = -ball_vy_;
    }

    if (ball_vx_ < 0 &&
        overlap(ball_x_, ball_y_, kBall, kBall, kOppX, opp_y_, kPaddleW, kPaddleH)) {
        ball_vx_ = kBallVx;
        ball_x_ = kOppX + kPaddleW;
        const int rel = ball_y_ + kBall / 2 - (opp_y_ + kPaddleH / 2);
        if (rel < -5) ball_vy_ = -2;
        if (rel > 5) ball_vy_ = 2;
    }
    if (ball_vx_ > 0 &&
        overlap(ball_x_, ball_y_, kBall, kBall, kPlayerX, player_y_, kPaddleW, kPaddleH)) {
        ball_vx_ = -kBallVx;
        ball_x_ = kPlayerX - kBall;
        const int rel = ball_y_ + kBall / 2 - (player_y_ + kPaddleH / 2);
        if (rel < -5) ball_vy_ = -2;
        if (rel > 5) ball_vy_ = 2;
    }

    const bool past_opp = ball_x_ + kBall <= 0;
    const bool past_player = ball_x_ >= kW;
    if (past_opp || past_player) {
        r.reward = past_opp ? 1 : -1;
        r.episode_reset = true;
        ++rally_;
        ball_x_ = kW / 2 - kBall / 2;
        ball_y_ = kH / 2 - kBall / 2;
        ball_vx_ = (rally_ % 2 == 0) ? -kBallVx : kBallVx;
        static constexpr int vys[4] = {-2, -1, 1, 2};
        ball_vy_ = vys[core::hash3(seed_, static_cast<uint64_t>(rally_), 7) % 4];
    }
}

// -------------------------------------------------------------------- Cross

void Env::step_cross(int a, StepResult& r) {
    using namespace cn::cross;
    if (a == 1) player_y_ -= kPlayerSpeed;
    if (a == 2) player_y_ += kPlayerSpeed;
    player_y_ = clampi(player_y_, kGoalY, kPlayerY0);

    for (int i = 0; i < kLanes; ++i) {
        Object& car = objects_[i];
        car.x += kCarSpeed[i];
        if (car.x > kW) car.x = -kCarW;
        if (car.x < -kCarW) car.x = kW;
    }

    if (player_y_ <= kGoalY) {
        r.reward = 1;
        r.episode_reset = true;
        player_y_ = kPlayerY0;
        return;
    }
    for (int i = 0; i < kLanes; ++i) {
        const Object& car = objects_[i];
        if (overlap(player_x_, player_y_, kPlayerW, kPlayerH, car.x, car.y, car.w, car.h)) {
            r.reward = -1;
            r.episode_reset = true;
            player_y_ = kPlayerY0;
            return;
        }
    }
}

// ------------------------------------------------------------------- Fruits

void Env::step_fruits(int a, StepResult& r) {
    using namespace cn::fruits;
    if (a == 1) player_x_ -= kPlayerSpeed;
    if (a == 2) player_x_ += kPlayerSpeed;
    player_x_ = clampi(player_x_, 0, kW - kPlayerW);

    if (step_index_ % kSpawnPeriod == 0) {
        Object o;
        const bool is_fruit = draw(2) % 10 < kFruitOdds;
        o.kind = is_fruit ? 1 : 2;
        o.w = is_fruit ? kFruitW : kRockW;
        o.h = is_fruit ? kFruitH : kRockH;
        o.x = static_cast<int>(draw(1) % static_cast<uint64_t>(kW - o.w));
        o.y = 0;
        o.pal = is_fruit ? kFruitPal[spawn_count_ % 3] : kRockPal;
        objects_.push_back(o);
        ++spawn_count_;
    }

    for (auto& o : objects_) o.y += kFallVy;

    for (std::size_t i = 0; i < objects_.size(); ++i) {
        const Object& o = objects_[i];
        if (overlap(player_x_, kPlayerY, kPlayerW, kPlayerH, o.x, o.y, o.w, o.h)) {
            if (o.kind == 1) {
                r.reward = 1;
                objects_.erase(objects_.begin() + static_cast<long>(i));
            } else {
                r.reward = -1;
                r.episode_reset = true;
                objects_.clear();
                player_x_ = 70;
            }
            break;
        }
    }
    std::erase_if(objects_, [](const Object& o) { return o.y >= kH; });
}

// --------------------------------------------------------------------- Hunt

void Env::step_hunt(int a, StepResult& r) {
    using namespace cn::hunt;
    if (a == 0) player_x_ -= kPlayerSpeed;
    if (a == 1) player_x_ += kPlayerSpeed;
    if (a == 2) player_y_ -= kPlayerSpeed;
    if (a == 3) player_y_ += kPlayerSpeed;
    player_x_ = clampi(player_x_, 0, kW - kPlayerW);
    player_y_ = clampi(player_y_, kYMin, kYMax);

    for (int lane = 0; lane < 4; ++lane) {
        if ((step_index_ + kSpawnLaneOffset * lane) % kSpawnPeriod == 0) {
            Object o;
            const bool good = draw(10 + lane) % 5 < kGoodOdds;
            o.kind = good ? 3 : 4;
            o.w = good ? kGoodW : kBadW;
            o.h = good ? kGoodH : kBadH;
            const int dir = (lane % 2 == 0) ? 1 : -1;
            o.x = dir > 0 ? -o.w : kW;
            o.y = kLaneY[lane];
            o.pal = good ? kGoodPal : kBadPal;
            objects_.push_back(o);
        }
    }

    for (auto& o : objects_) {
        const int lane_idx =
            static_cast<int>(std::find(kLaneY.begin(), kLaneY.end(), o.y) - kLaneY.begin());
        const int dir = (lane_idx % 2 == 0) ? 1 : -1;
        o.x += dir * kItemSpeed;
    }

    for (std::size_t i = 0; i < objects_.size(); ++i) {
        const Object& o = objects_[i];
        if (overlap(player_x_, player_y_, kPlayerW, kPlayerH, o.x, o.y, o.w, o.h)) {
            r.reward = (o.kind == 3) ? 1 : -1;
            objects_.erase(objects_.begin() + static_cast<long>(i));
            break;
        }
    }
    std::erase_if(objects_, [](const Object& o) { return o.x < -o.w - 2 || o.x > kW + 2; });
}

// ---------------------------------------------------------------- rendering

namespace {

int remap_pal(int pal, bool color_perturbed) {
    return color_perturbed ? (pal + cn::kColorRemapShift) % 12 : pal;
}

void fill_rect(Frame& f, int x, int y, int w, int h, cn::Rgb c) {
    const int x0 = std::max(0, x), x1 = std::min(kW, x + w);
    const int y0 = std::max(0, y), y1 = std::min(kH, y + h);
    for (int r = y0; r < y1; ++r) {
        uint8_t* p = f.at(r, x0);
        for (int ccol = x0; ccol < x1; ++ccol) {
            p[0] = c.r;
            p[1] = c.g;
            p[2] = c.b;
            p += 3;
        }
    }
}

void fill_ellipse(Frame& f, int x, int y, int w, int h, cn::Rgb c) {
    // Inscribed in the bounding box; same extent as the rectangle it replaces.
    const double cx = x + w / 2.0 - 0.5, cy = y + h / 2.0 - 0.5;
    const double rx = w / 2.0, ry = h / 2.0;
    const int x0 = std::max(0, x), x1 = std::min(kW, x + w);
    const int y0 = std::max(0, y), y1 = std::min(kH, y + h);
    for (int r = y0; r < y1; ++r) {
        for (int cc = x0; cc < x1; ++cc) {
            const double dx = (cc - cx) / rx, dy = (r - cy) / ry;
            if (dx * dx + dy * dy <= 1.0) {
                uint8_t* p = f.at(r, cc);
                p[0] = c.r;
                p[1] = c.g;
                p[2] = c.b;
            }
        }
    }
}

void fill_triangle(Frame& f, int x, int y, int w, int h, cn::Rgb c) {
    // Isosceles, apex at top center, base at the bottom of the bounding box.
    for (int row = 0; row < h; ++row) {
        const int fr = y + row;
        if (fr < 0 || fr >= kH) continue;
        const int half = std::max(1, ((row + 1) * w) / (2 * h));
        const int cx = x + w / 2;
        const int x0 = std::max(0, cx - half), x1 = std::min(kW, cx + half);
        uint8_t* p = f.at(fr, x0);
        for (int cc = x0; cc < x1; ++cc) {
            p[0] = c.r;
            p[1] = c.g;
            p[2] = c.b;
            p += 3;
        }
    }
}

void draw_sprite(Frame& f, int kind, int x, int y, int w, int h, int pal, bool color_pert,
                 bool shape_pert) {
    const cn::Rgb c = cn::kPalette[static_cast<std::size_t>(remap_pal(pal, color_pert))];
    if (!shape_pert) {
        fill_rect(f, x, y, w, h, c);
    } else if (kind % 2 == 0) {
        fill_ellipse(f, x, y, w, h, c);
    } else {
        fill_triangle(f, x, y, w, h, c);
    }
}

}  // namespace

void Env::render() {
    const cn::Rgb bg = cn::kPalette[static_cast<std::size_t>(remap_pal(0, color_perturbed_))];
    for (int i = 0; i < kW * kH; ++i) {
        frame_.px[i * 3 + 0] = bg.r;
        frame_.px[i * 3 + 1] = bg.g;
        frame_.px[i * 3 + 2] = bg.b;
    }

    auto sprite = [&](int kind, int x, int y, int w, int h, int pal) {
        draw_sprite(frame_, kind, x, y, w, h, pal, color_perturbed_, shape_perturbed_);
    };

    switch (id_) {
        case GameId::Explode: {
            using namespace cn::explode;
            sprite(1, bomber_x_, kBomberY, kBomberW, kBomberH, kBomberPal);
            if (bomb_active_) sprite(2, bomb_x_, bomb_y_, kBombW, kBombH, kBombPal);
            sprite(0, player_x_, kBucketY, kBucketW, kBucketH, kBucketPal);
            break;
        }
        case GameId::Bounce: {
            using namespace cn::bounce;
            // Walls keep their rectangular shape; they are scenery, not primitives.
            const cn::Rgb wall = cn::kPalette[static_cast<std::size_t>(remap_pal(kWallPal, color_perturbed_))];
            fill_rect(frame_, 0, 0, kW, kWall, wall);
            fill_rect(frame_, 0, kH - kWall, kW, kWall, wall);
            sprite(1, kOppX, opp_y_, kPaddleW, kPaddleH, kOppPal);
            sprite(2, ball_x_, ball_y_, kBall, kBall, kBallPal);
            sprite(0, kPlayerX, player_y_, kPaddleW, kPaddleH, kPlayerPal);
            break;
        }
        case GameId::Cross: {
            using namespace cn::cross;
            for (const auto& car : objects_) sprite(car.kind, car.x, car.y, car.w, car.h, car.pal);
            sprite(0, player_x_, player_y_, kPlayerW, kPlayerH, kPlayerPal);
            break;
        }
        case GameId::Fruits: {
            using namespace cn::fruits;
            for (const auto& o : objects_) sprite(o.kind, o.x, o.y, o.w, o.h, o.pal);
            sprite(0, player_x_, kPlayerY, kPlayerW, kPlayerH, kPlayerPal);
            break;
        }
        case GameId::Hunt: {
            using namespace cn::hunt;
            for (const auto& o : objects_) sprite(o.kind, o.x, o.y, o.w, o.h, o.pal);
            sprite(0, player_x_, player_y_, kPlayerW, kPlayerH, kPlayerPal);
            break;
        }
    }
}

}  // namespace axiom::gw
