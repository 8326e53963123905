use crate::analysis::EventFlags;
use crate::numcore::Rng;
use crate::{Error, Result};

use super::Frame;

/// Fixed monster lane columns.
pub const LANE_COLS: [i32; 4] = [4, 12, 20, 28];

const PLAYER_MIN: i32 = 2;
const PLAYER_MAX: i32 = 29;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Action {
    Left = 0,
    Stay = 1,
    Right = 2,
}

impl Action {
    pub fn from_code(code: u8) -> Result<Action> {
        match code {
            0 => Ok(Action::Left),
            1 => Ok(Action::Stay),
            2 => Ok(Action::Right),
            other => Err(Error::Parameter(format!("invalid action code {other}, expected 0..=2"))),
        }
    }

    pub fn code(&self) -> u8 {
        *self as u8
    }
}

/// Environment knobs. The rates are per-step Bernoulli probabilities.
#[derive(Debug, Clone)]
pub struct EnvConfig {
    pub spawn_prob: f64,
    pub launch_prob: f64,
    pub max_steps: u32,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig { spawn_prob: 0.01, launch_prob: 0.03, max_steps: 300 }
    }
}

/// A fireball in flight. `lane` ties it to the monster that launched it so
/// that each monster has at most one fireball alive at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fireball {
    pub lane: usize,
    pub col: i32,
    pub row: i32,
    /// Horizontal drift direction, frozen at launch: sign(player - lane).
    pub drift: i32,
    pub age: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Explosion {
    pub center_col: i32,
    pub phase: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorldState {
    pub player_col: i32,
    pub monsters: [bool; 4],
    pub fireballs: Vec<Fireball>,
    pub explosion: Option<Explosion>,
    pub step_count: u32,
    pub terminated: bool,
}

impl WorldState {
    /// Fresh room: player centered, no monsters, nothing in flight.
    pub fn new() -> Self {
        WorldState {
            player_col: 15,
            monsters: [false; 4],
            fireballs: Vec::new(),
            explosion: None,
            step_count: 0,
            terminated: false,
        }
    }

    pub fn monster_count(&self) -> u8 {
        self.monsters.iter().filter(|&&m| m).count() as u8
    }

    fn lane_has_fireball(&self, lane: usize) -> bool {
        self.fireballs.iter().any(|f| f.lane == lane)
    }
}

impl Default for WorldState {
    fn default() -> Self {
        WorldState::new()
    }
}

/// Advance the world one step.
///
/// Sub-steps run in a fixed order so the RNG stream is reproducible:
/// player movement, explosion phase, fireball flight (fall one row, drift
/// one column on every second step of flight, then impact test at row 27),
/// launches (lanes in order, only monsters without a live fireball draw),
/// spawns (empty lanes in order), then the step counter and episode cap.
/// A fireball impacting while an explosion is already active simply
/// vanishes. The termination flag is raised when an explosion finishes its
/// last phase or `step_count` reaches `cfg.max_steps`.
pub fn step(state: &WorldState, action: Action, rng: &mut Rng, cfg: &EnvConfig) -> WorldState {
    let mut next = state.clone();

    next.player_col = (next.player_col
        + match action {
            Action::Left => -1,
            Action::Stay => 0,
            Action::Right => 1,
        })
    .clamp(PLAYER_MIN, PLAYER_MAX);

    if let Some(explosion) = next.explosion {
        if explosion.phase >= 5 {
            next.explosion = None;
            next.terminated = true;
        } else {
            next.explosion = Some(Explosion { phase: explosion.phase + 1, ..explosion });
        }
    }

    let mut survivors = Vec::with_capacity(next.fireballs.len());
    for mut fireball in next.fireballs.drain(..) {
        fireball.age += 1;
        fireball.row += 1;
        if fireball.age % 2 == 0 {
            fireball.col += fireball.drift;
        }
        if fireball.row >= 27 {
            let near_player = (fireball.col - next.player_col).abs() <= 2;
            if near_player && next.explosion.is_none() {
                next.explosion = Some(Explosion { center_col: fireball.col, phase: 0 });
            }
            // Out of range or second impact: the fireball just vanishes.
        } else {
            survivors.push(fireball);
        }
    }
    next.fireballs = survivors;

    for (lane, &lane_col) in LANE_COLS.iter().enumerate() {
        if next.monsters[lane] && !next.lane_has_fireball(lane) && rng.next_f64() < cfg.launch_prob {
            next.fireballs.push(Fireball {
                lane,
                col: lane_col,
                row: 5,
                drift: (next.player_col - lane_col).signum(),
                age: 0,
            });
        }
    }

    for lane in 0..LANE_COLS.len() {
        if !next.monsters[lane] && rng.next_f64() < cfg.spawn_prob {
            next.monsters[lane] = true;
        }
    }

    next.step_count += 1;
    if next.step_count >= cfg.max_steps {
        next.terminated = true;
    }
    next
}

/// Render a state to a frame. Layers overdraw in order: background, floor,
/// player, monsters, fireballs, explosion, wall bands.
pub fn render(state: &WorldState) -> Frame {
    let mut frame = Frame::blank();

    // Floor.
    for row in 30..=31 {
        for col in 0..Frame::WIDTH {
            frame.set(row, col, 0.3);
        }
    }

    // Player: 3x3 block at 0.9, rows 28..=30, centered on player_col.
    fill_block(&mut frame, 28, 30, state.player_col - 1, state.player_col + 1, 0.9);

    // Monsters: 3x3 at 0.6, rows 2..=4.
    for (lane, &present) in state.monsters.iter().enumerate() {
        if present {
            let c = LANE_COLS[lane];
            fill_block(&mut frame, 2, 4, c - 1, c + 1, 0.6);
        }
    }

    // Fireballs: 2x2 at 1.0 anchored at (row, col) top-left.
    for fireball in &state.fireballs {
        fill_block(&mut frame, fireball.row, fireball.row + 1, fireball.col, fireball.col + 1, 1.0);
    }

    // Explosion: filled disk at 1.0, radius 3 + phase, centered (col, 27).
    if let Some(explosion) = state.explosion {
        let radius = 3 + explosion.phase as i32;
        for row in 0..Frame::HEIGHT as i32 {
            for col in 0..Frame::WIDTH as i32 {
                let (dr, dc) = (row - 27, col - explosion.center_col);
                if dr * dr + dc * dc <= radius * radius {
                    frame.set(row as usize, col as usize, 1.0);
                }
            }
        }
    }

    // Wall bands enter view at the edges and overdraw everything: 0.45
    // with a 0.55 stripe every 4th row.
    if state.player_col <= 5 {
        let last = (5 - state.player_col) as usize;
        draw_wall(&mut frame, 0..=last);
    }
    if state.player_col >= 26 {
        let width = (state.player_col - 26) as usize;
        draw_wall(&mut frame, (Frame::WIDTH - 1 - width)..=(Frame::WIDTH - 1));
    }

    frame
}

fn fill_block(frame: &mut Frame, row0: i32, row1: i32, col0: i32, col1: i32, value: f64) {
    for row in row0.max(0)..=row1.min(Frame::HEIGHT as i32 - 1) {
        for col in col0.max(0)..=col1.min(Frame::WIDTH as i32 - 1) {
            frame.set(row as usize, col as usize, value);
        }
    }
}

fn draw_wall(frame: &mut Frame, cols: std::ops::RangeInclusive<usize>) {
    for col in cols {
        for row in 0..Frame::HEIGHT {
            frame.set(row, col, if row % 4 == 0 { 0.55 } else { 0.45 });
        }
    }
}

/// Event flags derived from simulator state, not pixels. Appearance flags
/// compare object counts against the previous state (None at t=0).
pub fn ground_truth(state: &WorldState, prev: Option<&WorldState>) -> EventFlags {
    let fireball_count = state.fireballs.len() as u8;
    let monster_count = state.monster_count();
    EventFlags {
        fireball_present: fireball_count > 0,
        fireball_appeared: prev.map_or(false, |p| fireball_count > p.fireballs.len() as u8),
        monster_appeared: prev.map_or(false, |p| monster_count > p.monster_count()),
        explosion_active: state.explosion.is_some(),
        wall_left: state.player_col <= 5,
        wall_right: state.player_col >= 26,
        fireball_count,
        monster_count,
    }
}

/// One recorded episode: the per-step frames, the actions taken from them,
/// and the state-derived event flags, all the same length.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeLog {
    pub seed: u64,
    pub actions: Vec<u8>,
    pub frames: Vec<Frame>,
    pub ground_truth_events: Vec<EventFlags>,
}

/// Simulate `count` episodes under a uniform-random policy.
///
/// Episode `i` runs on the child stream `fork(seed, i)`; within an episode
/// the environment consumes `fork(child, 0)` and the action policy
/// `fork(child, 1)`, so replaying a stored action sequence reproduces the
/// environment stream exactly.
pub fn collect_episodes(count: usize, max_steps: u32, seed: u64, cfg: &EnvConfig) -> Result<Vec<EpisodeLog>> {
    if count == 0 {
        return Err(Error::Parameter("collect_episodes: count must be >= 1".into()));
    }
    let cfg = EnvConfig { max_steps, ..cfg.clone() };
    let root = Rng::new(seed);
    let mut episodes = Vec::with_capacity(count);
    for index in 0..count {
        let child = root.fork(index as u64);
        let mut env_rng = child.fork(0);
        let mut action_rng = child.fork(1);

        let mut log = EpisodeLog {
            seed,
            actions: Vec::new(),
            frames: Vec::new(),
            ground_truth_events: Vec::new(),
        };
        let mut state = WorldState::new();
        let mut prev: Option<WorldState> = None;
        loop {
            let action = Action::from_code(action_rng.next_below(3) as u8).expect("range is 0..3");
            log.frames.push(render(&state));
            log.actions.push(action.code());
            log.ground_truth_events.push(ground_truth(&state, prev.as_ref()));

            let next = step(&state, action, &mut env_rng, &cfg);
            prev = Some(state);
            state = next;
            if state.terminated {
                break;
            }
        }
        episodes.push(log);
    }
    Ok(episodes)
}

/// Re-simulate an episode from its root seed, index, and stored actions.
/// Reproduces the original frames bit-exactly and recovers the ground
/// truth events, which dataset files do not store.
pub fn replay_episode(
    seed: u64,
    episode_index: usize,
    actions: &[u8],
    cfg: &EnvConfig,
) -> Result<EpisodeLog> {
    let child = Rng::new(seed).fork(episode_index as u64);
    let mut env_rng = child.fork(0);
    let mut state = WorldState::new();
    let mut prev: Option<WorldState> = None;
    let mut log = EpisodeLog {
        seed,
        actions: actions.to_vec(),
        frames: Vec::with_capacity(actions.len()),
        ground_truth_events: Vec::with_capacity(actions.len()),
    };
    for &code in actions {
        let action = Action::from_code(code)?;
        log.frames.push(render(&state));
        log.ground_truth_events.push(ground_truth(&state, prev.as_ref()));
        let next = step(&state, action, &mut env_rng, cfg);
        prev = Some(state);
        state = next;
    }
    Ok(log)
}

/// Frames of [`replay_episode`], for determinism checks.
pub fn replay_frames(seed: u64, episode_index: usize, actions: &[u8], cfg: &EnvConfig) -> Result<Vec<Frame>> {
    Ok(replay_episode(seed, episode_index, actions, cfg)?.frames)
}
