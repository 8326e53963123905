//! Pixel-based event detection on 32x32 frames.
//!
//! The detectors are threshold rules over connected components, tuned
//! against simulator ground truth on real frames and then reused unchanged
//! on decoded dream frames. All thresholds live in [`DetectorConfig`].

use crate::minicover::Frame;

/// Per-frame event and scenario flags plus the raw object counts behind
/// the appearance flags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EventFlags {
    pub fireball_present: bool,
    pub fireball_appeared: bool,
    pub monster_appeared: bool,
    pub explosion_active: bool,
    pub wall_left: bool,
    pub wall_right: bool,
    pub fireball_count: u8,
    pub monster_count: u8,
}

impl EventFlags {
    /// Named flag lookup used by the attribution report.
    pub fn get(&self, event: EventKind) -> bool {
        match event {
            EventKind::FireballAppeared => self.fireball_appeared,
            EventKind::MonsterAppeared => self.monster_appeared,
            EventKind::ExplosionActive => self.explosion_active,
            EventKind::WallLeft => self.wall_left,
            EventKind::WallRight => self.wall_right,
        }
    }

    /// Pack the six booleans into bits 0..5 (trace file encoding).
    pub fn to_bits(self) -> u8 {
        (self.fireball_present as u8)
            | (self.fireball_appeared as u8) << 1
            | (self.monster_appeared as u8) << 2
            | (self.explosion_active as u8) << 3
            | (self.wall_left as u8) << 4
            | (self.wall_right as u8) << 5
    }

    pub fn from_bits(bits: u8, fireball_count: u8, monster_count: u8) -> Self {
        EventFlags {
            fireball_present: bits & 1 != 0,
            fireball_appeared: bits & 2 != 0,
            monster_appeared: bits & 4 != 0,
            explosion_active: bits & 8 != 0,
            wall_left: bits & 16 != 0,
            wall_right: bits & 32 != 0,
            fireball_count,
            monster_count,
        }
    }
}

/// The five events tracked by the attribution report: two stochastic
/// events (appearances) and three rule regimes (explosion, walls).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    FireballAppeared,
    MonsterAppeared,
    ExplosionActive,
    WallLeft,
    WallRight,
}

impl EventKind {
    pub const ALL: [EventKind; 5] = [
        EventKind::FireballAppeared,
        EventKind::MonsterAppeared,
        EventKind::ExplosionActive,
        EventKind::WallLeft,
        EventKind::WallRight,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            EventKind::FireballAppeared => "fireball_appeared",
            EventKind::MonsterAppeared => "monster_appeared",
            EventKind::ExplosionActive => "explosion_active",
            EventKind::WallLeft => "wall_left",
            EventKind::WallRight => "wall_right",
        }
    }

    pub fn from_name(name: &str) -> Option<EventKind> {
        EventKind::ALL.iter().copied().find(|k| k.name() == name)
    }
}

/// Detection thresholds. Row/column bounds are inclusive.
#[derive(Debug, Clone)]
pub struct DetectorConfig {
    /// Pixels brighter than this belong to fireball candidate regions.
    pub fireball_level: f64,
    /// Fireball regions must lie wholly inside these rows.
    pub fireball_rows: (usize, usize),
    /// Accepted fireball region area, inclusive.
    pub fireball_area: (usize, usize),
    /// Monster candidate pixel band.
    pub monster_level: (f64, f64),
    pub monster_rows: (usize, usize),
    pub monster_area: (usize, usize),
    /// A frame is an explosion when more than this fraction of pixels
    /// exceeds `explosion_level`.
    pub explosion_level: f64,
    pub explosion_fraction: f64,
    /// Wall band: mean over the three outermost columns, these rows.
    pub wall_rows: (usize, usize),
    pub wall_mean: (f64, f64),
}

impl Default for DetectorConfig {
    fn default() -> Self {
        DetectorConfig {
            fireball_level: 0.85,
            fireball_rows: (6, 26),
            fireball_area: (1, 9),
            monster_level: (0.5, 0.7),
            monster_rows: (1, 5),
            monster_area: (4, 12),
            explosion_level: 0.8,
            explosion_fraction: 0.08,
            wall_rows: (8, 24),
            wall_mean: (0.30, 0.65),
        }
    }
}

/// Scan one frame for events. Appearance flags compare object counts
/// against `prev` and are false when `prev` is `None` (the first frame).
pub fn detect_events(frame: &Frame, prev: Option<&Frame>, cfg: &DetectorConfig) -> EventFlags {
    let fireball_count = count_regions(
        frame,
        |p| p > cfg.fireball_level,
        cfg.fireball_rows,
        cfg.fireball_area,
    );
    let monster_count = count_regions(
        frame,
        |p| p >= cfg.monster_level.0 && p <= cfg.monster_level.1,
        cfg.monster_rows,
        cfg.monster_area,
    );

    let bright = frame.pixels().iter().filter(|&&p| p > cfg.explosion_level).count();
    let explosion_active = bright as f64 / (Frame::WIDTH * Frame::HEIGHT) as f64 > cfg.explosion_fraction;

    let wall_left = wall_band_mean(frame, [0, 1, 2], cfg.wall_rows);
    let wall_right = wall_band_mean(frame, [Frame::WIDTH - 3, Frame::WIDTH - 2, Frame::WIDTH - 1], cfg.wall_rows);
    let in_band = |m: f64| m >= cfg.wall_mean.0 && m <= cfg.wall_mean.1;

    let (prev_fireballs, prev_monsters) = match prev {
        Some(p) => {
            let fb = count_regions(p, |v| v > cfg.fireball_level, cfg.fireball_rows, cfg.fireball_area);
            let mo = count_regions(
                p,
                |v| v >= cfg.monster_level.0 && v <= cfg.monster_level.1,
                cfg.monster_rows,
                cfg.monster_area,
            );
            (fb, mo)
        }
        None => (u8::MAX, u8::MAX), // no appearances on the first frame
    };

    EventFlags {
        fireball_present: fireball_count > 0,
        fireball_appeared: fireball_count > prev_fireballs,
        monster_appeared: monster_count > prev_monsters,
        explosion_active,
        wall_left: in_band(wall_left),
        wall_right: in_band(wall_right),
        fireball_count,
        monster_count,
    }
}

fn wall_band_mean(frame: &Frame, cols: [usize; 3], rows: (usize, usize)) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for row in rows.0..=rows.1 {
        for &col in &cols {
            sum += frame.get(row, col);
            n += 1;
        }
    }
    sum / n as f64
}

/// Count 4-connected regions of pixels matching `mask` whose bounding rows
/// lie wholly inside `rows` and whose area falls in `area` (both inclusive).
fn count_regions(
    frame: &Frame,
    mask: impl Fn(f64) -> bool,
    rows: (usize, usize),
    area: (usize, usize),
) -> u8 {
    let (w, h) = (Frame::WIDTH, Frame::HEIGHT);
    let mut visited = [false; Frame::WIDTH * Frame::HEIGHT];
    let mut count = 0u8;
    let mut stack = Vec::new();
    for start in 0..w * h {
        if visited[start] || !mask(frame.pixels()[start]) {
            continue;
        }
        // Flood fill one component, tracking its area and row extent.
        let mut size = 0usize;
        let mut min_row = h;
        let mut max_row = 0usize;
        stack.push(start);
        visited[start] = true;
        while let Some(idx) = stack.pop() {
            size += 1;
            let (row, col) = (idx / w, idx % w);
            min_row = min_row.min(row);
            max_row = max_row.max(row);
            let mut try_push = |r: usize, c: usize| {
                let n = r * w + c;
                if !visited[n] && mask(frame.pixels()[n]) {
                    visited[n] = true;
                    stack.push(n);
                }
            };
            if row > 0 {
                try_push(row - 1, col);
            }
            if row + 1 < h {
                try_push(row + 1, col);
            }
            if col > 0 {
                try_push(row, col - 1);
            }
            if col + 1 < w {
                try_push(row, col + 1);
            }
        }
        if min_row >= rows.0 && max_row <= rows.1 && size >= area.0 && size <= area.1 {
            count = count.saturating_add(1);
        }
    }
    count
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_room_has_no_events() {
        let state = crate::minicover::WorldState::new();
        let frame = crate::minicover::render(&state);
        let flags = detect_events(&frame, None, &DetectorConfig::default());
        assert_eq!(flags, EventFlags::default());
    }

    #[test]
    fn single_fireball_is_one_region() {
        let mut frame = Frame::blank();
        for (r, c) in [(10, 8), (10, 9), (11, 8), (11, 9)] {
            frame.set(r, c, 1.0);
        }
        let flags = detect_events(&frame, None, &DetectorConfig::default());
        assert_eq!(flags.fireball_count, 1);
        assert!(flags.fireball_present);
        assert!(!flags.fireball_appeared, "no appearances without a previous frame");
    }

    #[test]
    fn appearance_requires_count_increase() {
        let mut one = Frame::blank();
        for (r, c) in [(10, 8), (10, 9), (11, 8), (11, 9)] {
            one.set(r, c, 1.0);
        }
        let mut two = one.clone();
        for (r, c) in [(14, 20), (14, 21), (15, 20), (15, 21)] {
            two.set(r, c, 1.0);
        }
        let cfg = DetectorConfig::default();
        assert!(detect_events(&two, Some(&one), &cfg).fireball_appeared);
        assert!(!detect_events(&one, Some(&two), &cfg).fireball_appeared);
        assert!(!detect_events(&one, Some(&one), &cfg).fireball_appeared);
    }

    #[test]
    fn bits_round_trip() {
        let flags = EventFlags {
            fireball_present: true,
            fireball_appeared: false,
            monster_appeared: true,
            explosion_active: false,
            wall_left: true,
            wall_right: false,
            fireball_count: 2,
            monster_count: 3,
        };
        assert_eq!(EventFlags::from_bits(flags.to_bits(), 2, 3), flags);
    }
}
