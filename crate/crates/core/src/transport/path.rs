//! Closed-form control paths: each segment moves some fluxons over a unit
//! parameter interval. Segments that return to their start (whole turns,
//! exchanges, lines back to the start) end on bit-identical positions.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::TransportError;

/// One move of the control path. Fluxon indices are 0-based.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Segment {
    /// `mover` travels around `center` on the circle through its current
    /// position; positive turns are counter-clockwise.
    Circle { mover: usize, center: Complex64, turns: f64 },
    /// Like `Circle` on an ellipse through the current position whose axes are
    /// rotated by `angle` and whose minor/major ratio is `ratio`.
    Ellipse { mover: usize, center: Complex64, ratio: f64, angle: f64, turns: f64 },
    /// Straight move of `mover` to `to`.
    Line { mover: usize, to: Complex64 },
    /// Rigid rotation of the whole configuration about `center`.
    Rotation { center: Complex64, turns: f64 },
    /// Half turns of the pair about its midpoint; an odd count swaps them.
    Exchange { pair: (usize, usize), half_turns: i32 },
}

/// Speed profile applied to every segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    #[default]
    Uniform,
    /// s ↦ s − sin(2πs)/2π: starts and stops at rest.
    Eased,
}

impl Profile {
    fn map(self, s: f64) -> (f64, f64) {
        match self {
            Profile::Uniform => (s, 1.0),
            Profile::Eased => (s - (TAU * s).sin() / TAU, 1.0 - (TAU * s).cos()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Placed {
    segment: Segment,
    start: Vec<Complex64>,
    end: Vec<Complex64>,
    /// Ellipse semi-axes and start angle, or circle radius and start angle.
    shape: (f64, f64, f64),
}

/// A piecewise path t ↦ ζ(t), one unit of parameter per segment.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlPath {
    placed: Vec<Placed>,
    profile: Profile,
}

impl ControlPath {
    pub fn new(start: Vec<Complex64>, segments: Vec<Segment>) -> Result<Self, TransportError> {
        Self::with_profile(start, segments, Profile::Uniform)
    }

    pub fn with_profile(start: Vec<Complex64>, segments: Vec<Segment>, profile: Profile) -> Result<Self, TransportError> {
        let n = start.len();
        let mut current = start;
        let mut placed = Vec::with_capacity(segments.len());
        for segment in segments {
            let check = |a: usize| {
                if a < n {
                    Ok(())
                } else {
                    Err(TransportError::InvalidPath(format!("fluxon index {a} out of range")))
                }
            };
            let mut end = current.clone();
            let mut shape = (0.0, 0.0, 0.0);
            match &segment {
                Segment::Circle { mover, center, turns } => {
                    check(*mover)?;
                    let w = current[*mover] - center;
                    if w.norm() == 0.0 {
                        return Err(TransportError::InvalidPath("circle centred on its mover".into()));
                    }
                    shape = (w.norm(), w.norm(), w.arg());
                    if turns.fract() != 0.0 {
                        end[*mover] = center + Complex64::from_polar(w.norm(), w.arg() + TAU * turns);
                    }
                }
                Segment::Ellipse { mover, center, ratio, angle, turns } => {
                    check(*mover)?;
                    if !(*ratio > 0.0 && ratio.is_finite()) {
                        return Err(TransportError::InvalidPath("ellipse ratio must be positive".into()));
                    }
                    let w = (current[*mover] - center) * Complex64::from_polar(1.0, -angle);
                    let (x, y) = (w.re, w.im / ratio);
                    let major = x.hypot(y);
                    if major == 0.0 {
                        return Err(TransportError::InvalidPath("ellipse centred on its mover".into()));
                    }
                    shape = (major, major * ratio, y.atan2(x));
                    if turns.fract() != 0.0 {
                        end[*mover] = ellipse_point(*center, *angle, shape, TAU * turns).0;
                    }
                }
                Segment::Line { mover, to } => {
                    check(*mover)?;
                    end[*mover] = *to;
                }
                Segment::Rotation { center, turns } => {
                    if turns.fract() != 0.0 {
                        let r = Complex64::from_polar(1.0, TAU * turns);
                        for (e, c) in end.iter_mut().zip(&current) {
                            *e = center + (c - center) * r;
                        }
                    }
                }
                Segment::Exchange { pair: (a, b), half_turns } => {
                    check(*a)?;
                    check(*b)?;
                    if a == b {
                        return Err(TransportError::InvalidPath("exchange of a fluxon with itself".into()));
                    }
                    if half_turns % 2 != 0 {
                        end.swap(*a, *b);
                    }
                }
            }
            placed.push(Placed { segment, start: current, end: end.clone(), shape });
            current = end;
        }
        Ok(Self { placed, profile })
    }

    pub fn segments(&self) -> usize {
        self.placed.len()
    }

    pub fn start(&self) -> &[Complex64] {
        &self.placed[0].start
    }

    pub fn end(&self) -> &[Complex64] {
        &self.placed.last().expect("path has segments").end
    }

    pub fn segment_start(&self, k: usize) -> &[Complex64] {
        &self.placed[k].start
    }

    /// Permutation π with end[a] = start[π(a)], if the end is a relabeling of
    /// the start (bitwise equal positions).
    pub fn end_permutation(&self) -> Option<Vec<usize>> {
        let (s, e) = (self.start(), self.end());
        e.iter().map(|z| s.iter().position(|w| w == z)).collect()
    }

    /// Positions and velocities (d/ds) on segment `k` at s ∈ [0,1].
    pub fn eval(&self, k: usize, s: f64) -> (Vec<Complex64>, Vec<Complex64>) {
        let p = &self.placed[k];
        let (s, speed) = self.profile.map(s);
        let mut pos = p.start.clone();
        let mut vel = vec![Complex64::new(0.0, 0.0); pos.len()];
        if s == 1.0 {
            pos.clone_from(&p.end);
        }
        let at_end = s == 1.0;
        match &p.segment {
            Segment::Circle { mover, center, turns } => {
                let th = p.shape.2 + TAU * turns * s;
                let w = Complex64::from_polar(p.shape.0, th);
                if !at_end {
                    pos[*mover] = center + w;
                }
                vel[*mover] = Complex64::i() * w * (TAU * turns * speed);
            }
            Segment::Ellipse { mover, center, angle, turns, .. } => {
                let (z, dz) = ellipse_point(*center, *angle, p.shape, TAU * turns * s);
                if !at_end {
                    pos[*mover] = z;
                }
                vel[*mover] = dz * (TAU * turns * speed);
            }
            Segment::Line { mover, to } => {
                let d = to - p.start[*mover];
                if !at_end {
                    pos[*mover] = p.start[*mover] + d * s;
                }
                vel[*mover] = d * speed;
            }
            Segment::Rotation { center, turns } => {
                let r = Complex64::from_polar(1.0, TAU * turns * s);
                for (a, z) in p.start.iter().enumerate() {
                    let w = (z - center) * r;
                    if !at_end {
                        pos[a] = center + w;
                    }
                    vel[a] = Complex64::i() * w * (TAU * turns * speed);
                }
            }
            Segment::Exchange { pair: (a, b), half_turns } => {
                let mid = 0.5 * (p.start[*a] + p.start[*b]);
                let r = Complex64::from_polar(1.0, PI * *half_turns as f64 * s);
                let rate = PI * *half_turns as f64 * speed;
                for &c in &[*a, *b] {
                    let w = (p.start[c] - mid) * r;
                    if !at_end {
                        pos[c] = mid + w;
                    }
                    vel[c] = Complex64::i() * w * rate;
                }
            }
        }
        (pos, vel)
    }

    /// Smallest pairwise distance seen on `samples` points per segment.
    pub fn min_separation(&self, samples: usize) -> f64 {
        let mut best = f64::INFINITY;
        for k in 0..self.placed.len() {
            for i in 0..=samples {
                let (pos, _) = self.eval(k, i as f64 / samples as f64);
                for a in 0..pos.len() {
                    for b in a + 1..pos.len() {
                        best = best.min((pos[a] - pos[b]).norm());
                    }
                }
            }
        }
        best
    }
}

fn ellipse_point(center: Complex64, angle: f64, shape: (f64, f64, f64), phase: f64) -> (Complex64, Complex64) {
    let (a, b, t0) = shape;
    let t = t0 + phase;
    let rot = Complex64::from_polar(1.0, angle);
    let z = center + rot * Complex64::new(a * t.cos(), b * t.sin());
    let dz = rot * Complex64::new(-a * t.sin(), b * t.cos());
    (z, dz)
}
