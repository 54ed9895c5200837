//! Lane centerlines and the Frenet <-> Cartesian transforms used by the planner.
//!
//! A [`LanePath`] is a resampled polyline with per-vertex heading and curvature
//! tables. Between vertices the position, heading and curvature are linearly
//! interpolated, so the frame `c(s) + d * n(s)` is continuous in `s` and the
//! inverse projection reduces to a 1-D root search of
//! `(p - c(s)) . t(s) = 0`.

use std::f64::consts::PI;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Offsets with `d * kappa` at or above this value are rejected.
pub const SINGULARITY_GUARD: f64 = 0.95;

const DOMAIN_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_angle(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { x: c, y: s }
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Left-hand normal.
    pub fn perp(self) -> Vec2 {
        Vec2::new(-self.y, self.x)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<f64> for Vec2 {
    type Output = Vec2;
    fn mul(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(theta: f64) -> f64 {
    let mut a = theta % (2.0 * PI);
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// Lane-relative pose: arc position, signed lateral offset (left positive)
/// and heading relative to the lane tangent.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FrenetPose {
    pub s: f64,
    pub d: f64,
    pub theta_rel: f64,
}

impl FrenetPose {
    pub fn new(s: f64, d: f64, theta_rel: f64) -> Self {
        Self { s, d, theta_rel }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CartesianPose {
    pub x: f64,
    pub y: f64,
    pub theta: f64,
    pub kappa: f64,
}

impl CartesianPose {
    pub fn new(x: f64, y: f64, theta: f64, kappa: f64) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
            kappa,
        }
    }

    pub fn position(&self) -> Vec2 {
        Vec2::new(self.x, self.y)
    }
}

/// Arc-length parameterized lane centerline.
#[derive(Debug, Clone, PartialEq)]
pub struct LanePath {
    pub id: String,
    points: Vec<Vec2>,
    headings: Vec<f64>,
    curvatures: Vec<f64>,
    arc_lengths: Vec<f64>,
    pub left_neighbor: Option<String>,
    pub right_neighbor: Option<String>,
    pub speed_limit: f64,
    /// Maximum |d| accepted by [`LanePath::cartesian_to_frenet`].
    pub corridor: f64,
    /// The lane ends at its last point (on-ramps); vehicles must leave it before.
    pub dead_end: bool,
}

/// Resamples `waypoints` to at most `resample_step` spacing and tabulates
/// headings (central chords, one-sided at the ends) and curvature.
pub fn build_lane_path(waypoints: &[Vec2], resample_step: f64) -> Result<LanePath> {
    if waypoints.len() < 2 {
        return Err(Error::InvalidInput(format!(
            "a lane needs at least 2 waypoints, got {}",
            waypoints.len()
        )));
    }
    if !(resample_step > 0.0) || !resample_step.is_finite() {
        return Err(Error::InvalidInput(format!(
            "resample step must be positive, got {resample_step}"
        )));
    }
    for (i, w) in waypoints.windows(2).enumerate() {
        if !(w[0].x.is_finite() && w[0].y.is_finite() && w[1].x.is_finite() && w[1].y.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite waypoint near index {i}")));
        }
        if (w[1] - w[0]).norm() < 1e-9 {
            return Err(Error::InvalidInput(format!(
                "waypoints {i} and {} coincide",
                i + 1
            )));
        }
    }

    let mut points = Vec::with_capacity(waypoints.len());
    for w in waypoints.windows(2) {
        let len = (w[1] - w[0]).norm();
        let n = ((len / resample_step) - 1e-9).ceil().max(1.0) as usize;
        for j in 0..n {
            let f = j as f64 / n as f64;
            points.push(w[0] + (w[1] - w[0]) * f);
        }
    }
    points.push(*waypoints.last().unwrap());

    let n = points.len();
    let mut arc_lengths = Vec::with_capacity(n);
    arc_lengths.push(0.0);
    for i in 1..n {
        let ds = (points[i] - points[i - 1]).norm();
        arc_lengths.push(arc_lengths[i - 1] + ds);
    }

    let chord_heading = |a: Vec2, b: Vec2| (b.y - a.y).atan2(b.x - a.x);
    let mut headings = Vec::with_capacity(n);
    for i in 0..n {
        let h = if i == 0 {
            chord_heading(points[0], points[1])
        } else if i == n - 1 {
            chord_heading(points[n - 2], points[n - 1])
        } else {
            chord_heading(points[i - 1], points[i + 1])
        };
        headings.push(h);
    }

    // three-point (circumscribed circle) curvature; endpoints copy their neighbour
    let mut curvatures = vec![0.0; n];
    for i in 1..n.saturating_sub(1) {
        let (a, b, c) = (points[i - 1], points[i], points[i + 1]);
        let denom = (b - a).norm() * (c - b).norm() * (c - a).norm();
        curvatures[i] = 2.0 * (b - a).cross(c - b) / denom;
    }
    if n > 2 {
        curvatures[0] = curvatures[1];
        curvatures[n - 1] = curvatures[n - 2];
    }

    Ok(LanePath {
        id: String::new(),
        points,
        headings,
        curvatures,
        arc_lengths,
        left_neighbor: None,
        right_neighbor: None,
        speed_limit: 13.9,
        corridor: 5.0,
        dead_end: false,
    })
}

/// Samples on a circular arc, `spacing` apart (last sample lands on the end).
pub fn arc_waypoints(center: Vec2, radius: f64, start_angle: f64, sweep: f64, spacing: f64) -> Vec<Vec2> {
    let len = radius * sweep.abs();
    let n = (len / spacing).ceil().max(1.0) as usize;
    (0..=n)
        .map(|j| {
            let a = start_angle + sweep * j as f64 / n as f64;
            center + Vec2::from_angle(a) * radius
        })
        .collect()
}

impl LanePath {
    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn with_corridor(mut self, corridor: f64) -> Self {
        self.corridor = corridor;
        self
    }

    pub fn length(&self) -> f64 {
        *self.arc_lengths.last().unwrap()
    }

    pub fn points(&self) -> &[Vec2] {
        &self.points
    }

    pub fn headings(&self) -> &[f64] {
        &self.headings
    }

    pub fn curvatures(&self) -> &[f64] {
        &self.curvatures
    }

    pub fn arc_lengths(&self) -> &[f64] {
        &self.arc_lengths
    }

    pub fn max_abs_curvature(&self) -> f64 {
        self.curvatures.iter().fold(0.0, |m, k| m.max(k.abs()))
    }

    fn segment(&self, s: f64) -> (usize, f64) {
        let n = self.arc_lengths.len();
        let i = self.arc_lengths.partition_point(|&a| a <= s).clamp(1, n - 1) - 1;
        let len = self.arc_lengths[i + 1] - self.arc_lengths[i];
        let f = ((s - self.arc_lengths[i]) / len).clamp(0.0, 1.0);
        (i, f)
    }

    /// Centerline position, tangent heading and curvature at `s` (clamped to the domain).
    pub fn sample(&self, s: f64) -> (Vec2, f64, f64) {
        let (i, f) = self.segment(s);
        let p = self.points[i] + (self.points[i + 1] - self.points[i]) * f;
        let h = self.headings[i] + f * normalize_angle(self.headings[i + 1] - self.headings[i]);
        let k = self.curvatures[i] + f * (self.curvatures[i + 1] - self.curvatures[i]);
        (p, h, k)
    }

    pub fn heading_at(&self, s: f64) -> f64 {
        normalize_angle(self.sample(s).1)
    }

    pub fn curvature_at(&self, s: f64) -> f64 {
        self.sample(s).2
    }

    pub fn contains(&self, s: f64) -> bool {
        s >= -DOMAIN_EPS && s <= self.length() + DOMAIN_EPS
    }

    pub fn frenet_to_cartesian(&self, pose: FrenetPose) -> Result<CartesianPose> {
        if !self.contains(pose.s) || !pose.s.is_finite() {
            return Err(Error::OutOfDomain(format!(
                "s = {:.3} outside lane `{}` [0, {:.3}]",
                pose.s,
                self.id,
                self.length()
            )));
        }
        let (c, h, kc) = self.sample(pose.s);
        let dk = pose.d * kc;
        if dk >= SINGULARITY_GUARD {
            return Err(Error::Singular(dk));
        }
        let p = c + Vec2::from_angle(h).perp() * pose.d;
        Ok(CartesianPose::new(p.x, p.y, h + pose.theta_rel, kc / (1.0 - dk)))
    }

    pub fn cartesian_to_frenet(&self, pose: &CartesianPose) -> Result<FrenetPose> {
        self.project(pose, None)
    }

    /// Same as [`cartesian_to_frenet`](Self::cartesian_to_frenet), but seeds the
    /// nearest-vertex search near `s_hint` instead of scanning the whole lane.
    pub fn cartesian_to_frenet_near(&self, pose: &CartesianPose, s_hint: f64) -> Result<FrenetPose> {
        self.project(pose, Some(s_hint))
    }

    fn tangent_residual(&self, p: Vec2, s: f64) -> f64 {
        let (c, h, _) = self.sample(s);
        (p - c).dot(Vec2::from_angle(h))
    }

    fn nearest_vertex(&self, p: Vec2, hint: Option<f64>) -> usize {
        let n = self.points.len();
        let (lo, hi) = match hint {
            Some(s) => {
                let w = self.corridor + 10.0;
                let lo = self.arc_lengths.partition_point(|&a| a < s - w);
                let hi = self.arc_lengths.partition_point(|&a| a <= s + w);
                (lo.min(n - 1), hi.clamp(lo.min(n - 1) + 1, n))
            }
            None => (0, n),
        };
        let mut best = lo;
        let mut best_d = f64::INFINITY;
        for i in lo..hi {
            let d = (self.points[i] - p).dot(self.points[i] - p);
            if d < best_d {
                best_d = d;
                best = i;
            }
        }
        best
    }

    fn project(&self, pose: &CartesianPose, hint: Option<f64>) -> Result<FrenetPose> {
        let p = pose.position();
        if !(p.x.is_finite() && p.y.is_finite()) {
            return Err(Error::InvalidInput("non-finite position".into()));
        }
        let mut seed = self.nearest_vertex(p, hint);
        // a stale hint leaves the seed far from the point; fall back to a full scan
        if hint.is_some() && (self.points[seed] - p).norm() > self.corridor + 2.0 {
            seed = self.nearest_vertex(p, None);
        }
        let s_seed = self.arc_lengths[seed];
        let n = self.points.len();
        let window = 2.0 + self.corridor.min(10.0) * 0.5;

        let mut best: Option<(f64, f64)> = None;
        let mut j = seed.saturating_sub(1);
        while j > 0 && self.arc_lengths[j] > s_seed - window {
            j -= 1;
        }
        while j + 1 < n && self.arc_lengths[j] <= s_seed + window {
            let (a, b) = (self.arc_lengths[j], self.arc_lengths[j + 1]);
            let (fa, fb) = (self.tangent_residual(p, a), self.tangent_residual(p, b));
            if fa >= 0.0 && fb <= 0.0 {
                let s = self.refine_root(p, a, b, fa, fb);
                let (c, h, _) = self.sample(s);
                let d = (p - c).dot(Vec2::from_angle(h).perp());
                let better = match best {
                    None => true,
                    Some((bs, bd)) => {
                        d.abs() < bd.abs() - 1e-12 || ((d.abs() - bd.abs()).abs() <= 1e-12 && (s - s_seed).abs() < (bs - s_seed).abs())
                    }
                };
                if better {
                    best = Some((s, d));
                }
            }
            j += 1;
        }

        let (s, d) = match best {
            Some(v) => v,
            None => {
                return Err(Error::OutOfDomain(format!(
                    "({:.3}, {:.3}) projects outside lane `{}`",
                    p.x, p.y, self.id
                )))
            }
        };
        if d.abs() > self.corridor {
            return Err(Error::OffCorridor {
                offset: d.abs(),
                corridor: self.corridor,
            });
        }
        let theta_rel = normalize_angle(pose.theta - self.heading_at(s));
        Ok(FrenetPose { s, d, theta_rel })
    }

    // Illinois-modified regula falsi on a bracketing segment.
    fn refine_root(&self, p: Vec2, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64) -> f64 {
        if fa == 0.0 {
            return a;
        }
        if fb == 0.0 {
            return b;
        }
        let mut side = 0i8;
        let mut x = a;
        for _ in 0..100 {
            x = (a * fb - b * fa) / (fb - fa);
            if !(x > a && x < b) {
                x = 0.5 * (a + b);
            }
            let fx = self.tangent_residual(p, x);
            if fx == 0.0 || (b - a) < 1e-13 {
                break;
            }
            if (fx > 0.0) == (fa > 0.0) {
                a = x;
                fa = fx;
                if side == -1 {
                    fb *= 0.5;
                }
                side = -1;
            } else {
                b = x;
                fb = fx;
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
            if fx.abs() < 1e-14 {
                break;
            }
        }
        x
    }
}

/// Index of a lane inside a [`LaneNetwork`].
pub type LaneId = usize;

/// A set of lanes with resolved neighbour links.
#[derive(Debug, Clone)]
pub struct LaneNetwork {
    lanes: Vec<LanePath>,
    left: Vec<Option<LaneId>>,
    right: Vec<Option<LaneId>>,
}

impl LaneNetwork {
    /// Resolves neighbour references by lane id. Ids must be unique.
    pub fn new(lanes: Vec<LanePath>) -> Result<Self> {
        if lanes.is_empty() {
            return Err(Error::InvalidInput("a lane network needs at least one lane".into()));
        }
        let lookup = |id: &str, path: String| {
            lanes
                .iter()
                .position(|l| l.id == id)
                .ok_or_else(|| Error::DanglingLane { lane: id.to_string(), path })
        };
        for (i, l) in lanes.iter().enumerate() {
            if lanes[..i].iter().any(|o| o.id == l.id) {
                return Err(Error::InvalidInput(format!("duplicate lane id `{}`", l.id)));
            }
        }
        let mut left = Vec::with_capacity(lanes.len());
        let mut right = Vec::with_capacity(lanes.len());
        for (i, l) in lanes.iter().enumerate() {
            left.push(match &l.left_neighbor {
                Some(id) => Some(lookup(id, format!("lanes[{i}].left"))?),
                None => None,
            });
            right.push(match &l.right_neighbor {
                Some(id) => Some(lookup(id, format!("lanes[{i}].right"))?),
                None => None,
            });
        }
        Ok(Self { lanes, left, right })
    }

    pub fn len(&self) -> usize {
        self.lanes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lanes.is_empty()
    }

    pub fn lane(&self, id: LaneId) -> &LanePath {
        &self.lanes[id]
    }

    pub fn lanes(&self) -> &[LanePath] {
        &self.lanes
    }

    pub fn find(&self, id: &str) -> Option<LaneId> {
        self.lanes.iter().position(|l| l.id == id)
    }

    pub fn left_of(&self, id: LaneId) -> Option<LaneId> {
        self.left[id]
    }

    pub fn right_of(&self, id: LaneId) -> Option<LaneId> {
        self.right[id]
    }
}
