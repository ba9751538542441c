//! Phase-plane analysis of the traveling-wave ODE.
//!
//! With `X = φ` and `Z = -m X^{γ/(p-1)-1} φ'`, profiles of speed `c` are
//! trajectories of
//!
//! ```text
//! dX/dτ = (p-1) X |Z|^{p-2} Z,    dZ/dτ = cZ - |Z|^p - f_mp(X),
//! ```
//!
//! with the physical coordinate recovered from `dξ = -m(p-1) X^{γ/(p-1)} |Z|^{p-2} dτ`.
//! Internally the system is integrated in `(ln X, Z)` and reparametrised by
//! arclength, which keeps the step count bounded both near the saddles and
//! along the long approach to `X = 0`.

use std::cell::Cell;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::ode::{integrate, Flow, OdeOptions, StopReason};
use crate::params::Params;
use crate::reaction::{f_mp_limit, weighted_integral, Reaction, ReactionKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub x: f64,
    pub z: f64,
}

impl PhasePoint {
    pub fn new(x: f64, z: f64) -> Self {
        Self { x, z }
    }
}

/// One sample of an integrated trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub tau: f64,
    pub x: f64,
    pub z: f64,
    pub xi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Fate {
    HitsAxisAboveTarget,
    HitsAxisBelowTarget,
    CrossesZZero,
    Diverged,
    ReachedTarget,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub c: f64,
    pub fate: Fate,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("trajectories are never empty")
    }

    /// `Z` at abscissa `x` on the leading stretch where `X` decreases, by
    /// linear interpolation. `None` outside that stretch.
    pub fn z_at(&self, x: f64) -> Option<f64> {
        let s = &self.samples;
        let end = s.windows(2).position(|w| w[1].x >= w[0].x).map_or(s.len(), |k| k + 1);
        let s = &s[..end];
        if s.len() < 2 || x > s[0].x || x < s[end - 1].x {
            return None;
        }
        let k = s.partition_point(|v| v.x > x).clamp(1, end - 1);
        let (a, b) = (s[k - 1], s[k]);
        let t = if a.x == b.x { 0.0 } else { (a.x - x) / (a.x - b.x) };
        Some(a.z + t * (b.z - a.z))
    }

    /// Writes `tau,X,Z,xi` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["tau", "X", "Z", "xi"])?;
        for s in &self.samples {
            w.write_record([s.tau, s.x, s.z, s.xi].map(|v| v.to_string()))?;
        }
        w.flush()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CriticalLabel {
    O,
    A,
    S,
    Rc,
    RLambda1,
    RLambda2,
    RLambdaStar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoints {
    pub points: Vec<(CriticalLabel, PhasePoint)>,
}

impl CriticalPoints {
    pub fn get(&self, label: CriticalLabel) -> Option<PhasePoint> {
        self.points.iter().find(|(l, _)| *l == label).map(|(_, p)| *p)
    }
}

/// Options for shooting from the saddle.
#[derive(Debug, Clone, Copy)]
pub struct ShootOptions {
    /// Distance from the saddle at launch.
    pub eps: f64,
    /// Relative tolerance of the "reached the target" test.
    pub fate_tol: f64,
    pub ode: OdeOptions,
}

impl Default for ShootOptions {
    fn default() -> Self {
        Self { eps: 1e-5, fate_tol: 1e-4, ode: OdeOptions::default() }
    }
}

/// `(dX/dτ, dZ/dτ)`; at `X = 0` the reaction term takes its limit value.
pub fn trajectory_rhs(params: &Params, reaction: &Reaction, point: PhasePoint, c: f64) -> (f64, f64) {
    let p = params.p();
    let (x, z) = (point.x, point.z);
    let zp = signed_pow(z, p - 1.0);
    let dx = (p - 1.0) * x * zp;
    let dz = c * z - z.abs().powf(p) - f_mp_limit(params, reaction, x.max(0.0));
    (dx, dz)
}

/// `H(X,Z;c) = dZ/dX`, the slope of trajectories.
pub fn trajectory_slope(params: &Params, reaction: &Reaction, point: PhasePoint, c: f64) -> f64 {
    let (dx, dz) = trajectory_rhs(params, reaction, point, c);
    dz / dx
}

fn signed_pow(z: f64, e: f64) -> f64 {
    if z == 0.0 {
        0.0
    } else {
        z.abs().powf(e).copysign(z)
    }
}

/// Roots of the concave map `Z ↦ cZ - |Z|^p - v`.
fn isocline_roots(p: f64, c: f64, v: f64) -> Vec<f64> {
    let g = |z: f64| c * z - z.abs().powf(p) - v;
    let dg = |z: f64| c - p * z.abs().powf(p - 1.0) * z.signum();
    if v == 0.0 {
        let top = if c > 0.0 { c.powf(1.0 / (p - 1.0)) } else { 0.0 };
        return if top > 0.0 { vec![0.0, top] } else { vec![0.0] };
    }
    let vertex = if c > 0.0 { (c / p).powf(1.0 / (p - 1.0)) } else { 0.0 };
    let peak = g(vertex);
    if peak < 0.0 {
        return Vec::new();
    }
    if peak == 0.0 {
        return vec![vertex];
    }
    let mut roots = Vec::with_capacity(2);
    for dir in [-1.0, 1.0] {
        let mut step = 1.0f64.max(vertex);
        let mut far = vertex + dir * step;
        while g(far) >= 0.0 {
            step *= 2.0;
            far = vertex + dir * step;
        }
        // g(vertex) > 0 > g(far); bisect, then polish with Newton steps kept inside
        let (mut lo, mut hi) = if dir < 0.0 { (far, vertex) } else { (vertex, far) };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid == lo || mid == hi {
                break;
            }
            let inside = (g(mid) > 0.0) == (dir > 0.0);
            if inside {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut z = 0.5 * (lo + hi);
        for _ in 0..3 {
            let d = dg(z);
            if d == 0.0 {
                break;
            }
            let next = z - g(z) / d;
            if next < lo || next > hi {
                break;
            }
            z = next;
        }
        roots.push(z);
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    roots
}

/// All real `Z` with `cZ - |Z|^p = f_mp(X)`, sorted ascending.
pub fn null_isocline(params: &Params, reaction: &Reaction, c: f64, x: f64) -> Vec<f64> {
    isocline_roots(params.p(), c, f_mp_limit(params, reaction, x.max(0.0)))
}

/// Maximiser and maximum of `f_mp` on the interval where `f > 0`.
pub fn f_mp_max(params: &Params, reaction: &Reaction) -> (f64, f64) {
    let (lo, hi) = reaction.positivity_interval();
    let g = |x: f64| f_mp_limit(params, reaction, x);
    let n = 2000;
    let mut best = (lo, g(lo));
    let mut best_i = 0;
    for i in 0..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = g(x);
        if v > best.1 {
            best = (x, v);
            best_i = i;
        }
    }
    let h = (hi - lo) / n as f64;
    let (mut a, mut b) = ((lo + h * (best_i as f64 - 1.0)).max(lo), (lo + h * (best_i as f64 + 1.0)).min(hi));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - phi * (b - a);
    let mut x2 = a + phi * (b - a);
    let (mut g1, mut g2) = (g(x1), g(x2));
    while b - a > 1e-13 {
        if g1 < g2 {
            a = x1;
            x1 = x2;
            g1 = g2;
            x2 = a + phi * (b - a);
            g2 = g(x2);
        } else {
            b = x2;
            x2 = x1;
            g2 = g1;
            x1 = b - phi * (b - a);
            g1 = g(x1);
        }
    }
    let xm = 0.5 * (a + b);
    let gm = g(xm);
    if gm > best.1 {
        (xm, gm)
    } else {
        best
    }
}

/// `c_0 = p (F/(p-1))^{(p-1)/p}` with `F = max f_mp` over the positivity
/// interval; an upper bound for the critical speed of type C reactions.
pub fn c0_bound(params: &Params, reaction: &Reaction) -> f64 {
    let p = params.p();
    let (_, fmax) = f_mp_max(params, reaction);
    p * (fmax / (p - 1.0)).powf((p - 1.0) / p)
}

/// Start point on the unstable branch of the saddle (`S(1,0)`, or `A(a,0)` for
/// type C'), at horizontal distance `eps` to the left.
pub fn launch_from_saddle(params: &Params, reaction: &Reaction, c: f64, eps: f64) -> Result<PhasePoint> {
    launch(params, reaction, c, eps, -1.0)
}

/// Launch at `X = s + side·eps` with `Z` of sign `-side`.
pub(crate) fn launch(params: &Params, reaction: &Reaction, c: f64, eps: f64, side: f64) -> Result<PhasePoint> {
    if !(eps > 0.0 && eps < 1e-1) {
        return domain(format!("launch offset eps must lie in (0, 0.1), got {eps}"));
    }
    if c < 0.0 || !c.is_finite() {
        return domain(format!("speed must be nonnegative, got {c}"));
    }
    let p = params.p();
    let s = reaction.saddle();
    let k = params.m() * reaction.fprime(s) * s.powf(params.weight_exponent());
    if !(k < 0.0) {
        return domain("saddle has no unstable branch: f'(s) must be negative");
    }
    let c_free = (p * -k / (2.0 * (p - 1.0) * s)).powf(1.0 / p) * eps.powf(2.0 / p);
    let z0 = if c == 0.0 || p < 2.0 {
        c_free
    } else if p == 2.0 {
        eps * (-c + (c * c - 4.0 * s * k).sqrt()) / (2.0 * s)
    } else if eps * -k / c < c_free {
        return Ok(slow_launch(params, reaction, c, eps, side, k));
    } else {
        c_free
    };
    Ok(PhasePoint { x: s + side * eps, z: -side * z0 })
}

/// For `p > 2` and `c > 0` the branch leaving the saddle hugs the slow manifold
/// `cZ - |Z|^p - f_mp(X) = (p-1)X|Z|^{p-2}Z Z'(X)`, which is stiff close to the
/// saddle. The launch moves out along a two-term expansion of that manifold
/// until `|Z|` is about `1e-3·c^{1/(p-1)}`.
fn slow_launch(params: &Params, reaction: &Reaction, c: f64, eps: f64, side: f64, k: f64) -> PhasePoint {
    let p = params.p();
    let s = reaction.saddle();
    let fm = |x: f64| f_mp_limit(params, reaction, x);
    let z0 = |x: f64| fm(x) / c;
    let correct = |x: f64, z: &dyn Fn(f64) -> f64| {
        let h = 1e-7 * s;
        let zx = z(x);
        let dz = (z(x + h) - z(x - h)) / (2.0 * h);
        (fm(x) + zx.abs().powf(p) + (p - 1.0) * x * zx.abs().powf(p - 2.0) * zx * dz) / c
    };
    let z1 = |x: f64| correct(x, &z0);
    let z2 = |x: f64| correct(x, &z1);
    let z_goal = 1e-3 * c.powf(1.0 / (p - 1.0)).min(1.0);
    let mut d = (z_goal * c / -k).min(0.02 * s).max(eps);
    // the expansion parameter must stay small
    while d > eps && (p - 1.0) * s * z0(s + side * d).abs().powf(p - 2.0) * -k / (c * c) > 1e-4 {
        d = (0.5 * d).max(eps);
    }
    let x = s + side * d;
    let z = z2(x);
    let z = if z * side < 0.0 { z } else { -side * eps * -k / c };
    PhasePoint { x, z }
}

/// Ordinate the critical trajectory reaches on the axis `X = 0`.
pub fn target_ordinate(params: &Params, reaction: &Reaction, c: f64) -> f64 {
    let p = params.p();
    if !params.is_pseudo_linear() {
        return c.max(0.0).powf(1.0 / (p - 1.0));
    }
    let v = params.m() * reaction.fprime(0.0);
    let roots = isocline_roots(p, c, v);
    match reaction.kind() {
        ReactionKind::TypeC => roots.last().copied().unwrap_or(0.0).max(0.0),
        _ => roots.first().copied().unwrap_or_else(|| (c / p).powf(1.0 / (p - 1.0))),
    }
}

/// Vector field in `y = [ln X, Z, τ, ξ]`, normalised to unit speed in `(ln X, Z)`.
pub(crate) struct Field<'a> {
    params: &'a Params,
    reaction: &'a Reaction,
    pub c: f64,
    m: f64,
    p: f64,
    e1: f64,
    pressure_exp: f64,
    fp0: f64,
}

impl<'a> Field<'a> {
    pub(crate) fn new(params: &'a Params, reaction: &'a Reaction, c: f64) -> Self {
        let p = params.p();
        Self {
            params,
            reaction,
            c,
            m: params.m(),
            p,
            e1: params.weight_exponent() + 1.0,
            pressure_exp: params.gamma() / (p - 1.0),
            fp0: reaction.fprime(0.0),
        }
    }

    /// `f_mp(e^s)`, evaluated without forming negative powers of `X`.
    pub(crate) fn weighted(&self, s: f64) -> f64 {
        let x = s.exp();
        if x == 0.0 {
            return f_mp_limit(self.params, self.reaction, 0.0);
        }
        let ratio = if x < 1e-200 { self.fp0 } else { self.reaction.f(x) / x };
        let w = if self.e1 == 0.0 { 1.0 } else { (self.e1 * s).exp() };
        self.m * w * ratio
    }

    fn raw(&self, y: &[f64; 4]) -> [f64; 4] {
        let (s, z) = (y[0], y[1]);
        let p = self.p;
        let ds = (p - 1.0) * signed_pow(z, p - 1.0);
        let dz = self.c * z - z.abs().powf(p) - self.weighted(s);
        let zq = if p == 2.0 { 1.0 } else { z.abs().max(1e-300).powf(p - 2.0) };
        let xq = if self.pressure_exp == 0.0 { 1.0 } else { (self.pressure_exp * s).exp() };
        let dxi = -self.m * (p - 1.0) * xq * zq;
        [ds, dz, 1.0, dxi]
    }

    fn arclength(&self, y: &[f64; 4], dir: f64) -> [f64; 4] {
        let v = self.raw(y);
        let k = dir / v[0].hypot(v[1]).max(1e-300);
        [v[0] * k, v[1] * k, v[2] * k, v[3] * k]
    }
}

/// Termination rules for [`trace`].
#[derive(Debug, Clone, Copy)]
pub(crate) enum Stop {
    /// `Z` changes sign (located).
    ZZero,
    /// `ln X` falls to the value (located).
    SBelow(f64),
    /// `ln X` rises to the value (located).
    SAbove(f64),
    /// `Z` rises to the value (located).
    ZAbove(f64),
    /// `Z` falls to the value (located).
    ZBelow(f64),
    /// Both `ln X < s` and `Z < z`.
    Corner { s: f64, z: f64 },
    /// Within distance `r` of `(x, z)`.
    Near { x: f64, z: f64, r: f64 },
    /// `ln X < s_max`, `Z < z_max` and `f_mp(X) ≤ f_cap`.
    Trapped { s_max: f64, z_max: f64, f_cap: f64 },
}

pub(crate) struct Path {
    pub samples: Vec<Sample>,
    /// Index into the stop list of the rule that ended the run.
    pub hit: Option<usize>,
}

/// Integrates from `start` in the direction `dir = ±1` of `τ` until a stop rule fires.
pub(crate) fn trace(
    field: &Field,
    start: PhasePoint,
    dir: f64,
    stops: &[Stop],
    opts: &OdeOptions,
    max_length: f64,
) -> Result<Path> {
    if !(start.x > 0.0) {
        return domain("trajectories must start at X > 0");
    }
    let y0 = [start.x.ln(), start.z, 0.0, 0.0];
    let hit = Cell::new(None);
    let observer = |prev: &[f64; 4], next: &[f64; 4]| {
        for (k, stop) in stops.iter().enumerate() {
            let fired = match *stop {
                Stop::ZZero => prev[1] != 0.0 && (next[1] == 0.0 || prev[1].signum() != next[1].signum()),
                Stop::SBelow(v) => prev[0] > v && next[0] <= v,
                Stop::SAbove(v) => prev[0] < v && next[0] >= v,
                Stop::ZAbove(v) => next[1] >= v,
                Stop::ZBelow(v) => next[1] <= v,
                Stop::Corner { s, z } => next[0] < s && next[1] < z,
                Stop::Near { x, z, r } => (next[0].exp() - x).hypot(next[1] - z) < r,
                Stop::Trapped { s_max, z_max, f_cap } => {
                    next[0] < s_max && next[1] < z_max && field.weighted(next[0]) <= f_cap
                }
            };
            if fired {
                hit.set(Some(k));
                return match stop {
                    Stop::Corner { .. } | Stop::Near { .. } | Stop::Trapped { .. } => Flow::Stop,
                    _ => Flow::Locate(k),
                };
            }
        }
        Flow::Continue
    };
    let event = |k: usize, y: &[f64; 4]| match stops[k] {
        Stop::ZZero => y[1],
        Stop::SBelow(v) | Stop::SAbove(v) => y[0] - v,
        Stop::ZAbove(v) | Stop::ZBelow(v) => y[1] - v,
        _ => 0.0,
    };
    let run = integrate(|y| field.arclength(y, dir), y0, max_length, [1.0, 1.0, 0.0, 1.0], opts, observer, event);
    if run.reason == StopReason::StepUnderflow {
        return Err(Error::StepFailure { at: *run.t.last().unwrap_or(&0.0) });
    }
    let samples = run.y.iter().map(|y| Sample { tau: y[2], x: y[0].exp(), z: y[1], xi: y[3] }).collect();
    Ok(Path { samples, hit: hit.get() })
}

/// Maximum arclength of a single shooting run.
const MAX_LENGTH: f64 = 1e5;

/// Shoots the unstable branch of the saddle toward `X = X_min` and classifies
/// where it ends.
pub fn integrate_tc(
    params: &Params,
    reaction: &Reaction,
    c: f64,
    x_min: f64,
    opts: &ShootOptions,
) -> Result<Trajectory> {
    if !(x_min >= 0.0 && x_min < reaction.saddle()) {
        return domain(format!("X_min must lie in [0, {}), got {x_min}", reaction.saddle()));
    }
    let s_min = if x_min > 0.0 { x_min.ln() } else { -700.0 };
    shoot(params, reaction, c, s_min, opts)
}

pub(crate) fn shoot(
    params: &Params,
    reaction: &Reaction,
    c: f64,
    s_min: f64,
    opts: &ShootOptions,
) -> Result<Trajectory> {
    let p = params.p();
    let start = launch_from_saddle(params, reaction, c, opts.eps)?;
    let target = target_ordinate(params, reaction, c);
    let z_cap = 100.0 * c.powf(1.0 / (p - 1.0)).max(1.0);
    // indices 0..=2 are fixed; the rest all mean "ends below the target"
    let mut stops = vec![Stop::ZZero, Stop::SBelow(s_min), Stop::ZAbove(z_cap)];
    if !params.is_pseudo_linear() && target > 0.0 {
        stops.push(Stop::Corner { s: 1e-8f64.ln().max(s_min), z: 0.5 * target });
    }
    if reaction.kind() == ReactionKind::TypeC {
        // A(a,0) attracts backward in τ when it is a node
        stops.push(Stop::Near { x: reaction.a(), z: 0.0, r: 1e-9 });
    } else if let Some(trap) = trap_rule(params, reaction, c) {
        stops.push(trap);
    }
    let field = Field::new(params, reaction, c);
    let path = trace(&field, start, -1.0, &stops, &opts.ode, MAX_LENGTH)?;
    let last = *path.samples.last().unwrap();
    let tol = opts.fate_tol * (1.0 + target);
    let fate = match path.hit {
        Some(0) => Fate::CrossesZZero,
        Some(2) => Fate::Diverged,
        Some(k) if k >= 3 => match stops[k] {
            Stop::Near { .. } => Fate::CrossesZZero,
            _ => Fate::HitsAxisBelowTarget,
        },
        _ => {
            if (last.z - target).abs() < tol {
                Fate::ReachedTarget
            } else if last.z > target {
                Fate::HitsAxisAboveTarget
            } else {
                Fate::HitsAxisBelowTarget
            }
        }
    };
    Ok(Trajectory { samples: path.samples, c, fate })
}

/// Early exit for monostable reactions with `f_mp` increasing on `(0, X_m)`.
///
/// Left of the maximiser `X_m`, wherever `cZ - |Z|^p = f_mp(X)` has roots the
/// region below the upper root is invariant as `X` decreases, and from below
/// the vertex `(c/p)^{1/(p-1)}` a trajectory can climb no higher than the lower
/// root. It therefore ends below the axis target.
fn trap_rule(params: &Params, reaction: &Reaction, c: f64) -> Option<Stop> {
    if params.is_pseudo_linear() || !(c > 0.0) {
        return None;
    }
    let (xm, _) = f_mp_max(params, reaction);
    let n = 200;
    let increasing = (1..=n).all(|i| {
        let (x0, x1) = (xm * (i - 1) as f64 / n as f64, xm * i as f64 / n as f64);
        f_mp_limit(params, reaction, x1) >= f_mp_limit(params, reaction, x0)
    });
    if !increasing || xm <= 0.0 {
        return None;
    }
    let p = params.p();
    let vertex = (c / p).powf(1.0 / (p - 1.0));
    Some(Stop::Trapped { s_max: xm.ln(), z_max: vertex, f_cap: vertex * c * (1.0 - 1.0 / p) })
}

/// Closed-form trajectory entering `S(1,0)` at `c = 0`:
/// `Z(X) = X^{-1/(p-1)} [h - mp/(p-1) ∫_0^X u^{m-1} f]^{1/p}` with `h` chosen so `Z(1) = 0`.
pub fn explicit_c0_trajectory(params: &Params, reaction: &Reaction, x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 1.0) {
        return domain(format!("X must lie in (0, 1], got {x}"));
    }
    let (m, p) = (params.m(), params.p());
    let total = weighted_integral(reaction, m, 1.0);
    if !(total > 0.0) {
        return domain("the m-weighted integral of f over [0,1] must be positive");
    }
    let coef = m * p / (p - 1.0);
    let bracket = coef * (total - weighted_integral(reaction, m, x));
    if bracket < -1e-14 {
        return domain(format!("negative bracket {bracket} at X = {x}"));
    }
    Ok(x.powf(-1.0 / (p - 1.0)) * bracket.max(0.0).powf(1.0 / p))
}

/// Speed above which a type C' problem with `γ = 0` has critical points on
/// the axis: `p (m² f'(0))^{1/(mp)}`.
pub(crate) fn gamma0_threshold(params: &Params, reaction: &Reaction) -> f64 {
    let (m, p) = (params.m(), params.p());
    p * (m * m * reaction.fprime(0.0)).powf(1.0 / (m * p))
}

pub fn critical_points(params: &Params, reaction: &Reaction, c: f64) -> Result<CriticalPoints> {
    if !(c > 0.0) {
        return domain(format!("critical_points needs c > 0, got {c}"));
    }
    let p = params.p();
    let mut points = Vec::new();
    let a = reaction.a();
    if !params.is_pseudo_linear() {
        points.push((CriticalLabel::O, PhasePoint::new(0.0, 0.0)));
        if a < 1.0 {
            points.push((CriticalLabel::A, PhasePoint::new(a, 0.0)));
        }
        points.push((CriticalLabel::S, PhasePoint::new(1.0, 0.0)));
        points.push((CriticalLabel::Rc, PhasePoint::new(0.0, c.powf(1.0 / (p - 1.0)))));
        return Ok(CriticalPoints { points });
    }
    if a < 1.0 {
        points.push((CriticalLabel::A, PhasePoint::new(a, 0.0)));
    }
    points.push((CriticalLabel::S, PhasePoint::new(1.0, 0.0)));
    let v = params.m() * reaction.fprime(0.0);
    match reaction.kind() {
        ReactionKind::TypeC => {
            let roots = isocline_roots(p, c, v);
            for (label, z) in [CriticalLabel::RLambda1, CriticalLabel::RLambda2].into_iter().zip(roots) {
                points.push((label, PhasePoint::new(0.0, z)));
            }
        }
        _ => {
            let threshold = gamma0_threshold(params, reaction);
            let rel = (c - threshold) / threshold;
            if rel.abs() <= 1e-9 {
                let star = (params.m().powi(2) * reaction.fprime(0.0)).powf(1.0 / p);
                points.push((CriticalLabel::RLambdaStar, PhasePoint::new(0.0, star)));
            } else if rel > 0.0 {
                let roots = isocline_roots(p, c, v);
                for (label, z) in [CriticalLabel::RLambda1, CriticalLabel::RLambda2].into_iter().zip(roots) {
                    points.push((label, PhasePoint::new(0.0, z)));
                }
            }
        }
    }
    Ok(CriticalPoints { points })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;
    use crate::reaction::cubic_reaction;

    fn bistable(a: f64) -> Reaction {
        cubic_reaction(ReactionKind::TypeC, a).unwrap()
    }

    #[test]
    fn rhs_vanishes_at_critical_points() {
        let pr = make_params(2.0, 2.0).unwrap();
        let r = bistable(0.3);
        assert_eq!(trajectory_rhs(&pr, &r, PhasePoint::new(0.3, 0.0), 1.0), (0.0, 0.0));
        assert_eq!(trajectory_rhs(&pr, &r, PhasePoint::new(0.0, 1.0), 1.0), (0.0, 0.0));
    }

    #[test]
    fn rhs_arithmetic() {
        let pr = make_params(2.0, 2.0).unwrap();
        let (dx, dz) = trajectory_rhs(&pr, &bistable(0.3), PhasePoint::new(0.5, 0.5), 1.0);
        assert!((dx - 0.25).abs() < 1e-15);
        assert!((dz - 0.15).abs() < 1e-15);
    }

    #[test]
    fn isocline_at_a_and_one() {
        for (m, p) in [(2.0, 2.0), (1.0, 3.0), (1.0, 2.0)] {
            let pr = make_params(m, p).unwrap();
            let r = bistable(0.3);
            let c: f64 = 0.7;
            let top = c.powf(1.0 / (p - 1.0));
            for x in [0.3, 1.0] {
                let roots = null_isocline(&pr, &r, c, x);
                assert_eq!(roots.len(), 2);
                assert!(roots[0].abs() < 1e-12 && (roots[1] - top).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn isocline_roots_solve_the_equation() {
        let pr = make_params(1.0, 2.5).unwrap();
        let r = bistable(0.3);
        for x in [0.1, 0.2, 0.5, 0.8] {
            let v = f_mp_limit(&pr, &r, x);
            for z in null_isocline(&pr, &r, 0.9, x) {
                let g = 0.9 * z - z.abs().powf(2.5) - v;
                assert!(g.abs() < 1e-12, "x={x} z={z} g={g}");
            }
        }
    }

    #[test]
    fn isocline_empty_when_reaction_dominates() {
        let pr = make_params(1.0, 2.0).unwrap();
        assert!(null_isocline(&pr, &bistable(0.3), 0.2, 0.7296).is_empty());
    }

    #[test]
    fn c0_values() {
        let r = bistable(0.3);
        // (1,2): f_mp = f/X = (1-X)(X-0.3), maximal at X = 0.65
        let (xm, fm) = f_mp_max(&make_params(1.0, 2.0).unwrap(), &r);
        assert!((xm - 0.65).abs() < 1e-6);
        assert!((fm - 0.1225).abs() < 1e-12);
        let c12 = c0_bound(&make_params(1.0, 2.0).unwrap(), &r);
        assert!((c12 - 0.7).abs() < 1e-10);
        // (2,2): f_mp = 2f, maximal where 3u^2 - 2.6u + 0.3 = 0
        let xs = (2.6 + (2.6f64 * 2.6 - 3.6).sqrt()) / 6.0;
        let (xm, _) = f_mp_max(&make_params(2.0, 2.0).unwrap(), &r);
        assert!((xm - xs).abs() < 1e-6);
        let c22 = c0_bound(&make_params(2.0, 2.0).unwrap(), &r);
        assert!((c22 - 2.0 * (2.0 * r.f(xs)).sqrt()).abs() < 1e-10);
        assert!((c22 - 0.8235).abs() < 1e-4);
    }

    #[test]
    fn launch_slopes() {
        let r = bistable(0.3);
        let pr = make_params(1.0, 2.0).unwrap();
        let c = 0.4f64 / 2f64.sqrt();
        let pt = launch_from_saddle(&pr, &r, c, 1e-5).unwrap();
        assert!((pt.z / 1e-5 - 1.0 / 2f64.sqrt()).abs() < 1e-9);
        let pr15 = make_params(1.0, 1.5);
        assert!(pr15.is_err());
        // 1 < p < 2 law, checked on a slow-diffusion pair
        let pr = make_params(3.0, 1.5).unwrap();
        let pt = launch_from_saddle(&pr, &r, 0.2, 1e-4).unwrap();
        let lam = (1.5 * 3.0 * 0.7f64).powf(1.0 / 1.5);
        assert!((pt.z / 1e-4f64.powf(2.0 / 1.5) - lam).abs() < 1e-9);
    }

    #[test]
    fn c0_explicit_examples() {
        let pr = make_params(1.0, 2.0).unwrap();
        let r = bistable(0.3);
        let v = explicit_c0_trajectory(&pr, &r, 0.5).unwrap();
        assert!((v - 2.0 * (1.0f64 / 15.0 - 0.0020833333333333333).sqrt()).abs() < 1e-12);
        assert_eq!(explicit_c0_trajectory(&pr, &r, 1.0).unwrap(), 0.0);
        assert!(explicit_c0_trajectory(&pr, &bistable(0.7), 0.5).is_err());
    }

    #[test]
    fn critical_point_sets() {
        let r = bistable(0.3);
        let cp = critical_points(&make_params(2.0, 2.0).unwrap(), &r, 4.0).unwrap();
        assert_eq!(cp.get(CriticalLabel::Rc), Some(PhasePoint::new(0.0, 4.0)));
        let m = cubic_reaction(ReactionKind::TypeCPrime, 0.3).unwrap();
        let pr = make_params(1.0, 2.0).unwrap();
        let below = critical_points(&pr, &m, 1.0).unwrap();
        assert!(below.points.iter().all(|(_, p)| p.x > 0.0));
        let cstar = 2.0 * 0.3f64.sqrt();
        let at = critical_points(&pr, &m, cstar).unwrap();
        let star = at.get(CriticalLabel::RLambdaStar).unwrap();
        assert!((star.z - 0.3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn classical_fates() {
        let pr = make_params(1.0, 2.0).unwrap();
        let r = bistable(0.3);
        let opts = ShootOptions::default();
        let lo = integrate_tc(&pr, &r, 0.1, 1e-4, &opts).unwrap().fate;
        assert!(matches!(lo, Fate::HitsAxisAboveTarget | Fate::Diverged), "{lo:?}");
        let hi = integrate_tc(&pr, &r, 0.5, 1e-4, &opts).unwrap().fate;
        assert!(matches!(hi, Fate::CrossesZZero | Fate::HitsAxisBelowTarget));
        let crit = 0.4 / 2f64.sqrt();
        let t = integrate_tc(&pr, &r, crit, 1e-4, &ShootOptions { fate_tol: 1e-3, ..opts }).unwrap();
        assert_eq!(t.fate, Fate::ReachedTarget);
    }

    #[test]
    fn exact_classical_trajectory() {
        // Z = (1 - X)/sqrt(2) along the critical bistable wave
        let pr = make_params(1.0, 2.0).unwrap();
        let r = bistable(0.3);
        let t = integrate_tc(&pr, &r, 0.4 / 2f64.sqrt(), 0.05, &ShootOptions::default()).unwrap();
        for s in &t.samples {
            assert!((s.z - (1.0 - s.x) / 2f64.sqrt()).abs() < 1e-6, "{s:?}");
        }
    }
}
