//! Critical speeds, wave profiles in physical coordinates and the special
//! barrier waves used by the threshold experiments.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::interp::MonotoneCubic;
use crate::ode::OdeOptions;
use crate::params::Params;
use crate::phase_plane::{
    c0_bound, f_mp_max, gamma0_threshold, launch, shoot, target_ordinate, trace, Fate, Field, PhasePoint, Sample,
    ShootOptions, Stop, Trajectory,
};
use crate::reaction::{Reaction, ReactionKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ProfileKind {
    FiniteFB,
    Positive,
    ChangeSign2,
    ZeroToA,
    AToZero,
    IncreasingAToOne,
}

/// A profile `φ(ξ)` sampled on an increasing, generally non-uniform grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveProfile {
    pub xi: Vec<f64>,
    pub phi: Vec<f64>,
    pub c: f64,
    pub kind: ProfileKind,
    /// Free-boundary abscissae, ascending. For 0-to-a waves the second entry
    /// is the first point where `φ = a`.
    pub fb_points: Vec<f64>,
    /// `(ξ, φ)` at the maximum, for profiles built around one.
    pub peak: Option<(f64, f64)>,
}

impl WaveProfile {
    /// Piecewise-linear evaluation; constant extension beyond the grid.
    pub fn eval(&self, xi: f64) -> f64 {
        let n = self.xi.len();
        if xi <= self.xi[0] {
            return self.phi[0];
        }
        if xi >= self.xi[n - 1] {
            return self.phi[n - 1];
        }
        let k = self.xi.partition_point(|&v| v <= xi);
        let (x0, x1) = (self.xi[k - 1], self.xi[k]);
        let t = (xi - x0) / (x1 - x0);
        self.phi[k - 1] + t * (self.phi[k] - self.phi[k - 1])
    }

    /// `ψ(ξ) = φ(-ξ)`. A 0-to-a wave becomes an a-to-0 wave.
    pub fn reflect(&self) -> Self {
        let kind = match self.kind {
            ProfileKind::ZeroToA => ProfileKind::AToZero,
            ProfileKind::AToZero => ProfileKind::ZeroToA,
            k => k,
        };
        Self {
            xi: self.xi.iter().rev().map(|v| -v).collect(),
            phi: self.phi.iter().rev().copied().collect(),
            c: self.c,
            kind,
            fb_points: self.fb_points.iter().rev().map(|v| -v).collect(),
            peak: self.peak.map(|(x, h)| (-x, h)),
        }
    }

    pub fn max(&self) -> f64 {
        self.phi.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes `xi,phi` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["xi", "phi"])?;
        for (x, p) in self.xi.iter().zip(&self.phi) {
            w.write_record([x.to_string(), p.to_string()])?;
        }
        w.flush()
    }

    /// Resamples on `n` uniform points by monotone cubic interpolation.
    pub fn resample(&self, n: usize) -> Result<Self> {
        if n < 2 {
            return domain("need at least two resampling points");
        }
        let table = MonotoneCubic::new(self.xi.clone(), self.phi.clone())?;
        let (lo, hi) = (self.xi[0], self.xi[self.xi.len() - 1]);
        let xi: Vec<f64> = (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect();
        let phi = xi.iter().map(|&x| table.eval(x)).collect();
        Ok(Self { xi, phi, ..self.clone() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveResult {
    pub c_star: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    /// Launch offset that passed the halving check.
    pub eps: f64,
    pub profile: WaveProfile,
}

/// Flat record written as the JSON result of a critical-speed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaveSummary {
    pub m: f64,
    pub p: f64,
    pub gamma: f64,
    pub kind: ReactionKind,
    pub a: f64,
    pub c_star: f64,
    pub bracket: (f64, f64),
    pub iterations: usize,
    pub fb: Option<Vec<f64>>,
}

impl WaveResult {
    pub fn summary(&self, params: &Params, reaction: &Reaction) -> WaveSummary {
        WaveSummary {
            m: params.m(),
            p: params.p(),
            gamma: params.gamma(),
            kind: reaction.kind(),
            a: reaction.a(),
            c_star: self.c_star,
            bracket: self.bracket,
            iterations: self.iterations,
            fb: if self.profile.fb_points.is_empty() { None } else { Some(self.profile.fb_points.clone()) },
        }
    }
}

/// Pulled fronts: type C' or KPP on the pseudo-linear line.
fn is_pulled(params: &Params, reaction: &Reaction) -> bool {
    params.is_pseudo_linear() && reaction.kind() != ReactionKind::TypeC
}

/// How far toward `X = 0` the shooting runs go, as `ln X`.
fn shooting_depth(params: &Params, reaction: &Reaction) -> f64 {
    if is_pulled(params, reaction) {
        // the approach to the axis is algebraic in ln X here
        return -600.0;
    }
    // Z approaches its axis value like X^{γ/(p-1)}
    let g = params.gamma() / (params.p() - 1.0);
    (1e-6f64.ln() / g).clamp(-600.0, 1e-8f64.ln())
}

fn shoot_opts(eps: f64, h_max: f64, max_steps: usize) -> ShootOptions {
    ShootOptions { eps, ode: OdeOptions { h_max, max_steps, ..OdeOptions::default() }, ..ShootOptions::default() }
}

/// `true` when the trajectory shot at speed `c` passes above the critical one.
fn too_slow(params: &Params, reaction: &Reaction, c: f64, eps: f64) -> Result<bool> {
    let traj = shoot(params, reaction, c, shooting_depth(params, reaction), &shoot_opts(eps, 0.25, 60_000))?;
    let z = traj.last().z;
    if is_pulled(params, reaction) {
        let vertex = (c / params.p()).powf(1.0 / (params.p() - 1.0));
        return Ok(match traj.fate {
            Fate::Diverged => true,
            Fate::CrossesZZero => false,
            _ => z > vertex,
        });
    }
    Ok(match traj.fate {
        Fate::Diverged | Fate::HitsAxisAboveTarget => true,
        Fate::CrossesZZero | Fate::HitsAxisBelowTarget => false,
        Fate::ReachedTarget => z > target_ordinate(params, reaction, c),
    })
}

fn initial_bracket(params: &Params, reaction: &Reaction, eps: f64) -> Result<(f64, f64)> {
    let lo = 1e-6;
    if !too_slow(params, reaction, lo, eps)? {
        return Err(Error::Bracket {
            lo,
            hi: f64::NAN,
            reason: "already too fast at the smallest speed; check the sign of the weighted integral".into(),
        });
    }
    let mut hi = match reaction.kind() {
        ReactionKind::TypeC => c0_bound(params, reaction),
        _ => {
            let p = params.p();
            let (_, fmax) = f_mp_max(params, reaction);
            let analog = p * (fmax / (p - 1.0)).powf((p - 1.0) / p);
            (2.0 * analog).max(4.0 * (params.m() * reaction.fprime(0.0)).sqrt())
        }
    };
    for _ in 0..12 {
        if !too_slow(params, reaction, hi, eps)? {
            return Ok((lo, hi));
        }
        if reaction.kind() == ReactionKind::TypeC {
            break;
        }
        hi *= 2.0;
    }
    Err(Error::Bracket { lo, hi, reason: "both ends of the bracket are too slow".into() })
}

fn bisect(
    params: &Params,
    reaction: &Reaction,
    mut lo: f64,
    mut hi: f64,
    width: f64,
    eps: f64,
) -> Result<(f64, f64, usize)> {
    let mut iterations = 0;
    while hi - lo >= width {
        let mid = 0.5 * (lo + hi);
        if too_slow(params, reaction, mid, eps)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok((lo, hi, iterations))
}

/// Critical speed by bisection on the fate of the saddle trajectory.
///
/// The launch offset starts at `1e-5`; the search is repeated with half the
/// offset and the offset shrunk (at most twice) until the two results agree
/// to `0.1·tol`. `c_hint` narrows the initial bracket when it is consistent.
pub fn find_cstar(params: &Params, reaction: &Reaction, tol: f64, c_hint: Option<f64>) -> Result<WaveResult> {
    if !(tol >= 1e-8) {
        return domain(format!("tolerance must be at least 1e-8, got {tol}"));
    }
    let mut eps = 1e-5;
    let (mut lo0, mut hi0) = initial_bracket(params, reaction, eps)?;
    if let Some(h) = c_hint {
        let (a, b) = (h - 10.0 * tol, h + 10.0 * tol);
        if a > lo0 && b < hi0 && too_slow(params, reaction, a, eps)? && !too_slow(params, reaction, b, eps)? {
            lo0 = a;
            hi0 = b;
        }
    }
    // a finer internal width keeps the halving comparison meaningful
    let width = 0.05 * tol;
    let mut run = bisect(params, reaction, lo0, hi0, width, eps)?;
    for attempt in 0..3 {
        let half = bisect(params, reaction, lo0, hi0, width, 0.5 * eps)?;
        let moved = (0.5 * (half.0 + half.1) - 0.5 * (run.0 + run.1)).abs();
        if moved < 0.1 * tol || attempt == 2 {
            break;
        }
        eps *= 0.1;
        run = bisect(params, reaction, lo0, hi0, width, eps)?;
    }
    let (lo, hi, iterations) = run;
    let c_star = 0.5 * (lo + hi);
    let traj = shoot(params, reaction, c_star, shooting_depth(params, reaction), &shoot_opts(eps, 0.05, 400_000))?;
    let anchor = (0.0, 0.5 * reaction.saddle());
    let profile = reconstruct_profile(params, reaction, &traj, anchor)?;
    Ok(WaveResult { c_star, bracket: (lo, hi), iterations, eps, profile })
}

/// `c* = p (m² f'(0))^{1/(mp)}` and `λ* = (m² f'(0))^{1/p}` for type C' on `γ = 0`.
pub fn explicit_cstar_gamma0_cprime(params: &Params, reaction: &Reaction) -> Result<(f64, f64)> {
    if !params.is_pseudo_linear() {
        return domain(format!("explicit speed needs gamma = 0, got {}", params.gamma()));
    }
    if reaction.kind() == ReactionKind::TypeC {
        return domain("explicit speed applies to type C' and KPP reactions");
    }
    let lam = (params.m().powi(2) * reaction.fprime(0.0)).powf(1.0 / params.p());
    Ok((gamma0_threshold(params, reaction), lam))
}

/// Keeps samples whose `X` strictly decreases.
fn strictly_decreasing(samples: &[Sample]) -> Vec<Sample> {
    let mut out: Vec<Sample> = Vec::with_capacity(samples.len());
    for s in samples {
        if out.last().is_none_or(|l| s.x < l.x && s.xi > l.xi) {
            out.push(*s);
        }
    }
    out
}

/// Maps a front trajectory to `(ξ, φ)`, shifted so that `φ(xi_ref) = X_ref`.
///
/// The profile ends at the last local minimum of `|Z - Z_t|`; beyond it a
/// near-critical trajectory peels away from the axis target. When `γ > 0` the free boundary is
/// placed by integrating `dξ/dX = -m X^{γ/(p-1)-1}/Z` to `X = 0` with `Z`
/// frozen at the last kept sample.
pub fn reconstruct_profile(
    params: &Params,
    reaction: &Reaction,
    trajectory: &Trajectory,
    anchor: (f64, f64),
) -> Result<WaveProfile> {
    let samples = strictly_decreasing(&trajectory.samples);
    let zt = target_ordinate(params, reaction, trajectory.c);
    let gap = |k: usize| (samples[k].z - zt).abs();
    let mut end = samples.len();
    while end > 1 && gap(end - 2) <= gap(end - 1) {
        end -= 1;
    }
    let kept = &samples[..end];
    if kept.len() < 4 {
        return Err(Error::InsufficientData("trajectory too short to reconstruct".into()));
    }
    let (x_ref_lo, x_ref_hi) = (kept[end - 1].x, kept[0].x);
    let (xi_ref, x_ref) = anchor;
    if !(x_ref >= x_ref_lo && x_ref <= x_ref_hi) {
        return Err(Error::Anchor { x_ref, lo: x_ref_lo, hi: x_ref_hi });
    }
    // ξ as a function of -X, which increases along the trajectory
    let table = MonotoneCubic::new(kept.iter().map(|s| -s.x).collect(), kept.iter().map(|s| s.xi).collect())?;
    let shift = xi_ref - table.eval(-x_ref);
    let mut xi: Vec<f64> = kept.iter().map(|s| s.xi + shift).collect();
    let mut phi: Vec<f64> = kept.iter().map(|s| s.x).collect();
    let mut fb_points = Vec::new();
    let kind = if params.is_pseudo_linear() {
        ProfileKind::Positive
    } else {
        let g = params.gamma() / (params.p() - 1.0);
        let last = kept[end - 1];
        let xi0 = last.xi + shift + params.m() / g * last.x.powf(g) / last.z;
        xi.push(xi0);
        phi.push(0.0);
        fb_points.push(xi0);
        ProfileKind::FiniteFB
    };
    Ok(WaveProfile { xi, phi, c: trajectory.c, kind, fb_points, peak: None })
}

/// Least-squares slope of `log φ` against `log(ξ0 - ξ)` over `(ξ0 - window, ξ0)`.
pub fn darcy_exponent(profile: &WaveProfile, window: f64) -> Result<f64> {
    if profile.kind != ProfileKind::FiniteFB || profile.fb_points.is_empty() {
        return domain("Darcy fit needs a profile with a free boundary");
    }
    let xi0 = profile.fb_points[0];
    let pts: Vec<(f64, f64)> = profile
        .xi
        .iter()
        .zip(&profile.phi)
        .filter(|(&x, &p)| x < xi0 && x > xi0 - window && p > 0.0)
        .map(|(&x, &p)| ((xi0 - x).ln(), p.ln()))
        .collect();
    if pts.len() < 20 {
        return Err(Error::Window { found: pts.len(), needed: 20 });
    }
    Ok(slope(&pts))
}

pub(crate) fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

/// `|Z|` at which a branch heading to `X = 0` is treated as having reached
/// its free boundary.
fn blowup_cap(params: &Params, c: f64) -> f64 {
    1e3 * c.powf(1.0 / (params.p() - 1.0)).max(1.0)
}

/// Initial `|Z|` at a turning point; zero is fine unless `|Z|^{p-2}` is singular.
fn turning_z(params: &Params) -> f64 {
    if params.p() < 2.0 {
        1e-7
    } else {
        0.0
    }
}

/// A branch from a turning point down to `X = 0` where `|Z| → ∞`.
/// Returns the samples and the extrapolated free boundary, or `None` if the
/// branch turns back across `Z = 0`.
fn branch_to_zero(
    params: &Params,
    reaction: &Reaction,
    c: f64,
    top: f64,
    side: f64,
) -> Result<Option<(Vec<Sample>, f64)>> {
    // side = +1: right branch (Z > 0, run backward in τ); -1: left branch
    let cap = blowup_cap(params, c);
    let stops =
        [Stop::ZZero, Stop::SBelow(1e-8f64.ln()), if side > 0.0 { Stop::ZAbove(cap) } else { Stop::ZBelow(-cap) }];
    let field = Field::new(params, reaction, c);
    let start = PhasePoint::new(top, side * turning_z(params));
    let path = trace(&field, start, -side, &stops, &OdeOptions::default(), 1e5)?;
    if path.hit != Some(1) && path.hit != Some(2) {
        return Ok(None);
    }
    let last = *path.samples.last().unwrap();
    // near the edge Z ≈ K X^{-1/(p-1)} and ξ(0) - ξ(X) = X^m / K
    let k = last.z.abs() * last.x.powf(1.0 / (params.p() - 1.0));
    let edge = last.xi + side * last.x.powf(params.m()) / k;
    Ok(Some((path.samples, edge)))
}

fn cs_peak(reaction: &Reaction, delta: f64) -> Result<f64> {
    let peak = match reaction.kind() {
        ReactionKind::TypeC => reaction.a() + delta,
        ReactionKind::TypeCPrime => delta,
        ReactionKind::Kpp => return domain("change-sign waves are built for types C and C'"),
    };
    let ok = match reaction.kind() {
        ReactionKind::TypeC => delta > 0.0 && peak < 1.0,
        _ => delta > 0.0 && delta < reaction.a(),
    };
    if !ok {
        return domain(format!("peak offset delta={delta} out of range"));
    }
    Ok(peak)
}

/// Compactly supported change-sign profile with maximum at `ξ = 0`:
/// `a + δ` for type C, `δ` for type C'.
pub fn change_sign_tw(params: &Params, reaction: &Reaction, c: f64, delta: f64) -> Result<WaveProfile> {
    if !(c >= 0.0) {
        return domain(format!("speed must be nonnegative, got {c}"));
    }
    let peak = cs_peak(reaction, delta)?;
    let too_small = || Error::DeltaTooSmall { c, delta };
    let (right, xi1) = branch_to_zero(params, reaction, c, peak, 1.0)?.ok_or_else(too_small)?;
    let (left, xi0) = branch_to_zero(params, reaction, c, peak, -1.0)?.ok_or_else(too_small)?;
    let mut xi = vec![xi0];
    let mut phi = vec![0.0];
    for s in left.iter().rev() {
        if s.xi > *xi.last().unwrap() && s.xi < 0.0 {
            xi.push(s.xi);
            phi.push(s.x);
        }
    }
    xi.push(0.0);
    phi.push(peak);
    for s in &right {
        if s.xi > *xi.last().unwrap() && s.xi < xi1 {
            xi.push(s.xi);
            phi.push(s.x);
        }
    }
    xi.push(xi1);
    phi.push(0.0);
    Ok(WaveProfile { xi, phi, c, kind: ProfileKind::ChangeSign2, fb_points: vec![xi0, xi1], peak: Some((0.0, peak)) })
}

/// Smallest admissible peak offset at speed `c`, to within `tol`.
pub fn min_delta(params: &Params, reaction: &Reaction, c: f64, tol: f64) -> Result<f64> {
    let upper = match reaction.kind() {
        ReactionKind::TypeC => 1.0 - reaction.a(),
        _ => reaction.a(),
    };
    let ok = |d: f64| -> Result<bool> {
        match change_sign_tw(params, reaction, c, d) {
            Ok(_) => Ok(true),
            Err(Error::DeltaTooSmall { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    let mut hi = upper * (1.0 - 1e-6);
    if !ok(hi)? {
        return Err(Error::DeltaTooSmall { c, delta: hi });
    }
    let mut lo = 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid > 0.0 && ok(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Wave rising from a free boundary to `1 - eps` at `ξ = 0` and settling on
/// `a` as `ξ → ∞`; exists for `c ≥ c*`. Pass `c_star` if already known.
pub fn zero_to_a_tw(
    params: &Params,
    reaction: &Reaction,
    c: f64,
    eps: f64,
    c_star: Option<f64>,
) -> Result<WaveProfile> {
    if reaction.kind() != ReactionKind::TypeC {
        return domain("0-to-a waves are built for type C reactions");
    }
    if !(eps > 0.0 && eps < 1.0 - reaction.a()) {
        return domain(format!("eps must lie in (0, 1-a), got {eps}"));
    }
    let c_star = match c_star {
        Some(v) => v,
        None => find_cstar(params, reaction, 1e-6, None)?.c_star,
    };
    if c < c_star {
        return Err(Error::SpeedTooLow { c, c_star });
    }
    let top = 1.0 - eps;
    let a = reaction.a();
    let (left, xi0) = branch_to_zero(params, reaction, c, top, -1.0)?
        .ok_or_else(|| Error::InsufficientData("rising branch turned back before reaching zero".into()))?;
    let field = Field::new(params, reaction, c);
    let stops = [Stop::Near { x: a, z: 0.0, r: 1e-7 }, Stop::SBelow(1e-8f64.ln())];
    let start = PhasePoint::new(top, turning_z(params));
    let right = trace(&field, start, -1.0, &stops, &OdeOptions::default(), 1e4)?;
    if right.hit == Some(1) {
        return Err(Error::InsufficientData("decaying branch reached zero instead of a".into()));
    }
    let mut xi = vec![xi0];
    let mut phi = vec![0.0];
    for s in left.iter().rev() {
        if s.xi > *xi.last().unwrap() && s.xi < 0.0 {
            xi.push(s.xi);
            phi.push(s.x);
        }
    }
    xi.push(0.0);
    phi.push(top);
    let mut xi1 = None;
    let mut prev: Option<Sample> = None;
    for s in &right.samples {
        if s.xi > *xi.last().unwrap() {
            if let (None, Some(q)) = (xi1, prev) {
                if q.x > a && s.x <= a {
                    xi1 = Some(q.xi + (q.x - a) / (q.x - s.x) * (s.xi - q.xi));
                }
            }
            xi.push(s.xi);
            phi.push(s.x);
            prev = Some(*s);
        }
    }
    let xi1 = xi1.unwrap_or(*xi.last().unwrap());
    Ok(WaveProfile { xi, phi, c, kind: ProfileKind::ZeroToA, fb_points: vec![xi0, xi1], peak: Some((0.0, top)) })
}

/// Increasing profile leaving `A(a,0)` and reaching `1` at `ξ = 0`; type C'.
pub fn increasing_a_to_1_tw(params: &Params, reaction: &Reaction, c: f64) -> Result<WaveProfile> {
    if reaction.kind() != ReactionKind::TypeCPrime {
        return domain("increasing a-to-1 waves are built for type C' reactions");
    }
    if !(c > 0.0) {
        return domain(format!("speed must be positive, got {c}"));
    }
    let start = launch(params, reaction, c, 1e-5, 1.0)?;
    let field = Field::new(params, reaction, c);
    let path = trace(&field, start, -1.0, &[Stop::SAbove(0.0), Stop::ZZero], &OdeOptions::default(), 1e5)?;
    if path.hit != Some(0) {
        return Err(Error::InsufficientData("branch from A did not reach X = 1".into()));
    }
    let end = path.samples.last().unwrap().xi;
    let mut xi = Vec::with_capacity(path.samples.len());
    let mut phi = Vec::with_capacity(path.samples.len());
    for s in &path.samples {
        if xi.last().is_none_or(|&l| s.xi - end > l) {
            xi.push(s.xi - end);
            phi.push(s.x.min(1.0));
        }
    }
    *phi.last_mut().unwrap() = 1.0;
    Ok(WaveProfile { xi, phi, c, kind: ProfileKind::IncreasingAToOne, fb_points: Vec::new(), peak: Some((0.0, 1.0)) })
}

/// Fits `log φ - (2/p) log|ξ|` against `ξ` on the tail `1e-40 ≤ φ ≤ 1e-4`;
/// returns `(decay rate, 2/p)`.
pub fn tail_fit_gamma0(profile: &WaveProfile, reaction: &Reaction, params: &Params) -> Result<(f64, f64)> {
    if !params.is_pseudo_linear() {
        return domain(format!("tail fit needs gamma = 0, got {}", params.gamma()));
    }
    if reaction.kind() == ReactionKind::TypeC {
        return domain("tail fit applies to monostable fronts");
    }
    let power = 2.0 / params.p();
    let reached = profile.phi.iter().copied().fold(f64::INFINITY, f64::min);
    if !(reached < 1e-4) {
        return Err(Error::TailTooShort { needed: 1e-4, reached });
    }
    let pts: Vec<(f64, f64)> = profile
        .xi
        .iter()
        .zip(&profile.phi)
        .filter(|(&x, &p)| (1e-40..=1e-4).contains(&p) && x > 0.0)
        .map(|(&x, &p)| (x, p.ln() - power * x.ln()))
        .collect();
    if pts.len() < 20 {
        return Err(Error::Window { found: pts.len(), needed: 20 });
    }
    Ok((-slope(&pts), power))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;
    use crate::reaction::cubic_reaction;

    #[test]
    fn explicit_speed_values() {
        let r = cubic_reaction(ReactionKind::TypeCPrime, 0.3).unwrap();
        let (c, lam) = explicit_cstar_gamma0_cprime(&make_params(1.0, 2.0).unwrap(), &r).unwrap();
        assert!((c - 2.0 * 0.3f64.sqrt()).abs() < 1e-12 && (lam - 0.3f64.sqrt()).abs() < 1e-12);
        let (c, _) = explicit_cstar_gamma0_cprime(&make_params(0.5, 3.0).unwrap(), &r).unwrap();
        assert!((c - 3.0 * 0.075f64.powf(2.0 / 3.0)).abs() < 1e-12);
        let kpp = Reaction::kpp_logistic(1.0).unwrap();
        let (c, _) = explicit_cstar_gamma0_cprime(&make_params(1.0, 2.0).unwrap(), &kpp).unwrap();
        assert!((c - 2.0).abs() < 1e-12);
        assert!(explicit_cstar_gamma0_cprime(&make_params(2.0, 2.0).unwrap(), &r).is_err());
    }

    #[test]
    fn reflection_is_pointwise() {
        let w = WaveProfile {
            xi: vec![-1.0, 0.0, 2.0],
            phi: vec![0.0, 0.9, 0.3],
            c: 0.1,
            kind: ProfileKind::ZeroToA,
            fb_points: vec![-1.0, 2.0],
            peak: Some((0.0, 0.9)),
        };
        let r = w.reflect();
        assert_eq!(r.kind, ProfileKind::AToZero);
        for x in [-1.5, -0.5, 0.3, 1.7] {
            assert!((r.eval(x) - w.eval(-x)).abs() < 1e-15);
        }
    }

    #[test]
    fn slope_of_a_line() {
        let pts: Vec<(f64, f64)> = (0..10).map(|i| (i as f64, 3.0 * i as f64 - 1.0)).collect();
        assert!((slope(&pts) - 3.0).abs() < 1e-12);
    }
}
