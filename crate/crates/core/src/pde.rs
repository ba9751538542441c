//! Explicit finite-volume solver for `u_t = Δ_p(u^m) + f(u)` on a line or on
//! the radial half-line, with front tracking and the threshold, saturation and
//! self-similar experiments built on it.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::params::Params;
use crate::reaction::{Reaction, ReactionKind};
use crate::wave::{change_sign_tw, find_cstar, min_delta, slope, zero_to_a_tw, WaveProfile};

/// Diffusive Courant number.
pub const SIGMA_D: f64 = 0.4;
/// Reaction Courant number.
pub const SIGMA_R: f64 = 0.1;
/// Floor for the effective diffusivity inside the step-size bound.
pub const D_MIN: f64 = 1e-14;
/// Cap on the time step when neither diffusion nor reaction limits it.
pub const DT_MAX: f64 = 1.0;
/// Values at or below this count as outside the support.
pub const U_TINY: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GridKind {
    /// Cells on `[-L, L]`.
    Line1D,
    /// Cells on `[0, L]` for solutions radial in `R^N`. `N = 1` is the
    /// half-line of an even solution on `[-L, L]`.
    RadialND(u32),
}

/// Uniform cell-centred grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub kind: GridKind,
    pub x: Vec<f64>,
    pub dx: f64,
    pub extent: (f64, f64),
    #[serde(skip)]
    area: Vec<f64>,
    #[serde(skip)]
    volume: Vec<f64>,
}

impl Grid {
    pub fn line(half_length: f64, dx: f64) -> Result<Self> {
        Self::build(GridKind::Line1D, -half_length, half_length, dx)
    }

    /// Half-line `[0, L]` carrying an even solution.
    pub fn symmetric(length: f64, dx: f64) -> Result<Self> {
        Self::build(GridKind::RadialND(1), 0.0, length, dx)
    }

    pub fn radial(n: u32, length: f64, dx: f64) -> Result<Self> {
        if n < 1 {
            return domain("radial dimension must be at least 1");
        }
        Self::build(GridKind::RadialND(n), 0.0, length, dx)
    }

    fn build(kind: GridKind, lo: f64, hi: f64, dx: f64) -> Result<Self> {
        if !(dx > 0.0) || !(hi > lo) {
            return domain(format!("need dx > 0 and a nonempty extent, got dx={dx}, [{lo}, {hi}]"));
        }
        let n = ((hi - lo) / dx).round() as usize;
        if n < 3 {
            return Err(Error::GridTooSmall(format!("only {n} cells")));
        }
        let dx = (hi - lo) / n as f64;
        let x: Vec<f64> = (0..n).map(|i| lo + (i as f64 + 0.5) * dx).collect();
        // area[i] sits on the face between cells i and i+1
        let (area, volume) = match kind {
            GridKind::Line1D => (vec![1.0; n], vec![dx; n]),
            GridKind::RadialND(d) => {
                let d = d as i32;
                let area = (0..n).map(|i| ((i + 1) as f64 * dx).powi(d - 1)).collect();
                let volume =
                    (0..n).map(|i| (((i + 1) as f64 * dx).powi(d) - (i as f64 * dx).powi(d)) / d as f64).collect();
                (area, volume)
            }
        };
        Ok(Self { kind, x, dx, extent: (lo, hi), area, volume })
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    /// Distance from the symmetry point.
    pub fn radius(&self, i: usize) -> f64 {
        self.x[i].abs()
    }

    /// `∫u` over the represented domain; radial integrals omit the sphere area.
    pub fn integral(&self, u: &[f64]) -> f64 {
        u.iter().zip(&self.volume).map(|(a, v)| a * v).sum()
    }

    /// `max |v|` restricted to cells with `|x| ≤ r`.
    fn max_within(&self, v: impl Fn(usize) -> f64, r_lo: f64, r_hi: f64) -> f64 {
        (0..self.len()).filter(|&i| (r_lo..=r_hi).contains(&self.radius(i))).map(v).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdeState {
    pub u: Vec<f64>,
    pub t: f64,
    pub mass: f64,
}

impl PdeState {
    pub fn new(grid: &Grid, u: Vec<f64>, t: f64) -> Result<Self> {
        if u.len() != grid.len() {
            return domain(format!("state has {} values for {} cells", u.len(), grid.len()));
        }
        if let Some((cell, &value)) = u.iter().enumerate().find(|(_, v)| !(**v >= 0.0 && **v <= 1.0 + 1e-12)) {
            return Err(Error::Bounds { value, cell });
        }
        let mass = grid.integral(&u);
        Ok(Self { u, t, mass })
    }

    pub fn max(&self) -> f64 {
        self.u.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Writes `x,u` rows.
    pub fn write_csv<W: Write>(&self, grid: &Grid, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "u"])?;
        for (x, u) in grid.x.iter().zip(&self.u) {
            w.write_record([x.to_string(), u.to_string()])?;
        }
        w.flush()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct FrontTrace {
    pub times: Vec<f64>,
    /// Outermost crossing of `level`; NaN when `u < level` everywhere.
    pub positions: Vec<f64>,
    pub level: f64,
    /// Outermost cell with `u > U_TINY`; NaN when there is none.
    pub support_edge: Vec<f64>,
}

impl FrontTrace {
    /// Writes `t,front_pos,support_edge` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["t", "front_pos", "support_edge"])?;
        for i in 0..self.times.len() {
            w.write_record([
                self.times[i].to_string(),
                self.positions[i].to_string(),
                self.support_edge[i].to_string(),
            ])?;
        }
        w.flush()
    }

    fn record(&mut self, grid: &Grid, state: &PdeState) {
        self.times.push(state.t);
        self.positions.push(level_position(grid, &state.u, self.level));
        self.support_edge.push(support_edge(grid, &state.u));
    }
}

/// Face flux `|δw|^{p-2} δw` with `w = u^m` and `δw` the difference quotient.
pub fn dnl_flux(params: &Params, u_left: f64, u_right: f64, dx: f64) -> f64 {
    let (m, p) = (params.m(), params.p());
    let g = (u_right.powf(m) - u_left.powf(m)) / dx;
    if g == 0.0 {
        0.0
    } else {
        g.abs().powf(p - 2.0) * g
    }
}

/// Reusable buffers and constants for repeated steps on one grid.
struct Stepper<'a> {
    grid: &'a Grid,
    reaction: Option<&'a Reaction>,
    m: f64,
    p: f64,
    lip: f64,
    w: Vec<f64>,
    flux: Vec<f64>,
    /// `(A_{i-1/2} + A_{i+1/2}) / (2 V_i dx)`
    geom: Vec<f64>,
}

impl<'a> Stepper<'a> {
    fn new(params: &Params, reaction: Option<&'a Reaction>, grid: &'a Grid) -> Self {
        let n = grid.len();
        // walls count with their area so that the symmetric half-line and the
        // full line share one step size
        let inner_wall = match grid.kind {
            GridKind::RadialND(d) if d > 1 => 0.0,
            _ => 1.0,
        };
        let geom = (0..n)
            .map(|i| {
                let left = if i == 0 { inner_wall } else { grid.area[i - 1] };
                let right = grid.area[i];
                (left + right) / (2.0 * grid.volume[i] * grid.dx)
            })
            .collect();
        Self {
            grid,
            reaction,
            m: params.m(),
            p: params.p(),
            lip: reaction.map_or(0.0, Reaction::lipschitz),
            w: vec![0.0; n],
            flux: vec![0.0; n.saturating_sub(1)],
            geom,
        }
    }

    fn fill_w(&mut self, u: &[f64]) {
        let m = self.m;
        for (w, &u) in self.w.iter_mut().zip(u) {
            *w = if m == 1.0 {
                u
            } else if m == 2.0 {
                u * u
            } else {
                u.max(0.0).powf(m)
            };
        }
    }

    /// Differences `δw` on the faces, stored in `flux`.
    fn fill_gradients(&mut self) {
        let inv = 1.0 / self.grid.dx;
        for i in 0..self.flux.len() {
            self.flux[i] = (self.w[i + 1] - self.w[i]) * inv;
        }
    }

    fn stable_dt(&mut self, u: &[f64]) -> f64 {
        self.fill_w(u);
        self.fill_gradients();
        let (m, p) = (self.m, self.p);
        let n = u.len();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            let mobility = if m == 1.0 { 1.0 } else { m * u[i].max(U_TINY).powf(m - 1.0) };
            let grad = if p == 2.0 {
                1.0
            } else {
                let left = if i == 0 { 0.0 } else { self.flux[i - 1].abs() };
                let right = if i + 1 == n { 0.0 } else { self.flux[i].abs() };
                if p > 2.0 {
                    left.max(right).powf(p - 2.0)
                } else {
                    // singular at zero gradient; the floor keeps dt positive
                    left.min(right).max(1e-6).powf(p - 2.0)
                }
            };
            let d = ((p - 1.0) * mobility * grad).max(D_MIN);
            worst = worst.max(d * self.geom[i]);
        }
        let mut dt = (SIGMA_D / worst).min(DT_MAX);
        if self.lip > 0.0 {
            dt = dt.min(SIGMA_R / self.lip);
        }
        dt
    }

    fn advance(&mut self, u: &mut [f64], dt: f64) {
        self.fill_w(u);
        self.fill_gradients();
        let p = self.p;
        if p != 2.0 {
            for g in &mut self.flux {
                if *g != 0.0 {
                    *g *= g.abs().powf(p - 2.0);
                }
            }
        }
        let n = u.len();
        let (area, volume) = (&self.grid.area, &self.grid.volume);
        for i in 0..n {
            let right = if i + 1 == n { 0.0 } else { area[i] * self.flux[i] };
            let left = if i == 0 { 0.0 } else { area[i - 1] * self.flux[i - 1] };
            let react = self.reaction.map_or(0.0, |r| r.f(u[i]));
            u[i] += dt * ((right - left) / volume[i] + react);
        }
    }
}

/// Largest step keeping the explicit scheme monotone.
pub fn stable_dt(params: &Params, reaction: Option<&Reaction>, state: &PdeState, grid: &Grid) -> f64 {
    Stepper::new(params, reaction, grid).stable_dt(&state.u)
}

/// One explicit Euler step of size `dt`.
pub fn step(params: &Params, reaction: Option<&Reaction>, state: &PdeState, grid: &Grid, dt: f64) -> Result<PdeState> {
    let mut stepper = Stepper::new(params, reaction, grid);
    let stable = stepper.stable_dt(&state.u);
    if dt > stable * (1.0 + 1e-12) {
        return Err(Error::Cfl { dt, stable });
    }
    let mut u = state.u.clone();
    stepper.advance(&mut u, dt);
    let mass = grid.integral(&u);
    Ok(PdeState { u, t: state.t + dt, mass })
}

fn level_position(grid: &Grid, u: &[f64], level: f64) -> f64 {
    let n = u.len();
    let Some(i) = (0..n).rev().find(|&i| u[i] >= level) else {
        return f64::NAN;
    };
    if i + 1 == n {
        return grid.x[i];
    }
    let t = (u[i] - level) / (u[i] - u[i + 1]);
    grid.x[i] + t * grid.dx
}

fn support_edge(grid: &Grid, u: &[f64]) -> f64 {
    (0..u.len()).rev().find(|&i| u[i] > U_TINY).map_or(f64::NAN, |i| grid.x[i])
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Level whose outermost crossing is tracked.
    pub level: f64,
    /// Interval between recorded samples.
    pub sample_dt: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        Self { level: 0.5, sample_dt: 1.0 }
    }
}

/// Runs from `u0` at `t = 0` to `t_end`, sampling the front every
/// `opts.sample_dt` and handing each sampled state to `on_sample`.
pub fn simulate<F>(
    params: &Params,
    reaction: Option<&Reaction>,
    grid: &Grid,
    u0: Vec<f64>,
    t_end: f64,
    opts: &SimOptions,
    mut on_sample: F,
) -> Result<(PdeState, FrontTrace)>
where
    F: FnMut(&PdeState),
{
    if !(opts.sample_dt > 0.0) {
        return domain("sample interval must be positive");
    }
    let mut state = PdeState::new(grid, u0, 0.0)?;
    let mut trace = FrontTrace { level: opts.level, ..FrontTrace::default() };
    let mut stepper = Stepper::new(params, reaction, grid);
    trace.record(grid, &state);
    on_sample(&state);
    let mut k = 1usize;
    while state.t < t_end {
        let next = (k as f64 * opts.sample_dt).min(t_end);
        let dt = stepper.stable_dt(&state.u).min(next - state.t);
        stepper.advance(&mut state.u, dt);
        state.t += dt;
        if state.t >= next - 1e-12 * next.max(1.0) {
            state.t = next;
            state.mass = grid.integral(&state.u);
            debug_assert!(state.u.iter().all(|v| *v >= -1e-12 && *v <= 1.0 + 1e-12));
            trace.record(grid, &state);
            on_sample(&state);
            k += 1;
        }
    }
    state.mass = grid.integral(&state.u);
    Ok((state, trace))
}

/// Least-squares slope of front position against time over the last
/// `window_frac` of the record.
pub fn measure_speed(trace: &FrontTrace, window_frac: f64) -> Result<f64> {
    measure_slope(&trace.times, &trace.positions, window_frac)
}

/// As [`measure_speed`] for the support edge.
pub fn measure_edge_speed(trace: &FrontTrace, window_frac: f64) -> Result<f64> {
    measure_slope(&trace.times, &trace.support_edge, window_frac)
}

fn measure_slope(times: &[f64], pos: &[f64], window_frac: f64) -> Result<f64> {
    if times.is_empty() {
        return Err(Error::InsufficientData("empty trace".into()));
    }
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let start = t1 - window_frac.clamp(0.0, 1.0) * (t1 - t0);
    let pts: Vec<(f64, f64)> =
        times.iter().zip(pos).filter(|(t, x)| **t >= start && x.is_finite()).map(|(t, x)| (*t, *x)).collect();
    if pts.len() < 10 {
        return Err(Error::InsufficientData(format!("{} finite samples in the window, need 10", pts.len())));
    }
    Ok(slope(&pts))
}

/// Exponent `α` of the amplitude decay `t^{-α}` of the self-similar solution.
pub fn barenblatt_alpha(params: &Params, n: u32) -> f64 {
    let n = n as f64;
    if params.is_pseudo_linear() {
        n / params.p()
    } else {
        1.0 / (params.gamma() + params.p() / n)
    }
}

/// Shape constant `k` of the self-similar profile for `u_t = Δ_p(u^m)`.
pub fn barenblatt_k(params: &Params, n: u32) -> f64 {
    let (m, p) = (params.m(), params.p());
    if params.is_pseudo_linear() {
        (p - 1.0) * p.powf(-p / (p - 1.0)) / m
    } else {
        let beta = barenblatt_alpha(params, n) / n as f64;
        params.gamma() / (m * p) * beta.powf(1.0 / (p - 1.0))
    }
}

/// The shape constant as it would be written without the factor `1/m`.
pub fn barenblatt_k_unnormalised(params: &Params, n: u32) -> f64 {
    barenblatt_k(params, n) * params.m()
}

fn barenblatt_with_k(params: &Params, n: u32, c: f64, k: f64, x: f64, t: f64) -> f64 {
    let alpha = barenblatt_alpha(params, n);
    let p = params.p();
    let eta = x.abs() * t.powf(-alpha / n as f64);
    let core = k * eta.powf(p / (p - 1.0));
    let shape = if params.is_pseudo_linear() {
        c * (-core).exp()
    } else {
        (c - core).max(0.0).powf((p - 1.0) / params.gamma())
    };
    t.powf(-alpha) * shape
}

/// Self-similar solution `t^{-α} F(|x| t^{-α/N})` with profile constant `c`.
pub fn barenblatt(params: &Params, n: u32, c: f64, x: f64, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return domain(format!("time must be positive, got {t}"));
    }
    Ok(barenblatt_with_k(params, n, c, barenblatt_k(params, n), x, t))
}

/// Free-boundary radius of the self-similar solution, infinite when `γ = 0`.
pub fn barenblatt_radius(params: &Params, n: u32, c: f64, t: f64) -> f64 {
    if params.is_pseudo_linear() {
        return f64::INFINITY;
    }
    let p = params.p();
    (c / barenblatt_k(params, n)).powf((p - 1.0) / p) * t.powf(barenblatt_alpha(params, n) / n as f64)
}

/// Residual of `u_t - r^{1-N}(r^{N-1}|w_r|^{p-2}w_r)_r` for the self-similar
/// ansatz with shape constant `k`, by central differences at `(r, t)`.
pub fn barenblatt_residual(params: &Params, n: u32, k: f64, r: f64, t: f64) -> f64 {
    let (m, p) = (params.m(), params.p());
    let u = |x: f64, s: f64| barenblatt_with_k(params, n, 1.0, k, x, s);
    let h = 1e-4 * r.max(1e-3);
    let ht = 1e-5 * t;
    let ut = (u(r, t + ht) - u(r, t - ht)) / (2.0 * ht);
    let flux = |x: f64| {
        let wr = (u(x + h, t).powf(m) - u(x - h, t).powf(m)) / (2.0 * h);
        x.powi(n as i32 - 1) * wr.abs().powf(p - 2.0) * wr
    };
    let div = (flux(r + h) - flux(r - h)) / (2.0 * h) / r.powi(n as i32 - 1);
    ut - div
}

/// Finds the shape constant zeroing the residual of the self-similar ansatz,
/// by a logarithmic scan for a sign change followed by bisection.
pub fn barenblatt_k_oracle(params: &Params, n: u32) -> Result<f64> {
    let q = (params.p() - 1.0) / params.p();
    // halfway to the free boundary, where the ansatz is smooth
    let res = |k: f64| barenblatt_residual(params, n, k, 0.5 * k.powf(-q), 1.0);
    let grid: Vec<f64> = (0..=400).map(|i| 10f64.powf(-4.0 + 5.0 * i as f64 / 400.0)).collect();
    let mut roots = Vec::new();
    for w in grid.windows(2) {
        let (a, b) = (res(w[0]), res(w[1]));
        if a.is_finite() && b.is_finite() && a * b < 0.0 {
            let (mut lo, mut hi, mut flo) = (w[0], w[1], a);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                let fm = res(mid);
                if (fm > 0.0) == (flo > 0.0) {
                    lo = mid;
                    flo = fm;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }
    match roots.as_slice() {
        [k] => Ok(*k),
        [] => Err(Error::Bracket { lo: 1e-4, hi: 10.0, reason: "residual never changes sign".into() }),
        _ => Err(Error::Bracket { lo: 1e-4, hi: 10.0, reason: format!("several sign changes: {roots:?}") }),
    }
}

/// Relative L¹ error at `t1` of a pure-diffusion run started from the
/// self-similar solution at `t0`, on the half-line `[0, length]`.
pub fn barenblatt_error(params: &Params, c: f64, t0: f64, t1: f64, length: f64, dx: f64) -> Result<f64> {
    let grid = Grid::symmetric(length, dx)?;
    if barenblatt_radius(params, 1, c, t1) > 0.9 * length {
        return Err(Error::GridTooSmall("support reaches the boundary".into()));
    }
    let u0 = grid.x.iter().map(|&x| barenblatt(params, 1, c, x, t0)).collect::<Result<Vec<_>>>()?;
    let opts = SimOptions { level: 0.5, sample_dt: t1 - t0 };
    let (state, _) = simulate(params, None, &grid, u0, t1 - t0, &opts, |_| {})?;
    let exact: Vec<f64> =
        grid.x.iter().map(|&x| barenblatt_with_k(params, 1, c, barenblatt_k(params, 1), x, t1)).collect();
    let diff: Vec<f64> = state.u.iter().zip(&exact).map(|(a, b)| (a - b).abs()).collect();
    Ok(grid.integral(&diff) / grid.integral(&exact))
}

/// Clamped 0-to-a wave at the critical speed and its reflection, folded into
/// a compactly supported datum lying strictly below both barriers.
pub fn make_not_reacting_datum(params: &Params, reaction: &Reaction, grid: &Grid) -> Result<Vec<f64>> {
    if reaction.kind() != ReactionKind::TypeC {
        return domain("not-reacting data are defined for bistable reactions");
    }
    let c_star = find_cstar(params, reaction, 1e-6, None)?.c_star;
    let wave = zero_to_a_tw(params, reaction, c_star, 0.05, Some(c_star))?;
    not_reacting_from_wave(reaction, grid, &wave)
}

fn not_reacting_from_wave(reaction: &Reaction, grid: &Grid, wave: &WaveProfile) -> Result<Vec<f64>> {
    let a = reaction.a();
    let (xi0, xi1) = (wave.fb_points[0], wave.fb_points[1]);
    let half = xi1 - xi0;
    if half >= max_radius(grid) {
        return Err(Error::GridTooSmall(format!("datum needs half-width {half}")));
    }
    Ok((0..grid.len())
        .map(|i| {
            let s = xi1 - grid.radius(i);
            if s <= xi0 {
                0.0
            } else {
                0.99 * wave.eval(s).min(a)
            }
        })
        .collect())
}

fn max_radius(grid: &Grid) -> f64 {
    grid.extent.0.abs().max(grid.extent.1.abs())
}

/// Plateau at `a + δ` on `|x| ≤ R` continued by the decaying half of the
/// change-sign wave of speed `c`, with `δ` 0.05 above the admissible minimum.
pub fn make_reacting_datum(params: &Params, reaction: &Reaction, grid: &Grid, c: f64, radius: f64) -> Result<Vec<f64>> {
    if reaction.kind() != ReactionKind::TypeC {
        return domain("reacting data are defined for bistable reactions");
    }
    let delta = min_delta(params, reaction, c, 1e-6)? + 0.05;
    if reaction.a() + delta >= 1.0 {
        return domain(format!("peak a+δ = {} must stay below 1", reaction.a() + delta));
    }
    let wave = change_sign_tw(params, reaction, c, delta)?;
    let (peak_xi, top) = wave.peak.unwrap_or((0.0, wave.max()));
    let xi1 = wave.fb_points[1];
    if radius + xi1 - peak_xi >= max_radius(grid) {
        return Err(Error::GridTooSmall(format!("datum needs radius {}", radius + xi1 - peak_xi)));
    }
    Ok((0..grid.len())
        .map(|i| {
            let r = grid.radius(i);
            if r <= radius {
                top
            } else {
                wave.eval(peak_xi + r - radius).max(0.0)
            }
        })
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub c_star: f64,
    pub extinct: bool,
    /// First sample time with `max u < 1e-3`.
    pub extinction_time: Option<f64>,
    pub not_reacting_final_max: f64,
    pub reacting_c: f64,
    pub reacting_delta: f64,
    /// `min u` over `|x| ≤ inner_radius` at the final time.
    pub inner_min: f64,
    pub inner_radius: f64,
    pub invasion_speed: Option<f64>,
    pub edge_speed: Option<f64>,
}

/// Runs a not-reacting and a reacting datum on the same grid.
pub fn threshold_experiment(
    params: &Params,
    reaction: &Reaction,
    grid: &Grid,
    t_end: f64,
    inner_radius: f64,
) -> Result<(ThresholdReport, (PdeState, FrontTrace), (PdeState, FrontTrace))> {
    let c_star = find_cstar(params, reaction, 1e-6, None)?.c_star;
    let wave = zero_to_a_tw(params, reaction, c_star, 0.05, Some(c_star))?;
    let quiet = not_reacting_from_wave(reaction, grid, &wave)?;
    let opts = SimOptions { level: 0.5, sample_dt: 0.5 };
    let mut extinction_time = None;
    let dead = simulate(params, Some(reaction), grid, quiet, t_end, &opts, |s| {
        if extinction_time.is_none() && s.max() < 1e-3 {
            extinction_time = Some(s.t);
        }
    })?;
    let c = 0.5 * c_star;
    let reacting_delta = min_delta(params, reaction, c, 1e-6)? + 0.05;
    let hot = make_reacting_datum(params, reaction, grid, c, 5.0)?;
    let alive = simulate(params, Some(reaction), grid, hot, t_end, &opts, |_| {})?;
    let inner_min =
        (0..grid.len()).filter(|&i| grid.radius(i) <= inner_radius).map(|i| alive.0.u[i]).fold(f64::INFINITY, f64::min);
    let report = ThresholdReport {
        c_star,
        extinct: extinction_time.is_some(),
        extinction_time,
        not_reacting_final_max: dead.0.max(),
        reacting_c: c,
        reacting_delta,
        inner_min,
        inner_radius,
        invasion_speed: measure_speed(&alive.1, 0.5).ok(),
        edge_speed: measure_edge_speed(&alive.1, 0.5).ok(),
    };
    Ok((report, dead, alive))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaturationReport {
    pub a: f64,
    pub eps: f64,
    pub c_star: f64,
    /// First sample time with `max u ≤ a + eps`.
    pub t_eps: Option<f64>,
    pub max_u_final: f64,
    /// `max |u - a|` over `|x| ≤ 0.8 c* t` at the final time.
    pub inner_deviation: f64,
    /// `max u` over `|x| ≥ 1.2 c* t` at the final time.
    pub outer_max: f64,
    pub t_final: f64,
    pub converged: bool,
}

/// Follows a monostable run until `t_end` and reports how it settles on `a`.
pub fn saturation_experiment(
    params: &Params,
    reaction: &Reaction,
    grid: &Grid,
    u0: Vec<f64>,
    eps: f64,
    t_end: f64,
) -> Result<(SaturationReport, PdeState, FrontTrace)> {
    if reaction.kind() != ReactionKind::TypeCPrime {
        return domain("saturation runs need a monostable reaction with an intermediate zero");
    }
    let a = reaction.a();
    let c_star = find_cstar(params, reaction, 1e-6, None)?.c_star;
    let opts = SimOptions { level: 0.5 * a, sample_dt: 0.5 };
    let mut t_eps = None;
    let (state, trace) = simulate(params, Some(reaction), grid, u0, t_end, &opts, |s| {
        if t_eps.is_none() && s.max() <= a + eps {
            t_eps = Some(s.t);
        }
    })?;
    let t = state.t;
    let inner_deviation = grid.max_within(|i| (state.u[i] - a).abs(), 0.0, 0.8 * c_star * t);
    let outer_max = grid.max_within(|i| state.u[i], 1.2 * c_star * t, f64::INFINITY);
    let max_u_final = state.max();
    let report = SaturationReport {
        a,
        eps,
        c_star,
        t_eps,
        max_u_final,
        inner_deviation,
        outer_max,
        t_final: t,
        converged: t_eps.is_some() && inner_deviation <= eps,
    };
    Ok((report, state, trace))
}

/// Compact bump `max(0, 1 - (x/w)^2)` with peak 1.
pub fn bump_datum(grid: &Grid, width: f64) -> Vec<f64> {
    grid.x.iter().map(|x| (1.0 - (x / width).powi(2)).max(0.0)).collect()
}
