//! Dormand-Prince 5(4) integrator for small autonomous systems, with
//! terminal-event location by bisection on the step length.

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// 5th-order minus embedded 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

// the stage offsets are only needed for non-autonomous systems
#[allow(dead_code)]
const NODES: [f64; 4] = [C2, C3, C4, C5];

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: f64,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-8, atol: 1e-10, h_init: 1e-4, h_max: 0.05, h_min: 1e-14, max_steps: 400_000 }
    }
}

/// What the observer wants after an accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Continue,
    /// Stop at the end of this step.
    Stop,
    /// Event `k` changed sign inside this step: locate it and stop there.
    Locate(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Event(usize),
    Stopped,
    MaxSteps,
    Horizon,
    StepUnderflow,
}

#[derive(Debug, Clone)]
pub struct OdeRun<const N: usize> {
    pub t: Vec<f64>,
    pub y: Vec<[f64; N]>,
    pub reason: StopReason,
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for i in 0..N {
        let mut acc = 0.0;
        for (c, k) in terms {
            acc += c * k[i];
        }
        out[i] += h * acc;
    }
    out
}

/// One Dormand-Prince step. Returns the 5th-order solution, the error
/// estimate and the derivative at the new point.
fn dp_step<const N: usize, F>(f: &F, y: &[f64; N], k1: &[f64; N], h: f64) -> ([f64; N], [f64; N], [f64; N])
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    let k2 = f(&axpy(y, h, &[(A21, k1)]));
    let k3 = f(&axpy(y, h, &[(A31, k1), (A32, &k2)]));
    let k4 = f(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
    let k5 = f(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
    let k6 = f(&axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
    let y_new = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
    let k7 = f(&y_new);
    let mut err = [0.0; N];
    for i in 0..N {
        err[i] = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
    }
    (y_new, err, k7)
}

/// Integrates `y' = f(y)` from `t = 0` up to `t_end`.
///
/// `weights[i]` selects the components entering the error norm (0 excludes).
/// `observer(prev, next)` runs after every accepted step; `event(k, y)` is the
/// scalar function bracketed when the observer returns [`Flow::Locate`].
pub fn integrate<const N: usize, F, O, E>(
    f: F,
    y0: [f64; N],
    t_end: f64,
    weights: [f64; N],
    opts: &OdeOptions,
    mut observer: O,
    event: E,
) -> OdeRun<N>
where
    F: Fn(&[f64; N]) -> [f64; N],
    O: FnMut(&[f64; N], &[f64; N]) -> Flow,
    E: Fn(usize, &[f64; N]) -> f64,
{
    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = f(&y);
    let mut h = opts.h_init.min(opts.h_max);
    let mut ts = vec![t];
    let mut ys = vec![y];
    let mut steps = 0;
    let reason = loop {
        if steps >= opts.max_steps {
            break StopReason::MaxSteps;
        }
        if t >= t_end {
            break StopReason::Horizon;
        }
        h = h.min(t_end - t).min(opts.h_max);
        let (y_new, err, k7) = dp_step(&f, &y, &k1, h);
        let mut norm: f64 = 0.0;
        let mut finite = true;
        for i in 0..N {
            if !y_new[i].is_finite() {
                finite = false;
            }
            if weights[i] > 0.0 {
                let sc = opts.atol + opts.rtol * y[i].abs().max(y_new[i].abs());
                norm = norm.max(weights[i] * err[i].abs() / sc);
            }
        }
        if !finite {
            norm = f64::INFINITY;
        }
        if norm <= 1.0 {
            steps += 1;
            let prev = y;
            let t_prev = t;
            t += h;
            y = y_new;
            k1 = k7;
            let factor = if norm == 0.0 { 5.0 } else { (0.9 * norm.powf(-0.2)).clamp(0.2, 5.0) };
            let h_taken = h;
            h *= factor;
            match observer(&prev, &y) {
                Flow::Continue => {
                    ts.push(t);
                    ys.push(y);
                }
                Flow::Stop => {
                    ts.push(t);
                    ys.push(y);
                    break StopReason::Stopped;
                }
                Flow::Locate(k) => {
                    let k_prev = f(&prev);
                    let g0 = event(k, &prev);
                    let (mut lo, mut hi) = (0.0, h_taken);
                    let mut best = y;
                    for _ in 0..60 {
                        let mid = 0.5 * (lo + hi);
                        let (ym, _, _) = dp_step(&f, &prev, &k_prev, mid);
                        if (event(k, &ym) > 0.0) == (g0 > 0.0) {
                            lo = mid;
                        } else {
                            hi = mid;
                            best = ym;
                        }
                        if hi - lo <= 1e-15 * h_taken.max(1e-300) {
                            break;
                        }
                    }
                    ts.push(t_prev + hi);
                    ys.push(best);
                    break StopReason::Event(k);
                }
            }
        } else {
            h *= (0.9 * norm.powf(-0.2)).clamp(0.1, 0.5);
            if h < opts.h_min {
                break StopReason::StepUnderflow;
            }
        }
    };
    OdeRun { t: ts, y: ys, reason }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay() {
        let opts = OdeOptions { h_max: 1.0, ..Default::default() };
        let run = integrate(|y: &[f64; 1]| [-y[0]], [1.0], 3.0, [1.0], &opts, |_, _| Flow::Continue, |_, _| 0.0);
        assert_eq!(run.reason, StopReason::Horizon);
        let last = run.y.last().unwrap()[0];
        assert!((last - (-3.0f64).exp()).abs() < 1e-9);
    }

    #[test]
    fn harmonic_oscillator_event() {
        // first zero of sin(t) after t=0 with y = (sin, cos)
        let opts = OdeOptions { h_max: 0.3, ..Default::default() };
        let run = integrate(
            |y: &[f64; 2]| [y[1], -y[0]],
            [0.0, 1.0],
            10.0,
            [1.0, 1.0],
            &opts,
            |prev, next| if prev[0] > 0.0 && next[0] <= 0.0 { Flow::Locate(0) } else { Flow::Continue },
            |_, y| y[0],
        );
        assert_eq!(run.reason, StopReason::Event(0));
        let t = *run.t.last().unwrap();
        assert!((t - std::f64::consts::PI).abs() < 1e-8, "t = {t}");
    }
}
