//! Reaction terms of bistable (type C), monostable-to-`a` (type C') and
//! Fisher-KPP type, with the weighted calculus used by the phase-plane code.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::interp::MonotoneCubic;
use crate::params::Params;
use crate::quad::adaptive_simpson;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ReactionKind {
    /// `f < 0` on `(0,a)`, `f > 0` on `(a,1)`.
    #[serde(rename = "C")]
    TypeC,
    /// `f > 0` on `(0,a)`, `f < 0` on `(a,1)`.
    #[serde(rename = "Cprime")]
    TypeCPrime,
    /// `f > 0` on `(0,1)`; arises from rescaling a type C' reaction on `[0,a]`.
    #[serde(rename = "KPP")]
    Kpp,
}

impl fmt::Display for ReactionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReactionKind::TypeC => "C",
            ReactionKind::TypeCPrime => "Cprime",
            ReactionKind::Kpp => "KPP",
        })
    }
}

impl FromStr for ReactionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C" | "c" => Ok(ReactionKind::TypeC),
            "Cprime" | "cprime" | "C'" | "Cp" => Ok(ReactionKind::TypeCPrime),
            "KPP" | "kpp" => Ok(ReactionKind::Kpp),
            other => domain(format!("unknown reaction kind {other:?}")),
        }
    }
}

#[derive(Debug, Clone)]
enum Source {
    Cubic,
    Logistic { rate: f64 },
    Tabulated(Arc<MonotoneCubic>),
    Scaled { base: Arc<Reaction>, factor: f64 },
}

/// An immutable, validated reaction term on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct Reaction {
    kind: ReactionKind,
    a: f64,
    source: Source,
}

/// Number of interior points sampled when validating the sign pattern.
const VALIDATION_SAMPLES: usize = 1000;
const ZERO_TOL: f64 = 1e-12;

impl Reaction {
    /// `u(1-u)(u-a)` for [`ReactionKind::TypeC`], `u(1-u)(a-u)` for
    /// [`ReactionKind::TypeCPrime`].
    pub fn cubic(kind: ReactionKind, a: f64) -> Result<Self> {
        if kind == ReactionKind::Kpp {
            return domain("the cubic family is defined for types C and C' only");
        }
        if !(a > 0.0 && a < 1.0) {
            return domain(format!("intermediate zero a must lie in (0,1), got {a}"));
        }
        let r = Self { kind, a, source: Source::Cubic };
        r.validate()?;
        Ok(r)
    }

    /// Logistic `rate * u(1-u)`, a Fisher-KPP reaction with `f'(0) = rate`.
    pub fn kpp_logistic(rate: f64) -> Result<Self> {
        if !(rate > 0.0 && rate.is_finite()) {
            return domain(format!("logistic rate must be positive, got {rate}"));
        }
        let r = Self { kind: ReactionKind::Kpp, a: 1.0, source: Source::Logistic { rate } };
        r.validate()?;
        Ok(r)
    }

    /// User reaction given as `(u, f(u))` samples covering `[0, 1]`, interpolated
    /// by a monotone cubic. For [`ReactionKind::Kpp`] pass `a = 1`.
    pub fn tabulated(kind: ReactionKind, a: f64, u: Vec<f64>, f: Vec<f64>) -> Result<Self> {
        let a_ok = match kind {
            ReactionKind::Kpp => a == 1.0,
            _ => a > 0.0 && a < 1.0,
        };
        if !a_ok {
            return domain(format!("invalid intermediate zero a={a} for kind {kind}"));
        }
        if u.first().copied() != Some(0.0) || u.last().copied() != Some(1.0) {
            return domain("tabulated reaction must span exactly [0, 1]");
        }
        let table = MonotoneCubic::new(u, f)?;
        let r = Self { kind, a, source: Source::Tabulated(Arc::new(table)) };
        r.validate()?;
        Ok(r)
    }

    fn validate(&self) -> Result<()> {
        for z in [0.0, self.a, 1.0] {
            let v = self.f(z);
            if v.abs() > ZERO_TOL {
                return domain(format!("f({z}) = {v} is not zero"));
            }
        }
        let margin = 1e-6;
        for i in 1..VALIDATION_SAMPLES {
            let u = i as f64 / VALIDATION_SAMPLES as f64;
            if (u - self.a).abs() < margin {
                continue;
            }
            let v = self.f(u);
            let expect_positive = match self.kind {
                ReactionKind::TypeC => u > self.a,
                ReactionKind::TypeCPrime => u < self.a,
                ReactionKind::Kpp => true,
            };
            let ok = if expect_positive { v > 0.0 } else { v < 0.0 };
            if !ok {
                return domain(format!("sign pattern of type {} violated at u={u}: f={v}", self.kind));
            }
        }
        match self.kind {
            ReactionKind::TypeC if !(self.fprime(0.0) < 0.0) => domain("type C reaction needs f'(0) < 0"),
            ReactionKind::TypeCPrime if !(self.fprime(1.0) > 0.0) => domain("type C' reaction needs f'(1) > 0"),
            ReactionKind::Kpp if !(self.fprime(0.0) > 0.0) => domain("KPP reaction needs f'(0) > 0"),
            _ => Ok(()),
        }
    }

    pub fn kind(&self) -> ReactionKind {
        self.kind
    }

    /// Intermediate zero; equals 1 for KPP reactions.
    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn is_cubic(&self) -> bool {
        matches!(self.source, Source::Cubic)
    }

    pub fn f(&self, u: f64) -> f64 {
        match &self.source {
            Source::Cubic => match self.kind {
                ReactionKind::TypeC => u * (1.0 - u) * (u - self.a),
                _ => u * (1.0 - u) * (self.a - u),
            },
            Source::Logistic { rate } => rate * u * (1.0 - u),
            Source::Tabulated(t) => t.eval(u),
            Source::Scaled { base, factor } => base.f(factor * u) / factor,
        }
    }

    pub fn fprime(&self, u: f64) -> f64 {
        match &self.source {
            Source::Cubic => {
                // d/du [ -u^3 + (1+a)u^2 - a u ]
                let d = -3.0 * u * u + 2.0 * (1.0 + self.a) * u - self.a;
                match self.kind {
                    ReactionKind::TypeC => d,
                    _ => -d,
                }
            }
            Source::Logistic { rate } => rate * (1.0 - 2.0 * u),
            Source::Tabulated(t) => t.eval_with_derivative(u).1,
            Source::Scaled { base, factor } => base.fprime(factor * u),
        }
    }

    /// Abscissa of the saddle the critical trajectory leaves from:
    /// `S(1,0)` for types C and KPP, `A(a,0)` for type C'.
    pub fn saddle(&self) -> f64 {
        match self.kind {
            ReactionKind::TypeCPrime => self.a,
            _ => 1.0,
        }
    }

    /// Interval on which `f > 0`.
    pub fn positivity_interval(&self) -> (f64, f64) {
        match self.kind {
            ReactionKind::TypeC => (self.a, 1.0),
            ReactionKind::TypeCPrime => (0.0, self.a),
            ReactionKind::Kpp => (0.0, 1.0),
        }
    }

    /// `max |f'|` on `[0,1]`, sampled.
    pub fn lipschitz(&self) -> f64 {
        (0..=1000).map(|i| self.fprime(i as f64 / 1000.0).abs()).fold(0.0, f64::max)
    }
}

/// Builds the cubic model reaction of the given kind.
pub fn cubic_reaction(kind: ReactionKind, a: f64) -> Result<Reaction> {
    Reaction::cubic(kind, a)
}

/// `f_{m,p}(X) = m X^{γ/(p-1)-1} f(X)` for `0 < X ≤ 1`.
///
/// At `X = 0` the value is only defined through the limit `f ≈ f'(0) X`;
/// that limit is returned when the weight is bounded and an error otherwise.
pub fn f_mp(params: &Params, reaction: &Reaction, x: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) || !x.is_finite() {
        return domain(format!("f_mp needs 0 <= X <= 1, got {x}"));
    }
    if x == 0.0 && params.weight_exponent() < 0.0 && params.weight_exponent() != -1.0 {
        return domain("f_mp(0) is a limit; the weight diverges at X = 0");
    }
    Ok(f_mp_limit(params, reaction, x))
}

/// `f_{m,p}` with the `X → 0` limit `m f'(0) X^{γ/(p-1)}` substituted at zero.
pub(crate) fn f_mp_limit(params: &Params, reaction: &Reaction, x: f64) -> f64 {
    let m = params.m();
    let e = params.weight_exponent();
    if x <= 0.0 {
        return if params.is_pseudo_linear() { m * reaction.fprime(0.0) } else { 0.0 };
    }
    if e == 0.0 {
        m * reaction.f(x)
    } else if e == -1.0 {
        m * reaction.f(x) / x
    } else {
        m * x.powf(e) * reaction.f(x)
    }
}

/// `∫_0^upper u^{m-1} f(u) du`.
pub fn weighted_integral(reaction: &Reaction, m: f64, upper: f64) -> f64 {
    assert!((0.0..=1.0).contains(&upper), "upper limit must lie in [0,1]");
    if upper == 0.0 {
        return 0.0;
    }
    let mono = |k: f64| upper.powf(m + k) / (m + k);
    match (&reaction.source, reaction.kind) {
        (Source::Cubic, kind) => {
            let a = reaction.a;
            let v = -mono(3.0) + (1.0 + a) * mono(2.0) - a * mono(1.0);
            if kind == ReactionKind::TypeC {
                v
            } else {
                -v
            }
        }
        (Source::Logistic { rate }, _) => rate * (mono(1.0) - mono(2.0)),
        _ => {
            let g = |u: f64| if u <= 0.0 { 0.0 } else { u.powf(m - 1.0) * reaction.f(u) };
            if m >= 1.0 {
                adaptive_simpson(&g, 0.0, upper, 1e-10)
            } else {
                // u^{m-1} endpoint: integrate f ≈ f'(0) u exactly on [0, eps]
                let eps = upper.min(1e-6);
                let head = reaction.fprime(0.0) * eps.powf(m + 1.0) / (m + 1.0);
                head + adaptive_simpson(&g, eps, upper, 1e-10)
            }
        }
    }
}

/// Maps a type C' reaction on `[0,a]` to the KPP reaction `g(v) = f(a v)/a` on
/// `[0,1]`. Returns `g` and the spatial factor `a^{γ/p}`: if `v(y,t)` solves
/// the KPP problem then `u(x,t) = a v(a^{-γ/p} x, t)` solves the original one,
/// so speeds transfer as `c_u = a^{γ/p} c_v`.
pub fn scale_to_kpp(reaction: &Reaction, params: &Params) -> Result<(Reaction, f64)> {
    if reaction.kind != ReactionKind::TypeCPrime {
        return domain("scale_to_kpp needs a type C' reaction");
    }
    let a = reaction.a;
    let scaled = Reaction {
        kind: ReactionKind::Kpp,
        a: 1.0,
        source: Source::Scaled { base: Arc::new(reaction.clone()), factor: a },
    };
    scaled.validate()?;
    Ok((scaled, a.powf(params.gamma() / params.p())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::make_params;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn cubic_examples() {
        let c = cubic_reaction(ReactionKind::TypeC, 0.3).unwrap();
        assert_eq!(c.f(0.3), 0.0);
        assert!(close(c.f(0.5), 0.05, 1e-15));
        let cp = cubic_reaction(ReactionKind::TypeCPrime, 0.3).unwrap();
        assert!(close(cp.fprime(0.0), 0.3, 1e-15));
    }

    #[test]
    fn cubic_rejects_bad_a() {
        assert!(cubic_reaction(ReactionKind::TypeC, 0.0).is_err());
        assert!(cubic_reaction(ReactionKind::TypeC, 1.2).is_err());
        assert!(cubic_reaction(ReactionKind::Kpp, 0.3).is_err());
    }

    #[test]
    fn fprime_matches_finite_differences() {
        for kind in [ReactionKind::TypeC, ReactionKind::TypeCPrime] {
            let r = cubic_reaction(kind, 0.37).unwrap();
            for u in [0.05, 0.2, 0.5, 0.81] {
                let h = 1e-6;
                let fd = (r.f(u + h) - r.f(u - h)) / (2.0 * h);
                assert!(close(fd, r.fprime(u), 1e-8));
            }
        }
    }

    #[test]
    fn f_mp_examples() {
        let c = cubic_reaction(ReactionKind::TypeC, 0.3).unwrap();
        let p22 = make_params(2.0, 2.0).unwrap();
        assert!(close(f_mp(&p22, &c, 0.5).unwrap(), 0.1, 1e-15));
        assert_eq!(f_mp(&p22, &c, 0.3).unwrap(), 0.0);
        let p13 = make_params(1.0, 3.0).unwrap();
        // 0.5^{-1/2} * 0.05
        assert!(close(f_mp(&p13, &c, 0.5).unwrap(), 0.070_710_678_118_654_76, 1e-12));
        assert!(f_mp(&p13, &c, 0.0).is_err());
        let p12 = make_params(1.0, 2.0).unwrap();
        assert!(close(f_mp(&p12, &c, 0.0).unwrap(), -0.3, 1e-15));
    }

    #[test]
    fn weighted_integral_examples() {
        let oracle = |a: f64| (1.0 - 2.0 * a) / 12.0;
        for a in [0.3, 0.5, 0.7] {
            let r = cubic_reaction(ReactionKind::TypeC, a).unwrap();
            assert!(close(weighted_integral(&r, 1.0, 1.0), oracle(a), 1e-15));
        }
    }

    #[test]
    fn weighted_integral_closed_form_matches_quadrature() {
        for m in [0.5, 1.0, 2.3] {
            let r = cubic_reaction(ReactionKind::TypeCPrime, 0.4).unwrap();
            let us: Vec<f64> = (0..=400).map(|i| i as f64 / 400.0).collect();
            let fs: Vec<f64> = us.iter().map(|&u| r.f(u)).collect();
            let t = Reaction::tabulated(ReactionKind::TypeCPrime, 0.4, us, fs).unwrap();
            for upper in [0.25, 0.7, 1.0] {
                let exact = weighted_integral(&r, m, upper);
                let quad = weighted_integral(&t, m, upper);
                assert!(close(exact, quad, 1e-7), "m={m} upper={upper}: {exact} vs {quad}");
            }
        }
    }

    #[test]
    fn scale_factor_examples() {
        let cp5 = cubic_reaction(ReactionKind::TypeCPrime, 0.5).unwrap();
        let (_, f1) = scale_to_kpp(&cp5, &make_params(1.0, 2.0).unwrap()).unwrap();
        assert_eq!(f1, 1.0);
        let cp3 = cubic_reaction(ReactionKind::TypeCPrime, 0.3).unwrap();
        let (g, f2) = scale_to_kpp(&cp3, &make_params(2.0, 2.0).unwrap()).unwrap();
        assert!(close(f2, 0.3f64.sqrt(), 1e-15));
        assert!(close(g.f(1.0), 0.0, 1e-15));
        assert_eq!(g.kind(), ReactionKind::Kpp);
        assert!(
            scale_to_kpp(&cubic_reaction(ReactionKind::TypeC, 0.3).unwrap(), &make_params(2.0, 2.0).unwrap()).is_err()
        );
    }

    #[test]
    fn tabulated_rejects_wrong_sign_pattern() {
        let us: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let fs: Vec<f64> = us.iter().map(|&u| u * (1.0 - u)).collect();
        assert!(Reaction::tabulated(ReactionKind::TypeC, 0.3, us, fs).is_err());
    }

    #[test]
    fn kind_parsing() {
        assert_eq!("C".parse::<ReactionKind>().unwrap(), ReactionKind::TypeC);
        assert_eq!("Cprime".parse::<ReactionKind>().unwrap(), ReactionKind::TypeCPrime);
        assert!("B".parse::<ReactionKind>().is_err());
    }
}
