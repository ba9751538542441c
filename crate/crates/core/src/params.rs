use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Diffusion exponents of `u_t = Δ_p(u^m) + f(u)`.
///
/// The homogeneity `γ = m(p-1) - 1` is always recomputed from `(m, p)`;
/// only the slow (`γ > 0`) and pseudo-linear (`γ = 0`) ranges are accepted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct Params {
    m: f64,
    p: f64,
}

#[derive(Deserialize)]
struct RawParams {
    m: f64,
    p: f64,
}

impl TryFrom<RawParams> for Params {
    type Error = crate::Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        Params::new(raw.m, raw.p)
    }
}

/// Relative slack used when deciding that `γ` sits on the pseudo-linear line.
pub const GAMMA_ZERO_TOL: f64 = 1e-12;

impl Params {
    pub fn new(m: f64, p: f64) -> Result<Self> {
        if !(m.is_finite() && m > 0.0) {
            return domain(format!("m must be positive, got {m}"));
        }
        if !(p.is_finite() && p > 1.0) {
            return domain(format!("p must exceed 1, got {p}"));
        }
        let gamma = m * (p - 1.0) - 1.0;
        if gamma < -GAMMA_ZERO_TOL {
            return domain(format!("fast-diffusion range unsupported: gamma = m(p-1)-1 = {gamma} < 0"));
        }
        Ok(Self { m, p })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// `γ = m(p-1) - 1`, snapped to zero within round-off.
    pub fn gamma(&self) -> f64 {
        let g = self.m * (self.p - 1.0) - 1.0;
        if g.abs() <= GAMMA_ZERO_TOL {
            0.0
        } else {
            g
        }
    }

    pub fn is_pseudo_linear(&self) -> bool {
        self.gamma() == 0.0
    }

    /// Exponent `γ/(p-1) - 1` of the weight in `f_{m,p}`.
    pub(crate) fn weight_exponent(&self) -> f64 {
        self.gamma() / (self.p - 1.0) - 1.0
    }
}

/// Convenience constructor mirroring [`Params::new`].
pub fn make_params(m: f64, p: f64) -> Result<Params> {
    Params::new(m, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_examples() {
        assert_eq!(make_params(2.0, 2.0).unwrap().gamma(), 1.0);
        assert_eq!(make_params(1.0, 2.0).unwrap().gamma(), 0.0);
        assert_eq!(make_params(0.5, 3.0).unwrap().gamma(), 0.0);
    }

    #[test]
    fn rejects_fast_diffusion_and_bad_inputs() {
        assert!(matches!(make_params(1.0, 1.5), Err(crate::Error::Domain(_))));
        assert!(make_params(0.0, 2.0).is_err());
        assert!(make_params(1.0, 1.0).is_err());
        assert!(make_params(f64::NAN, 2.0).is_err());
    }

    #[test]
    fn serde_rejects_invalid() {
        let ok: Params = serde_json::from_str(r#"{"m":2.0,"p":2.0}"#).unwrap();
        assert_eq!(ok.gamma(), 1.0);
        assert!(serde_json::from_str::<Params>(r#"{"m":1.0,"p":1.5}"#).is_err());
    }
}
