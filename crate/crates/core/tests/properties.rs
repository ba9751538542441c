use dnlw::phase_plane::{integrate_tc, Fate, ShootOptions};
use dnlw::wave::find_cstar;
use dnlw::*;
use proptest::prelude::*;

fn slow(fate: Fate) -> bool {
    matches!(fate, Fate::Diverged | Fate::HitsAxisAboveTarget)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn fate_flips_once_across_cstar(m in 1.2f64..3.0, a in 0.15f64..0.4, frac in 0.2f64..0.9) {
        let pr = make_params(m, 2.0).unwrap();
        let r = cubic_reaction(ReactionKind::TypeC, a).unwrap();
        let c_star = find_cstar(&pr, &r, 1e-6, None).unwrap().c_star;
        let opts = ShootOptions::default();
        let below = integrate_tc(&pr, &r, frac * c_star, 1e-8, &opts).unwrap();
        let above = integrate_tc(&pr, &r, c_star / frac, 1e-8, &opts).unwrap();
        prop_assert!(slow(below.fate), "{:?}", below.fate);
        prop_assert!(!slow(above.fate), "{:?}", above.fate);
    }

    #[test]
    fn pseudo_linear_speed_tracks_closed_form(m in 0.6f64..1.6, a in 0.1f64..0.5) {
        let p = 1.0 + 1.0 / m;
        let pr = make_params(m, p).unwrap();
        let r = cubic_reaction(ReactionKind::TypeCPrime, a).unwrap();
        let want = p * (m * m * a).powf(1.0 / (m * p));
        let got = find_cstar(&pr, &r, 1e-6, None).unwrap().c_star;
        prop_assert!((got - want).abs() < 1e-3 * want.max(1.0), "{} vs {}", got, want);
    }

    #[test]
    fn bistable_speed_shrinks_as_a_grows(m in 1.2f64..2.5, a in 0.1f64..0.35) {
        let pr = make_params(m, 2.0).unwrap();
        let speed = |a: f64| find_cstar(&pr, &cubic_reaction(ReactionKind::TypeC, a).unwrap(), 1e-6, None).unwrap().c_star;
        prop_assert!(speed(a) > speed(a + 0.05));
    }
}
