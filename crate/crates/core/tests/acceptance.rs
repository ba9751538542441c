use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use dnlw::pde::*;
use dnlw::phase_plane::{explicit_c0_trajectory, integrate_tc, ShootOptions};
use dnlw::wave::*;
use dnlw::*;

type Check = std::result::Result<String, String>;

fn kind(name: &str) -> ReactionKind {
    name.parse().unwrap()
}

fn setup(m: f64, p: f64, k: &str, a: f64) -> (Params, Reaction) {
    (make_params(m, p).unwrap(), cubic_reaction(kind(k), a).unwrap())
}

fn ensure(ok: bool, msg: String) -> Check {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn timed(limit: Duration, t: Instant, what: &str) -> std::result::Result<(), String> {
    let el = t.elapsed();
    if el > limit {
        Err(format!("{what} took {el:.1?}, limit {limit:?}"))
    } else {
        Ok(())
    }
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn explicit_monostable_speed() -> Check {
    let mut notes = Vec::new();
    for (m, p) in [(1.0, 2.0), (0.5, 3.0)] {
        let (pr, r) = setup(m, p, "Cprime", 0.3);
        let want = p * (m * m * r.fprime(0.0)).powf(1.0 / (m * p));
        let t = Instant::now();
        let got = find_cstar(&pr, &r, 1e-6, None).map_err(|e| e.to_string())?.c_star;
        timed(secs(5), t, "find_cstar")?;
        if (got - want).abs() > 1e-3 {
            return Err(format!("({m},{p}): c* {got} vs {want}"));
        }
        notes.push(format!("({m},{p}) c*={got:.6} want {want:.6}"));
    }
    Ok(notes.join("; "))
}

fn classical_bistable_speed() -> Check {
    let mut notes = Vec::new();
    for a in [0.1, 0.3, 0.45] {
        let (pr, r) = setup(1.0, 2.0, "C", a);
        let want = (1.0 - 2.0 * a) / 2f64.sqrt();
        let t = Instant::now();
        let got = find_cstar(&pr, &r, 1e-6, None).map_err(|e| e.to_string())?.c_star;
        timed(secs(5), t, "find_cstar")?;
        if (got - want).abs() > 1e-3 {
            return Err(format!("a={a}: c* {got} vs {want}"));
        }
        notes.push(format!("a={a} err {:.1e}", (got - want).abs()));
    }
    Ok(notes.join("; "))
}

fn zero_speed_trajectory() -> Check {
    let t = Instant::now();
    let mut worst: f64 = 0.0;
    for (m, p) in [(1.0, 2.0), (2.0, 2.0), (1.0, 3.0)] {
        let (pr, r) = setup(m, p, "C", 0.3);
        let opts = ShootOptions { eps: 1e-7, ..ShootOptions::default() };
        let traj = integrate_tc(&pr, &r, 0.0, 0.01, &opts).map_err(|e| e.to_string())?;
        let mut n = 0;
        for s in traj.samples.iter().filter(|s| (0.05..=0.95).contains(&s.x)) {
            let exact = explicit_c0_trajectory(&pr, &r, s.x).map_err(|e| e.to_string())?;
            worst = worst.max((s.z - exact).abs());
            n += 1;
        }
        if n < 20 {
            return Err(format!("({m},{p}): only {n} samples in [0.05, 0.95]"));
        }
    }
    timed(secs(1), t, "three trajectories")?;
    ensure(worst <= 1e-6, format!("sup difference {worst:.2e}"))
}

fn monotone_in_speed() -> Check {
    let t = Instant::now();
    let (pr, r) = setup(2.0, 2.0, "C", 0.3);
    let trajs = (1..=8)
        .map(|i| integrate_tc(&pr, &r, 0.05 * i as f64, 0.3, &ShootOptions::default()))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    for j in 0..=60 {
        let x = 0.35 + 0.6 * j as f64 / 60.0;
        let zs: Vec<Option<f64>> = trajs.iter().map(|tr| tr.z_at(x)).collect();
        for (k, w) in zs.windows(2).enumerate() {
            match (w[0], w[1]) {
                (Some(lo), Some(hi)) if hi < lo => {}
                _ => return Err(format!("X={x:.3}: T_c not decreasing between speeds {} and {}", k + 1, k + 2)),
            }
        }
    }
    timed(secs(10), t, "eight trajectories")?;
    Ok("8 speeds x 61 abscissae strictly decreasing".into())
}

fn darcy_law() -> Check {
    let mut notes = Vec::new();
    for (m, p) in [(2.0, 2.0), (1.0, 3.0), (3.0, 2.0)] {
        let (pr, r) = setup(m, p, "C", 0.3);
        let want = (p - 1.0) / pr.gamma();
        let t = Instant::now();
        let w = find_cstar(&pr, &r, 1e-6, None).map_err(|e| e.to_string())?;
        let prof = &w.profile;
        let xi0 = *prof.fb_points.first().ok_or("no free boundary")?;
        let k = prof.phi.iter().position(|&v| v < 0.02).ok_or("profile never drops below 0.02")?;
        let got = darcy_exponent(prof, xi0 - prof.xi[k]).map_err(|e| e.to_string())?;
        timed(secs(5), t, "critical profile and fit")?;
        if ((got - want) / want).abs() > 0.05 {
            return Err(format!("({m},{p}): exponent {got} vs {want}"));
        }
        notes.push(format!("({m},{p}) {got:.4} vs {want}"));
    }
    Ok(notes.join("; "))
}

fn pseudo_linear_tail() -> Check {
    let t = Instant::now();
    let (pr, r) = setup(1.0, 2.0, "Cprime", 0.3);
    let w = find_cstar(&pr, &r, 1e-6, None).map_err(|e| e.to_string())?;
    let (rate, _) = tail_fit_gamma0(&w.profile, &r, &pr).map_err(|e| e.to_string())?;
    let (_, lambda) = explicit_cstar_gamma0_cprime(&pr, &r).map_err(|e| e.to_string())?;
    let want = lambda / pr.m();
    timed(secs(5), t, "tail fit")?;
    ensure(((rate - want) / want).abs() <= 0.05, format!("decay rate {rate:.4} vs {want:.4}"))
}

fn spreading_and_threshold() -> (Check, Check) {
    let t = Instant::now();
    let (pr, r) = setup(2.0, 2.0, "C", 0.3);
    let grid = Grid::symmetric(150.0, 0.05).unwrap();
    let (rep, _, alive) = match threshold_experiment(&pr, &r, &grid, 200.0, 20.0) {
        Ok(v) => v,
        Err(e) => return (Err(e.to_string()), Err(e.to_string())),
    };
    let el = t.elapsed();
    let spread = (|| {
        let speed = measure_speed(&alive.1, 0.5).map_err(|e| e.to_string())?;
        let edge = measure_edge_speed(&alive.1, 0.5).map_err(|e| e.to_string())?;
        let rel = (speed - rep.c_star).abs() / rep.c_star;
        if el > Duration::from_secs(180) {
            return Err(format!("runs took {el:.1?}"));
        }
        ensure(
            rel <= 0.05 && edge <= rep.c_star + 0.05,
            format!("front {speed:.5}, edge {edge:.5}, c* {:.5}", rep.c_star),
        )
    })();
    let threshold = (|| {
        if el > Duration::from_secs(300) {
            return Err(format!("runs took {el:.1?}"));
        }
        let died = rep.extinction_time.is_some_and(|t| t < 100.0);
        ensure(
            died && rep.inner_min >= 0.95,
            format!("extinction at t={:?}, inner min {:.6} ({el:.1?})", rep.extinction_time, rep.inner_min),
        )
    })();
    (spread, threshold)
}

fn saturation() -> Check {
    let t = Instant::now();
    let (pr, r) = setup(2.0, 2.0, "Cprime", 0.3);
    let grid = Grid::symmetric(150.0, 0.05).unwrap();
    let u0 = bump_datum(&grid, 10.0);
    let (rep, state, _) = saturation_experiment(&pr, &r, &grid, u0, 0.05, 200.0).map_err(|e| e.to_string())?;
    timed(secs(180), t, "saturation run")?;
    ensure(
        rep.t_eps.is_some() && state.max() <= 0.35 + 1e-12 && rep.inner_deviation <= 0.05,
        format!("t_eps {:?}, final max {:.5}, inner deviation {:.2e}", rep.t_eps, state.max(), rep.inner_deviation),
    )
}

fn self_similar_check() -> Check {
    let t = Instant::now();
    let pr = make_params(2.0, 2.0).unwrap();
    let errs = [0.04, 0.02, 0.01]
        .iter()
        .map(|&dx| barenblatt_error(&pr, 1.0, 1.0, 2.0, 20.0, dx))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    let k = barenblatt_k_oracle(&pr, 1).map_err(|e| e.to_string())?;
    timed(secs(120), t, "refinement study")?;
    let ratios = [errs[0] / errs[1], errs[1] / errs[2]];
    ensure(
        errs[1] <= 0.02 && ratios.iter().all(|&q| q >= 1.5) && (k - 1.0 / 12.0).abs() < 1e-6,
        format!("errors {:.2e} {:.2e} {:.2e}, ratios {ratios:.2?}, oracle k {k:.8}", errs[0], errs[1], errs[2]),
    )
}

fn random_datum(rng: &mut ChaCha8Rng, grid: &Grid) -> Vec<f64> {
    let centre = rng.gen_range(-3.0..3.0);
    let width = rng.gen_range(1.0..4.0);
    let height = rng.gen_range(0.2..1.0);
    grid.x
        .iter()
        .map(|x| {
            let s = 1.0 - ((x - centre) / width).powi(2);
            if s > 0.0 {
                (height * s * rng.gen_range(0.5..1.0)).min(1.0)
            } else {
                0.0
            }
        })
        .collect()
}

fn comparison_pairs() -> std::result::Result<f64, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let grid = Grid::line(10.0, 0.1).unwrap();
    let models = [(2.0, 2.0, "C"), (1.0, 3.0, "C"), (1.5, 2.5, "Cprime"), (2.0, 1.8, "C"), (1.0, 2.0, "Cprime")];
    let mut worst: f64 = 0.0;
    for pair in 0..20 {
        let (m, p, k) = models[pair % models.len()];
        let (pr, r) = setup(m, p, k, 0.3);
        let lower = random_datum(&mut rng, &grid);
        let upper: Vec<f64> = lower.iter().map(|&u| (u + rng.gen_range(0.0..0.3) * (1.0 - u)).min(1.0)).collect();
        let mut u = PdeState::new(&grid, lower, 0.0).map_err(|e| e.to_string())?;
        let mut v = PdeState::new(&grid, upper, 0.0).map_err(|e| e.to_string())?;
        for _ in 0..200 {
            let dt = stable_dt(&pr, Some(&r), &u, &grid).min(stable_dt(&pr, Some(&r), &v, &grid));
            u = step(&pr, Some(&r), &u, &grid, dt).map_err(|e| e.to_string())?;
            v = step(&pr, Some(&r), &v, &grid, dt).map_err(|e| e.to_string())?;
            let gap = u.u.iter().zip(&v.u).map(|(a, b)| a - b).fold(f64::NEG_INFINITY, f64::max);
            worst = worst.max(gap);
        }
    }
    Ok(worst)
}

fn mass_drift() -> std::result::Result<f64, String> {
    let mut worst: f64 = 0.0;
    for (m, p) in [(2.0, 2.0), (1.0, 3.0), (2.0, 1.8)] {
        let pr = make_params(m, p).unwrap();
        for grid in [Grid::line(20.0, 0.1).unwrap(), Grid::radial(2, 20.0, 0.1).unwrap()] {
            let u0 = bump_datum(&grid, 4.0);
            let (state, _) = simulate(&pr, None, &grid, u0.clone(), 5.0, &SimOptions::default(), |_| {})
                .map_err(|e| e.to_string())?;
            let m0 = grid.integral(&u0);
            worst = worst.max((state.mass - m0).abs() / m0);
        }
    }
    Ok(worst)
}

fn reflection_gap() -> std::result::Result<f64, String> {
    let (pr, r) = setup(2.0, 2.0, "C", 0.3);
    let grid = Grid::line(15.0, 0.1).unwrap();
    let u0: Vec<f64> = grid.x.iter().map(|x| (1.0 - ((x - 2.0) / 5.0).powi(2)).max(0.0)).collect();
    let mirrored: Vec<f64> = u0.iter().rev().copied().collect();
    let run = |u: Vec<f64>| simulate(&pr, Some(&r), &grid, u, 10.0, &SimOptions::default(), |_| {});
    let (a, _) = run(u0).map_err(|e| e.to_string())?;
    let (b, _) = run(mirrored).map_err(|e| e.to_string())?;
    Ok(a.u.iter().zip(b.u.iter().rev()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max))
}

fn change_sign_window() -> std::result::Result<(), String> {
    let (pr, r) = setup(2.0, 2.0, "C", 0.3);
    let cs = find_cstar(&pr, &r, 1e-6, None).map_err(|e| e.to_string())?.c_star;
    let slow = 0.5 * cs;
    let delta = min_delta(&pr, &r, slow, 1e-6).map_err(|e| e.to_string())? + 0.05;
    change_sign_tw(&pr, &r, slow, delta).map_err(|e| format!("no wave at 0.5 c*: {e}"))?;
    for i in 1..14 {
        let d = 0.05 * i as f64;
        if change_sign_tw(&pr, &r, 1.1 * cs, d).is_ok() {
            return Err(format!("wave found at 1.1 c* with delta {d}"));
        }
    }
    Ok(())
}

fn property_suites() -> Check {
    let t = Instant::now();
    let comparison = comparison_pairs()?;
    let mass = mass_drift()?;
    let mirror = reflection_gap()?;
    change_sign_window()?;
    timed(secs(120), t, "property suites")?;
    ensure(
        comparison <= 1e-10 && mass <= 1e-12 && mirror <= 1e-12,
        format!("order violation {comparison:.1e}, mass drift {mass:.1e}, mirror gap {mirror:.1e}, window ok"),
    )
}

fn continuity_sweep() -> Check {
    let t = Instant::now();
    let r = cubic_reaction(ReactionKind::TypeCPrime, 0.3).unwrap();
    let ms: Vec<f64> = (0..10).map(|i| 1.0 + 0.3 * i as f64 / 9.0).collect();
    let speeds = std::thread::scope(|s| {
        let handles: Vec<_> = ms
            .iter()
            .map(|&m| {
                let r = &r;
                s.spawn(move || {
                    let pr = make_params(m, 1.0 + 1.2 / m)?;
                    Ok::<f64, Error>(find_cstar(&pr, r, 1e-6, None)?.c_star)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect::<Result<Vec<_>>>()
    })
    .map_err(|e| e.to_string())?;
    timed(secs(60), t, "sweep")?;
    let jump = speeds.windows(2).map(|w| (w[1] - w[0]).abs() / w[0].abs().max(w[1].abs())).fold(0.0, f64::max);
    ensure(jump < 0.05, format!("c* from {:.5} to {:.5}, max adjacent jump {:.2}%", speeds[0], speeds[9], 100.0 * jump))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let mut results: Vec<(u32, &str, Check)> = vec![
        (1, "explicit monostable speed", explicit_monostable_speed()),
        (2, "classical bistable speed", classical_bistable_speed()),
        (3, "zero-speed trajectory", zero_speed_trajectory()),
        (4, "monotonicity in c", monotone_in_speed()),
        (5, "Darcy exponent", darcy_law()),
        (6, "pseudo-linear tail", pseudo_linear_tail()),
    ];
    let (spread, threshold) = spreading_and_threshold();
    results.push((7, "spreading speed", spread));
    results.push((8, "threshold effect", threshold));
    results.push((9, "saturation", saturation()));
    results.push((10, "self-similar solution", self_similar_check()));
    results.push((11, "property suites", property_suites()));
    results.push((12, "continuity sweep", continuity_sweep()));

    let mut failed = 0;
    for (n, name, res) in &results {
        match res {
            Ok(msg) => println!("criterion {n:2} PASS {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n:2} FAIL {name}: {msg}");
            }
        }
    }
    println!("{} of {} criteria passed in {:.1?}", results.len() - failed, results.len(), start.elapsed());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
