use anyhow::Result;
use rayon::prelude::*;
use serde::Serialize;

use dnlw::pde::{
    barenblatt_error, barenblatt_k, barenblatt_k_oracle, barenblatt_k_unnormalised, bump_datum,
    make_not_reacting_datum, make_reacting_datum, measure_edge_speed, measure_speed, saturation_experiment, simulate,
    threshold_experiment, Grid, SimOptions,
};
use dnlw::phase_plane::{integrate_tc, null_isocline, ShootOptions};
use dnlw::wave::{
    change_sign_tw, find_cstar, increasing_a_to_1_tw, min_delta, reconstruct_profile, zero_to_a_tw, WaveProfile,
};
use dnlw::{make_params, Params, Reaction, ReactionKind};

use crate::config::{Command, Datum, GridArgs, Kind, Model, RunConfig, WaveKind};
use crate::output::{num, OutDir};
use crate::ConfigError;

pub fn run(cfg: &RunConfig) -> Result<()> {
    // validate before touching the file system
    if let Some(model) = model_of(&cfg.command) {
        model.params()?;
        model.reaction()?;
    }
    let out = OutDir::create(cfg)?;
    match &cfg.command {
        Command::Cstar { model, tol } => cstar(&out, model, *tol),
        Command::Trajectory { model, c, x_min, eps } => trajectory(&out, model, *c, *x_min, *eps),
        Command::Isocline { model, c, n } => isocline(&out, model, *c, *n),
        Command::Profile { model, wave, c, delta, eps, anchor, resample, tol } => {
            profile(&out, model, *wave, *c, *delta, *eps, *anchor, *resample, *tol)
        }
        Command::Simulate { model, grid, datum, width, c_frac, radius, level, sample_dt } => {
            simulate_cmd(&out, model, grid, *datum, *width, *c_frac, *radius, *level, *sample_dt)
        }
        Command::Threshold { model, grid, inner } => threshold(&out, model, grid, *inner),
        Command::Saturate { model, grid, eps, width } => saturate(&out, model, grid, *eps, *width),
        Command::Barenblatt { m, p, dim, dx, levels, length, c, t0, t1 } => {
            barenblatt_cmd(&out, *m, *p, *dim, *dx, *levels, *length, *c, *t0, *t1)
        }
        Command::Sweep { points, line, m_min, m_max, n, kind, a, tol, jump, jobs } => {
            let cells = sweep_cells(points.as_deref(), *line, *m_min, *m_max, *n)?;
            sweep(&out, &cells, *kind, *a, *tol, *jump, *jobs)
        }
        Command::Replay { .. } => unreachable!("replay is resolved before running"),
    }
}

fn model_of(cmd: &Command) -> Option<&Model> {
    match cmd {
        Command::Cstar { model, .. }
        | Command::Trajectory { model, .. }
        | Command::Isocline { model, .. }
        | Command::Profile { model, .. }
        | Command::Simulate { model, .. }
        | Command::Threshold { model, .. }
        | Command::Saturate { model, .. } => Some(model),
        _ => None,
    }
}

fn need_kind(model: &Model, kind: Kind, what: &str) -> Result<()> {
    if model.kind != kind {
        return Err(ConfigError(format!("{what} needs --kind {:?}", kind)).into());
    }
    Ok(())
}

fn write_profile(out: &OutDir, profile: &WaveProfile, resample: Option<usize>) -> Result<()> {
    let exported = match resample {
        Some(n) => profile.resample(n)?,
        None => profile.clone(),
    };
    exported.write_csv(out.file("profile.csv")?)?;
    Ok(())
}

fn cstar(out: &OutDir, model: &Model, tol: f64) -> Result<()> {
    let (params, reaction) = (model.params()?, model.reaction()?);
    let res = find_cstar(&params, &reaction, tol, None)?;
    out.json("result.json", &res.summary(&params, &reaction))?;
    write_profile(out, &res.profile, None)?;
    println!("{}", res.c_star);
    Ok(())
}

#[derive(Serialize)]
struct TrajectoryReport {
    c: f64,
    fate: dnlw::phase_plane::Fate,
    samples: usize,
    last_x: f64,
    last_z: f64,
}

fn trajectory(out: &OutDir, model: &Model, c: f64, x_min: f64, eps: f64) -> Result<()> {
    let (params, reaction) = (model.params()?, model.reaction()?);
    let opts = ShootOptions { eps, ..ShootOptions::default() };
    let traj = integrate_tc(&params, &reaction, c, x_min, &opts)?;
    traj.write_csv(out.file("trajectory.csv")?)?;
    let last = traj.last();
    let report = TrajectoryReport { c, fate: traj.fate, samples: traj.samples.len(), last_x: last.x, last_z: last.z };
    out.json("result.json", &report)?;
    println!("{:?}", traj.fate);
    Ok(())
}

fn isocline(out: &OutDir, model: &Model, c: f64, n: usize) -> Result<()> {
    let (params, reaction) = (model.params()?, model.reaction()?);
    if n < 2 {
        return Err(ConfigError("--n must be at least 2".into()).into());
    }
    let mut xs: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    xs.push(reaction.a());
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let rows = xs.into_iter().map(|x| {
        let roots = null_isocline(&params, &reaction, c, x);
        let z = |k: usize| roots.get(k).copied().map_or(String::new(), num);
        vec![num(x), z(0), z(1)]
    });
    out.csv("isocline.csv", &["X", "Z_lower", "Z_upper"], rows)
}

#[derive(Serialize)]
struct ProfileReport<'a> {
    wave: WaveKind,
    c: f64,
    delta: Option<f64>,
    kind: dnlw::wave::ProfileKind,
    fb_points: &'a [f64],
    peak: Option<(f64, f64)>,
    max: f64,
    points: usize,
}

#[allow(clippy::too_many_arguments)]
fn profile(
    out: &OutDir,
    model: &Model,
    wave: WaveKind,
    c: Option<f64>,
    delta: Option<f64>,
    eps: f64,
    anchor: Option<f64>,
    resample: Option<usize>,
    tol: f64,
) -> Result<()> {
    let (params, reaction) = (model.params()?, model.reaction()?);
    let c_star = || -> Result<f64> { Ok(find_cstar(&params, &reaction, tol, None)?.c_star) };
    let mut used_delta = None;
    let (speed, prof) = match wave {
        WaveKind::Critical => {
            let res = find_cstar(&params, &reaction, tol, None)?;
            let prof = match anchor {
                None => res.profile,
                Some(v) => {
                    let opts = ShootOptions { eps: res.eps, ..ShootOptions::default() };
                    let traj = integrate_tc(&params, &reaction, res.c_star, 0.0, &opts)?;
                    reconstruct_profile(&params, &reaction, &traj, (0.0, v))?
                }
            };
            (res.c_star, prof)
        }
        WaveKind::Cs => {
            let speed = match c {
                Some(v) => v,
                None => 0.5 * c_star()?,
            };
            let d = match delta {
                Some(d) => d,
                None => min_delta(&params, &reaction, speed, 1e-6)? + 0.05,
            };
            used_delta = Some(d);
            (speed, change_sign_tw(&params, &reaction, speed, d)?)
        }
        WaveKind::ZeroToA | WaveKind::AToZero => {
            need_kind(model, Kind::C, "0-to-a waves")?;
            let cs = c_star()?;
            let speed = c.unwrap_or(cs);
            let w = zero_to_a_tw(&params, &reaction, speed, eps, Some(cs))?;
            (speed, if wave == WaveKind::AToZero { w.reflect() } else { w })
        }
        WaveKind::AToOne => {
            need_kind(model, Kind::Cprime, "increasing a-to-1 waves")?;
            let speed = match c {
                Some(v) => v,
                None => c_star()?,
            };
            (speed, increasing_a_to_1_tw(&params, &reaction, speed)?)
        }
    };
    write_profile(out, &prof, resample)?;
    let report = ProfileReport {
        wave,
        c: speed,
        delta: used_delta,
        kind: prof.kind,
        fb_points: &prof.fb_points,
        peak: prof.peak,
        max: prof.max(),
        points: prof.xi.len(),
    };
    out.json("profile.json", &report)?;
    println!("{}", prof.xi.len());
    Ok(())
}

fn grid_of(args: &GridArgs) -> Result<Grid> {
    Ok(match args.dim {
        Some(n) => Grid::radial(n, args.length, args.dx)?,
        None => Grid::symmetric(args.length, args.dx)?,
    })
}

#[derive(Serialize)]
struct SimReport {
    t_end: f64,
    max_u: f64,
    mass: f64,
    level: f64,
    front_speed: Option<f64>,
    edge_speed: Option<f64>,
    final_front: f64,
    final_edge: f64,
}

#[allow(clippy::too_many_arguments)]
fn simulate_cmd(
    out: &OutDir,
    model: &Model,
    args: &GridArgs,
    datum: Datum,
    width: f64,
    c_frac: f64,
    radius: f64,
    level: f64,
    sample_dt: f64,
) -> Result<()> {
    let (params, reaction) = (model.params()?, model.reaction()?);
    let grid = grid_of(args)?;
    let u0 = match datum {
        Datum::Bump => bump_datum(&grid, width),
        Datum::NotReacting => make_not_reacting_datum(&params, &reaction, &grid)?,
        Datum::Reacting => {
            let c = c_frac * find_cstar(&params, &reaction, 1e-6, None)?.c_star;
            make_reacting_datum(&params, &reaction, &grid, c, radius)?
        }
    };
    let opts = SimOptions { level, sample_dt };
    let (state, trace) = simulate(&params, Some(&reaction), &grid, u0, args.t_end, &opts, |_| {})?;
    state.write_csv(&grid, out.file("final.csv")?)?;
    trace.write_csv(out.file("trace.csv")?)?;
    let report = SimReport {
        t_end: state.t,
        max_u: state.max(),
        mass: state.mass,
        level,
        front_speed: measure_speed(&trace, 0.5).ok(),
        edge_speed: measure_edge_speed(&trace, 0.5).ok(),
        final_front: *trace.positions.last().unwrap_or(&f64::NAN),
        final_edge: *trace.support_edge.last().unwrap_or(&f64::NAN),
    };
    out.json("report.json", &report)?;
    println!("{}", state.max());
    Ok(())
}

fn threshold(out: &OutDir, model: &Model, args: &GridArgs, inner: f64) -> Result<()> {
    need_kind(model, Kind::C, "threshold runs")?;
    let (params, reaction) = (model.params()?, model.reaction()?);
    let grid = grid_of(args)?;
    let (report, dead, alive) = threshold_experiment(&params, &reaction, &grid, args.t_end, inner)?;
    dead.0.write_csv(&grid, out.file("not_reacting_final.csv")?)?;
    dead.1.write_csv(out.file("not_reacting_trace.csv")?)?;
    alive.0.write_csv(&grid, out.file("reacting_final.csv")?)?;
    alive.1.write_csv(out.file("reacting_trace.csv")?)?;
    out.json("report.json", &report)?;
    println!("extinct={} inner_min={}", report.extinct, report.inner_min);
    Ok(())
}

fn saturate(out: &OutDir, model: &Model, args: &GridArgs, eps: f64, width: f64) -> Result<()> {
    need_kind(model, Kind::Cprime, "saturation runs")?;
    let (params, reaction) = (model.params()?, model.reaction()?);
    let grid = grid_of(args)?;
    let u0 = bump_datum(&grid, width);
    let (report, state, trace) = saturation_experiment(&params, &reaction, &grid, u0, eps, args.t_end)?;
    state.write_csv(&grid, out.file("final.csv")?)?;
    trace.write_csv(out.file("trace.csv")?)?;
    out.json("report.json", &report)?;
    println!("{}", report.max_u_final);
    Ok(())
}

#[derive(Serialize)]
struct BarenblattReport {
    k: f64,
    k_oracle: f64,
    k_unnormalised: f64,
    dx: Vec<f64>,
    l1_error: Vec<f64>,
    /// Error ratio between consecutive levels.
    ratios: Vec<f64>,
}

#[allow(clippy::too_many_arguments)]
fn barenblatt_cmd(
    out: &OutDir,
    m: f64,
    p: f64,
    dim: u32,
    dx: f64,
    levels: usize,
    length: f64,
    c: f64,
    t0: f64,
    t1: f64,
) -> Result<()> {
    let params = make_params(m, p)?;
    if levels == 0 || !(t1 > t0 && t0 > 0.0) {
        return Err(ConfigError("need at least one level and 0 < t0 < t1".into()).into());
    }
    let spacings: Vec<f64> = (0..levels).map(|i| dx / 2f64.powi(i as i32)).collect();
    let errors =
        spacings.iter().map(|&h| barenblatt_error(&params, c, t0, t1, length, h)).collect::<dnlw::Result<Vec<_>>>()?;
    let ratios = errors.windows(2).map(|w| w[0] / w[1]).collect();
    out.csv("table.csv", &["dx", "l1_error"], spacings.iter().zip(&errors).map(|(h, e)| vec![num(*h), num(*e)]))?;
    let report = BarenblattReport {
        k: barenblatt_k(&params, dim),
        k_oracle: barenblatt_k_oracle(&params, dim)?,
        k_unnormalised: barenblatt_k_unnormalised(&params, dim),
        dx: spacings,
        l1_error: errors,
        ratios,
    };
    out.json("report.json", &report)?;
    println!("{}", report.l1_error.last().copied().unwrap_or(f64::NAN));
    Ok(())
}

fn sweep_cells(points: Option<&str>, line: Option<f64>, m_min: f64, m_max: f64, n: usize) -> Result<Vec<(f64, f64)>> {
    match (points, line) {
        (Some(text), None) => text
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|cell| {
                let parts: Vec<&str> = cell.split(',').map(str::trim).collect();
                match parts.as_slice() {
                    [m, p] => Ok((m.parse()?, p.parse()?)),
                    _ => Err(ConfigError(format!("cell {cell:?} is not \"m,p\"")).into()),
                }
            })
            .collect(),
        (None, Some(k)) => {
            if n < 2 || !(m_max > m_min && m_min > 0.0) {
                return Err(ConfigError("line sweep needs n ≥ 2 and 0 < m-min < m-max".into()).into());
            }
            Ok((0..n)
                .map(|i| {
                    let m = m_min + (m_max - m_min) * i as f64 / (n - 1) as f64;
                    (m, 1.0 + k / m)
                })
                .collect())
        }
        _ => Err(ConfigError("give exactly one of --points and --line".into()).into()),
    }
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    m: f64,
    p: f64,
    gamma: f64,
    c_star: Option<f64>,
    error: Option<String>,
    /// Relative jump from the previous successful row.
    jump: Option<f64>,
    flagged: bool,
}

#[derive(Serialize)]
struct SweepReport {
    cells: usize,
    failed: usize,
    max_jump: Option<f64>,
    flagged: usize,
}

fn sweep(out: &OutDir, cells: &[(f64, f64)], kind: Kind, a: f64, tol: f64, jump: f64, jobs: usize) -> Result<()> {
    let reaction = dnlw::cubic_reaction(ReactionKind::from(kind), a)?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    let results: Vec<(f64, dnlw::Result<f64>)> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(m, p)| {
                let gamma = m * (p - 1.0) - 1.0;
                (gamma, cell_speed(m, p, &reaction, tol))
            })
            .collect()
    });
    let mut rows = Vec::with_capacity(cells.len());
    let mut prev: Option<f64> = None;
    for (&(m, p), (gamma, res)) in cells.iter().zip(results) {
        let (c_star, error) = match res {
            Ok(c) => (Some(c), None),
            Err(e) => (None, Some(e.to_string())),
        };
        let rel = match (prev, c_star) {
            (Some(a), Some(b)) => Some((b - a).abs() / a.abs().max(b.abs())),
            _ => None,
        };
        if c_star.is_some() {
            prev = c_star;
        }
        rows.push(SweepRow { m, p, gamma, c_star, error, jump: rel, flagged: rel.is_some_and(|r| r > jump) });
    }
    out.csv(
        "sweep.csv",
        &["m", "p", "gamma", "c_star", "error", "jump", "flagged"],
        rows.iter().map(|r| {
            vec![
                num(r.m),
                num(r.p),
                num(r.gamma),
                r.c_star.map_or(String::new(), num),
                r.error.clone().unwrap_or_default(),
                r.jump.map_or(String::new(), num),
                r.flagged.to_string(),
            ]
        }),
    )?;
    let report = SweepReport {
        cells: rows.len(),
        failed: rows.iter().filter(|r| r.error.is_some()).count(),
        max_jump: rows.iter().filter_map(|r| r.jump).reduce(f64::max),
        flagged: rows.iter().filter(|r| r.flagged).count(),
    };
    out.json("report.json", &report)?;
    for r in &rows {
        match (&r.c_star, &r.error) {
            (Some(c), _) => println!("{} {} {}", r.m, r.p, c),
            (_, Some(e)) => println!("{} {} error: {e}", r.m, r.p),
            _ => {}
        }
    }
    Ok(())
}

fn cell_speed(m: f64, p: f64, reaction: &Reaction, tol: f64) -> dnlw::Result<f64> {
    let params: Params = make_params(m, p)?;
    Ok(find_cstar(&params, reaction, tol, None)?.c_star)
}
