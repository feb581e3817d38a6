use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use condtrack::cmetric::{
    condition_length, growth_bound_audit, growth_constant, product_length, retrack, shorten, thinned,
    to_discrete_path, DiscretePath, ShortenOptions,
};
use condtrack::io::{PathJson, PointJson, SystemJson, TrackResultJson};
use condtrack::newton::refine;
use condtrack::tracker::{mu_growth_audit, per_step_growth_ok, step_bound};
use condtrack::{
    certify_approximate_zero, kostlan_sample, mu_norm, newton_step, proj_distance, start_pair, track, HomSystem,
    Homotopy, HomotopyKind, ProjPoint, TrackFailure, TrackResult, TrackerConfig,
};
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::Value;

use crate::output::{read_json, write_json, write_series, Report};
use crate::{Cli, Command, Format, Status, TrackArgs};

pub fn run(cli: &Cli) -> Result<Status> {
    let cfg = cli.config.tracker_config();
    cfg.validate()?;
    let stamp = !cli.no_timestamp;
    match &cli.command {
        Command::Gen {
            n,
            degrees,
            start_pair,
            output,
            point_output,
        } => gen(cli, *n as usize, degrees, *start_pair, output, point_output.as_deref(), stamp),
        Command::Mu { system, point } => mu(cli, system, point),
        Command::Newton {
            system,
            point,
            steps,
            zero,
            output,
        } => newton(cli, system, point, *steps, zero.as_deref(), output.as_deref(), stamp),
        Command::Track(args) => track_cmd(cli, args, &cfg, stamp),
        Command::Length { input } => length(cli, input, &cfg),
        Command::Shorten {
            input,
            rounds,
            proposals,
            output,
            csv,
            retrack,
        } => shorten_cmd(cli, input, *rounds, *proposals, output, csv.as_deref(), *retrack, &cfg, stamp),
        Command::Audit { input } => audit(cli, input, &cfg),
    }
}

fn emit(report: &Report, format: Format) {
    println!("{}", report.render(format));
}

fn read_system(path: &Path) -> Result<HomSystem> {
    let s: SystemJson = read_json(path)?;
    HomSystem::try_from(&s).with_context(|| format!("invalid system in {}", path.display()))
}

fn read_point(path: &Path) -> Result<ProjPoint> {
    let p: PointJson = read_json(path)?;
    ProjPoint::try_from(&p).with_context(|| format!("invalid point in {}", path.display()))
}

fn relative_residual(f: &HomSystem, x: &ProjPoint) -> Result<f64> {
    let r = f.evaluate(x.as_slice())?.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    Ok(r / f.bw_norm())
}

fn gen(
    cli: &Cli,
    n: usize,
    degrees: &[u32],
    use_start_pair: bool,
    output: &Path,
    point_output: Option<&Path>,
    stamp: bool,
) -> Result<Status> {
    ensure!(degrees.len() == n, "--degrees lists {} degrees for n = {n}", degrees.len());
    let mut report = Report::new();
    report.set("n", n).set("degrees", degrees.to_vec());
    let f = if use_start_pair {
        let (f, z) = start_pair(n, degrees)?;
        report.float("mu_at_zero", mu_norm(&f, &z)?.value);
        if let Some(p) = point_output {
            write_json(p, &PointJson::from(&z), stamp)?;
        }
        f
    } else {
        ensure!(point_output.is_none(), "--point-output needs --start-pair");
        let seed = cli.seed.context("gen needs --seed or COND_TRACKER_SEED")?;
        report.set("seed", seed);
        kostlan_sample(n, degrees, seed)?
    };
    report.float("bw_norm", f.bw_norm());
    write_json(output, &SystemJson::from(&f), stamp)?;
    emit(&report, cli.format);
    Ok(Status::Success)
}

fn mu(cli: &Cli, system: &Path, point: &Path) -> Result<Status> {
    let f = read_system(system)?;
    let x = read_point(point)?;
    ensure!(x.dim() == f.n_vars(), "point has {} coordinates, system has {} variables", x.dim(), f.n_vars());
    let m = mu_norm(&f, &x)?;
    let mut report = Report::new();
    report
        .float("mu", m.value)
        .float("sigma_min", m.sigma_min)
        .set("finite", m.is_finite())
        .float("relative_residual", relative_residual(&f, &x)?);
    emit(&report, cli.format);
    Ok(if m.is_finite() {
        Status::Success
    } else {
        Status::NumericalFailure
    })
}

fn newton(
    cli: &Cli,
    system: &Path,
    point: &Path,
    steps: usize,
    zero: Option<&Path>,
    output: Option<&Path>,
    stamp: bool,
) -> Result<Status> {
    let f = read_system(system)?;
    let x0 = read_point(point)?;
    ensure!(x0.dim() == f.n_vars(), "point has {} coordinates, system has {} variables", x0.dim(), f.n_vars());
    let mut report = Report::new();
    if let Some(z) = zero {
        let z = read_point(z)?;
        report.set("certified", certify_approximate_zero(&f, &x0, &z)?);
    }
    let mut x = x0.clone();
    let mut taken = 0;
    let mut solvable = true;
    for _ in 0..steps {
        let out = newton_step(&f, &x)?;
        if !out.solvable {
            solvable = false;
            break;
        }
        x = out.next;
        taken += 1;
    }
    report
        .set("steps", taken)
        .set("solvable", solvable)
        .float("residual_before", relative_residual(&f, &x0)?)
        .float("residual_after", relative_residual(&f, &x)?)
        .float("moved", proj_distance(&x0, &x)?)
        .float("mu", mu_norm(&f, &x)?.value);
    if let Some(out) = output {
        write_json(out, &PointJson::from(&x), stamp)?;
    }
    emit(&report, cli.format);
    Ok(if solvable {
        Status::Success
    } else {
        Status::NumericalFailure
    })
}

fn failure_status(res: &TrackResult) -> Status {
    match &res.failure {
        None => Status::Success,
        Some(TrackFailure::StepBudget { .. }) => Status::ResourceLimit,
        Some(TrackFailure::InvalidStart { .. }) => Status::InputError,
        Some(_) => Status::NumericalFailure,
    }
}

/// One homotopy, fully loaded.
struct Job {
    start: Option<(HomSystem, ProjPoint)>,
    waypoints: Vec<HomSystem>,
    target: HomSystem,
    kind: HomotopyKind,
}

#[derive(Debug, Deserialize)]
struct BatchJob {
    target: SystemJson,
    start: Option<SystemJson>,
    point: Option<PointJson>,
    #[serde(default)]
    waypoints: Vec<SystemJson>,
    #[serde(default)]
    kind: HomotopyKind,
}

impl TryFrom<&BatchJob> for Job {
    type Error = anyhow::Error;

    fn try_from(b: &BatchJob) -> Result<Self> {
        let start = match (&b.start, &b.point) {
            (Some(s), Some(p)) => Some((HomSystem::try_from(s)?, ProjPoint::try_from(p)?)),
            (None, None) => None,
            _ => bail!("a job gives both `start` and `point`, or neither"),
        };
        Ok(Job {
            start,
            waypoints: b.waypoints.iter().map(HomSystem::try_from).collect::<condtrack::Result<_>>()?,
            target: HomSystem::try_from(&b.target)?,
            kind: b.kind,
        })
    }
}

impl Job {
    fn homotopy(&self) -> Result<(Homotopy, ProjPoint)> {
        let (f, z) = match &self.start {
            Some((f, z)) => (f.clone(), z.clone()),
            None => start_pair(self.target.n(), self.target.degrees())?,
        };
        ensure!(z.dim() == f.n_vars(), "start point has {} coordinates, start system has {} variables", z.dim(), f.n_vars());
        let h = if self.waypoints.is_empty() {
            Homotopy::new(&f, &self.target, self.kind)?
        } else {
            ensure!(self.kind == HomotopyKind::GreatCircle, "waypoints need the great-circle kind");
            let mut systems = vec![f];
            systems.extend(self.waypoints.iter().cloned());
            systems.push(self.target.clone());
            Homotopy::polyline(&systems)?
        };
        Ok((h, z))
    }

    fn run(&self, cfg: &TrackerConfig) -> Result<(TrackResult, Homotopy)> {
        let (h, z) = self.homotopy()?;
        Ok((track(&h, &z, cfg)?, h))
    }
}

fn track_report(res: &TrackResult, h: &Homotopy, cfg: &TrackerConfig) -> Result<Report> {
    let bound = step_bound(res.condition_integral, cfg, res.max_degree);
    let mut report = Report::new();
    report
        .set("success", res.success())
        .set("k", res.newton_steps)
        .float("condition_integral", res.condition_integral)
        .set("step_bound", bound)
        .float("ratio", res.newton_steps as f64 / bound.max(1) as f64)
        .set("rejected_steps", res.rejected_steps);
    if res.success() {
        let end = refine(h.target(), res.final_point(), 5)?.point;
        report.float("refined_residual", relative_residual(h.target(), &end)?);
    }
    if let Some(reason) = res.failure_reason() {
        report.set("failure_reason", reason);
    }
    Ok(report)
}

fn track_cmd(cli: &Cli, args: &TrackArgs, cfg: &TrackerConfig, stamp: bool) -> Result<Status> {
    if let Some(batch) = &args.batch {
        return track_batch(cli, args, batch, cfg, stamp);
    }
    let target = read_system(args.target.as_deref().context("track needs --target or --batch")?)?;
    let start = match (&args.start, &args.point, args.start_pair) {
        (Some(s), Some(p), false) => Some((read_system(s)?, read_point(p)?)),
        (None, None, true) => None,
        _ => bail!("track needs --start with --point, or --start-pair"),
    };
    let job = Job {
        start,
        waypoints: args.waypoint.iter().map(|p| read_system(p)).collect::<Result<_>>()?,
        target,
        kind: args.kind.into(),
    };
    let (res, h) = job.run(cfg)?;
    if let Some(out) = &args.output {
        write_json(out, &TrackResultJson::new(&res, Some(&h), cfg), stamp)?;
    }
    let report = track_report(&res, &h, cfg)?;
    emit(&report, cli.format);
    if let Some(reason) = res.failure_reason() {
        eprintln!("track failed: {reason}");
    }
    Ok(failure_status(&res))
}

fn track_batch(cli: &Cli, args: &TrackArgs, batch: &Path, cfg: &TrackerConfig, stamp: bool) -> Result<Status> {
    let dir = args.output_dir.as_deref().context("--batch needs --output-dir")?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let specs: Vec<BatchJob> = read_json(batch)?;
    let jobs = specs
        .iter()
        .enumerate()
        .map(|(i, b)| Job::try_from(b).with_context(|| format!("job {i}")))
        .collect::<Result<Vec<_>>>()?;
    let pool = rayon::ThreadPoolBuilder::new().num_threads(args.jobs.max(1)).build()?;
    let outcomes: Vec<Result<(Report, Status)>> = pool.install(|| {
        jobs.par_iter()
            .enumerate()
            .map(|(i, job)| {
                let (res, h) = job.run(cfg).with_context(|| format!("job {i}"))?;
                let path: PathBuf = dir.join(format!("job-{i:04}.json"));
                write_json(&path, &TrackResultJson::new(&res, Some(&h), cfg), stamp)?;
                let mut report = Report::new();
                report.set("job", i);
                report.extend(track_report(&res, &h, cfg)?);
                Ok((report, failure_status(&res)))
            })
            .collect()
    });
    let mut reports = Vec::with_capacity(outcomes.len());
    let mut status = Status::Success;
    for outcome in outcomes {
        let (report, s) = outcome?;
        status = status.max(s);
        reports.push(report);
    }
    println!("{}", Report::render_table(&reports, cli.format));
    Ok(status)
}

/// A discrete path from a path file, or from a successful track file that
/// records its homotopy.
fn load_path(input: &Path, cfg: &TrackerConfig) -> Result<(DiscretePath, Option<TrackResult>)> {
    let v: Value = read_json(input)?;
    if v.get("nodes").is_some() {
        let p: PathJson = serde_json::from_value(v).with_context(|| format!("parsing {}", input.display()))?;
        let path = p.to_path()?;
        ensure!(!path.is_empty(), "{} holds an empty path", input.display());
        return Ok((path, None));
    }
    let t: TrackResultJson = serde_json::from_value(v).with_context(|| format!("parsing {}", input.display()))?;
    let (res, h) = t.to_result()?;
    let h = h.context("track file does not record its homotopy")?;
    let path = to_discrete_path(&res, &h, cfg)?;
    Ok((path, Some(res)))
}

fn length(cli: &Cli, input: &Path, cfg: &TrackerConfig) -> Result<Status> {
    let (p, _) = load_path(input, cfg)?;
    let mut report = Report::new();
    report
        .set("nodes", p.len())
        .float("condition_length", condition_length(&p)?)
        .float("product_length", product_length(&p)?);
    emit(&report, cli.format);
    Ok(Status::Success)
}

#[allow(clippy::too_many_arguments)]
fn shorten_cmd(
    cli: &Cli,
    input: &Path,
    rounds: usize,
    proposals: usize,
    output: &Path,
    csv: Option<&Path>,
    do_retrack: bool,
    cfg: &TrackerConfig,
    stamp: bool,
) -> Result<Status> {
    let seed = cli.seed.context("shorten needs --seed or COND_TRACKER_SEED")?;
    let (p, tracked) = load_path(input, cfg)?;
    let p = if tracked.is_some() { thinned(&p, cfg)? } else { p };
    let opts = ShortenOptions {
        seed,
        proposals,
        ..ShortenOptions::default()
    };
    let out = shorten(&p, rounds, cfg, &opts)?;
    write_json(output, &PathJson::new(&out.path)?, stamp)?;
    if let Some(csv) = csv {
        write_series(csv, &out.lengths)?;
    }
    let initial = out.lengths[0];
    let last = *out.lengths.last().expect("lengths hold the initial value");
    let mut report = Report::new();
    report
        .set("rounds", rounds)
        .set("seed", seed)
        .set("nodes_before", p.len())
        .set("nodes_after", out.path.len())
        .float("initial_length", initial)
        .float("final_length", last)
        .float("relative_change", if initial > 0.0 { (last - initial) / initial } else { 0.0 })
        .set("proposed", out.proposed)
        .set("accepted", out.accepted);
    let mut status = Status::Success;
    if let Some(res) = &tracked {
        report.set("k_before", res.newton_steps);
    }
    if do_retrack && out.path.len() >= 2 {
        let res = retrack(&out.path, cfg)?;
        report.set("k_after", res.newton_steps).set("retrack_success", res.success());
        status = failure_status(&res);
    }
    emit(&report, cli.format);
    Ok(status)
}

fn audit(cli: &Cli, input: &Path, cfg: &TrackerConfig) -> Result<Status> {
    let v: Value = read_json(input)?;
    let mut report = Report::new();
    let mut all = true;
    let path = if v.get("nodes").is_some() {
        let (p, _) = load_path(input, cfg)?;
        p.validate(cfg)?;
        Some(p)
    } else {
        let t: TrackResultJson = serde_json::from_value(v).with_context(|| format!("parsing {}", input.display()))?;
        let (res, h) = t.to_result()?;
        let per_step = per_step_growth_ok(&res, cfg);
        let endpoint = mu_growth_audit(&res, cfg);
        report
            .set("track_success", res.success())
            .set("per_step_growth", per_step)
            .set("mu_growth_audit", endpoint);
        all &= res.success() && per_step && endpoint;
        match (res.success(), h) {
            (true, Some(h)) => Some(to_discrete_path(&res, &h, cfg)?),
            (true, None) => bail!("track file does not record its homotopy"),
            (false, _) => None,
        }
    };
    match path {
        Some(p) => {
            let g = growth_bound_audit(&p, growth_constant(cfg))?;
            report
                .set("growth_bound_audit", g.passes)
                .float("log_mu_ratio", g.log_ratio)
                .float("condition_length", g.length)
                .float("growth_bound", g.bound)
                .float("margin", g.margin);
            all &= g.passes;
        }
        None => {
            report.set("growth_bound_audit", Value::Null);
        }
    }
    report.set("all_pass", all);
    emit(&report, cli.format);
    Ok(if all { Status::Success } else { Status::NumericalFailure })
}
