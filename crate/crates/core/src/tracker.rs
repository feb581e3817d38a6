//! Path tracking on the solution variety with a condition-based step
//! controller.
//!
//! Starting from an approximate zero `x_0` of `f_0`, the tracker picks
//! subdivision points `S_0 = 0 < S_1 < ... < S_k = 1` so that the accumulated
//! `int (||f'_t|| + ||zeta'_t||) dt` over `[S_{i-1}, S_i]` equals
//! `C / (D^{3/2} mu_{i-1})`, then applies exactly one projective Newton step
//! `x_i = N_{f_{S_i}}(x_{i-1})`. The unobservable `||zeta'_t||` is replaced by
//! its majorant `mu ||f'_t||`, and `mu` is taken at the last accepted iterate.
//! There is no predictor.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::condition::{mu_norm, DEFAULT_C, DEFAULT_EPS};
use crate::error::{Error, Result};
use crate::newton::{contraction_factor, contraction_limit, newton_step};
use crate::polysys::HomSystem;
use crate::projective::{proj_distance, system_tangent_norm, ProjPoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HomotopyKind {
    /// Bombieri-Weyl great circle between the two projective classes.
    #[default]
    GreatCircle,
    /// Straight segment between the unit representatives, renormalized.
    BwSegment,
}

/// A path `t -> f_t`, `t in [0, 1]`, in the space of systems.
///
/// A great-circle homotopy may pass through several waypoints; it is then
/// parametrized proportionally to arc length, so its speed is constant.
#[derive(Debug, Clone)]
pub struct Homotopy {
    kind: HomotopyKind,
    waypoints: Vec<HomSystem>,
    legs: Vec<Leg>,
    // `legs.len() + 1` parameters from 0 to 1.
    breaks: Vec<f64>,
}

// Both ends on one shared support. Great circle: `a` = unit start, `b` = unit
// direction orthogonal to it. Segment: unit start and unit target.
#[derive(Debug, Clone)]
struct Leg {
    a: HomSystem,
    b: HomSystem,
    angle: f64,
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn great_leg(start: &HomSystem, target: &HomSystem) -> Result<Leg> {
    let (s, g) = start.align(target)?;
    let a = s.normalized()?;
    let g = g.normalized()?;
    let c = g.bw_inner(&a)?;
    let phase = if c.norm() > 0.0 { c.conj() / c.norm() } else { re(1.0) };
    let residual = g.combine(phase, &a, re(-c.norm()))?;
    let sin = residual.bw_norm();
    if sin == 0.0 {
        return Ok(Leg { a, b: residual, angle: 0.0 });
    }
    Ok(Leg {
        a,
        b: residual.scaled(re(1.0 / sin)),
        angle: sin.atan2(c.norm()),
    })
}

impl Homotopy {
    pub fn new(start: &HomSystem, target: &HomSystem, kind: HomotopyKind) -> Result<Self> {
        match kind {
            HomotopyKind::GreatCircle => Self::polyline(&[start.clone(), target.clone()]),
            HomotopyKind::BwSegment => {
                let (s, g) = start.align(target)?;
                Ok(Homotopy {
                    kind,
                    waypoints: vec![start.clone(), target.clone()],
                    legs: vec![Leg {
                        a: s.normalized()?,
                        b: g.normalized()?,
                        angle: 0.0,
                    }],
                    breaks: vec![0.0, 1.0],
                })
            }
        }
    }

    pub fn great_circle(start: &HomSystem, target: &HomSystem) -> Result<Self> {
        Self::new(start, target, HomotopyKind::GreatCircle)
    }

    /// Great-circle arcs through consecutive waypoints.
    pub fn polyline(waypoints: &[HomSystem]) -> Result<Self> {
        if waypoints.len() < 2 {
            return Err(Error::InvalidPath(format!(
                "a homotopy needs at least two systems, got {}",
                waypoints.len()
            )));
        }
        let all = waypoints
            .windows(2)
            .map(|w| great_leg(&w[0], &w[1]))
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = all.iter().map(|l| l.angle).sum();
        let (legs, breaks) = if total == 0.0 {
            (vec![all.into_iter().next().expect("at least one leg")], vec![0.0, 1.0])
        } else {
            let legs: Vec<Leg> = all.into_iter().filter(|l| l.angle > 0.0).collect();
            let mut breaks = Vec::with_capacity(legs.len() + 1);
            breaks.push(0.0);
            let mut acc = 0.0;
            for l in &legs {
                acc += l.angle;
                breaks.push(acc / total);
            }
            *breaks.last_mut().expect("nonempty") = 1.0;
            (legs, breaks)
        };
        Ok(Homotopy {
            kind: HomotopyKind::GreatCircle,
            waypoints: waypoints.to_vec(),
            legs,
            breaks,
        })
    }

    pub fn kind(&self) -> HomotopyKind {
        self.kind
    }

    /// The start system as given.
    pub fn start(&self) -> &HomSystem {
        &self.waypoints[0]
    }

    /// The target system as given.
    pub fn target(&self) -> &HomSystem {
        self.waypoints.last().expect("at least two waypoints")
    }

    pub fn waypoints(&self) -> &[HomSystem] {
        &self.waypoints
    }

    pub fn n_vars(&self) -> usize {
        self.waypoints[0].n_vars()
    }

    pub fn max_degree(&self) -> u32 {
        self.waypoints[0].max_degree()
    }

    /// Total arc length of a great-circle homotopy.
    pub fn angle(&self) -> f64 {
        self.legs.iter().map(|l| l.angle).sum()
    }

    fn locate(&self, t: f64) -> (&Leg, f64, f64) {
        let j = self.breaks[1..]
            .partition_point(|&b| b < t)
            .min(self.legs.len() - 1);
        let width = self.breaks[j + 1] - self.breaks[j];
        let tau = ((t - self.breaks[j]) / width).clamp(0.0, 1.0);
        (&self.legs[j], tau, width)
    }

    /// `(f_t, f'_t)`. `f_t` has unit norm except where a segment homotopy
    /// passes through the zero system.
    pub fn at(&self, t: f64) -> Result<(HomSystem, HomSystem)> {
        let (leg, tau, width) = self.locate(t);
        match self.kind {
            HomotopyKind::GreatCircle => {
                let (s, c) = (tau * leg.angle).sin_cos();
                let rate = leg.angle / width;
                let f = leg.a.combine(re(c), &leg.b, re(s))?;
                let fdot = leg.a.combine(re(-s * rate), &leg.b, re(c * rate))?;
                Ok((f, fdot))
            }
            HomotopyKind::BwSegment => {
                let h = leg.a.combine(re(1.0 - t), &leg.b, re(t))?;
                let hdot = leg.b.combine(re(1.0), &leg.a, re(-1.0))?;
                let nrm = h.bw_norm();
                if nrm == 0.0 {
                    return Ok((h, hdot));
                }
                let radial = hdot.bw_inner(&h)?.re / (nrm * nrm * nrm);
                let fdot = hdot.combine(re(1.0 / nrm), &h, re(-radial))?;
                Ok((h.scaled(re(1.0 / nrm)), fdot))
            }
        }
    }

    pub fn system_at(&self, t: f64) -> Result<HomSystem> {
        match self.kind {
            HomotopyKind::GreatCircle => {
                let (leg, tau, _) = self.locate(t);
                let (s, c) = (tau * leg.angle).sin_cos();
                leg.a.combine(re(c), &leg.b, re(s))
            }
            HomotopyKind::BwSegment => Ok(self.at(t)?.0),
        }
    }

    /// Projective speed `||f'_t||` of the path in `P(H_(d))`.
    pub fn speed(&self, t: f64) -> Result<f64> {
        if self.kind == HomotopyKind::GreatCircle {
            let (leg, _, width) = self.locate(t);
            return Ok(leg.angle / width);
        }
        let (f, fdot) = self.at(t)?;
        if f.bw_norm() == 0.0 {
            return Ok(f64::INFINITY);
        }
        system_tangent_norm(&f, &fdot)
    }
}

/// Controller constants and limits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackerConfig {
    /// Trust constant `C`.
    pub c: f64,
    /// Allowed per-step growth of `mu`, as `1 + eps`.
    pub eps: f64,
    /// Micro-step width, as a fraction of `[0, 1]`, for accumulating `||f'_t||`.
    pub quad_substep: f64,
    pub max_steps: usize,
    /// Relative residual `||f(x)|| / ||f||` accepted for start points and path nodes.
    pub residual_tol: f64,
    /// Tracking stops when `1 / mu` drops below this.
    pub sigma_floor: f64,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        TrackerConfig {
            c: DEFAULT_C,
            eps: DEFAULT_EPS,
            quad_substep: 1e-3,
            max_steps: 1_000_000,
            residual_tol: 1e-8,
            sigma_floor: 1e-6,
        }
    }
}

impl TrackerConfig {
    /// `u = 2 C (1 + eps)`.
    pub fn u(&self) -> f64 {
        2.0 * self.c * (1.0 + self.eps)
    }

    /// Checks ranges and the two gates that make one Newton step per
    /// subdivision point sufficient: `u < (3 - sqrt 7)/4` and
    /// `4u / psi(2u) < 1 / (2 (1 + eps))`.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !(self.c > 0.0) || !(self.eps > 0.0) {
            return bad(format!("need C > 0 and eps > 0 (C = {}, eps = {})", self.c, self.eps));
        }
        if !(self.quad_substep > 0.0 && self.quad_substep <= 1.0) {
            return bad(format!("quad_substep {} outside (0, 1]", self.quad_substep));
        }
        if self.max_steps == 0 {
            return bad("max_steps must be positive".into());
        }
        if !(self.residual_tol > 0.0) || !(self.sigma_floor > 0.0 && self.sigma_floor < 1.0) {
            return bad(format!(
                "need residual_tol > 0 and 0 < sigma_floor < 1 (got {}, {})",
                self.residual_tol, self.sigma_floor
            ));
        }
        let u = self.u();
        if u >= contraction_limit() {
            return bad(format!("u = 2C(1+eps) = {u} is not below (3 - sqrt 7)/4"));
        }
        let factor = contraction_factor(u)?;
        if factor >= 1.0 / (2.0 * (1.0 + self.eps)) {
            return bad(format!("4u/psi(2u) = {factor} is not below 1/(2(1+eps))"));
        }
        Ok(())
    }
}

/// Why a track stopped early.
#[derive(Debug, Clone, PartialEq)]
pub enum TrackFailure {
    /// `mu` infinite or above `1 / sigma_floor`, or no representable progress.
    IllConditioned { t: f64, mu: f64 },
    StepBudget { t: f64, steps: usize },
    /// Newton corrections kept exceeding the certified radius.
    LostPath { t: f64, correction: f64, gate: f64 },
    /// The start point is not an approximate zero of `f_0`.
    InvalidStart { residual: f64 },
    /// A failure read back from a serialized result.
    Recorded(String),
}

impl fmt::Display for TrackFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrackFailure::IllConditioned { t, mu } => write!(f, "ill-conditioned path at t = {t} (mu = {mu:e})"),
            TrackFailure::StepBudget { t, steps } => write!(f, "step budget of {steps} exhausted at t = {t}"),
            TrackFailure::LostPath { t, correction, gate } => write!(
                f,
                "lost the path at t = {t}: Newton correction {correction:e} exceeds {gate:e}"
            ),
            TrackFailure::InvalidStart { residual } => {
                write!(f, "start point is not a zero of the start system (relative residual {residual:e})")
            }
            TrackFailure::Recorded(reason) => f.write_str(reason),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackResult {
    /// `S_0 = 0 < S_1 < ... < S_k`; ends at 1 on success.
    pub subdivision: Vec<f64>,
    /// `x_0, ..., x_k`.
    pub iterates: Vec<ProjPoint>,
    /// `mu_norm(f_{S_i}, x_i)`.
    pub mu_profile: Vec<f64>,
    pub newton_steps: usize,
    /// Estimate of `int mu (||f'|| + ||zeta'||) dt` with `||zeta'|| <= mu ||f'||`.
    pub condition_integral: f64,
    /// Estimate of `int mu^2 ||f'|| dt`.
    pub corollary_integral: f64,
    /// Proposed steps that were halved because `mu` grew too fast or the
    /// Newton correction was too large.
    pub rejected_steps: usize,
    pub max_degree: u32,
    pub failure: Option<TrackFailure>,
}

impl TrackResult {
    pub fn success(&self) -> bool {
        self.failure.is_none()
    }

    pub fn final_point(&self) -> &ProjPoint {
        self.iterates.last().expect("iterates always hold x_0")
    }

    pub fn failure_reason(&self) -> Option<String> {
        self.failure.as_ref().map(ToString::to_string)
    }
}

/// Lazily evaluated speeds on the micro-step grid.
struct SpeedGrid<'a> {
    h: &'a Homotopy,
    cells: usize,
    width: f64,
    speeds: Vec<Option<f64>>,
}

impl<'a> SpeedGrid<'a> {
    fn new(h: &'a Homotopy, substep: f64) -> Self {
        let cells = (1.0 / substep).ceil().max(1.0) as usize;
        SpeedGrid {
            h,
            cells,
            width: 1.0 / cells as f64,
            speeds: vec![None; cells + 1],
        }
    }

    fn node(&self, j: usize) -> f64 {
        if j == self.cells {
            1.0
        } else {
            j as f64 * self.width
        }
    }

    fn speed(&mut self, j: usize) -> Result<f64> {
        if let Some(v) = self.speeds[j] {
            return Ok(v);
        }
        let v = self.h.speed(self.node(j))?;
        self.speeds[j] = Some(v);
        Ok(v)
    }

    /// First `s >= from` with `(1 + mu) int_from^s ||f'_t|| dt = amount`
    /// (trapezoid speeds, linear within a cell), or 1. Returns `s` and
    /// `int_from^s ||f'_t|| dt`.
    fn advance(&mut self, from: f64, amount: f64, mu: f64) -> Result<(f64, f64)> {
        let m = 1.0 + mu;
        let mut t = from;
        let mut remaining = amount;
        let mut travelled = 0.0;
        let mut j = ((t / self.width).floor() as usize).min(self.cells - 1);
        loop {
            let end = self.node(j + 1);
            if end > t {
                let v = 0.5 * (self.speed(j)? + self.speed(j + 1)?);
                let cap = m * v * (end - t);
                if v > 0.0 && cap >= remaining {
                    let s = (t + remaining / (m * v)).min(end);
                    travelled += v * (s - t);
                    return Ok((s, travelled));
                }
                remaining -= cap;
                travelled += v * (end - t);
                t = end;
            }
            if j + 1 == self.cells {
                return Ok((1.0, travelled));
            }
            j += 1;
        }
    }
}

const MAX_CONSECUTIVE_REJECTIONS: usize = 40;

/// Continues the approximate zero `x0` of `f_0` along `h` to an approximate
/// zero of `f_1`.
///
/// Numerical breakdowns are reported in [`TrackResult::failure`]; `Err` is
/// reserved for invalid configuration or mismatched dimensions.
pub fn track(h: &Homotopy, x0: &ProjPoint, cfg: &TrackerConfig) -> Result<TrackResult> {
    cfg.validate()?;
    if x0.dim() != h.n_vars() {
        return Err(Error::DimensionMismatch {
            expected: h.n_vars(),
            found: x0.dim(),
        });
    }
    let dmax = h.max_degree();
    let d32 = (dmax as f64).powf(1.5);
    let mut res = TrackResult {
        subdivision: vec![0.0],
        iterates: vec![x0.clone()],
        mu_profile: Vec::new(),
        newton_steps: 0,
        condition_integral: 0.0,
        corollary_integral: 0.0,
        rejected_steps: 0,
        max_degree: dmax,
        failure: None,
    };

    let f0 = h.system_at(0.0)?;
    let norm0 = f0.bw_norm();
    let residual = f0
        .evaluate(x0.as_slice())?
        .iter()
        .map(Complex64::norm_sqr)
        .sum::<f64>()
        .sqrt()
        / norm0.max(f64::MIN_POSITIVE);
    if !(residual <= cfg.residual_tol) {
        res.failure = Some(TrackFailure::InvalidStart { residual });
        return Ok(res);
    }
    let mu0 = mu_norm(&f0, x0)?.value;
    if !mu0.is_finite() || 1.0 / mu0 < cfg.sigma_floor {
        res.failure = Some(TrackFailure::IllConditioned { t: 0.0, mu: mu0 });
        return Ok(res);
    }
    res.mu_profile.push(mu0);

    let mut grid = SpeedGrid::new(h, cfg.quad_substep);
    let mut t = 0.0;
    let mut x = x0.clone();
    let mut mu = mu0;
    let lost_factor = 2.0 * cfg.u();

    while t < 1.0 {
        if res.newton_steps >= cfg.max_steps {
            res.failure = Some(TrackFailure::StepBudget {
                t,
                steps: res.newton_steps,
            });
            return Ok(res);
        }
        let mut amount = cfg.c / (d32 * mu);
        let mut rejections = 0;
        loop {
            let (s, travelled) = grid.advance(t, amount, mu)?;
            if !(s > t) {
                res.failure = Some(TrackFailure::IllConditioned { t, mu });
                return Ok(res);
            }
            let fs = h.system_at(s)?;
            let out = newton_step(&fs, &x)?;
            if !out.solvable {
                res.failure = Some(TrackFailure::IllConditioned { t: s, mu: f64::INFINITY });
                return Ok(res);
            }
            let correction = proj_distance(&out.next, &x)?;
            let gate = lost_factor / (d32 * mu);
            let mu_next = mu_norm(&fs, &out.next)?.value;
            if !mu_next.is_finite() || 1.0 / mu_next < cfg.sigma_floor {
                res.failure = Some(TrackFailure::IllConditioned { t: s, mu: mu_next });
                return Ok(res);
            }
            let lost = correction > gate;
            if lost || mu_next > (1.0 + cfg.eps) * mu {
                rejections += 1;
                res.rejected_steps += 1;
                if rejections >= MAX_CONSECUTIVE_REJECTIONS {
                    res.failure = Some(if lost {
                        TrackFailure::LostPath { t: s, correction, gate }
                    } else {
                        TrackFailure::IllConditioned { t: s, mu: mu_next }
                    });
                    return Ok(res);
                }
                amount *= 0.5;
                continue;
            }
            res.condition_integral += mu * (1.0 + mu) * travelled;
            res.corollary_integral += mu * mu * travelled;
            res.newton_steps += 1;
            res.subdivision.push(s);
            res.iterates.push(out.next.clone());
            res.mu_profile.push(mu_next);
            x = out.next;
            mu = mu_next;
            t = s;
            break;
        }
    }
    Ok(res)
}

/// `ceil(max(1, (1 + eps)/C * D^{3/2} * integral))`: the subdivision count
/// the controller is guaranteed not to exceed for a path of the given
/// condition integral.
pub fn step_bound(integral: f64, cfg: &TrackerConfig, max_degree: u32) -> u64 {
    let raw = (1.0 + cfg.eps) / cfg.c * (max_degree as f64).powf(1.5) * integral;
    raw.max(1.0).ceil() as u64
}

/// The well-conditioned pair `f_i = (d_i / n)^{1/2} X_i X_0^{d_i - 1}`,
/// `zeta = e_0`, with `mu_norm = n^{1/2}`.
pub fn start_pair(n: usize, degrees: &[u32]) -> Result<(HomSystem, ProjPoint)> {
    if n == 0 || degrees.len() != n {
        return Err(Error::InvalidSystem(format!(
            "need n >= 1 and n degrees (n = {n}, {} degrees)",
            degrees.len()
        )));
    }
    let equations = degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| {
            let mut e = vec![0; n + 1];
            e[0] = d.saturating_sub(1);
            e[i + 1] += 1;
            vec![(e, re((d as f64 / n as f64).sqrt()))]
        })
        .collect();
    let f = HomSystem::from_terms(degrees.to_vec(), equations)?;
    Ok((f, ProjPoint::basis(n + 1, 0)))
}

/// Endpoint growth check `mu_k <= (1 + eps)^k mu_0` (with `1e-9` relative
/// slack). False for unsuccessful results.
pub fn mu_growth_audit(res: &TrackResult, cfg: &TrackerConfig) -> bool {
    if !res.success() || res.mu_profile.is_empty() {
        return false;
    }
    let k = res.mu_profile.len() - 1;
    let first = res.mu_profile[0];
    let last = res.mu_profile[k];
    last <= (1.0 + cfg.eps).powi(k as i32) * first * (1.0 + 1e-9)
}

/// Every consecutive ratio `mu_{i+1} / mu_i` is at most `1 + eps`.
pub fn per_step_growth_ok(res: &TrackResult, cfg: &TrackerConfig) -> bool {
    res.mu_profile
        .windows(2)
        .all(|w| w[1] <= (1.0 + cfg.eps) * w[0] * (1.0 + 1e-12))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::condition::mu_norm;
    use crate::newton::refine;
    use crate::polysys::kostlan_sample;
    use crate::projective::{system_distance, system_geodesic};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn start_pair_examples() {
        let (f, z) = start_pair(1, &[3]).unwrap();
        let terms: Vec<_> = f.terms(0).collect();
        assert_eq!(terms, vec![(&[2u32, 1][..], c(3f64.sqrt(), 0.0))]);
        assert!((mu_norm(&f, &z).unwrap().value - 1.0).abs() < 1e-14);
        let (f, z) = start_pair(4, &[1, 5, 2, 3]).unwrap();
        assert!((mu_norm(&f, &z).unwrap().value - 2.0).abs() < 1e-10);
        assert!(f.evaluate(z.as_slice()).unwrap().iter().all(|v| *v == c(0.0, 0.0)));
        assert!((f.bw_norm() - 1.0).abs() < 1e-15);
        assert!(start_pair(0, &[]).is_err());
    }

    #[test]
    fn default_config_passes_gates() {
        let cfg = TrackerConfig::default();
        cfg.validate().unwrap();
        assert!((cfg.u() - 0.025).abs() < 1e-16);
        let big = TrackerConfig { c: 0.05, ..cfg };
        assert!(matches!(big.validate(), Err(Error::InvalidConfig(_))));
        assert!(TrackerConfig { eps: 0.0, ..cfg }.validate().is_err());
        assert!(TrackerConfig { quad_substep: 0.0, ..cfg }.validate().is_err());
    }

    #[test]
    fn step_bound_examples() {
        let cfg = TrackerConfig::default();
        assert_eq!(step_bound(0.0, &cfg, 3), 1);
        assert_eq!(step_bound(10.0, &cfg, 2), 3536);
        let b1 = step_bound(7.0, &cfg, 3) as f64;
        let b2 = step_bound(14.0, &cfg, 3) as f64;
        assert!((b2 - 2.0 * b1).abs() <= 1.0);
    }

    #[test]
    fn homotopy_endpoints_and_derivative() {
        let f = kostlan_sample(2, &[2, 3], 1).unwrap();
        let g = kostlan_sample(2, &[2, 3], 2).unwrap();
        for kind in [HomotopyKind::GreatCircle, HomotopyKind::BwSegment] {
            let h = Homotopy::new(&f, &g, kind).unwrap();
            assert!(system_distance(&h.system_at(0.0).unwrap(), &f).unwrap() < 1e-12);
            assert!(system_distance(&h.system_at(1.0).unwrap(), &g).unwrap() < 1e-7);
            // derivative vs central differences
            for &t in &[0.2, 0.5, 0.9] {
                let step = 1e-5;
                let (ft, fdot) = h.at(t).unwrap();
                let fp = h.system_at(t + step).unwrap();
                let fm = h.system_at(t - step).unwrap();
                let fd = fp.combine(c(0.5 / step, 0.0), &fm, c(-0.5 / step, 0.0)).unwrap();
                let err = fd.combine(c(1.0, 0.0), &fdot, c(-1.0, 0.0)).unwrap().bw_norm();
                assert!(err <= 1e-6 * fdot.bw_norm().max(1.0), "{kind:?} t = {t}: {err}");
                assert!((ft.bw_norm() - 1.0).abs() < 1e-12);
            }
            // great circle speed equals the projective distance
            if kind == HomotopyKind::GreatCircle {
                let d = system_distance(&f, &g).unwrap();
                assert!((h.speed(0.3).unwrap() - d).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn polyline_is_arc_length_parametrized() {
        let f = kostlan_sample(1, &[2], 4).unwrap();
        let g = kostlan_sample(1, &[2], 5).unwrap();
        let m = system_geodesic(&f, &g, 0.3).unwrap();
        let h = Homotopy::polyline(&[f.clone(), m, g.clone()]).unwrap();
        let d = system_distance(&f, &g).unwrap();
        assert!((h.angle() - d).abs() < 1e-12);
        assert!((h.speed(0.1).unwrap() - d).abs() < 1e-12);
        assert!((h.speed(0.9).unwrap() - d).abs() < 1e-12);
        let single = Homotopy::great_circle(&f, &g).unwrap();
        for &t in &[0.0, 0.25, 0.3, 0.6, 1.0] {
            let a = h.system_at(t).unwrap();
            let b = single.system_at(t).unwrap();
            assert!(system_distance(&a, &b).unwrap() < 1e-7, "t = {t}");
        }
        assert!(Homotopy::polyline(&[f]).is_err());
    }

    #[test]
    fn constant_homotopy() {
        let (f, z) = start_pair(2, &[2, 2]).unwrap();
        let h = Homotopy::great_circle(&f, &f.scaled(c(0.0, 2.0))).unwrap();
        let cfg = TrackerConfig::default();
        let res = track(&h, &z, &cfg).unwrap();
        assert!(res.success());
        assert!(res.newton_steps <= 1);
        assert_eq!(res.subdivision.last(), Some(&1.0));
        assert!(proj_distance(res.final_point(), &z).unwrap() < 1e-14);
        assert!(mu_growth_audit(&res, &cfg));
    }

    fn rotation(theta: f64) -> nalgebra::DMatrix<Complex64> {
        let (s, co) = theta.sin_cos();
        nalgebra::DMatrix::from_row_slice(2, 2, &[c(co, 0.0), c(-s, 0.0), c(s, 0.0), c(co, 0.0)])
    }

    #[test]
    fn nearby_rotation_respects_step_bound() {
        let (f, z) = start_pair(1, &[2]).unwrap();
        let g = f.compose_linear(&rotation(0.01)).unwrap();
        let cfg = TrackerConfig::default();
        let res = track(&Homotopy::great_circle(&f, &g).unwrap(), &z, &cfg).unwrap();
        assert!(res.success(), "{:?}", res.failure);
        assert!(res.newton_steps as u64 <= step_bound(res.condition_integral, &cfg, 2));
        assert_eq!(res.newton_steps + 1, res.subdivision.len());
        assert!(per_step_growth_ok(&res, &cfg));
        assert!(mu_growth_audit(&res, &cfg));
        // the zero followed the rotation: f(R^T x) vanishes at R e_0
        let expected = ProjPoint::new(rotation(0.01).transpose() * z.rep()).unwrap();
        let end = refine(&g, res.final_point(), 3).unwrap().point;
        assert!(proj_distance(&end, &expected).unwrap() < 1e-12);
    }

    fn quadratic(c0: f64, c2: f64) -> HomSystem {
        HomSystem::from_terms(vec![2], vec![vec![(vec![2, 0], c(c0, 0.0)), (vec![0, 2], c(c2, 0.0))]]).unwrap()
    }

    #[test]
    fn double_root_on_the_path_fails_cleanly() {
        // X_1^2 - X_0^2 to X_1^2 + X_0^2 along the great circle crosses X_1^2
        // at t = 1/2, where the zeros (1, 1) and (1, -1) collide.
        let h = Homotopy::great_circle(&quadratic(-1.0, 1.0), &quadratic(1.0, 1.0)).unwrap();
        let z = ProjPoint::from_slice(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let res = track(&h, &z, &TrackerConfig::default()).unwrap();
        assert!(!res.success());
        assert!(matches!(res.failure, Some(TrackFailure::IllConditioned { .. })), "{:?}", res.failure);
        assert!(res.failure_reason().unwrap().contains("ill-conditioned"));
        assert!(*res.subdivision.last().unwrap() < 0.5);
    }

    #[test]
    fn singular_target_never_reports_success() {
        // X_1^2 at t = 1: the condition number grows without bound at the end
        let (f, z) = start_pair(1, &[2]).unwrap();
        let cfg = TrackerConfig { max_steps: 20_000, ..Default::default() };
        let res = track(&Homotopy::great_circle(&f, &quadratic(0.0, 1.0)).unwrap(), &z, &cfg).unwrap();
        assert!(!res.success());
        assert!(matches!(
            res.failure,
            Some(TrackFailure::IllConditioned { .. } | TrackFailure::StepBudget { .. })
        ));
    }

    #[test]
    fn budget_and_bad_start() {
        let (f, z) = start_pair(1, &[2]).unwrap();
        let g = kostlan_sample(1, &[2], 3).unwrap();
        let h = Homotopy::great_circle(&f, &g).unwrap();
        let cfg = TrackerConfig { max_steps: 3, ..Default::default() };
        let res = track(&h, &z, &cfg).unwrap();
        assert!(matches!(res.failure, Some(TrackFailure::StepBudget { steps: 3, .. })));

        let off = ProjPoint::from_slice(&[c(1.0, 0.0), c(0.1, 0.0)]).unwrap();
        let res = track(&h, &off, &TrackerConfig::default()).unwrap();
        assert!(matches!(res.failure, Some(TrackFailure::InvalidStart { .. })));
        assert!(track(&h, &ProjPoint::basis(3, 0), &TrackerConfig::default()).is_err());
    }

    #[test]
    fn audit_detects_tampering() {
        let (f, z) = start_pair(1, &[2]).unwrap();
        let g = f.compose_linear(&rotation(0.02)).unwrap();
        let cfg = TrackerConfig::default();
        let mut res = track(&Homotopy::great_circle(&f, &g).unwrap(), &z, &cfg).unwrap();
        assert!(mu_growth_audit(&res, &cfg));
        let k = res.mu_profile.len() - 1;
        res.mu_profile[k] = res.mu_profile[0] * (1.0 + cfg.eps).powi(k as i32) * 2.0;
        assert!(!mu_growth_audit(&res, &cfg));
        assert!(!per_step_growth_ok(&res, &cfg));
    }
}
