//! The normalized condition number `mu_norm` and the perturbation predicates
//! built on it.
//!
//! `mu_norm(g, x) = ||g|| * ||(Dg(x)|_{x^perp})^{-1} diag(d_i^{1/2})||`, computed
//! as `||g|| / sigma_min(diag(d_i^{-1/2}) Dg(x) Q)` with `Q` an orthonormal
//! basis of `x^perp`. Points are unit-norm, so the `||x||^{d_i - 1}` factors
//! are 1 and are not computed.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polysys::HomSystem;
use crate::projective::{complement_frame, proj_distance, system_distance, ProjPoint, TangentFrame};

/// `mu_norm` is reported infinite when `sigma_min <= threshold * ||g||`.
pub const DEFAULT_SINGULAR_THRESHOLD: f64 = 1e-13;

/// Default trust constant `C` for every gate-style use.
pub const DEFAULT_C: f64 = 0.01;

/// Default stability slack `eps`.
pub const DEFAULT_EPS: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MuValue {
    /// `mu_norm`, `f64::INFINITY` on the ill-posed locus.
    pub value: f64,
    /// Smallest singular value of the scaled restricted Jacobian.
    pub sigma_min: f64,
}

impl MuValue {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }
}

/// `diag(d_i^{-1/2}) Dg(x) Q`, an `n x n` matrix.
pub(crate) fn scaled_restricted_jacobian(g: &HomSystem, x: &ProjPoint, frame: &TangentFrame) -> Result<DMatrix<Complex64>> {
    let mut a = g.jacobian(x.as_slice())? * &frame.basis;
    for (i, &d) in g.degrees().iter().enumerate() {
        let s = 1.0 / (d as f64).sqrt();
        a.row_mut(i).iter_mut().for_each(|z| *z *= s);
    }
    Ok(a)
}

pub(crate) fn sigma_min(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .singular_values()
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

/// `mu_norm(g, x)` with the default singularity threshold.
pub fn mu_norm(g: &HomSystem, x: &ProjPoint) -> Result<MuValue> {
    mu_norm_with_threshold(g, x, DEFAULT_SINGULAR_THRESHOLD)
}

pub fn mu_norm_with_threshold(g: &HomSystem, x: &ProjPoint, threshold: f64) -> Result<MuValue> {
    if x.dim() != g.n_vars() {
        return Err(Error::DimensionMismatch {
            expected: g.n_vars(),
            found: x.dim(),
        });
    }
    let norm = g.bw_norm();
    let frame = complement_frame(x);
    let smin = sigma_min(&scaled_restricted_jacobian(g, x, &frame)?);
    let value = if norm == 0.0 || smin <= threshold * norm {
        f64::INFINITY
    } else {
        norm / smin
    };
    Ok(MuValue { value, sigma_min: smin })
}

/// Upper bound for `mu_norm(g, zeta)` after moving the system a projective
/// distance `dist` away from `f` with the point fixed:
/// `mu (1 + dist) / (1 - D^{1/2} dist mu)`.
pub fn mu_bound_system_move(mu: f64, dist: f64, max_degree: u32) -> Result<f64> {
    if !(mu > 0.0) || !(dist >= 0.0) || max_degree == 0 {
        return Err(Error::InvalidConfig(format!(
            "need mu > 0, dist >= 0, D >= 1 (mu = {mu}, dist = {dist}, D = {max_degree})"
        )));
    }
    let load = (max_degree as f64).sqrt() * dist * mu;
    if load >= 1.0 {
        return Err(Error::BoundVoid(load));
    }
    Ok(mu * (1.0 + dist) / (1.0 - load))
}

/// Which trust radius: system space scales with `D^{1/2}`, solution space
/// with `D^{3/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadiusKind {
    System,
    Solution,
}

impl RadiusKind {
    fn exponent(self) -> f64 {
        match self {
            RadiusKind::System => 0.5,
            RadiusKind::Solution => 1.5,
        }
    }
}

/// `C / (D^e mu)`; zero when `mu` is infinite.
pub fn step_radius(mu: f64, max_degree: u32, c: f64, kind: RadiusKind) -> f64 {
    if !mu.is_finite() {
        return 0.0;
    }
    c / ((max_degree as f64).powf(kind.exponent()) * mu)
}

/// Outcome of one two-sided stability check.
#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub mu_f: f64,
    pub system_distance: f64,
    pub point_distance: f64,
    pub system_gate: bool,
    pub point_gate: bool,
    /// `mu_norm(g, eta)`, evaluated only when both gates pass.
    pub mu_g: Option<f64>,
    /// Whether `mu_g / (1 + eps) <= mu_f <= (1 + eps) mu_g`; `None` when the
    /// hypothesis is not met and no claim is made.
    pub conclusion: Option<bool>,
}

impl StabilityReport {
    pub fn hypothesis_met(&self) -> bool {
        self.system_gate && self.point_gate
    }

    pub fn ratio(&self) -> Option<f64> {
        self.mu_g.map(|g| g / self.mu_f)
    }
}

/// Checks the two-sided `(1 + eps)` equivalence of `mu_norm(f, zeta)` and
/// `mu_norm(g, eta)` for perturbations inside the trust radii
/// `d(f, g) < C / (D^{1/2} mu)` and `d(zeta, eta) < C / (D^{3/2} mu)`.
pub fn check_mu_stability(
    f: &HomSystem,
    g: &HomSystem,
    zeta: &ProjPoint,
    eta: &ProjPoint,
    c: f64,
    eps: f64,
) -> Result<StabilityReport> {
    let mu_f = mu_norm(f, zeta)?;
    if !mu_f.is_finite() {
        return Err(Error::InfiniteCondition);
    }
    let mu_f = mu_f.value;
    let d = f.max_degree().max(g.max_degree());
    let system_distance = system_distance(f, g)?;
    let point_distance = proj_distance(zeta, eta)?;
    let system_gate = system_distance < step_radius(mu_f, d, c, RadiusKind::System);
    let point_gate = point_distance < step_radius(mu_f, d, c, RadiusKind::Solution);
    let (mu_g, conclusion) = if system_gate && point_gate {
        let mu_g = mu_norm(g, eta)?.value;
        let holds = mu_g <= (1.0 + eps) * mu_f && mu_f <= (1.0 + eps) * mu_g;
        (Some(mu_g), Some(holds))
    } else {
        (None, None)
    };
    Ok(StabilityReport {
        mu_f,
        system_distance,
        point_distance,
        system_gate,
        point_gate,
        mu_g,
        conclusion,
    })
}
