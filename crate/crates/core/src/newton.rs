//! Projective Newton iteration `N_f(x) = x - (Df(x)|_{x^perp})^{-1} f(x)` and
//! approximate-zero certification from a known zero.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;

use crate::condition::{mu_norm, scaled_restricted_jacobian, sigma_min, DEFAULT_SINGULAR_THRESHOLD};
use crate::error::{Error, Result};
use crate::polysys::HomSystem;
use crate::projective::{complement_frame, proj_distance, ProjPoint};

/// `psi(u) = 1 - 4u + 2u^2`.
pub fn psi(u: f64) -> f64 {
    1.0 - 4.0 * u + 2.0 * u * u
}

/// Certification constant `u0 = (16 - sqrt(232)) / 16 ~ 0.048`.
///
/// At this value `4 u0 / psi(2 u0) ~ 0.303`, below the `1/2` that the
/// doubly-exponential envelope needs.
pub fn u0() -> f64 {
    (16.0 - 232f64.sqrt()) / 16.0
}

/// Upper end `(3 - sqrt 7) / 4` of the range where the one-step contraction
/// estimate applies; there `4u / psi(2u)` reaches 1.
pub fn contraction_limit() -> f64 {
    (3.0 - 7f64.sqrt()) / 4.0
}

/// One-step contraction factor `4u / psi(2u)` for `0 <= u < (3 - sqrt 7)/4`.
pub fn contraction_factor(u: f64) -> Result<f64> {
    if !(0.0..contraction_limit()).contains(&u) {
        return Err(Error::Domain(u));
    }
    Ok(4.0 * u / psi(2.0 * u))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub next: ProjPoint,
    /// False iff the restricted Jacobian was singular to threshold; `next`
    /// is then the input point.
    pub solvable: bool,
    pub residual_before: f64,
    pub residual_after: f64,
}

fn residual(f: &HomSystem, x: &ProjPoint) -> Result<f64> {
    Ok(f.evaluate(x.as_slice())?
        .iter()
        .map(Complex64::norm_sqr)
        .sum::<f64>()
        .sqrt())
}

/// One projective Newton step.
///
/// Solves `(Df(x) Q) y = f(x)` with `Q` the Householder frame of `x^perp`
/// and returns the normalized `x - Q y`. The step is refused when the
/// restricted Jacobian is singular at the same threshold that makes
/// `mu_norm` infinite.
pub fn newton_step(f: &HomSystem, x: &ProjPoint) -> Result<NewtonOutcome> {
    let frame = complement_frame(x);
    let fx = nalgebra::DVector::from_vec(f.evaluate(x.as_slice())?);
    let residual_before = fx.norm();
    let unsolvable = NewtonOutcome {
        next: x.clone(),
        solvable: false,
        residual_before,
        residual_after: residual_before,
    };
    let scaled = scaled_restricted_jacobian(f, x, &frame)?;
    let norm = f.bw_norm();
    if norm == 0.0 || sigma_min(&scaled) <= DEFAULT_SINGULAR_THRESHOLD * norm {
        return Ok(unsolvable);
    }
    let a = f.jacobian(x.as_slice())? * &frame.basis;
    let Some(y) = a.col_piv_qr().solve(&fx) else {
        return Ok(unsolvable);
    };
    let next = ProjPoint::new(x.rep() - &frame.basis * y)?;
    let residual_after = residual(f, &next)?;
    Ok(NewtonOutcome {
        next,
        solvable: true,
        residual_before,
        residual_after,
    })
}

/// Whether `x` lies inside the certified basin of the zero `zeta`:
/// `d(x, zeta) < u0 / (D^{3/2} mu_norm(f, zeta))` (and below `pi/4`, the range
/// where the tangent estimate behind the contraction holds). A `true` answer
/// guarantees `d(N_f^k(x), zeta) <= 2^{-(2^k - 1)} d(x, zeta)` for all `k`.
///
/// `zeta` is assumed to be a zero of `f`; that is not re-checked here.
pub fn certify_approximate_zero(f: &HomSystem, x: &ProjPoint, zeta: &ProjPoint) -> Result<bool> {
    let mu = mu_norm(f, zeta)?;
    if !mu.is_finite() {
        return Ok(false);
    }
    let d = proj_distance(x, zeta)?;
    let radius = u0() / ((f.max_degree() as f64).powf(1.5) * mu.value);
    Ok(d < radius && d < FRAC_PI_4)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Refined {
    pub point: ProjPoint,
    /// Newton steps actually applied.
    pub steps: usize,
    /// Set when an unsolvable step cut the iteration short.
    pub aborted: bool,
}

/// `N_f^k(x)`, stopping early at an unsolvable step.
pub fn refine(f: &HomSystem, x: &ProjPoint, k: usize) -> Result<Refined> {
    let mut point = x.clone();
    for steps in 0..k {
        let out = newton_step(f, &point)?;
        if !out.solvable {
            return Ok(Refined {
                point,
                steps,
                aborted: true,
            });
        }
        point = out.next;
    }
    Ok(Refined {
        point,
        steps: k,
        aborted: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracker::start_pair;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(0.0), 1.0);
        assert_eq!(psi(0.5), -0.5);
        assert!((u0() - 0.048).abs() < 5e-4);
        let f = contraction_factor(u0()).unwrap();
        assert!(f <= 0.5 && (f - 0.302_909_650_858_833).abs() < 1e-12);
        // the root of 4u/psi(2u) = 1/2 is (16 - sqrt 224)/16
        let root = (16.0 - 224f64.sqrt()) / 16.0;
        assert!((contraction_factor(root).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn contraction_domain() {
        assert_eq!(contraction_factor(0.0).unwrap(), 0.0);
        let lim = contraction_limit();
        assert!((contraction_factor(lim * (1.0 - 1e-12)).unwrap() - 1.0).abs() < 1e-9);
        assert_eq!(contraction_factor(lim), Err(Error::Domain(lim)));
        assert!(contraction_factor(-1e-3).is_err());
        // monotone on the domain
        let xs: Vec<f64> = (0..100).map(|i| i as f64 * lim / 100.0).collect();
        assert!(xs.windows(2).all(|w| contraction_factor(w[0]).unwrap() < contraction_factor(w[1]).unwrap()));
    }

    #[test]
    fn fixed_point_at_a_zero() {
        let (f, z) = start_pair(3, &[2, 2, 3]).unwrap();
        let out = newton_step(&f, &z).unwrap();
        assert!(out.solvable);
        assert_eq!(out.residual_before, 0.0);
        assert!(proj_distance(&out.next, &z).unwrap() < 1e-15);
    }

    #[test]
    fn quadratic_step_on_x0x1() {
        // Exact update: (1, a) -> (1, -a^3).
        let f = HomSystem::from_terms(vec![2], vec![vec![(vec![1, 1], c(1.0, 0.0))]]).unwrap();
        let x = ProjPoint::from_slice(&[c(1.0, 0.0), c(0.1, 0.0)]).unwrap();
        let e0 = ProjPoint::basis(2, 0);
        assert!((proj_distance(&x, &e0).unwrap() - 0.1f64.atan()).abs() < 1e-15);
        let out = newton_step(&f, &x).unwrap();
        let d = proj_distance(&out.next, &e0).unwrap();
        assert!((d - 1e-3f64.atan()).abs() < 1e-15, "{d}");
        assert!(out.residual_after < out.residual_before);
    }

    #[test]
    fn exact_on_linear_systems() {
        let f = HomSystem::from_terms(vec![1], vec![vec![(vec![0, 1], c(1.0, 0.0))]]).unwrap();
        let x = ProjPoint::from_slice(&[c(0.3, 0.4), c(-0.7, 0.2)]).unwrap();
        let out = newton_step(&f, &x).unwrap();
        assert!(out.residual_after <= 1e-14);
        assert!(proj_distance(&out.next, &ProjPoint::basis(2, 0)).unwrap() < 1e-14);
    }

    #[test]
    fn singular_step_is_refused() {
        let f = HomSystem::from_terms(vec![2], vec![vec![(vec![0, 2], c(1.0, 0.0))]]).unwrap();
        let x = ProjPoint::basis(2, 0);
        let out = newton_step(&f, &x).unwrap();
        assert!(!out.solvable);
        assert_eq!(out.next, x);
        let r = refine(&f, &x, 4).unwrap();
        assert!(r.aborted);
        assert_eq!(r.steps, 0);
    }

    #[test]
    fn certify_examples() {
        let (f, z) = start_pair(2, &[3, 2]).unwrap();
        assert!(certify_approximate_zero(&f, &z, &z).unwrap());
        let radius = u0() / (3f64.powf(1.5) * 2f64.sqrt());
        let dir = nalgebra::DVector::from_vec(vec![c(0.0, 0.0), c(0.6, 0.1), c(0.0, -0.8)]);
        let near = z.exp(&dir, 0.9 * radius).unwrap();
        assert!(certify_approximate_zero(&f, &near, &z).unwrap());
        let far = z.exp(&dir, 2.0 * radius).unwrap();
        assert!(!certify_approximate_zero(&f, &far, &z).unwrap());

        let d0 = proj_distance(&near, &z).unwrap();
        for k in 1..=4 {
            let xk = refine(&f, &near, k).unwrap().point;
            let dk = proj_distance(&xk, &z).unwrap();
            assert!(dk <= 0.5f64.powi((1 << k) - 1) * d0, "k = {k}: {dk} vs {d0}");
        }
    }

    #[test]
    fn refine_zero_steps_is_identity() {
        let (f, z) = start_pair(1, &[2]).unwrap();
        let x = z.exp(&nalgebra::DVector::from_vec(vec![c(0.0, 0.0), c(1.0, 0.0)]), 0.01).unwrap();
        let r = refine(&f, &x, 0).unwrap();
        assert_eq!(r.point, x);
        assert_eq!(r.steps, 0);
        assert!(!r.aborted);
    }
}
