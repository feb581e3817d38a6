//! Complex projective space `P(C^{n+1})` with the Riemannian angle metric,
//! Hermitian complements of points, and the matching projective geometry on
//! systems under the Bombieri-Weyl structure.
//!
//! Representatives are kept at unit norm, so every `||x||^{d_i - 1}` factor
//! appearing in condition numbers is identically 1.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::polysys::HomSystem;

/// A point of `P(C^{n+1})`, stored as a unit-norm representative.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjPoint {
    rep: DVector<Complex64>,
}

impl ProjPoint {
    /// Normalizes `v`; fails on the zero vector.
    pub fn new(v: DVector<Complex64>) -> Result<Self> {
        let nrm = v.norm();
        if nrm == 0.0 || !nrm.is_finite() {
            return Err(Error::ZeroVector);
        }
        Ok(ProjPoint { rep: v.unscale(nrm) })
    }

    pub fn from_slice(v: &[Complex64]) -> Result<Self> {
        Self::new(DVector::from_column_slice(v))
    }

    /// Coordinate point `e_i` of `P(C^dim)`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut rep = DVector::zeros(dim);
        rep[i] = Complex64::new(1.0, 0.0);
        ProjPoint { rep }
    }

    pub fn rep(&self) -> &DVector<Complex64> {
        &self.rep
    }

    pub fn as_slice(&self) -> &[Complex64] {
        self.rep.as_slice()
    }

    /// Ambient dimension `n + 1`.
    pub fn dim(&self) -> usize {
        self.rep.len()
    }

    /// Same projective point, representative multiplied by `lambda`.
    pub fn rephased(&self, lambda: Complex64) -> Result<ProjPoint> {
        ProjPoint::new(self.rep.map(|z| z * lambda))
    }

    /// Point at fraction `s` along the minimizing geodesic from `self` to `other`.
    pub fn geodesic(&self, other: &ProjPoint, s: f64) -> Result<ProjPoint> {
        check_dims(self.dim(), other.dim())?;
        let c = self.rep.dotc(&other.rep);
        let phase = if c.norm() > 0.0 { c.conj() / c.norm() } else { Complex64::new(1.0, 0.0) };
        let aligned = other.rep.map(|z| z * phase);
        let cos = c.norm();
        let residual = &aligned - self.rep.map(|z| z * cos);
        let sin = residual.norm();
        if sin == 0.0 {
            return Ok(self.clone());
        }
        let theta = sin.atan2(cos);
        let u = residual.unscale(sin);
        let (a, b) = ((s * theta).cos(), (s * theta).sin());
        ProjPoint::new(self.rep.map(|z| z * a) + u.map(|z| z * b))
    }

    /// Moves by `angle` along the tangent direction given by the component
    /// of `direction` orthogonal to the representative.
    pub fn exp(&self, direction: &DVector<Complex64>, angle: f64) -> Result<ProjPoint> {
        check_dims(self.dim(), direction.len())?;
        let c = self.rep.dotc(direction);
        let v = direction - self.rep.map(|z| z * c);
        let nrm = v.norm();
        if nrm == 0.0 {
            return Err(Error::ZeroVector);
        }
        let v = v.unscale(nrm);
        ProjPoint::new(self.rep.map(|z| z * angle.cos()) + v.map(|z| z * angle.sin()))
    }
}

fn check_dims(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { expected: a, found: b });
    }
    Ok(())
}

/// Angle between the complex lines through `x` and `y`, in `[0, pi/2]`.
///
/// Equal to `arccos |<x, y>|`, evaluated as `atan2(|y - <x,y> x|, |<x,y>|)`,
/// which keeps full relative accuracy for small angles.
pub fn proj_distance(x: &ProjPoint, y: &ProjPoint) -> Result<f64> {
    check_dims(x.dim(), y.dim())?;
    let c = x.rep.dotc(&y.rep);
    let residual = &y.rep - x.rep.map(|z| z * c);
    Ok(residual.norm().atan2(c.norm()))
}

/// Orthonormal basis of the Hermitian complement `x^perp` of a point.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentFrame {
    pub base: ProjPoint,
    /// `(n + 1) x n`, orthonormal columns, each orthogonal to `base`.
    pub basis: DMatrix<Complex64>,
}

/// Householder reflection `H = I - 2 w w^H / |w|^2` with `H e_0` a unit
/// multiple of `x`; its remaining columns span `x^perp`.
pub fn householder(x: &ProjPoint) -> DMatrix<Complex64> {
    let dim = x.dim();
    let x0 = x.rep[0];
    let phi = if x0.norm() > 0.0 { x0 / x0.norm() } else { Complex64::new(1.0, 0.0) };
    let mut w = x.rep.map(|z| z * phi.conj());
    w[0] += Complex64::new(1.0, 0.0);
    // |w|^2 = 2 (1 + |x_0|) for unit x
    let scale = 2.0 / w.norm_squared();
    let mut h = DMatrix::identity(dim, dim);
    for i in 0..dim {
        for j in 0..dim {
            h[(i, j)] -= w[i] * w[j].conj() * scale;
        }
    }
    h
}

/// Deterministic frame of `x^perp` built from [`householder`].
pub fn complement_frame(x: &ProjPoint) -> TangentFrame {
    let h = householder(x);
    let n = x.dim() - 1;
    TangentFrame {
        base: x.clone(),
        basis: h.columns(1, n).into_owned(),
    }
}

/// Projective (Fubini-Study angle) distance between the classes of two
/// systems in `P(H_(d))`, in `[0, pi/2]`.
pub fn system_distance(f: &HomSystem, g: &HomSystem) -> Result<f64> {
    let f = f.normalized()?;
    let g = g.normalized()?;
    let c = g.bw_inner(&f)?;
    let residual = g.combine(Complex64::new(1.0, 0.0), &f, -c)?;
    Ok(residual.bw_norm().atan2(c.norm()))
}

/// Norm of the tangent vector `fdot` at the class of `f` in `P(H_(d))`: the
/// Bombieri-Weyl norm of the part of `fdot` orthogonal to `f`, over `||f||`.
pub fn system_tangent_norm(f: &HomSystem, fdot: &HomSystem) -> Result<f64> {
    let nf2 = f.bw_norm().powi(2);
    if nf2 == 0.0 {
        return Err(Error::ZeroVector);
    }
    let c = fdot.bw_inner(f)? / nf2;
    let horizontal = fdot.combine(Complex64::new(1.0, 0.0), f, -c)?;
    Ok(horizontal.bw_norm() / nf2.sqrt())
}

/// Unit representative at fraction `s` along the great circle from the class
/// of `f` to the class of `g` (phases aligned so the circle is minimizing).
pub fn system_geodesic(f: &HomSystem, g: &HomSystem, s: f64) -> Result<HomSystem> {
    let f = f.normalized()?;
    let g = g.normalized()?;
    let c = g.bw_inner(&f)?;
    let phase = if c.norm() > 0.0 { c.conj() / c.norm() } else { Complex64::new(1.0, 0.0) };
    let cos = c.norm();
    // g e^{i phase} - cos f, orthogonal to f
    let residual = g.combine(phase, &f, Complex64::new(-cos, 0.0))?;
    let sin = residual.bw_norm();
    if sin == 0.0 {
        return Ok(f);
    }
    let theta = sin.atan2(cos);
    let (a, b) = ((s * theta).cos(), (s * theta).sin() / sin);
    f.combine(Complex64::new(a, 0.0), &residual, Complex64::new(b, 0.0))?
        .normalized()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn pt(v: &[(f64, f64)]) -> ProjPoint {
        ProjPoint::from_slice(&v.iter().map(|&(a, b)| c(a, b)).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn distance_examples() {
        let e0 = ProjPoint::basis(2, 0);
        let ie0 = pt(&[(0.0, 1.0), (0.0, 0.0)]);
        assert_eq!(proj_distance(&e0, &ie0).unwrap(), 0.0);
        let e1 = ProjPoint::basis(2, 1);
        assert!((proj_distance(&e0, &e1).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let diag = pt(&[(1.0, 0.0), (1.0, 0.0)]);
        assert!((proj_distance(&e0, &diag).unwrap() - FRAC_PI_4).abs() < 1e-15);
        assert!(proj_distance(&e0, &ProjPoint::basis(3, 0)).is_err());
    }

    #[test]
    fn small_angles_are_accurate() {
        let e0 = ProjPoint::basis(2, 0);
        for &a in &[1e-4f64, 1e-9, 1e-13] {
            let y = pt(&[(a.cos(), 0.0), (0.0, a.sin())]);
            let d = proj_distance(&e0, &y).unwrap();
            assert!((d - a).abs() <= 1e-15 * a.max(1e-3), "{a} vs {d}");
        }
    }

    #[test]
    fn zero_vector_rejected() {
        assert_eq!(ProjPoint::from_slice(&[c(0.0, 0.0); 3]), Err(Error::ZeroVector));
    }

    #[test]
    fn frame_examples() {
        let f = complement_frame(&ProjPoint::basis(3, 0));
        let expected = DMatrix::from_fn(3, 2, |i, j| if i == j + 1 { c(1.0, 0.0) } else { c(0.0, 0.0) });
        assert!((f.basis - expected).norm() < 1e-15);

        let f = complement_frame(&ProjPoint::basis(2, 1));
        assert!(f.basis[(1, 0)].norm() < 1e-15);
        assert!((f.basis[(0, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn frame_is_orthonormal_complement() {
        let x = pt(&[(0.3, -0.2), (0.0, 0.9), (-0.5, 0.1), (0.2, 0.2)]);
        let fr = complement_frame(&x);
        let gram = fr.basis.adjoint() * &fr.basis;
        assert!((gram - DMatrix::identity(3, 3)).norm() < 1e-12);
        assert!((fr.basis.adjoint() * x.rep()).norm() < 1e-12);
        // deterministic
        assert_eq!(complement_frame(&x), fr);
    }

    #[test]
    fn geodesic_midpoint() {
        let e0 = ProjPoint::basis(2, 0);
        let e1 = pt(&[(0.0, 0.0), (0.0, 1.0)]);
        let m = e0.geodesic(&e1, 0.5).unwrap();
        assert!((proj_distance(&m, &e0).unwrap() - FRAC_PI_4).abs() < 1e-14);
        assert!((proj_distance(&m, &e1).unwrap() - FRAC_PI_4).abs() < 1e-14);
    }

    fn monomial_system(e: Vec<u32>, d: u32) -> HomSystem {
        HomSystem::from_terms(vec![d], vec![vec![(e, c(1.0, 0.0))]]).unwrap()
    }

    #[test]
    fn tangent_norm_examples() {
        let f = monomial_system(vec![2, 0], 2);
        let fdot = monomial_system(vec![0, 2], 2);
        assert!((system_tangent_norm(&f, &fdot).unwrap() - 1.0).abs() < 1e-15);
        assert!(system_tangent_norm(&f, &f.scaled(c(0.0, 3.0))).unwrap() < 1e-15);
        let f2 = f.scaled(c(2.0, 0.0));
        assert!((system_tangent_norm(&f2, &fdot.scaled(c(2.0, 0.0))).unwrap() - 1.0).abs() < 1e-15);
        let zero = f.scaled(c(0.0, 0.0));
        assert_eq!(system_tangent_norm(&zero, &fdot), Err(Error::ZeroVector));
    }

    #[test]
    fn system_distance_and_geodesic() {
        let f = monomial_system(vec![2, 0], 2);
        let g = monomial_system(vec![0, 2], 2).scaled(c(0.0, -1.0));
        assert!((system_distance(&f, &g).unwrap() - FRAC_PI_2).abs() < 1e-15);
        let m = system_geodesic(&f, &g, 0.5).unwrap();
        assert!((system_distance(&f, &m).unwrap() - FRAC_PI_4).abs() < 1e-14);
        assert!((system_distance(&m, &g).unwrap() - FRAC_PI_4).abs() < 1e-14);
        assert!((m.bw_norm() - 1.0).abs() < 1e-15);
    }
}
