#![allow(dead_code)]

use condtrack::polysys::kostlan_sample_with;
use condtrack::{Complex64, HomSystem, ProjPoint};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn gaussian<R: Rng>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

pub fn random_vector<R: Rng>(dim: usize, rng: &mut R) -> DVector<Complex64> {
    DVector::from_fn(dim, |_, _| gaussian(rng))
}

pub fn random_point<R: Rng>(dim: usize, rng: &mut R) -> ProjPoint {
    ProjPoint::new(random_vector(dim, rng)).unwrap()
}

/// Haar-distributed unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary<R: Rng>(dim: usize, rng: &mut R) -> DMatrix<Complex64> {
    let m = DMatrix::from_fn(dim, dim, |_, _| gaussian(rng));
    let qr = m.qr();
    let (q, r) = (qr.q(), qr.r());
    let phases = DMatrix::from_diagonal(&DVector::from_fn(dim, |i, _| {
        let d = r[(i, i)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            c(1.0, 0.0)
        }
    }));
    q * phases
}

pub fn random_degrees<R: Rng>(n: usize, max: u32, rng: &mut R) -> Vec<u32> {
    (0..n).map(|_| rng.random_range(1..=max)).collect()
}

/// Kostlan system conditioned to vanish at a random point.
pub fn system_with_zero<R: Rng>(n: usize, degrees: &[u32], rng: &mut R) -> (HomSystem, ProjPoint) {
    let zeta = random_point(n + 1, rng);
    let f = kostlan_sample_with(n, degrees, rng).unwrap();
    (f.vanishing_at(zeta.as_slice()).unwrap(), zeta)
}

/// Unit Bombieri-Weyl tangent vector at the unit system `f`.
pub fn random_tangent<R: Rng>(f: &HomSystem, rng: &mut R) -> HomSystem {
    let v = kostlan_sample_with(f.n(), f.degrees(), rng).unwrap();
    let along = v.bw_inner(f).unwrap();
    v.combine(c(1.0, 0.0), f, -along).unwrap().normalized().unwrap()
}

/// Unit tangent vector at the point `x`.
pub fn random_point_tangent<R: Rng>(x: &ProjPoint, rng: &mut R) -> DVector<Complex64> {
    let v = random_vector(x.dim(), rng);
    let along = x.rep().dotc(&v);
    let t = v - x.rep() * along;
    let n = t.norm();
    t / c(n, 0.0)
}

pub fn residual(f: &HomSystem, x: &ProjPoint) -> f64 {
    f.evaluate(x.as_slice())
        .unwrap()
        .iter()
        .map(|z| z.norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// `X_1^2 - X_0^2` to `X_1^2 + 0.8 X_0^2 + eta e^{i pi/4} X_0 X_1` along the great
/// circle, which passes close to the double-root system `X_1^2`, and the zero
/// `(1, 1)` of the start.
pub fn double_root_family(eta: f64) -> (HomSystem, HomSystem, ProjPoint) {
    let q = |a: Complex64, b: Complex64, cc: Complex64| {
        HomSystem::from_terms(vec![2], vec![vec![(vec![2, 0], a), (vec![1, 1], b), (vec![0, 2], cc)]]).unwrap()
    };
    let f = q(c(-1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
    let g = q(c(0.8, 0.0), Complex64::from_polar(eta, std::f64::consts::FRAC_PI_4), c(1.0, 0.0));
    let z = ProjPoint::from_slice(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
    (f, g, z)
}
