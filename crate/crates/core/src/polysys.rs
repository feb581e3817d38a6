//! Systems of homogeneous polynomials `f = (f_1, ..., f_n)` in `n + 1`
//! complex variables, with the unitarily invariant Bombieri-Weyl (Kostlan)
//! Hermitian structure.
//!
//! Coefficients are kept in the plain monomial basis. The Bombieri-Weyl weight
//! of a monomial `X^a` in an equation of degree `d` is `a_0! ... a_n! / d!`;
//! it is stored alongside the exponent vectors in a [`Support`], which is
//! shared (via `Arc`) between systems produced by arithmetic on a common
//! support, e.g. the points of a homotopy.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};

type Poly = BTreeMap<Vec<u32>, Complex64>;

/// Bombieri-Weyl weight `a_0! ... a_n! / d!` of the monomial `X^a`, `|a| = d`.
pub fn bw_weight(exponents: &[u32], degree: u32) -> f64 {
    let log_num: f64 = exponents.iter().map(|&a| ln_factorial(a as u64)).sum();
    (log_num - ln_factorial(degree as u64)).exp()
}

/// All exponent vectors of length `n_vars` summing to `degree`, in
/// lexicographic order.
pub fn monomials(n_vars: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(pos: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if pos + 1 == cur.len() {
            cur[pos] = left;
            out.push(cur.clone());
            return;
        }
        for a in 0..=left {
            cur[pos] = a;
            rec(pos + 1, left - a, cur, out);
        }
    }
    let mut out = Vec::new();
    if n_vars == 0 {
        return out;
    }
    let mut cur = vec![0; n_vars];
    rec(0, degree, &mut cur, &mut out);
    out
}

/// Monomial support of a system: per-equation sorted exponent vectors and
/// their Bombieri-Weyl weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Support {
    n_vars: usize,
    degrees: Vec<u32>,
    offsets: Vec<usize>,
    exponents: Vec<Vec<u32>>,
    weights: Vec<f64>,
}

impl Support {
    /// Each inner list must already be sorted and free of duplicates.
    fn from_sorted(n_vars: usize, degrees: Vec<u32>, per_eq: Vec<Vec<Vec<u32>>>) -> Self {
        let mut offsets = Vec::with_capacity(per_eq.len() + 1);
        let mut exponents = Vec::new();
        let mut weights = Vec::new();
        offsets.push(0);
        for (eq, &d) in per_eq.into_iter().zip(&degrees) {
            for e in eq {
                weights.push(bw_weight(&e, d));
                exponents.push(e);
            }
            offsets.push(exponents.len());
        }
        Support {
            n_vars,
            degrees,
            offsets,
            exponents,
            weights,
        }
    }

    fn range(&self, i: usize) -> std::ops::Range<usize> {
        self.offsets[i]..self.offsets[i + 1]
    }

    fn union(a: &Support, b: &Support) -> Support {
        let per_eq = (0..a.degrees.len())
            .map(|i| {
                let mut v: Vec<Vec<u32>> = a.exponents[a.range(i)]
                    .iter()
                    .chain(&b.exponents[b.range(i)])
                    .cloned()
                    .collect();
                v.sort();
                v.dedup();
                v
            })
            .collect();
        Support::from_sorted(a.n_vars, a.degrees.clone(), per_eq)
    }

    /// Total number of stored monomials.
    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }
}

/// A system of `n` homogeneous polynomials in `n + 1` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct HomSystem {
    support: Arc<Support>,
    coeffs: Vec<Complex64>,
}

impl HomSystem {
    /// Builds a system from `(exponents, coefficient)` terms per equation.
    ///
    /// Repeated exponents are summed and zero coefficients dropped. Every
    /// exponent vector must have length `n + 1` and sum to its equation's
    /// degree.
    pub fn from_terms(degrees: Vec<u32>, equations: Vec<Vec<(Vec<u32>, Complex64)>>) -> Result<Self> {
        let n = degrees.len();
        if n == 0 {
            return Err(Error::InvalidSystem("a system needs at least one equation".into()));
        }
        if equations.len() != n {
            return Err(Error::InvalidSystem(format!(
                "{} degrees declared but {} equations given",
                n,
                equations.len()
            )));
        }
        if let Some(i) = degrees.iter().position(|&d| d == 0) {
            return Err(Error::InvalidSystem(format!("equation {i} has degree 0")));
        }
        let n_vars = n + 1;
        let mut per_eq = Vec::with_capacity(n);
        let mut coeffs = Vec::new();
        for (i, (terms, &d)) in equations.into_iter().zip(&degrees).enumerate() {
            let mut poly = Poly::new();
            for (e, c) in terms {
                if e.len() != n_vars {
                    return Err(Error::InvalidSystem(format!(
                        "equation {i}: exponent vector of length {} (expected {n_vars})",
                        e.len()
                    )));
                }
                let total: u32 = e.iter().sum();
                if total != d {
                    return Err(Error::InvalidSystem(format!(
                        "equation {i}: monomial {e:?} has degree {total}, expected {d}"
                    )));
                }
                *poly.entry(e).or_default() += c;
            }
            poly.retain(|_, c| *c != Complex64::new(0.0, 0.0));
            let (exps, cs): (Vec<_>, Vec<_>) = poly.into_iter().unzip();
            per_eq.push(exps);
            coeffs.extend(cs);
        }
        Ok(HomSystem {
            support: Arc::new(Support::from_sorted(n_vars, degrees, per_eq)),
            coeffs,
        })
    }

    /// Number of equations `n`.
    pub fn n(&self) -> usize {
        self.support.degrees.len()
    }

    /// Number of variables `n + 1`.
    pub fn n_vars(&self) -> usize {
        self.support.n_vars
    }

    pub fn degrees(&self) -> &[u32] {
        &self.support.degrees
    }

    /// `D = max_i d_i`.
    pub fn max_degree(&self) -> u32 {
        self.support.degrees.iter().copied().max().unwrap_or(1)
    }

    pub fn support(&self) -> &Arc<Support> {
        &self.support
    }

    /// Terms of equation `i`, in lexicographic exponent order.
    pub fn terms(&self, i: usize) -> impl Iterator<Item = (&[u32], Complex64)> + '_ {
        let r = self.support.range(i);
        self.support.exponents[r.clone()]
            .iter()
            .map(Vec::as_slice)
            .zip(self.coeffs[r].iter().copied())
    }

    /// Number of stored monomials in equation `i`.
    pub fn equation_len(&self, i: usize) -> usize {
        self.support.range(i).len()
    }

    fn check_point(&self, x: &[Complex64]) -> Result<()> {
        if x.len() != self.n_vars() {
            return Err(Error::DimensionMismatch {
                expected: self.n_vars(),
                found: x.len(),
            });
        }
        Ok(())
    }

    fn check_shape(&self, other: &HomSystem) -> Result<()> {
        if self.degrees() != other.degrees() {
            return Err(Error::InvalidSystem(format!(
                "degree vectors differ: {:?} vs {:?}",
                self.degrees(),
                other.degrees()
            )));
        }
        Ok(())
    }

    /// Table `pow[j * (D + 1) + k] = x_j^k`.
    fn power_table(&self, x: &[Complex64]) -> Vec<Complex64> {
        let stride = self.max_degree() as usize + 1;
        let mut pows = Vec::with_capacity(x.len() * stride);
        for &xj in x {
            let mut p = Complex64::new(1.0, 0.0);
            for _ in 0..stride {
                pows.push(p);
                p *= xj;
            }
        }
        pows
    }

    /// `f(x)`.
    pub fn evaluate(&self, x: &[Complex64]) -> Result<Vec<Complex64>> {
        self.check_point(x)?;
        let stride = self.max_degree() as usize + 1;
        let pows = self.power_table(x);
        Ok((0..self.n())
            .map(|i| {
                self.terms(i)
                    .map(|(e, c)| {
                        e.iter()
                            .enumerate()
                            .fold(c, |acc, (j, &a)| acc * pows[j * stride + a as usize])
                    })
                    .sum()
            })
            .collect())
    }

    /// The `n x (n + 1)` Jacobian `Df(x)`.
    pub fn jacobian(&self, x: &[Complex64]) -> Result<DMatrix<Complex64>> {
        self.check_point(x)?;
        let stride = self.max_degree() as usize + 1;
        let pows = self.power_table(x);
        let mut jac = DMatrix::zeros(self.n(), self.n_vars());
        for i in 0..self.n() {
            for (e, c) in self.terms(i) {
                for (j, &aj) in e.iter().enumerate() {
                    if aj == 0 {
                        continue;
                    }
                    let mut v = c * aj as f64 * pows[j * stride + aj as usize - 1];
                    for (l, &al) in e.iter().enumerate() {
                        if l != j {
                            v *= pows[l * stride + al as usize];
                        }
                    }
                    jac[(i, j)] += v;
                }
            }
        }
        Ok(jac)
    }

    /// Bombieri-Weyl Hermitian product `<f, g> = sum c_a conj(c'_a) w(a)`,
    /// linear in the first argument.
    pub fn bw_inner(&self, other: &HomSystem) -> Result<Complex64> {
        self.check_shape(other)?;
        if self.shares_support(other) {
            return Ok(self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .zip(&self.support.weights)
                .map(|((a, b), w)| a * b.conj() * w)
                .sum());
        }
        let (sa, sb) = (&self.support, &other.support);
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..self.n() {
            let (ra, rb) = (sa.range(i), sb.range(i));
            let (mut p, mut q) = (ra.start, rb.start);
            while p < ra.end && q < rb.end {
                match sa.exponents[p].cmp(&sb.exponents[q]) {
                    Ordering::Less => p += 1,
                    Ordering::Greater => q += 1,
                    Ordering::Equal => {
                        acc += self.coeffs[p] * other.coeffs[q].conj() * sa.weights[p];
                        p += 1;
                        q += 1;
                    }
                }
            }
        }
        Ok(acc)
    }

    /// Bombieri-Weyl norm. Invariant under unitary changes of variables.
    pub fn bw_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.support.weights)
            .map(|(c, w)| c.norm_sqr() * w)
            .sum::<f64>()
            .sqrt()
    }

    fn shares_support(&self, other: &HomSystem) -> bool {
        Arc::ptr_eq(&self.support, &other.support) || *self.support == *other.support
    }

    /// Re-expresses `self` on a superset support.
    fn embed(&self, target: &Arc<Support>) -> HomSystem {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); target.len()];
        for i in 0..self.n() {
            let r = target.range(i);
            let slice = &target.exponents[r.clone()];
            for (e, c) in self.terms(i) {
                let k = slice
                    .binary_search_by(|probe| probe.as_slice().cmp(e))
                    .expect("target support is a superset");
                coeffs[r.start + k] = c;
            }
        }
        HomSystem {
            support: Arc::clone(target),
            coeffs,
        }
    }

    /// Both systems re-expressed on their common (union) support, so that
    /// later linear combinations are coefficient-wise.
    pub fn align(&self, other: &HomSystem) -> Result<(HomSystem, HomSystem)> {
        self.check_shape(other)?;
        if self.shares_support(other) {
            let b = HomSystem {
                support: Arc::clone(&self.support),
                coeffs: other.coeffs.clone(),
            };
            return Ok((self.clone(), b));
        }
        let u = Arc::new(Support::union(&self.support, &other.support));
        Ok((self.embed(&u), other.embed(&u)))
    }

    /// `a * self + b * other`.
    pub fn combine(&self, a: Complex64, other: &HomSystem, b: Complex64) -> Result<HomSystem> {
        let (f, g) = self.align(other)?;
        let coeffs = f
            .coeffs
            .iter()
            .zip(&g.coeffs)
            .map(|(x, y)| a * x + b * y)
            .collect();
        Ok(HomSystem {
            support: f.support,
            coeffs,
        })
    }

    pub fn scaled(&self, s: Complex64) -> HomSystem {
        HomSystem {
            support: Arc::clone(&self.support),
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    /// Representative of unit Bombieri-Weyl norm.
    pub fn normalized(&self) -> Result<HomSystem> {
        let nrm = self.bw_norm();
        if nrm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scaled(Complex64::new(1.0 / nrm, 0.0)))
    }

    /// Drops coefficients that are exactly zero.
    pub fn pruned(&self) -> HomSystem {
        let equations = (0..self.n())
            .map(|i| self.terms(i).map(|(e, c)| (e.to_vec(), c)).collect())
            .collect();
        HomSystem::from_terms(self.degrees().to_vec(), equations).expect("already validated")
    }

    /// The system `x -> f(M x)`.
    pub fn compose_linear(&self, m: &DMatrix<Complex64>) -> Result<HomSystem> {
        let nv = self.n_vars();
        if m.nrows() != nv || m.ncols() != nv {
            return Err(Error::DimensionMismatch {
                expected: nv,
                found: m.nrows().max(m.ncols()),
            });
        }
        // powers[j][p] = (row j of M, as a linear form)^p
        let dmax = self.max_degree() as usize;
        let powers: Vec<Vec<Poly>> = (0..nv)
            .map(|j| {
                let form: Vec<Complex64> = m.row(j).iter().copied().collect();
                let lin = linear_form(&form);
                let mut v = vec![constant(nv)];
                for p in 1..=dmax {
                    v.push(poly_mul(&v[p - 1], &lin));
                }
                v
            })
            .collect();
        let equations = (0..self.n())
            .map(|i| {
                let mut acc = Poly::new();
                for (e, c) in self.terms(i) {
                    let mut prod = constant(nv);
                    for (j, &a) in e.iter().enumerate() {
                        if a > 0 {
                            prod = poly_mul(&prod, &powers[j][a as usize]);
                        }
                    }
                    for (k, v) in prod {
                        *acc.entry(k).or_default() += c * v;
                    }
                }
                acc.into_iter().collect()
            })
            .collect();
        HomSystem::from_terms(self.degrees().to_vec(), equations)
    }

    /// Bombieri-Weyl orthogonal projection of `self` onto the systems that
    /// vanish at `zeta`: subtracts `f_i(zeta) (<X, zeta> / |zeta|^2)^{d_i}`
    /// from each equation.
    pub fn vanishing_at(&self, zeta: &[Complex64]) -> Result<HomSystem> {
        let vals = self.evaluate(zeta)?;
        let nrm2: f64 = zeta.iter().map(|z| z.norm_sqr()).sum();
        if nrm2 == 0.0 {
            return Err(Error::ZeroVector);
        }
        let form: Vec<Complex64> = zeta.iter().map(|z| z.conj() / nrm2).collect();
        let lin = linear_form(&form);
        let equations = (0..self.n())
            .map(|i| {
                let d = self.degrees()[i] as usize;
                let mut kernel = constant(self.n_vars());
                for _ in 0..d {
                    kernel = poly_mul(&kernel, &lin);
                }
                let mut acc: Poly = self.terms(i).map(|(e, c)| (e.to_vec(), c)).collect();
                for (k, v) in kernel {
                    *acc.entry(k).or_default() -= vals[i] * v;
                }
                acc.into_iter().collect()
            })
            .collect();
        HomSystem::from_terms(self.degrees().to_vec(), equations)
    }
}

fn constant(n_vars: usize) -> Poly {
    let mut p = Poly::new();
    p.insert(vec![0; n_vars], Complex64::new(1.0, 0.0));
    p
}

fn linear_form(coeffs: &[Complex64]) -> Poly {
    let nv = coeffs.len();
    coeffs
        .iter()
        .enumerate()
        .map(|(j, &c)| {
            let mut e = vec![0; nv];
            e[j] = 1;
            (e, c)
        })
        .collect()
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            let e: Vec<u32> = ea.iter().zip(eb).map(|(x, y)| x + y).collect();
            *out.entry(e).or_default() += ca * cb;
        }
    }
    out
}

/// Complex Gaussian with `E|z|^2 = variance`.
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (variance / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// Random system from the Kostlan ensemble, driven by the given generator.
///
/// Coefficient `c_{i,a}` is complex Gaussian with variance `1 / w(a, d_i)`,
/// which makes the system standard Gaussian in a Bombieri-Weyl orthonormal
/// basis. Every monomial of each degree is present.
pub fn kostlan_sample_with<R: Rng + ?Sized>(n: usize, degrees: &[u32], rng: &mut R) -> Result<HomSystem> {
    if n == 0 || degrees.len() != n {
        return Err(Error::InvalidSystem(format!(
            "need n >= 1 and n degrees (n = {n}, {} degrees)",
            degrees.len()
        )));
    }
    if degrees.contains(&0) {
        return Err(Error::InvalidSystem("degrees must be positive".into()));
    }
    let equations = degrees
        .iter()
        .map(|&d| {
            monomials(n + 1, d)
                .into_iter()
                .map(|e| {
                    let var = 1.0 / bw_weight(&e, d);
                    let c = complex_gaussian(rng, var);
                    (e, c)
                })
                .collect()
        })
        .collect();
    HomSystem::from_terms(degrees.to_vec(), equations)
}

/// Random Kostlan system, deterministic in `seed`.
pub fn kostlan_sample(n: usize, degrees: &[u32], seed: u64) -> Result<HomSystem> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    kostlan_sample_with(n, degrees, &mut rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sys(degrees: Vec<u32>, eqs: Vec<Vec<(Vec<u32>, f64)>>) -> HomSystem {
        let eqs = eqs
            .into_iter()
            .map(|eq| eq.into_iter().map(|(e, v)| (e, c(v, 0.0))).collect())
            .collect();
        HomSystem::from_terms(degrees, eqs).unwrap()
    }

    // X_1^2 - X_0 X_1
    fn parabola() -> HomSystem {
        sys(vec![2], vec![vec![(vec![0, 2], 1.0), (vec![1, 1], -1.0)]])
    }

    #[test]
    fn evaluate_examples() {
        let f = sys(vec![2], vec![vec![(vec![2, 0], 1.0)]]);
        assert_eq!(f.evaluate(&[c(2.0, 0.0), c(0.0, 0.0)]).unwrap(), vec![c(4.0, 0.0)]);

        let f = sys(vec![2], vec![vec![(vec![1, 1], 1.0)]]);
        assert_eq!(f.evaluate(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap(), vec![c(0.0, 0.0)]);

        assert_eq!(parabola().evaluate(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap(), vec![c(0.0, 0.0)]);
    }

    #[test]
    fn dimension_mismatch() {
        let f = parabola();
        assert_eq!(
            f.evaluate(&[c(1.0, 0.0)]),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        );
        assert!(f.jacobian(&[c(1.0, 0.0); 3]).is_err());
    }

    #[test]
    fn jacobian_examples() {
        let f = sys(vec![2], vec![vec![(vec![2, 0], 1.0), (vec![0, 2], -1.0)]]);
        let j = f.jacobian(&[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert_eq!((j[(0, 0)], j[(0, 1)]), (c(2.0, 0.0), c(-2.0, 0.0)));

        let f = sys(vec![2], vec![vec![(vec![1, 1], 1.0)]]);
        let j = f.jacobian(&[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert_eq!((j[(0, 0)], j[(0, 1)]), (c(0.0, 0.0), c(1.0, 0.0)));
    }

    #[test]
    fn euler_identity_by_hand() {
        // f = X_1^2 - X_0 X_1 at (1, 2): f = 2, df/dX0 = -X1 = -2, df/dX1 = 2X1 - X0 = 3.
        let f = parabola();
        let x = [c(1.0, 0.0), c(2.0, 0.0)];
        let j = f.jacobian(&x).unwrap();
        assert_eq!((j[(0, 0)], j[(0, 1)]), (c(-2.0, 0.0), c(3.0, 0.0)));
        let jx = j[(0, 0)] * x[0] + j[(0, 1)] * x[1];
        assert_eq!(jx, c(4.0, 0.0));
        assert_eq!(jx, 2.0 * f.evaluate(&x).unwrap()[0]);
    }

    #[test]
    fn bw_norm_examples() {
        for d in 1..=7 {
            let f = sys(vec![d], vec![vec![(vec![d, 0], 1.0)]]);
            assert!((f.bw_norm() - 1.0).abs() < 1e-15);
        }
        let f = sys(vec![2], vec![vec![(vec![1, 1], 1.0)]]);
        assert!((f.bw_norm() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((parabola().bw_norm() - 1.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn weights_survive_large_degree() {
        // 30! overflows nothing in log space; X_0^15 X_1^15 has weight 1/C(30,15).
        let w = bw_weight(&[15, 15], 30);
        assert!((w * 155_117_520.0 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn from_terms_validation() {
        assert!(HomSystem::from_terms(vec![], vec![]).is_err());
        assert!(HomSystem::from_terms(vec![0], vec![vec![]]).is_err());
        let bad_sum = HomSystem::from_terms(vec![2], vec![vec![(vec![1, 0], c(1.0, 0.0))]]);
        assert!(matches!(bad_sum, Err(Error::InvalidSystem(_))));
        let bad_len = HomSystem::from_terms(vec![1], vec![vec![(vec![1, 0, 0], c(1.0, 0.0))]]);
        assert!(matches!(bad_len, Err(Error::InvalidSystem(_))));
        // duplicates merge, cancellations vanish
        let f = HomSystem::from_terms(
            vec![1],
            vec![vec![
                (vec![1, 0], c(1.0, 0.0)),
                (vec![0, 1], c(2.0, 0.0)),
                (vec![1, 0], c(-1.0, 0.0)),
            ]],
        )
        .unwrap();
        assert_eq!(f.equation_len(0), 1);
    }

    #[test]
    fn kostlan_determinism_and_support() {
        let a = kostlan_sample(2, &[2, 3], 11).unwrap();
        let b = kostlan_sample(2, &[2, 3], 11).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, kostlan_sample(2, &[2, 3], 12).unwrap());
        assert_eq!(a.equation_len(0), 6);
        assert_eq!(a.equation_len(1), 10);
        assert!(kostlan_sample(0, &[], 1).is_err());
        assert!(kostlan_sample(1, &[0], 1).is_err());
    }

    #[test]
    fn kostlan_mean_square_norm() {
        // E ||f||^2 = number of BW-orthonormal coordinates = 3 for n = 1, d = 2.
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let m = 10_000;
        let mean: f64 = (0..m)
            .map(|_| kostlan_sample_with(1, &[2], &mut rng).unwrap().bw_norm().powi(2))
            .sum::<f64>()
            / m as f64;
        assert!((mean - 3.0).abs() < 0.15, "mean {mean}");
    }

    #[test]
    fn combine_over_different_supports() {
        let f = sys(vec![2], vec![vec![(vec![2, 0], 1.0)]]);
        let g = sys(vec![2], vec![vec![(vec![0, 2], 1.0)]]);
        let h = f.combine(c(2.0, 0.0), &g, c(0.0, 1.0)).unwrap();
        let x = [c(1.0, 0.0), c(1.0, 0.0)];
        assert_eq!(h.evaluate(&x).unwrap(), vec![c(2.0, 1.0)]);
        assert_eq!(f.bw_inner(&g).unwrap(), c(0.0, 0.0));
        assert!((h.bw_norm().powi(2) - 5.0).abs() < 1e-14);
        let shape = sys(vec![1], vec![vec![(vec![1, 0], 1.0)]]);
        assert!(f.combine(c(1.0, 0.0), &shape, c(1.0, 0.0)).is_err());
    }

    #[test]
    fn vanishing_at_projects_onto_fiber() {
        let f = kostlan_sample(2, &[2, 3], 5).unwrap();
        let zeta = [c(0.6, 0.0), c(0.0, 0.48), c(0.64, 0.0)];
        let g = f.vanishing_at(&zeta).unwrap();
        for v in g.evaluate(&zeta).unwrap() {
            assert!(v.norm() < 1e-12);
        }
        // f - g is BW-orthogonal to every system vanishing at zeta, g in particular.
        let diff = f.combine(c(1.0, 0.0), &g, c(-1.0, 0.0)).unwrap();
        assert!(diff.bw_inner(&g).unwrap().norm() < 1e-12);
    }

    #[test]
    fn compose_with_permutation() {
        // swapping X_0 and X_1 in X_0^2 X_1 gives X_0 X_1^2
        let f = sys(vec![3], vec![vec![(vec![2, 1], 1.0)]]);
        let mut p = DMatrix::zeros(2, 2);
        p[(0, 1)] = c(1.0, 0.0);
        p[(1, 0)] = c(1.0, 0.0);
        let g = f.compose_linear(&p).unwrap();
        let terms: Vec<_> = g.terms(0).collect();
        assert_eq!(terms, vec![(&[1u32, 2][..], c(1.0, 0.0))]);
    }

    #[test]
    fn monomial_counts() {
        assert_eq!(monomials(3, 2).len(), 6);
        assert_eq!(monomials(3, 3).len(), 10);
        assert_eq!(monomials(2, 4).len(), 5);
        assert!(monomials(4, 3).iter().all(|e| e.iter().sum::<u32>() == 3));
    }
}
