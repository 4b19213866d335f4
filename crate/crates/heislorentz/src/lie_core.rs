//! The rank-`n` Heisenberg algebra in exponential coordinates, together with
//! the one-dimensional warped extension used for the model geometries.
//!
//! Basis conventions, used everywhere downstream:
//!
//! * Heisenberg algebra `h_n`: ordered basis `{Z, X_1..X_n, Y_1..Y_n}` with
//!   the only nonzero brackets `[X_i, Y_i] = Z`. Coordinate columns follow
//!   that order, so a `LinearMap` is a `(2n+1) x (2n+1)` matrix acting on
//!   columns.
//! * Warped extension `s_lambda`: ordered basis `{Z, X_1, Y_1, .., X_n, Y_n, W}`
//!   (blocks interleaved) with `[X_i, Y_i] = lambda_i Z`, `[W, X_i] = lambda_i Y_i`,
//!   `[W, Y_i] = -lambda_i X_i`.
//!
//! Because the algebra is 2-step nilpotent, the group law truncates exactly:
//! `exp(u) exp(v) = exp(u + v + [u,v]/2)`. With rational inputs the law is
//! exact rational arithmetic, which the lattice code relies on.

use nalgebra::{DMatrix, DVector};
use num_traits::{One, Zero};

use crate::rational::{rat_int, rat_to_f64, Rat};
use crate::{Error, Result};

/// Scalars the algebra is defined over: `f64` for numerics, `Rat` for exact
/// lattice arithmetic.
pub trait Coeff:
    Clone
    + PartialEq
    + Zero
    + One
    + std::ops::Neg<Output = Self>
    + std::ops::Sub<Output = Self>
    + std::ops::Mul<Output = Self>
{
    fn half(self) -> Self;
}

impl Coeff for f64 {
    fn half(self) -> f64 {
        0.5 * self
    }
}

impl Coeff for Rat {
    fn half(self) -> Rat {
        self / rat_int(2)
    }
}

/// Element of `h_n` in exponential coordinates.
///
/// `x[i]`, `y[i]` are the coefficients of `X_{i+1}`, `Y_{i+1}`; `z` the
/// coefficient of the central `Z`.
#[derive(Clone, Debug, PartialEq, serde::Serialize)]
pub struct AlgebraVector<S = f64> {
    pub z: S,
    pub x: Vec<S>,
    pub y: Vec<S>,
}

impl<S: Coeff> AlgebraVector<S> {
    pub fn zero(n: usize) -> Self {
        Self { z: S::zero(), x: vec![S::zero(); n], y: vec![S::zero(); n] }
    }

    pub fn z_basis(n: usize) -> Self {
        Self { z: S::one(), ..Self::zero(n) }
    }

    /// `X_{i+1}` (zero-based `i`).
    pub fn x_basis(n: usize, i: usize) -> Self {
        let mut v = Self::zero(n);
        v.x[i] = S::one();
        v
    }

    /// `Y_{i+1}` (zero-based `i`).
    pub fn y_basis(n: usize, i: usize) -> Self {
        let mut v = Self::zero(n);
        v.y[i] = S::one();
        v
    }

    pub fn n(&self) -> usize {
        debug_assert_eq!(self.x.len(), self.y.len());
        self.x.len()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        assert_eq!(self.n(), rhs.n(), "rank mismatch");
        Self {
            z: self.z.clone() + rhs.z.clone(),
            x: self.x.iter().zip(&rhs.x).map(|(a, b)| a.clone() + b.clone()).collect(),
            y: self.y.iter().zip(&rhs.y).map(|(a, b)| a.clone() + b.clone()).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        Self {
            z: -self.z.clone(),
            x: self.x.iter().map(|a| -a.clone()).collect(),
            y: self.y.iter().map(|a| -a.clone()).collect(),
        }
    }

    pub fn scale(&self, s: &S) -> Self {
        Self {
            z: self.z.clone() * s.clone(),
            x: self.x.iter().map(|a| a.clone() * s.clone()).collect(),
            y: self.y.iter().map(|a| a.clone() * s.clone()).collect(),
        }
    }

    /// Coordinates in the `{Z, X_1..X_n, Y_1..Y_n}` order.
    pub fn coords(&self) -> Vec<S> {
        let mut out = Vec::with_capacity(2 * self.n() + 1);
        out.push(self.z.clone());
        out.extend(self.x.iter().cloned());
        out.extend(self.y.iter().cloned());
        out
    }

    pub fn from_coords(c: &[S]) -> Result<Self> {
        if c.len() % 2 != 1 {
            return Err(Error::DimensionMismatch(format!(
                "coordinate length {} is not 2n+1",
                c.len()
            )));
        }
        let n = c.len() / 2;
        Ok(Self { z: c[0].clone(), x: c[1..=n].to_vec(), y: c[n + 1..].to_vec() })
    }
}

impl AlgebraVector<f64> {
    pub fn to_dvec(&self) -> DVector<f64> {
        DVector::from_vec(self.coords())
    }

    pub fn from_dvec(v: &DVector<f64>) -> Result<Self> {
        Self::from_coords(v.as_slice())
    }

    pub fn norm(&self) -> f64 {
        self.coords().iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs_diff(&self, rhs: &Self) -> f64 {
        self.coords()
            .iter()
            .zip(rhs.coords())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl AlgebraVector<Rat> {
    pub fn to_f64(&self) -> AlgebraVector<f64> {
        AlgebraVector {
            z: rat_to_f64(&self.z),
            x: self.x.iter().map(rat_to_f64).collect(),
            y: self.y.iter().map(rat_to_f64).collect(),
        }
    }
}

/// `[u, v] = sum_i (u_x[i] v_y[i] - u_y[i] v_x[i]) Z`.
pub fn bracket<S: Coeff>(u: &AlgebraVector<S>, v: &AlgebraVector<S>) -> AlgebraVector<S> {
    assert_eq!(u.n(), v.n(), "rank mismatch");
    let mut z = S::zero();
    for i in 0..u.n() {
        z = z + u.x[i].clone() * v.y[i].clone() - u.y[i].clone() * v.x[i].clone();
    }
    AlgebraVector { z, ..AlgebraVector::zero(u.n()) }
}

/// Group law in exponential coordinates: `u * v = u + v + [u,v]/2`.
///
/// Exact (no truncation error beyond the scalar type) because the algebra is
/// 2-step nilpotent.
pub fn bch_multiply<S: Coeff>(u: &AlgebraVector<S>, v: &AlgebraVector<S>) -> AlgebraVector<S> {
    let mut out = u.add(v);
    let br = bracket(u, v);
    out.z = out.z + br.z.half();
    out
}

/// The full ordered basis `{Z, X_1..X_n, Y_1..Y_n}`.
pub fn basis_vectors(n: usize) -> Vec<AlgebraVector> {
    let mut out = Vec::with_capacity(2 * n + 1);
    out.push(AlgebraVector::z_basis(n));
    for i in 0..n {
        out.push(AlgebraVector::x_basis(n, i));
    }
    for i in 0..n {
        out.push(AlgebraVector::y_basis(n, i));
    }
    out
}

/// Linear endomorphism of `h_n`, stored as a matrix on coordinate columns.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    n: usize,
    pub mat: DMatrix<f64>,
}

impl LinearMap {
    pub fn from_matrix(n: usize, mat: DMatrix<f64>) -> Result<Self> {
        let d = 2 * n + 1;
        if mat.nrows() != d || mat.ncols() != d {
            return Err(Error::DimensionMismatch(format!(
                "expected {d}x{d} matrix for rank {n}, got {}x{}",
                mat.nrows(),
                mat.ncols()
            )));
        }
        Ok(Self { n, mat })
    }

    pub fn identity(n: usize) -> Self {
        Self { n, mat: DMatrix::identity(2 * n + 1, 2 * n + 1) }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        2 * self.n + 1
    }

    pub fn apply(&self, v: &AlgebraVector) -> AlgebraVector {
        assert_eq!(v.n(), self.n, "rank mismatch");
        let out = &self.mat * v.to_dvec();
        AlgebraVector::from_dvec(&out).expect("square matrix preserves dimension")
    }

    /// `self` after `rhs`: `(self.compose(rhs))(v) = self(rhs(v))`.
    pub fn compose(&self, rhs: &LinearMap) -> LinearMap {
        assert_eq!(self.n, rhs.n, "rank mismatch");
        LinearMap { n: self.n, mat: &self.mat * &rhs.mat }
    }

    pub fn inverse(&self) -> Result<LinearMap> {
        let inv = self
            .mat
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("linear map is not invertible".into()))?;
        Ok(LinearMap { n: self.n, mat: inv })
    }

    pub fn max_abs_diff(&self, rhs: &LinearMap) -> f64 {
        (&self.mat - &rhs.mat).amax()
    }

    /// Largest violation of `m[u,v] = [mu, mv]` over basis pairs.
    pub fn automorphism_residual(&self) -> f64 {
        let basis = basis_vectors(self.n);
        let images: Vec<_> = basis.iter().map(|b| self.apply(b)).collect();
        let mut worst = 0.0f64;
        for i in 0..basis.len() {
            for j in i + 1..basis.len() {
                let lhs = self.apply(&bracket(&basis[i], &basis[j]));
                let rhs = bracket(&images[i], &images[j]);
                worst = worst.max(lhs.max_abs_diff(&rhs));
            }
        }
        worst
    }

    /// Largest violation of the Leibniz rule `m[u,v] = [mu,v] + [u,mv]`.
    pub fn derivation_residual(&self) -> f64 {
        let basis = basis_vectors(self.n);
        let images: Vec<_> = basis.iter().map(|b| self.apply(b)).collect();
        let mut worst = 0.0f64;
        for i in 0..basis.len() {
            for j in i + 1..basis.len() {
                let lhs = self.apply(&bracket(&basis[i], &basis[j]));
                let rhs = bracket(&images[i], &basis[j]).add(&bracket(&basis[i], &images[j]));
                worst = worst.max(lhs.max_abs_diff(&rhs));
            }
        }
        worst
    }

    /// Bracket preservation to `tol` plus invertibility (relative smallest
    /// singular value above `1e-12`).
    pub fn is_automorphism(&self, tol: f64) -> bool {
        if self.automorphism_residual() > tol {
            return false;
        }
        let svd = self.mat.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        smax > 0.0 && smin > 1e-12 * smax
    }

    pub fn is_derivation(&self, tol: f64) -> bool {
        self.derivation_residual() <= tol
    }
}

/// Per-block rotation of `h_n`: block `i` of `span{X_i, Y_i}` is rotated by
/// `angles[i]`, the center is fixed. This is `C_s` restricted to `h_n` when
/// all angles equal `s`.
pub fn block_rotation(n: usize, angles: &[f64]) -> LinearMap {
    assert_eq!(angles.len(), n, "one angle per block");
    let d = 2 * n + 1;
    let mut m = DMatrix::identity(d, d);
    for (i, &a) in angles.iter().enumerate() {
        let (c, s) = (a.cos(), a.sin());
        let (xi, yi) = (1 + i, 1 + n + i);
        m[(xi, xi)] = c;
        m[(xi, yi)] = -s;
        m[(yi, xi)] = s;
        m[(yi, yi)] = c;
    }
    LinearMap { n, mat: m }
}

/// The automorphism `C_s = exp(s ad W)` of `h_n` for the warping weights
/// `lambda`: block `i` rotates by `lambda_i s`, the center is fixed.
pub fn c_s(n: usize, s: f64, lambda: &[f64]) -> LinearMap {
    let angles: Vec<f64> = lambda.iter().map(|l| l * s).collect();
    block_rotation(n, &angles)
}

/// Derivative `d/ds C_s` as a matrix on `h_n` coordinates.
pub fn c_s_deriv(n: usize, s: f64, lambda: &[f64]) -> LinearMap {
    let d = 2 * n + 1;
    let mut m = DMatrix::zeros(d, d);
    for (i, &l) in lambda.iter().enumerate() {
        let a = l * s;
        let (c, si) = (a.cos(), a.sin());
        let (xi, yi) = (1 + i, 1 + n + i);
        m[(xi, xi)] = -l * si;
        m[(xi, yi)] = -l * c;
        m[(yi, xi)] = l * c;
        m[(yi, yi)] = -l * si;
    }
    LinearMap { n, mat: m }
}

/// `Ad(exp tW)` on the warped algebra `s_lambda`, in the interleaved basis
/// `{Z, X_1, Y_1, .., X_n, Y_n, W}`: identity on `Z` and `W`, and the
/// `2x2` rotation by `lambda_i t` on each `{X_i, Y_i}` block.
pub fn ad_exp_tw(t: f64, lambda: &[f64]) -> DMatrix<f64> {
    let n = lambda.len();
    let d = 2 * n + 2;
    let mut m = DMatrix::identity(d, d);
    for (i, &l) in lambda.iter().enumerate() {
        let a = l * t;
        let (c, s) = (a.cos(), a.sin());
        let (xi, yi) = (1 + 2 * i, 2 + 2 * i);
        m[(xi, xi)] = c;
        m[(xi, yi)] = -s;
        m[(yi, xi)] = s;
        m[(yi, yi)] = c;
    }
    m
}

/// Element of the warped algebra `s_lambda`.
#[derive(Clone, Debug, PartialEq)]
pub struct WarpedVector {
    pub z: f64,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub w: f64,
}

impl WarpedVector {
    pub fn zero(n: usize) -> Self {
        Self { z: 0.0, x: vec![0.0; n], y: vec![0.0; n], w: 0.0 }
    }

    pub fn from_h(h: &AlgebraVector, w: f64) -> Self {
        Self { z: h.z, x: h.x.clone(), y: h.y.clone(), w }
    }

    pub fn h_part(&self) -> AlgebraVector {
        AlgebraVector { z: self.z, x: self.x.clone(), y: self.y.clone() }
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Coordinates in the interleaved order `{Z, X_1, Y_1, .., X_n, Y_n, W}`
    /// matching [`ad_exp_tw`].
    pub fn to_column(&self) -> DVector<f64> {
        let n = self.n();
        let mut c = DVector::zeros(2 * n + 2);
        c[0] = self.z;
        for i in 0..n {
            c[1 + 2 * i] = self.x[i];
            c[2 + 2 * i] = self.y[i];
        }
        c[2 * n + 1] = self.w;
        c
    }

    pub fn from_column(c: &DVector<f64>) -> Result<Self> {
        if c.len() % 2 != 0 || c.len() < 2 {
            return Err(Error::DimensionMismatch(format!(
                "warped coordinate length {} is not 2n+2",
                c.len()
            )));
        }
        let n = (c.len() - 2) / 2;
        let mut v = Self::zero(n);
        v.z = c[0];
        for i in 0..n {
            v.x[i] = c[1 + 2 * i];
            v.y[i] = c[2 + 2 * i];
        }
        v.w = c[2 * n + 1];
        Ok(v)
    }
}

/// The bi-invariant Lorentz pairing on `s_lambda`: `X_i, Y_i` orthonormal,
/// `Z` and `W` isotropic and orthogonal to them, `<Z, W> = 1`.
pub fn biinvariant_inner(u: &WarpedVector, v: &WarpedVector) -> f64 {
    assert_eq!(u.n(), v.n(), "rank mismatch");
    let mut s = u.z * v.w + u.w * v.z;
    for i in 0..u.n() {
        s += u.x[i] * v.x[i] + u.y[i] * v.y[i];
    }
    s
}

/// Gram matrix of [`biinvariant_inner`] in the interleaved basis.
pub fn biinvariant_gram(n: usize) -> DMatrix<f64> {
    let d = 2 * n + 2;
    let mut g = DMatrix::zeros(d, d);
    g[(0, d - 1)] = 1.0;
    g[(d - 1, 0)] = 1.0;
    for i in 0..2 * n {
        g[(1 + i, 1 + i)] = 1.0;
    }
    g
}

/// Point `exp(tW) exp(h)` of the warped group (weights `lambda = (1,..,1)`).
#[derive(Clone, Debug, PartialEq)]
pub struct WarpedPoint {
    pub t: f64,
    pub h: AlgebraVector,
}

impl WarpedPoint {
    pub fn identity(n: usize) -> Self {
        Self { t: 0.0, h: AlgebraVector::zero(n) }
    }

    pub fn n(&self) -> usize {
        self.h.n()
    }
}

fn unit_lambda(n: usize) -> Vec<f64> {
    vec![1.0; n]
}

/// Product in the warped group:
/// `(t1, h1)(t2, h2) = (t1 + t2, C_{-t2}(h1) * h2)` with `*` the Heisenberg
/// group law. Weights are `(1,..,1)`; this is the group the model
/// deformations live on.
pub fn warped_multiply(p: &WarpedPoint, q: &WarpedPoint) -> Result<WarpedPoint> {
    if p.n() != q.n() {
        return Err(Error::DimensionMismatch("warped points of different rank".into()));
    }
    let n = p.n();
    let moved = c_s(n, -q.t, &unit_lambda(n)).apply(&p.h);
    Ok(WarpedPoint { t: p.t + q.t, h: bch_multiply(&moved, &q.h) })
}

/// Inverse in the warped group: `(t, h)^{-1} = (-t, -C_t(h))`.
pub fn warped_inverse(p: &WarpedPoint) -> WarpedPoint {
    let n = p.n();
    WarpedPoint { t: -p.t, h: c_s(n, p.t, &unit_lambda(n)).apply(&p.h).neg() }
}

/// Right-translate the chart tangent `(dt, dv)` at `p` to the identity.
///
/// For `p = (t, h)` the differential of right multiplication by `p^{-1}`
/// sends `(dt, dv)` to the Lie-algebra element with `W`-part `dt` and
/// `h`-part `C_t(dv + [h, dv]/2)`. Combined with [`biinvariant_inner`] this
/// evaluates the bi-invariant metric in chart coordinates.
pub fn warped_tangent_at_identity(p: &WarpedPoint, dt: f64, dv: &AlgebraVector) -> WarpedVector {
    let n = p.n();
    let corrected = dv.add(&bracket(&p.h, dv).scale(&0.5));
    let moved = c_s(n, p.t, &unit_lambda(n)).apply(&corrected);
    WarpedVector::from_h(&moved, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat_i64;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rand_vec(rng: &mut StdRng, n: usize) -> AlgebraVector {
        AlgebraVector {
            z: rng.gen_range(-2.0..2.0),
            x: (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
            y: (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
        }
    }

    fn rand_rat_vec(rng: &mut StdRng, n: usize) -> AlgebraVector<Rat> {
        let mut r = || rat_i64(rng.gen_range(-20i64..20), rng.gen_range(1i64..12));
        AlgebraVector {
            z: r(),
            x: (0..n).map(|_| r()).collect(),
            y: (0..n).map(|_| r()).collect(),
        }
    }

    #[test]
    fn bracket_is_central_and_antisymmetric() {
        let mut rng = StdRng::seed_from_u64(7);
        for _ in 0..50 {
            let (u, v) = (rand_vec(&mut rng, 2), rand_vec(&mut rng, 2));
            let b = bracket(&u, &v);
            assert!(b.x.iter().chain(&b.y).all(|&c| c == 0.0));
            let c = bracket(&v, &u);
            assert!((b.z + c.z).abs() < 1e-14);
        }
    }

    #[test]
    fn bch_group_axioms_exact_rational() {
        // identity, inverse, and associativity against the symmetric
        // closed form u+v+w + ([u,v]+[u,w]+[v,w])/2
        let mut rng = StdRng::seed_from_u64(11);
        for n in 1..=3 {
            for _ in 0..20 {
                let u = rand_rat_vec(&mut rng, n);
                let v = rand_rat_vec(&mut rng, n);
                let w = rand_rat_vec(&mut rng, n);
                let e = AlgebraVector::<Rat>::zero(n);
                assert_eq!(bch_multiply(&u, &e), u);
                assert_eq!(bch_multiply(&e, &u), u);
                assert_eq!(bch_multiply(&u, &u.neg()), e);

                let left = bch_multiply(&bch_multiply(&u, &v), &w);
                let right = bch_multiply(&u, &bch_multiply(&v, &w));
                let mut oracle = u.add(&v).add(&w);
                oracle.z = oracle.z
                    + (bracket(&u, &v).z + bracket(&u, &w).z + bracket(&v, &w).z).half();
                assert_eq!(left, oracle);
                assert_eq!(right, oracle);
            }
        }
    }

    #[test]
    fn automorphism_and_derivation_residuals() {
        // rotation fixing Z is an automorphism
        assert!(block_rotation(2, &[0.3, -1.1]).is_automorphism(1e-12));

        // scaling every X_i by 2 needs Z -> 2 Z to stay an automorphism
        let mut m = DMatrix::identity(5, 5);
        m[(1, 1)] = 2.0;
        m[(2, 2)] = 2.0;
        let bad = LinearMap::from_matrix(2, m.clone()).unwrap();
        assert!(!bad.is_automorphism(1e-9));
        m[(0, 0)] = 2.0;
        let good = LinearMap::from_matrix(2, m).unwrap();
        assert!(good.is_automorphism(1e-12));

        // grading derivation: 2 on Z, 1 on everything else
        let mut d = DMatrix::identity(3, 3);
        d[(0, 0)] = 2.0;
        let grading = LinearMap::from_matrix(1, d).unwrap();
        assert!(grading.is_derivation(1e-12));
        // the rotation generator (kills Z) is a derivation too
        let j = c_s_deriv(1, 0.0, &[1.0]);
        assert!(j.is_derivation(1e-12));
        // but the rotation itself is not
        assert!(!block_rotation(1, &[0.4]).is_derivation(1e-9));
    }

    #[test]
    fn ad_exp_tw_matches_block_display() {
        // frozen from the 2x2 rotation blocks with weights (1, 1/2) at t = pi/3
        let t = std::f64::consts::FRAC_PI_3;
        let m = ad_exp_tw(t, &[1.0, 0.5]);
        assert_eq!(m.nrows(), 6);
        assert!((m[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((m[(5, 5)] - 1.0).abs() < 1e-15);
        assert!((m[(1, 1)] - 0.5).abs() < 1e-15); // cos(pi/3)
        assert!((m[(1, 2)] + 0.75f64.sqrt()).abs() < 1e-15); // -sin(pi/3)
        assert!((m[(2, 1)] - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((m[(3, 3)] - (t / 2.0).cos()).abs() < 1e-15);
        assert!((m[(3, 4)] + (t / 2.0).sin()).abs() < 1e-15);
        // off-block couplings vanish
        assert_eq!(m[(1, 3)], 0.0);
        assert_eq!(m[(0, 5)], 0.0);
    }

    #[test]
    fn c_s_derivative_is_consistent() {
        let lambda = [1.0, 0.7];
        let (s, h) = (0.9, 1e-6);
        let fd = (c_s(2, s + h, &lambda).mat - c_s(2, s - h, &lambda).mat) / (2.0 * h);
        let an = c_s_deriv(2, s, &lambda).mat;
        assert!((fd - an).amax() < 1e-9);
    }

    #[test]
    fn warped_multiply_frozen_example() {
        // (0, exp X1) (pi/2, e) = (pi/2, exp(-Y1)): X1 is rotated by -pi/2
        let p = WarpedPoint { t: 0.0, h: AlgebraVector::x_basis(1, 0) };
        let q = WarpedPoint { t: std::f64::consts::FRAC_PI_2, h: AlgebraVector::zero(1) };
        let r = warped_multiply(&p, &q).unwrap();
        let expect = AlgebraVector::y_basis(1, 0).neg();
        assert!((r.t - std::f64::consts::FRAC_PI_2).abs() < 1e-15);
        assert!(r.h.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn warped_group_axioms() {
        let mut rng = StdRng::seed_from_u64(23);
        for _ in 0..40 {
            let p = WarpedPoint { t: rng.gen_range(-3.0..3.0), h: rand_vec(&mut rng, 2) };
            let q = WarpedPoint { t: rng.gen_range(-3.0..3.0), h: rand_vec(&mut rng, 2) };
            let r = WarpedPoint { t: rng.gen_range(-3.0..3.0), h: rand_vec(&mut rng, 2) };
            let a = warped_multiply(&warped_multiply(&p, &q).unwrap(), &r).unwrap();
            let b = warped_multiply(&p, &warped_multiply(&q, &r).unwrap()).unwrap();
            assert!((a.t - b.t).abs() < 1e-12);
            assert!(a.h.max_abs_diff(&b.h) < 1e-12);

            let inv = warped_inverse(&p);
            let e = warped_multiply(&p, &inv).unwrap();
            assert!(e.t.abs() < 1e-12 && e.h.norm() < 1e-12);
        }
    }

    #[test]
    fn biinvariant_inner_is_ad_invariant() {
        let mut rng = StdRng::seed_from_u64(31);
        let lambda = [1.0, 0.5, 2.0];
        for _ in 0..30 {
            let randw = |rng: &mut StdRng| WarpedVector {
                z: rng.gen_range(-2.0..2.0),
                x: (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                y: (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                w: rng.gen_range(-2.0..2.0),
            };
            let (u, v) = (randw(&mut rng), randw(&mut rng));
            let t = rng.gen_range(-7.0..7.0);
            let ad = ad_exp_tw(t, &lambda);
            let au = WarpedVector::from_column(&(&ad * u.to_column())).unwrap();
            let av = WarpedVector::from_column(&(&ad * v.to_column())).unwrap();
            assert!((biinvariant_inner(&au, &av) - biinvariant_inner(&u, &v)).abs() < 1e-12);
        }
    }

    #[test]
    fn warped_tangent_translation_fixes_identity_frame() {
        // at the identity the translation is the identity on coordinates
        let p = WarpedPoint::identity(2);
        let dv = AlgebraVector { z: 0.3, x: vec![1.0, -0.5], y: vec![0.2, 0.0] };
        let v = warped_tangent_at_identity(&p, 0.7, &dv);
        assert_eq!(v.w, 0.7);
        assert!(v.h_part().max_abs_diff(&dv) < 1e-15);
    }
}
