//! Central splittings `h_n = p (+) R Z0` and the symplectic structure the
//! bracket induces on the complement `p`.
//!
//! With `[X, Y] = omega0(X, Y) Z0` for `X, Y` in `p`, a candidate derivation
//! `nu` is *infinitesimally symplectic* when `omega0(nu X, Y) + omega0(X, nu Y) = 0`
//! and *infinitesimally definite* when `omega0(X, nu X) > 0` for `X != 0`.
//! Those two conditions, plus "kills `Z0`" and "preserves `p`", carve out the
//! derivations that define Lorentzian metrics downstream.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::lie_core::{bracket, AlgebraVector, LinearMap};
use crate::{Error, Result};

/// Eigenvalues of the symmetrized form within this of zero are treated as
/// degenerate rather than signed.
pub const DEFINITENESS_THRESHOLD: f64 = 1e-10;

/// A splitting `h_n = span(p_basis) (+) R z0` with `z0` central.
#[derive(Clone, Debug)]
pub struct Splitting {
    n: usize,
    z0: AlgebraVector,
    p_basis: Vec<AlgebraVector>,
    // columns [p_1 .. p_2n | z0] and its inverse, for decompositions
    basis_inv: DMatrix<f64>,
    // Gram matrix omega0(p_i, p_j)
    omega_p: DMatrix<f64>,
}

impl Splitting {
    pub fn new(z0: AlgebraVector, p_basis: Vec<AlgebraVector>) -> Result<Self> {
        let n = z0.n();
        if z0.z == 0.0 {
            return Err(Error::InvalidSplitting("z0 must have a nonzero Z component".into()));
        }
        let off = z0.x.iter().chain(&z0.y).map(|v| v.abs()).fold(0.0, f64::max);
        if off > 1e-12 * z0.z.abs() {
            return Err(Error::InvalidSplitting("z0 must be central (x, y components zero)".into()));
        }
        if p_basis.len() != 2 * n {
            return Err(Error::InvalidSplitting(format!(
                "complement needs 2n = {} vectors, got {}",
                2 * n,
                p_basis.len()
            )));
        }
        if p_basis.iter().any(|p| p.n() != n) {
            return Err(Error::DimensionMismatch("complement vectors of wrong rank".into()));
        }
        let d = 2 * n + 1;
        let mut cols = DMatrix::zeros(d, d);
        for (j, p) in p_basis.iter().enumerate() {
            cols.set_column(j, &p.to_dvec());
        }
        cols.set_column(d - 1, &z0.to_dvec());
        let basis_inv = cols.clone().try_inverse().ok_or_else(|| {
            Error::InvalidSplitting("p_basis together with z0 does not span h_n".into())
        })?;

        let mut omega_p = DMatrix::zeros(2 * n, 2 * n);
        for i in 0..2 * n {
            for j in 0..2 * n {
                omega_p[(i, j)] = bracket(&p_basis[i], &p_basis[j]).z / z0.z;
            }
        }
        // omega0 restricted to p must be nondegenerate for p to be a
        // symplectic complement
        let svd = omega_p.clone().svd(false, false);
        if svd.singular_values.min() <= 1e-10 * svd.singular_values.max() {
            return Err(Error::InvalidSplitting(
                "omega0 is degenerate on the chosen complement".into(),
            ));
        }
        Ok(Self { n, z0, p_basis, basis_inv, omega_p })
    }

    /// `z0 = Z`, `p = span{X_1..X_n, Y_1..Y_n}`.
    pub fn standard(n: usize) -> Self {
        let p = crate::lie_core::basis_vectors(n)[1..].to_vec();
        Self::new(AlgebraVector::z_basis(n), p).expect("standard splitting is valid")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn z0(&self) -> &AlgebraVector {
        &self.z0
    }

    pub fn p_basis(&self) -> &[AlgebraVector] {
        &self.p_basis
    }

    /// Same complement, `z0` rescaled to have unit `Z` coordinate.
    pub fn normalized(&self) -> Splitting {
        let scale = 1.0 / self.z0.z;
        Splitting::new(self.z0.scale(&scale), self.p_basis.clone())
            .expect("rescaling z0 keeps the splitting valid")
    }

    /// Gram matrix `omega0(p_i, p_j)` over the complement basis.
    pub fn omega_p(&self) -> &DMatrix<f64> {
        &self.omega_p
    }

    /// `omega0(u, v)`: the `Z0` coefficient of `[u, v]`. Central components
    /// of `u, v` are irrelevant because the center is the bracket's kernel.
    pub fn omega0(&self, u: &AlgebraVector, v: &AlgebraVector) -> f64 {
        bracket(u, v).z / self.z0.z
    }

    /// Write `v = sum c_i p_i + c0 z0`; returns `(c, c0)`.
    pub fn decompose(&self, v: &AlgebraVector) -> (DVector<f64>, f64) {
        let coords = &self.basis_inv * v.to_dvec();
        let c = coords.rows(0, 2 * self.n).into_owned();
        (c, coords[2 * self.n])
    }

    /// Matrix of `nu` restricted to `p`, over `p_basis`. Errors if some
    /// `nu(p_i)` leaves the complement by more than `tol` (relative to the
    /// image size), naming the violating basis vector.
    pub fn restrict_to_p(&self, nu: &LinearMap, tol: f64) -> Result<DMatrix<f64>> {
        let k = 2 * self.n;
        let mut m = DMatrix::zeros(k, k);
        for j in 0..k {
            let img = nu.apply(&self.p_basis[j]);
            let (c, c0) = self.decompose(&img);
            let scale = 1.0 + img.norm();
            if c0.abs() > tol * scale {
                return Err(Error::ComplementNotPreserved(format!(
                    "nu(p_{}) has z0 component {c0:.3e}",
                    j + 1
                )));
            }
            m.set_column(j, &c);
        }
        Ok(m)
    }

    /// `omega0(nu u, v) + omega0(u, nu v) = 0` on all complement basis pairs.
    pub fn is_inf_symplectic(&self, nu: &LinearMap, tol: f64) -> Result<bool> {
        self.restrict_to_p(nu, tol)?;
        let mut worst = 0.0f64;
        for i in 0..2 * self.n {
            for j in 0..2 * self.n {
                let r = self.omega0(&nu.apply(&self.p_basis[i]), &self.p_basis[j])
                    + self.omega0(&self.p_basis[i], &nu.apply(&self.p_basis[j]));
                worst = worst.max(r.abs());
            }
        }
        Ok(worst <= tol)
    }

    /// Classify the quadratic form `X -> omega0(X, nu X)` on the complement.
    pub fn definiteness(&self, nu: &LinearMap) -> DefinitenessVerdict {
        let k = 2 * self.n;
        let mut b = DMatrix::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                b[(i, j)] = self.omega0(&self.p_basis[i], &nu.apply(&self.p_basis[j]));
            }
        }
        let sym = (&b + b.transpose()) * 0.5;
        let eig = sym.symmetric_eigen();
        let mut min_idx = 0;
        for i in 0..k {
            if eig.eigenvalues[i] < eig.eigenvalues[min_idx] {
                min_idx = i;
            }
        }
        let min_eigenvalue = eig.eigenvalues[min_idx];
        let verdict = if min_eigenvalue > DEFINITENESS_THRESHOLD {
            Verdict::Definite
        } else if min_eigenvalue.abs() <= DEFINITENESS_THRESHOLD {
            Verdict::Degenerate
        } else {
            Verdict::Indefinite
        };
        let witness = if verdict == Verdict::Definite {
            None
        } else {
            // minimizing direction, mapped back into h_n and unit-normalized
            let col = eig.eigenvectors.column(min_idx);
            let mut w = AlgebraVector::zero(self.n);
            for (j, p) in self.p_basis.iter().enumerate() {
                w = w.add(&p.scale(&col[j]));
            }
            let norm = w.norm();
            Some(if norm > 0.0 { w.scale(&(1.0 / norm)) } else { w })
        };
        DefinitenessVerdict { verdict, witness, min_eigenvalue }
    }

    /// Membership in the metric-defining derivation cone: derivation, kills
    /// `z0`, preserves `p`, and is infinitesimally definite. Never errors;
    /// the first failing clause is named in `reason`.
    pub fn in_m_p(&self, delta: &LinearMap, tol: f64) -> MpCheck {
        let derivation_ok = delta.is_derivation(tol);
        let kills_z0 = delta.apply(&self.z0).norm() <= tol * (1.0 + self.z0.norm());
        let preserves_p = self.restrict_to_p(delta, tol).is_ok();
        let definiteness = self.definiteness(delta);
        let reason = if !derivation_ok {
            Some("not a derivation".to_string())
        } else if !kills_z0 {
            Some("does not kill z0".to_string())
        } else if !preserves_p {
            Some("does not preserve the complement".to_string())
        } else if definiteness.verdict != Verdict::Definite {
            Some(format!("not infinitesimally definite ({:?})", definiteness.verdict))
        } else {
            None
        };
        MpCheck { derivation_ok, kills_z0, preserves_p, definiteness, ok: reason.is_none(), reason }
    }

    /// The canonical isomorphism `a : p -> p'` between two complements of the
    /// same `z0`, characterized by `a(X) = X + alpha(X) z0`.
    ///
    /// Requires `other.z0 == self.z0`; rescale first if they differ.
    pub fn canonical_iso(&self, other: &Splitting) -> Result<ComplementChange> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch("splittings of different rank".into()));
        }
        let dz = self.z0.max_abs_diff(&other.z0);
        if dz > 1e-12 * (1.0 + self.z0.norm()) {
            return Err(Error::InvalidSplitting(
                "canonical isomorphism needs identical z0 generators".into(),
            ));
        }
        let d = 2 * self.n + 1;
        // alpha on p_basis: p_i = (p'-part) + c0 z0, so a(p_i) = p_i - c0 z0
        let mut alpha = DVector::zeros(2 * self.n);
        for (i, p) in self.p_basis.iter().enumerate() {
            let (_, c0) = other.decompose(p);
            alpha[i] = -c0;
        }
        // extend alpha to h_n by alpha(z0) = 0, then a = I + z0 (x) alpha
        let mut vals = DVector::zeros(d);
        for i in 0..2 * self.n {
            vals[i] = alpha[i];
        }
        let alpha_ext = (self.basis_inv.transpose() * vals).transpose();
        let mat = DMatrix::identity(d, d) + self.z0.to_dvec() * &alpha_ext;
        let a_map = LinearMap::from_matrix(self.n, mat)?;
        // A in p with omega0(A, p_i) = alpha_i
        let coeffs = self
            .omega_p
            .clone()
            .transpose()
            .lu()
            .solve(&alpha)
            .ok_or_else(|| Error::Singular("omega0 Gram is singular".into()))?;
        let mut a_vec = AlgebraVector::zero(self.n);
        for (k, p) in self.p_basis.iter().enumerate() {
            a_vec = a_vec.add(&p.scale(&coeffs[k]));
        }
        Ok(ComplementChange { a_map, alpha: alpha.as_slice().to_vec(), alpha_ext, a_vec })
    }
}

/// Outcome of the definiteness test for `X -> omega0(X, nu X)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Definite,
    Indefinite,
    Degenerate,
}

/// Verdict plus, when not definite, a unit witness direction realizing the
/// minimal eigenvalue of the symmetrized form.
#[derive(Clone, Debug, Serialize)]
pub struct DefinitenessVerdict {
    pub verdict: Verdict,
    pub witness: Option<AlgebraVector>,
    pub min_eigenvalue: f64,
}

/// Clause-by-clause membership report for the derivation cone.
#[derive(Clone, Debug)]
pub struct MpCheck {
    pub derivation_ok: bool,
    pub kills_z0: bool,
    pub preserves_p: bool,
    pub definiteness: DefinitenessVerdict,
    pub ok: bool,
    pub reason: Option<String>,
}

/// Data of the canonical isomorphism between two complements: the full-map
/// extension `a` (fixing `z0`), the functional `alpha` over `p_basis`, its
/// zero-extension to `h_n` (row vector on coordinates), and the vector `A`
/// in `p` with `omega0(A, .) = alpha`.
#[derive(Clone, Debug)]
pub struct ComplementChange {
    pub a_map: LinearMap,
    pub alpha: Vec<f64>,
    pub alpha_ext: nalgebra::RowDVector<f64>,
    pub a_vec: AlgebraVector,
}

impl ComplementChange {
    /// `alpha` extended to all of `h_n` (kills `z0`).
    pub fn alpha_at(&self, v: &AlgebraVector) -> f64 {
        (&self.alpha_ext * v.to_dvec())[0]
    }
}
