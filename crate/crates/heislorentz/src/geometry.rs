//! The spacetimes themselves: `M = R x H` with the Lorentzian metric induced
//! by a path of automorphisms, the twisted group action, Killing fields and
//! their residuals, isometry verification for point maps, and the rigidity
//! analysis of lightlike hyperplanes.
//!
//! Coordinates on `M` are `(t, h)` with `h` the exponential coordinates of
//! the fiber group. Raw tangent vectors are `(dt, dv)` in those coordinates.
//! At a point `x = (t, g)` the metric is declared on the frame
//! `(d/dt, z0^*, p_1^*, .., p_2n^*)` of fundamental fields of the action:
//! `d/dt` and `z0^*` are null and pair to -1, both are orthogonal to the
//! `p^*`, and the `p`-block is `omega0(nu_t^{-1} u, v)`.
//!
//! Sign convention: with the group law `bch(u, v) = u + v + [u, v]/2`,
//! fundamental fields of the left action anti-commute, `[X^*, Y^*] =
//! -[X, Y]^*`, so the pairing `<d/dt, z0^*> = -1` is the one for which the
//! fiber action is isometric while the `p`-block stays positive definite.
//! The signature is still one timelike and `2n + 1` spacelike directions,
//! and for a one-parameter rotation path the result is isometric to the
//! bi-invariant model of the warped group under `(t, g) -> (-t, g)`.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::lie_core::{bch_multiply, bracket, AlgebraVector};
use crate::paths::{AutomorphismPath, EquivalenceMap};
use crate::symplectic::Splitting;
use crate::{Error, Result};

/// Adapt an [`EquivalenceMap`] to a point map on the spacetime.
pub fn equivalence_point_map(
    map: &EquivalenceMap,
) -> impl Fn(&SpacetimePoint) -> SpacetimePoint + '_ {
    move |x| {
        let (t, h) = map.apply(x.t, &x.h);
        SpacetimePoint::new(t, h)
    }
}

/// Eigenvalues below this relative size make a form degenerate.
pub const SIGNATURE_THRESHOLD: f64 = 1e-10;

/// Frames with a worse condition number than this are rejected.
pub const MAX_FRAME_CONDITION: f64 = 1e12;

/// A point `(t, h)` of the spacetime, `h` in exponential coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimePoint {
    pub t: f64,
    pub h: AlgebraVector,
}

impl SpacetimePoint {
    pub fn new(t: f64, h: AlgebraVector) -> Self {
        Self { t, h }
    }

    /// `(0, e)`.
    pub fn base(n: usize) -> Self {
        Self { t: 0.0, h: AlgebraVector::zero(n) }
    }

    pub fn n(&self) -> usize {
        self.h.n()
    }
}

/// A raw coordinate tangent `(dt, dv)` at some point of `M`.
#[derive(Clone, Debug)]
pub struct Tangent {
    pub dt: f64,
    pub dv: AlgebraVector,
}

impl Tangent {
    pub fn new(dt: f64, dv: AlgebraVector) -> Self {
        Self { dt, dv }
    }

    pub fn zero(n: usize) -> Self {
        Self { dt: 0.0, dv: AlgebraVector::zero(n) }
    }

    /// Coordinate basis vector `i` (0 is `d/dt`, then the fiber directions).
    pub fn basis(n: usize, i: usize) -> Self {
        if i == 0 {
            return Self { dt: 1.0, dv: AlgebraVector::zero(n) };
        }
        let mut v = DVector::zeros(2 * n + 1);
        v[i - 1] = 1.0;
        Self { dt: 0.0, dv: AlgebraVector::from_dvec(&v).expect("basis index in range") }
    }

    pub fn to_dvec(&self) -> DVector<f64> {
        let n = self.dv.n();
        let mut out = DVector::zeros(2 * n + 2);
        out[0] = self.dt;
        out.rows_mut(1, 2 * n + 1).copy_from(&self.dv.to_dvec());
        out
    }

    pub fn from_dvec(v: &DVector<f64>) -> Result<Self> {
        if v.len() < 4 || v.len() % 2 != 0 {
            return Err(Error::DimensionMismatch(format!(
                "tangent needs 2n + 2 coordinates, got {}",
                v.len()
            )));
        }
        let dv = AlgebraVector::from_dvec(&v.rows(1, v.len() - 1).into_owned())?;
        Ok(Self { dt: v[0], dv })
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { dt: s * self.dt, dv: self.dv.scale(&s) }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self { dt: self.dt + rhs.dt, dv: self.dv.add(&rhs.dv) }
    }
}

/// The fiber group acting on `M`: `k . (t, g) = (t, (phi_t k) * g)` with `*`
/// the group product in exponential coordinates.
pub fn act(path: &AutomorphismPath, k: &AlgebraVector, x: &SpacetimePoint) -> SpacetimePoint {
    let moved = path.at(x.t).apply(k);
    SpacetimePoint::new(x.t, bch_multiply(&moved, &x.h))
}

/// Fundamental vector field of [`act`] for the algebra direction `k`:
/// `d/ds|_0 act(s k, x) = (0, phi_t k + (1/2)[phi_t k, g])`.
pub fn killing_field(path: &AutomorphismPath, k: &AlgebraVector, x: &SpacetimePoint) -> Tangent {
    let moved = path.at(x.t).apply(k);
    let corr = bracket(&moved, &x.h).scale(&0.5);
    Tangent::new(0.0, moved.add(&corr))
}

/// Differential of the flow `x -> act(s k, x)` at `x`, evaluated exactly:
/// with `w = phi_t(s k)` and `w' = (d/dt phi_t)(s k)`,
/// `D(dt, dv) = (dt, dv + (1/2)[w, dv] + dt (w' + (1/2)[w', g]))`.
pub fn flow_differential(
    path: &AutomorphismPath,
    s: f64,
    k: &AlgebraVector,
    x: &SpacetimePoint,
    u: &Tangent,
) -> Tangent {
    let sk = k.scale(&s);
    let w = path.at(x.t).apply(&sk);
    let wdot = AlgebraVector::from_dvec(&(path.deriv_matrix_at(x.t) * sk.to_dvec()))
        .expect("path dimensions are checked");
    let mut dv = u.dv.add(&bracket(&w, &u.dv).scale(&0.5));
    if u.dt != 0.0 {
        let drift = wdot.add(&bracket(&wdot, &x.h).scale(&0.5));
        dv = dv.add(&drift.scale(&u.dt));
    }
    Tangent::new(u.dt, dv)
}

/// The metric at a point, as a gram matrix over the fundamental frame and as
/// a quadratic form on raw coordinate tangents.
#[derive(Clone, Debug)]
pub struct MetricSample {
    pub base: SpacetimePoint,
    /// `(d/dt, z0^*, p_1^*, .., p_2n^*)` as raw tangents.
    pub frame: Vec<Tangent>,
    /// Declared inner products of the frame vectors.
    pub gram: DMatrix<f64>,
    /// The same form on raw coordinate tangents.
    pub coord_form: DMatrix<f64>,
    /// Frobenius condition estimate of the frame-to-coordinates matrix
    /// (within a factor of the dimension of the 2-norm condition number).
    pub condition: f64,
}

impl MetricSample {
    /// `g_x(u, v)` for raw tangents.
    pub fn pair(&self, u: &Tangent, v: &Tangent) -> f64 {
        (u.to_dvec().transpose() * &self.coord_form * v.to_dvec())[0]
    }
}

/// Assemble the metric at `x` from the path and its splitting.
pub fn metric_at(
    path: &AutomorphismPath,
    splitting: &Splitting,
    x: &SpacetimePoint,
) -> Result<MetricSample> {
    let n = splitting.n();
    if path.n() != n || x.n() != n {
        return Err(Error::DimensionMismatch("path, splitting and point rank differ".into()));
    }
    let nu = path.nu_at(x.t)?;
    let nmat = splitting.restrict_to_p(&nu, 1e-6)?;
    let ninv = nmat
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular(format!("nu_t is singular on p at t = {}", x.t)))?;
    let p_gram = ninv.transpose() * splitting.omega_p();
    let sym_err = (&p_gram - p_gram.transpose()).abs().max();
    if sym_err > 1e-10 * (1.0 + p_gram.abs().max()) {
        return Err(Error::Degenerate(format!(
            "p-inner product is not symmetric (residual {sym_err:.3e}); nu_t is not \
             infinitesimally symplectic"
        )));
    }
    let p_gram = (&p_gram + p_gram.transpose()) * 0.5;

    let k = 2 * n;
    let mut frame = Vec::with_capacity(k + 2);
    frame.push(Tangent::basis(n, 0));
    frame.push(killing_field(path, splitting.z0(), x));
    for p in splitting.p_basis() {
        frame.push(killing_field(path, p, x));
    }
    let mut gram = DMatrix::zeros(k + 2, k + 2);
    gram[(0, 1)] = -1.0;
    gram[(1, 0)] = -1.0;
    gram.view_mut((2, 2), (k, k)).copy_from(&p_gram);

    assemble_sample(x.clone(), frame, gram)
}

/// Turn a declared frame Gram into a [`MetricSample`] by expressing the form
/// on raw coordinates through the inverse frame matrix.
pub fn assemble_sample(
    base: SpacetimePoint,
    frame: Vec<Tangent>,
    gram: DMatrix<f64>,
) -> Result<MetricSample> {
    let dim = frame.len();
    if gram.nrows() != dim || gram.ncols() != dim {
        return Err(Error::DimensionMismatch("gram does not match the frame".into()));
    }
    let mut f = DMatrix::zeros(dim, dim);
    for (j, v) in frame.iter().enumerate() {
        f.set_column(j, &v.to_dvec());
    }
    let f_inv = f
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Singular("frame is singular".into()))?;
    let condition = f.norm() * f_inv.norm();
    if !(condition <= MAX_FRAME_CONDITION) {
        return Err(Error::Numerical(format!(
            "frame condition number {condition:.3e} exceeds {MAX_FRAME_CONDITION:.0e} at t = {}",
            base.t
        )));
    }
    let coord_form = f_inv.transpose() * &gram * &f_inv;
    let coord_form = (&coord_form + coord_form.transpose()) * 0.5;
    Ok(MetricSample { base, frame, gram, coord_form, condition })
}

/// Eigenvalue signature `(timelike, spacelike)` of a symmetric form, i.e.
/// the counts of negative and positive eigenvalues. Errors if an eigenvalue
/// is degenerate at relative scale [`SIGNATURE_THRESHOLD`].
pub fn signature_of(form: &DMatrix<f64>) -> Result<(usize, usize)> {
    if form.nrows() != form.ncols() {
        return Err(Error::DimensionMismatch("signature needs a square matrix".into()));
    }
    let sym = (form + form.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let scale = eig.eigenvalues.amax();
    if scale == 0.0 {
        return Err(Error::Degenerate("zero form".into()));
    }
    let mut timelike = 0;
    let mut spacelike = 0;
    for &l in eig.eigenvalues.iter() {
        if l.abs() <= SIGNATURE_THRESHOLD * scale {
            return Err(Error::Degenerate(format!(
                "eigenvalue {l:.3e} is degenerate at relative scale {SIGNATURE_THRESHOLD:.0e}"
            )));
        }
        if l < 0.0 {
            timelike += 1;
        } else {
            spacelike += 1;
        }
    }
    Ok((timelike, spacelike))
}

/// Central-difference steps below this are rejected: the difference quotient
/// of an order-one quantity is then pure rounding noise.
pub const MIN_FD_STEP: f64 = 1e-9;

/// `|d/ds q(s)|` at `s = 0` by central differences at `step` and `step / 2`.
/// Halving must not grow the estimate; if it does, the cancellation detector
/// has fired and the two estimates are Richardson-combined instead.
fn central_derivative(q: &dyn Fn(f64) -> Result<f64>, step: f64) -> Result<f64> {
    if !(step >= MIN_FD_STEP) {
        return Err(Error::Numerical(format!(
            "step {step:.3e} too small: central differences cancel below {MIN_FD_STEP:.0e}"
        )));
    }
    let r1 = (q(step)? - q(-step)?) / (2.0 * step);
    let half = 0.5 * step;
    let r2 = (q(half)? - q(-half)?) / (2.0 * half);
    if r2.abs() <= r1.abs() {
        Ok(r2.abs())
    } else {
        Ok(((4.0 * r2 - r1) / 3.0).abs())
    }
}

/// How far the fundamental field of `k` is from Killing at `x` against the
/// tangent pair `(u, v)`: the flow `s -> act(s k, .)` and its differential
/// are exact, so the residual is the lone scalar limit
/// `|d/ds|_0 g_{act(s k, x)}(D u, D v)|`, estimated by central differences.
pub fn killing_residual(
    path: &AutomorphismPath,
    splitting: &Splitting,
    k: &AlgebraVector,
    x: &SpacetimePoint,
    u: &Tangent,
    v: &Tangent,
    step: f64,
) -> Result<f64> {
    killing_residual_with(&|y| metric_at(path, splitting, y), path, k, x, u, v, step)
}

/// [`killing_residual`] against an arbitrary metric evaluator, so corrupted
/// metrics can serve as negative controls.
pub fn killing_residual_with(
    metric: &dyn Fn(&SpacetimePoint) -> Result<MetricSample>,
    path: &AutomorphismPath,
    k: &AlgebraVector,
    x: &SpacetimePoint,
    u: &Tangent,
    v: &Tangent,
    step: f64,
) -> Result<f64> {
    let q = |s: f64| -> Result<f64> {
        let xs = act(path, &k.scale(&s), x);
        let ms = metric(&xs)?;
        let pu = flow_differential(path, s, k, x, u);
        let pv = flow_differential(path, s, k, x, v);
        Ok(ms.pair(&pu, &pv))
    };
    central_derivative(&q, step)
}

/// Same derivative estimate for the coordinate time translation
/// `s -> (t + s, g)`; nonzero exactly when the metric is genuinely
/// time-dependent.
pub fn time_translation_residual(
    path: &AutomorphismPath,
    splitting: &Splitting,
    x: &SpacetimePoint,
    step: f64,
) -> Result<f64> {
    let n = splitting.n();
    let dim = 2 * n + 2;
    let mut worst = 0.0f64;
    for i in 0..dim {
        for j in i..dim {
            let (u, v) = (Tangent::basis(n, i), Tangent::basis(n, j));
            let q = |s: f64| -> Result<f64> {
                let xs = SpacetimePoint::new(x.t + s, x.h.clone());
                Ok(metric_at(path, splitting, &xs)?.pair(&u, &v))
            };
            worst = worst.max(central_derivative(&q, step)?);
        }
    }
    Ok(worst)
}

/// Analytic vs. finite-difference value of the field bracket
/// `[k^*, d/dt] = -(d/dt)(k^*)`, whose fiber part is
/// `-((d/dt phi_t) k + (1/2)[(d/dt phi_t) k, g])`.
#[derive(Clone, Debug)]
pub struct BracketWithTime {
    pub analytic: Tangent,
    pub finite_difference: Tangent,
    pub residual: f64,
}

pub fn bracket_with_w(
    path: &AutomorphismPath,
    k: &AlgebraVector,
    x: &SpacetimePoint,
    step: f64,
) -> Result<BracketWithTime> {
    if !(step > 0.0) {
        return Err(Error::Numerical("finite-difference step must be positive".into()));
    }
    let dphi_k = AlgebraVector::from_dvec(&(path.deriv_matrix_at(x.t) * k.to_dvec()))?;
    let analytic = Tangent::new(0.0, dphi_k.add(&bracket(&dphi_k, &x.h).scale(&0.5)).neg());
    let plus = killing_field(path, k, &SpacetimePoint::new(x.t + step, x.h.clone()));
    let minus = killing_field(path, k, &SpacetimePoint::new(x.t - step, x.h.clone()));
    let fd_dv = plus.dv.add(&minus.dv.neg()).scale(&(-1.0 / (2.0 * step)));
    let finite_difference = Tangent::new(0.0, fd_dv);
    let residual = analytic.dv.max_abs_diff(&finite_difference.dv);
    Ok(BracketWithTime { analytic, finite_difference, residual })
}

/// One sample of an isometry check.
#[derive(Clone, Debug, serde::Serialize)]
pub struct IsometrySample {
    pub t: f64,
    pub residual: Option<f64>,
    pub ill_conditioned: bool,
}

/// Outcome of [`verify_map_isometry`].
#[derive(Clone, Debug, serde::Serialize)]
pub struct IsometryReport {
    pub max_residual: f64,
    pub checked: usize,
    pub skipped: usize,
    pub samples: Vec<IsometrySample>,
}

/// Check that a point map is an isometry between the spacetimes of two
/// paths: its differential (central differences, step `fd_step`) must carry
/// the source form to the target form at every sample point. Points where
/// either metric is ill-conditioned are flagged and skipped.
pub fn verify_map_isometry(
    map: &dyn Fn(&SpacetimePoint) -> SpacetimePoint,
    src: (&AutomorphismPath, &Splitting),
    dst: (&AutomorphismPath, &Splitting),
    points: &[SpacetimePoint],
    fd_step: f64,
) -> Result<IsometryReport> {
    let n = src.1.n();
    let dim = 2 * n + 2;
    let mut samples = Vec::with_capacity(points.len());
    let mut max_residual = 0.0f64;
    let mut checked = 0;
    let mut skipped = 0;
    for x in points {
        let src_metric = metric_at(src.0, src.1, x);
        let dst_metric = metric_at(dst.0, dst.1, &map(x));
        let (src_metric, dst_metric) = match (src_metric, dst_metric) {
            (Ok(a), Ok(b)) => (a, b),
            _ => {
                samples.push(IsometrySample { t: x.t, residual: None, ill_conditioned: true });
                skipped += 1;
                continue;
            }
        };
        // differential of the map by central differences in each coordinate
        let mut pushed = Vec::with_capacity(dim);
        for i in 0..dim {
            let e = Tangent::basis(n, i);
            let xp = SpacetimePoint::new(x.t + fd_step * e.dt, x.h.add(&e.dv.scale(&fd_step)));
            let xm = SpacetimePoint::new(x.t - fd_step * e.dt, x.h.add(&e.dv.scale(&-fd_step)));
            let yp = map(&xp);
            let ym = map(&xm);
            pushed.push(Tangent::new(
                (yp.t - ym.t) / (2.0 * fd_step),
                yp.h.add(&ym.h.neg()).scale(&(1.0 / (2.0 * fd_step))),
            ));
        }
        let mut worst = 0.0f64;
        for i in 0..dim {
            for j in i..dim {
                let lhs = dst_metric.pair(&pushed[i], &pushed[j]);
                let rhs =
                    src_metric.pair(&Tangent::basis(n, i), &Tangent::basis(n, j));
                worst = worst.max((lhs - rhs).abs());
            }
        }
        max_residual = max_residual.max(worst);
        checked += 1;
        samples.push(IsometrySample { t: x.t, residual: Some(worst), ill_conditioned: false });
    }
    if checked == 0 {
        return Err(Error::Numerical("all sample points were ill-conditioned".into()));
    }
    Ok(IsometryReport { max_residual, checked, skipped, samples })
}

/// A degenerate-subspace rigidity problem: an ambient symmetric form and a
/// subspace, asking for the isometries fixing the subspace pointwise.
#[derive(Clone, Debug)]
pub struct RigidityProblem {
    gram: DMatrix<f64>,
    u_basis: DMatrix<f64>,
}

/// The distinguished null transversal of a lightlike hyperplane: the unique
/// null vector pairing to 1 with the radical `R` and orthogonal to the
/// spacelike part of the hyperplane.
#[derive(Clone, Debug)]
pub struct TransverseNull {
    pub w: DVector<f64>,
    pub radical: DVector<f64>,
    pub null_residual: f64,
    pub pairing_residual: f64,
    /// `d/dc <W0 + c R, W0 + c R> = 2 <W0, R> = 2`: the affine slope that
    /// pins the null coefficient, certifying uniqueness on the solution line.
    pub uniqueness_slope: f64,
}

/// Dimension of the space of infinitesimal isometries fixing the subspace,
/// with the singular-value gap that separates "zero" from "nonzero".
#[derive(Clone, Debug, serde::Serialize)]
pub struct RigidityReport {
    pub dimension: usize,
    pub largest_null_sv: f64,
    pub smallest_kept_sv: f64,
}

impl RigidityProblem {
    pub fn new(gram: DMatrix<f64>, u_basis: DMatrix<f64>) -> Result<Self> {
        let m = gram.nrows();
        if gram.ncols() != m || u_basis.nrows() != m {
            return Err(Error::DimensionMismatch("gram and subspace dimensions differ".into()));
        }
        if u_basis.ncols() == 0 || u_basis.ncols() >= m {
            return Err(Error::DimensionMismatch("subspace must be proper and nonzero".into()));
        }
        if (&gram - gram.transpose()).abs().max() > 1e-10 * (1.0 + gram.abs().max()) {
            return Err(Error::Degenerate("ambient form is not symmetric".into()));
        }
        let svd = u_basis.clone().svd(false, false);
        if svd.singular_values.min() <= 1e-10 * svd.singular_values.max() {
            return Err(Error::RankDeficient("subspace basis is not independent".into()));
        }
        let gsvd = gram.clone().svd(false, false);
        if gsvd.singular_values.min() <= 1e-12 * gsvd.singular_values.max() {
            return Err(Error::Degenerate("ambient form is degenerate".into()));
        }
        Ok(Self { gram, u_basis })
    }

    /// The standard model: `diag(-1, 1, .., 1)` with
    /// `U = span{e0 + e1, e2, .., e_{m-1-codim+1}}`, which is lightlike with
    /// radical `e0 + e1`.
    pub fn diagonal_model(m: usize, codim: usize) -> Result<Self> {
        if m < 3 || codim == 0 || codim + 1 >= m {
            return Err(Error::DimensionMismatch(
                "need ambient dimension >= 3 and 0 < codim <= m - 2".into(),
            ));
        }
        let mut gram = DMatrix::identity(m, m);
        gram[(0, 0)] = -1.0;
        let k = m - codim;
        let mut u = DMatrix::zeros(m, k);
        u[(0, 0)] = 1.0;
        u[(1, 0)] = 1.0;
        for j in 1..k {
            u[(j + 1, j)] = 1.0;
        }
        Self::new(gram, u)
    }

    /// Transport the problem through an invertible coordinate change `p`:
    /// vectors map by `p`, the form by `p^{-T} G p^{-1}`.
    pub fn map_through(&self, p: &DMatrix<f64>) -> Result<Self> {
        let pinv = p
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Singular("coordinate change is singular".into()))?;
        let gram = pinv.transpose() * &self.gram * &pinv;
        let gram = (&gram + gram.transpose()) * 0.5;
        Self::new(gram, p * &self.u_basis)
    }

    /// A random well-conditioned coordinate change drawn from `rng`.
    pub fn random_transport<R: Rng>(&self, rng: &mut R) -> Self {
        let m = self.gram.nrows();
        loop {
            let p = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0))
                + DMatrix::<f64>::identity(m, m) * 0.5;
            let svd = p.clone().svd(false, false);
            if svd.singular_values.min() > 0.05 * svd.singular_values.max() {
                return self.map_through(&p).expect("well-conditioned transport");
            }
        }
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn u_basis(&self) -> &DMatrix<f64> {
        &self.u_basis
    }

    pub fn ambient_dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn codim(&self) -> usize {
        self.gram.nrows() - self.u_basis.ncols()
    }

    fn u_gram(&self) -> DMatrix<f64> {
        self.u_basis.transpose() * &self.gram * &self.u_basis
    }

    /// The radical of the restricted form, required to be 1-dimensional,
    /// with its largest coefficient normalized positive.
    pub fn radical(&self) -> Result<DVector<f64>> {
        Ok(self.split_restriction()?.0)
    }

    /// Kernel vector and a spacelike complement of it inside `U`, read off
    /// the SVD of the restricted form in the supplied basis coordinates.
    fn split_restriction(&self) -> Result<(DVector<f64>, Vec<DVector<f64>>)> {
        let ug = self.u_gram();
        let svd = ug.clone().svd(false, true);
        let smax = svd.singular_values.max();
        let threshold = 1e-9 * smax.max(1e-300);
        let nulls: Vec<usize> = (0..svd.singular_values.len())
            .filter(|&i| svd.singular_values[i] <= threshold)
            .collect();
        if nulls.len() != 1 {
            return Err(Error::Degenerate(format!(
                "radical of the restricted form has dimension {}, expected 1",
                nulls.len()
            )));
        }
        let vt = svd.v_t.expect("requested");
        let mut r = &self.u_basis * vt.row(nulls[0]).transpose();
        let lead = r.iter().fold(0.0f64, |acc, &x| if x.abs() > acc.abs() { x } else { acc });
        if lead < 0.0 {
            r.neg_mut();
        }
        let mut spacelike = Vec::with_capacity(vt.nrows() - 1);
        for i in 0..vt.nrows() {
            if i != nulls[0] {
                spacelike.push(&self.u_basis * vt.row(i).transpose());
            }
        }
        Ok((r, spacelike))
    }

    /// For a codimension-1 lightlike subspace, the unique null transversal:
    /// `<W, R> = 1` with `W` orthogonal to the spacelike part of `U`. Those
    /// linear conditions leave the affine line `W0 + c R`, on which the
    /// squared norm is affine with slope `2 <W0, R> = 2`, so exactly one `c`
    /// makes `W` null.
    pub fn lightlike_transverse(&self) -> Result<TransverseNull> {
        if self.codim() != 1 {
            return Err(Error::Refused(format!(
                "transversal construction needs codimension 1, got {}",
                self.codim()
            )));
        }
        let (r, spacelike) = self.split_restriction()?;
        let m = self.ambient_dim();
        let k = self.u_basis.ncols();
        let pair = |u: &DVector<f64>, v: &DVector<f64>| (u.transpose() * &self.gram * v)[0];
        let mut sys = DMatrix::zeros(k, m);
        let mut rhs = DVector::zeros(k);
        for (i, s) in spacelike.iter().enumerate() {
            sys.row_mut(i).copy_from(&(s.transpose() * &self.gram));
        }
        sys.row_mut(k - 1).copy_from(&(r.transpose() * &self.gram));
        rhs[k - 1] = 1.0;
        let svd = sys.svd(true, true);
        let smax = svd.singular_values.max();
        let rank = svd.singular_values.iter().filter(|s| **s > 1e-10 * smax).count();
        if rank != k {
            return Err(Error::Degenerate(format!(
                "transversal conditions have rank {rank}, expected {k}"
            )));
        }
        let w0 = svd.solve(&rhs, 1e-10 * smax).map_err(|e| Error::Numerical(e.to_string()))?;
        let uniqueness_slope = 2.0 * pair(&w0, &r);
        let c = -pair(&w0, &w0) / 2.0;
        let w = &w0 + &r * c;
        Ok(TransverseNull {
            null_residual: pair(&w, &w).abs(),
            pairing_residual: (pair(&w, &r) - 1.0).abs(),
            w,
            radical: r,
            uniqueness_slope,
        })
    }

    /// Dimension of `{ M : M u = 0 for u in U, M^T G + G M = 0 }`, the
    /// infinitesimal isometries fixing `U` pointwise, computed as the SVD
    /// nullity of the stacked linear system.
    pub fn rigidity_dimension(&self) -> Result<RigidityReport> {
        let m = self.ambient_dim();
        let k = self.u_basis.ncols();
        let rows = m * k + m * (m + 1) / 2;
        let mut sys = DMatrix::zeros(rows, m * m);
        let col = |a: usize, b: usize| a * m + b;
        let mut row = 0;
        for j in 0..k {
            let u = self.u_basis.column(j);
            for i in 0..m {
                for l in 0..m {
                    sys[(row, col(i, l))] = u[l];
                }
                row += 1;
            }
        }
        for i in 0..m {
            for j in i..m {
                for kk in 0..m {
                    sys[(row, col(kk, i))] += self.gram[(kk, j)];
                    sys[(row, col(kk, j))] += self.gram[(i, kk)];
                }
                row += 1;
            }
        }
        let svd = sys.svd(false, false);
        let sv = &svd.singular_values;
        let smax = sv.max();
        let threshold = 1e-9 * smax.max(1e-300);
        let nullity = m * m - sv.iter().filter(|s| **s > threshold).count();
        let largest_null_sv =
            sv.iter().copied().filter(|s| *s <= threshold).fold(0.0f64, f64::max);
        let smallest_kept_sv =
            sv.iter().copied().filter(|s| *s > threshold).fold(f64::INFINITY, f64::min);
        Ok(RigidityReport { dimension: nullity, largest_null_sv, smallest_kept_sv })
    }
}
