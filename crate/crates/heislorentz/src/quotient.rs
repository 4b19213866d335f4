//! Lattices in the Heisenberg group, the deck group `Z x| L` they generate
//! over a periodic path of automorphisms, and checks that the metric descends
//! to the quotient.
//!
//! A lattice is stored through a rational basis of its logarithm
//! `Lambda \subset h_n`; all membership and closure questions are answered in
//! exact arithmetic. Floating point enters only where the metric does:
//! the isometry sweep over a fundamental domain.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::geometry::{verify_map_isometry, IsometryReport, SpacetimePoint};
use crate::lie_core::{bch_multiply, bracket, AlgebraVector, LinearMap};
use crate::paths::AutomorphismPath;
use crate::rational::{format_rat, integrality_witness, rat_i64, rat_int, Rat, RatMat};
use crate::symplectic::Splitting;
use crate::{Error, Result};

/// Relative tolerance for the spot equivariance check inside [`deck_act`].
const EQUIVARIANCE_SPOT_TOL: f64 = 1e-6;

/// A lattice `exp(Lambda) < H_n`, described by a rational basis of the
/// log-lattice `Lambda`.
///
/// The basis must be linearly independent and satisfy the closure condition
/// `(1/2)[b_i, b_j] \in Lambda` for all pairs, which makes `exp(Lambda)` a
/// subgroup under the order-two product `u * v = u + v + (1/2)[u, v]`.
/// Closure is *checked on construction*; use [`lattice_closure_check`] to
/// inspect a candidate basis without committing to it.
#[derive(Clone, Debug)]
pub struct LatticeSpec {
    n: usize,
    log_basis: Vec<AlgebraVector<Rat>>,
    basis_mat: RatMat,
    basis_inv: RatMat,
}

impl LatticeSpec {
    /// Builds a lattice from a rational basis of its logarithm, verifying
    /// independence and BCH closure.
    pub fn new(n: usize, log_basis: Vec<AlgebraVector<Rat>>) -> Result<Self> {
        let dim = 2 * n + 1;
        if log_basis.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "a rank-{n} log-lattice needs {dim} basis vectors, got {}",
                log_basis.len()
            )));
        }
        for (i, b) in log_basis.iter().enumerate() {
            if b.n() != n {
                return Err(Error::DimensionMismatch(format!(
                    "basis vector {i} lives in rank {} not rank {n}",
                    b.n()
                )));
            }
        }
        let cols: Vec<Vec<Rat>> = log_basis.iter().map(|b| b.coords()).collect();
        let basis_mat = RatMat::from_columns(&cols)?;
        let basis_inv = basis_mat
            .inverse()
            .map_err(|_| Error::RankDeficient("log-lattice basis is linearly dependent".into()))?;
        let lattice = Self { n, log_basis, basis_mat, basis_inv };
        let closure = lattice.closure_check();
        if let Some(v) = closure.violation {
            return Err(Error::Refused(format!(
                "exp of the lattice is not a subgroup: (1/2)[b{}, b{}] has non-integer coordinate {} at basis index {}",
                v.i, v.j, v.coordinate, v.basis_index
            )));
        }
        Ok(lattice)
    }

    /// The standard half-integer-center lattice: `Z`-span of
    /// `X_1..X_n, Y_1..Y_n, (1/2)Z`.
    pub fn standard(n: usize) -> Self {
        let mut basis = Vec::with_capacity(2 * n + 1);
        for i in 0..n {
            basis.push(rational_basis_vector(n, 1 + i));
        }
        for i in 0..n {
            basis.push(rational_basis_vector(n, 1 + n + i));
        }
        let half_z = AlgebraVector::<Rat>::from_coords(
            &std::iter::once(rat_i64(1, 2))
                .chain(std::iter::repeat(rat_int(0)).take(2 * n))
                .collect::<Vec<_>>(),
        )
        .expect("coordinate count matches rank");
        basis.push(half_z);
        Self::new(n, basis).expect("the standard basis is independent and closed")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn log_basis(&self) -> &[AlgebraVector<Rat>] {
        &self.log_basis
    }

    /// Exact coordinates of `v` over the log-lattice basis.
    pub fn coordinates(&self, v: &AlgebraVector<Rat>) -> Result<Vec<Rat>> {
        if v.n() != self.n {
            return Err(Error::DimensionMismatch("vector rank differs from lattice".into()));
        }
        self.basis_inv.mul_vec(&v.coords())
    }

    /// Exact membership test: `v \in Lambda` iff its coordinates are integers.
    pub fn contains(&self, v: &AlgebraVector<Rat>) -> Result<bool> {
        Ok(integrality_witness(&self.coordinates(v)?).is_none())
    }

    /// The lattice element with the given integer coordinates.
    pub fn element(&self, coords: &[i64]) -> Result<AlgebraVector<Rat>> {
        if coords.len() != 2 * self.n + 1 {
            return Err(Error::DimensionMismatch("coordinate count differs from rank".into()));
        }
        let mut acc = AlgebraVector::<Rat>::zero(self.n);
        for (c, b) in coords.iter().zip(&self.log_basis) {
            acc = acc.add(&b.scale(&rat_int(*c)));
        }
        Ok(acc)
    }

    /// Closure certificate for this (already validated) basis.
    pub fn closure_check(&self) -> ClosureCheck {
        closure_check_impl(self.n, &self.log_basis, &self.basis_inv)
    }
}

fn rational_basis_vector(n: usize, index: usize) -> AlgebraVector<Rat> {
    let mut coords = vec![rat_int(0); 2 * n + 1];
    coords[index] = rat_int(1);
    AlgebraVector::<Rat>::from_coords(&coords).expect("coordinate count matches rank")
}

/// One non-integral coordinate found while checking BCH closure.
#[derive(Clone, Debug, Serialize)]
pub struct ClosureViolation {
    /// Indices of the offending basis pair.
    pub i: usize,
    pub j: usize,
    /// Which coordinate of `(1/2)[b_i, b_j]` fails to be an integer.
    pub basis_index: usize,
    /// The offending rational coordinate, formatted `p/q`.
    pub coordinate: String,
}

/// Outcome of the exact BCH-closure test.
#[derive(Clone, Debug, Serialize)]
pub struct ClosureCheck {
    pub closed: bool,
    pub pairs_checked: usize,
    pub violation: Option<ClosureViolation>,
}

/// Checks `(1/2)[b_i, b_j] \in Lambda` for all `i < j`, exactly.
///
/// Returns the first violating pair when the span is not closed. Errors if
/// the proposed basis is linearly dependent.
pub fn lattice_closure_check(n: usize, log_basis: &[AlgebraVector<Rat>]) -> Result<ClosureCheck> {
    if log_basis.len() != 2 * n + 1 {
        return Err(Error::DimensionMismatch(format!(
            "a rank-{n} log-lattice needs {} basis vectors, got {}",
            2 * n + 1,
            log_basis.len()
        )));
    }
    let cols: Vec<Vec<Rat>> = log_basis.iter().map(|b| b.coords()).collect();
    let inv = RatMat::from_columns(&cols)?
        .inverse()
        .map_err(|_| Error::RankDeficient("log-lattice basis is linearly dependent".into()))?;
    Ok(closure_check_impl(n, log_basis, &inv))
}

fn closure_check_impl(
    n: usize,
    log_basis: &[AlgebraVector<Rat>],
    basis_inv: &RatMat,
) -> ClosureCheck {
    let half = rat_i64(1, 2);
    let mut pairs = 0usize;
    for i in 0..log_basis.len() {
        for j in (i + 1)..log_basis.len() {
            pairs += 1;
            let half_bracket = bracket(&log_basis[i], &log_basis[j]).scale(&half);
            let coords = basis_inv
                .mul_vec(&half_bracket.coords())
                .expect("square inverse applies to any coordinate vector");
            if let Some((k, value)) = integrality_witness(&coords) {
                return ClosureCheck {
                    closed: false,
                    pairs_checked: pairs,
                    violation: Some(ClosureViolation {
                        i,
                        j,
                        basis_index: k,
                        coordinate: format_rat(&value),
                    }),
                };
            }
        }
    }
    let _ = n;
    ClosureCheck { closed: true, pairs_checked: pairs, violation: None }
}

/// One basis image that left the lattice.
#[derive(Clone, Debug, Serialize)]
pub struct PreservationViolation {
    /// Index of the basis vector whose image fails.
    pub basis_index: usize,
    /// Coordinate slot that is non-integral.
    pub coordinate_index: usize,
    /// Offending value (exact `p/q` when available, decimal otherwise).
    pub coordinate: String,
    /// Whether the failure occurred for the inverse map.
    pub inverse: bool,
}

/// Outcome of a lattice-preservation test, for the map and its inverse.
#[derive(Clone, Debug, Serialize)]
pub struct PreservationCheck {
    pub preserved: bool,
    pub violation: Option<PreservationViolation>,
}

/// Exact test that the rational automorphism `m` maps `Lambda` onto itself.
///
/// Both `m(Lambda) \subseteq Lambda` and `m^{-1}(Lambda) \subseteq Lambda`
/// are required, so preservation is genuine and not mere containment.
pub fn lattice_preserved_exact(m: &RatMat, l: &LatticeSpec) -> Result<PreservationCheck> {
    let m_inv = m
        .inverse()
        .map_err(|_| Error::Singular("lattice-preservation needs an invertible map".into()))?;
    for (mat, inverse) in [(m, false), (&m_inv, true)] {
        for (bi, b) in l.log_basis.iter().enumerate() {
            let image = mat.mul_vec(&b.coords())?;
            let coords = l.basis_inv.mul_vec(&image)?;
            if let Some((k, value)) = integrality_witness(&coords) {
                return Ok(PreservationCheck {
                    preserved: false,
                    violation: Some(PreservationViolation {
                        basis_index: bi,
                        coordinate_index: k,
                        coordinate: format_rat(&value),
                        inverse,
                    }),
                });
            }
        }
    }
    Ok(PreservationCheck { preserved: true, violation: None })
}

/// Floating-point variant of [`lattice_preserved_exact`] for maps that are
/// only available numerically: coordinates must sit within `tol` of integers.
pub fn lattice_preserved(m: &LinearMap, l: &LatticeSpec, tol: f64) -> Result<PreservationCheck> {
    if m.n() != l.n {
        return Err(Error::DimensionMismatch("map rank differs from lattice".into()));
    }
    let m_inv = m.inverse()?;
    let basis_inv = l.basis_inv.to_f64();
    for (mat, inverse) in [(m, false), (&m_inv, true)] {
        for (bi, b) in l.log_basis.iter().enumerate() {
            let image = mat.apply(&b.to_f64());
            let coords = &basis_inv * image.to_dvec();
            for (k, c) in coords.iter().enumerate() {
                if (c - c.round()).abs() > tol {
                    return Ok(PreservationCheck {
                        preserved: false,
                        violation: Some(PreservationViolation {
                            basis_index: bi,
                            coordinate_index: k,
                            coordinate: format!("{c}"),
                            inverse,
                        }),
                    });
                }
            }
        }
    }
    Ok(PreservationCheck { preserved: true, violation: None })
}

/// An element `(q, lambda)` of the deck group `Z x| L`, with `lambda` stored
/// through its integer coordinates over the lattice's log-basis.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DeckElement {
    pub q: i64,
    pub coords: Vec<i64>,
}

impl DeckElement {
    pub fn new(q: i64, coords: Vec<i64>) -> Self {
        Self { q, coords }
    }

    /// The identity `(0, 0)` of the deck group of a rank-`n` lattice.
    pub fn identity(n: usize) -> Self {
        Self { q: 0, coords: vec![0; 2 * n + 1] }
    }

    /// The lattice vector `lambda` as an exact algebra element.
    pub fn lam(&self, l: &LatticeSpec) -> Result<AlgebraVector<Rat>> {
        l.element(&self.coords)
    }
}

/// How far `phi_{t+s}` is from `phi_t . phi_s`, relative to the matrix scale.
fn equivariance_defect(path: &AutomorphismPath, t: f64, s: f64) -> f64 {
    let lhs = path.matrix_at(t + s);
    let rhs = path.matrix_at(t) * path.matrix_at(s);
    let scale = lhs.norm().max(1.0);
    (lhs - rhs).norm() / scale
}

/// Period of a path that is required to be `Z`-equivariant.
fn required_period(path: &AutomorphismPath) -> Result<f64> {
    path.period().ok_or_else(|| {
        Error::Refused("deck transformations need a periodic path (no period set)".into())
    })
}

/// The deck action of `(q, lambda)` on a spacetime point:
/// `(t, g) . (q, lambda) = (t + q a, phi_{q a}(g) * lambda)` with `a` the
/// period and `*` the group product.
///
/// Refuses paths that are not `Z`-equivariant (spot-checked at the point's own
/// time), since only then is the formula independent of how `q a` is split
/// into period steps.
pub fn deck_act(
    e: &DeckElement,
    path: &AutomorphismPath,
    l: &LatticeSpec,
    x: &SpacetimePoint,
) -> Result<SpacetimePoint> {
    if path.n() != l.n {
        return Err(Error::DimensionMismatch("path rank differs from lattice".into()));
    }
    let alpha = required_period(path)?;
    let shift = e.q as f64 * alpha;
    let defect = equivariance_defect(path, x.t, shift);
    if defect > EQUIVARIANCE_SPOT_TOL {
        return Err(Error::Refused(format!(
            "path is not Z-equivariant: |phi_(t+qa) - phi_t phi_(qa)| = {defect:.3e} at t = {}, q = {}",
            x.t, e.q
        )));
    }
    let lam = e.lam(l)?.to_f64();
    let moved = path.at(shift).apply(&x.h);
    Ok(SpacetimePoint::new(x.t + shift, bch_multiply(&moved, &lam)))
}

/// Exact semidirect product `(q1, l1) . (q2, l2) = (q1 + q2, phi_{q2 a}(l1) * l2)`.
///
/// `phi_q2a` must be the exact matrix of `phi
/// _{q2 a}`; the product refuses if it does not keep `lambda_1` inside the
/// lattice (i.e. the path is not lattice-compatible).
pub fn deck_compose_exact(
    e1: &DeckElement,
    e2: &DeckElement,
    l: &LatticeSpec,
    phi_q2a: &RatMat,
) -> Result<DeckElement> {
    let lam1 = e1.lam(l)?;
    let lam2 = e2.lam(l)?;
    let twisted = AlgebraVector::<Rat>::from_coords(&phi_q2a.mul_vec(&lam1.coords())?)?;
    let product = bch_multiply(&twisted, &lam2);
    let coords = l.coordinates(&product)?;
    if let Some((k, value)) = integrality_witness(&coords) {
        return Err(Error::Refused(format!(
            "twisted lattice vector left the lattice: coordinate {k} is {}",
            format_rat(&value)
        )));
    }
    let ints = coords
        .iter()
        .map(|c| {
            let f = crate::rational::rat_to_f64(c);
            f.round() as i64
        })
        .collect();
    Ok(DeckElement::new(e1.q + e2.q, ints))
}

/// Isometry sweep for one deck generator.
#[derive(Clone, Debug, Serialize)]
pub struct DeckGeneratorReport {
    /// Human-readable generator label: `(1, 0)` or `(0, b_i)`.
    pub generator: String,
    pub max_residual: f64,
    pub checked: usize,
    pub skipped: usize,
    pub pass: bool,
}

/// Aggregate outcome of [`deck_isometry_report`].
#[derive(Clone, Debug, Serialize)]
pub struct DeckIsometryReport {
    pub equivariance_defect: f64,
    pub lattice_closed: bool,
    pub lattice_preserved: bool,
    pub generators: Vec<DeckGeneratorReport>,
    pub max_residual: f64,
    pub samples: usize,
    pub tol: f64,
    pub pass: bool,
}

/// Samples one fundamental domain: `t` uniform in `[0, a)`, `g` uniform in
/// the unit box of log-lattice coordinates.
fn fundamental_domain_points(
    l: &LatticeSpec,
    alpha: f64,
    samples: usize,
    seed: u64,
) -> Vec<SpacetimePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis_f = l.basis_mat.to_f64();
    let dim = 2 * l.n + 1;
    (0..samples)
        .map(|_| {
            let t = rng.gen_range(0.0..alpha);
            let coords =
                nalgebra::DVector::from_fn(dim, |_, _| rng.gen_range(0.0..1.0));
            let h = AlgebraVector::from_dvec(&(&basis_f * coords))
                .expect("basis matrix has algebra dimension");
            SpacetimePoint::new(t, h)
        })
        .collect()
}

/// Verifies that every generator of the deck group acts isometrically, which
/// is what lets the metric descend to the quotient by `Z x| L`.
///
/// Checks the translation generator `(1, 0)` and each lattice generator
/// `(0, b_i)` with [`verify_map_isometry`] over `samples` points of a
/// fundamental domain. Preconditions (equivariance over a grid, lattice
/// closure, lattice preservation under `phi_a`) are verified first and
/// recorded in the report; a non-equivariant path is refused.
pub fn deck_isometry_report(
    path: &AutomorphismPath,
    s: &Splitting,
    l: &LatticeSpec,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<DeckIsometryReport> {
    if path.n() != l.n || s.n() != l.n {
        return Err(Error::DimensionMismatch("path, splitting, and lattice ranks differ".into()));
    }
    let alpha = required_period(path)?;
    let ts: Vec<f64> = (0..16).map(|i| (i as f64 / 16.0 - 0.3) * alpha).collect();
    let equivariance = path.check_z_equivariance(&ts)?;
    if equivariance > EQUIVARIANCE_SPOT_TOL {
        return Err(Error::Refused(format!(
            "path is not Z-equivariant: grid defect {equivariance:.3e}"
        )));
    }
    let closure = l.closure_check();
    let preserved = lattice_preserved(&path.at(alpha), l, 1e-9)?;

    let points = fundamental_domain_points(l, alpha, samples.max(1), seed);
    let fd_step = 1e-5;
    let mut generators = Vec::new();

    let mut run = |label: String, gen: DeckElement| -> Result<()> {
        let map = |x: &SpacetimePoint| {
            deck_act(&gen, path, l, x).expect("preconditions were checked above")
        };
        let rep: IsometryReport =
            verify_map_isometry(&map, (path, s), (path, s), &points, fd_step)?;
        generators.push(DeckGeneratorReport {
            generator: label,
            max_residual: rep.max_residual,
            checked: rep.checked,
            skipped: rep.skipped,
            pass: rep.max_residual < tol,
        });
        Ok(())
    };

    run("(1, 0)".into(), DeckElement::new(1, vec![0; 2 * l.n + 1]))?;
    for i in 0..(2 * l.n + 1) {
        let mut coords = vec![0i64; 2 * l.n + 1];
        coords[i] = 1;
        run(format!("(0, b{i})"), DeckElement::new(0, coords))?;
    }

    let max_residual =
        generators.iter().map(|g| g.max_residual).fold(0.0f64, f64::max);
    let pass = closure.closed
        && preserved.preserved
        && generators.iter().all(|g| g.pass);
    Ok(DeckIsometryReport {
        equivariance_defect: equivariance,
        lattice_closed: closure.closed,
        lattice_preserved: preserved.preserved,
        generators,
        max_residual,
        samples: points.len(),
        tol,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::act;
    use crate::lie_core::block_rotation;
    use crate::paths::AutomorphismPath;

    fn homogeneous(n: usize, lambda: Vec<f64>) -> AutomorphismPath {
        AutomorphismPath::new(
            n,
            "homogeneous",
            Some(2.0 * std::f64::consts::PI),
            std::sync::Arc::new(move |t| {
                block_rotation(n, &lambda.iter().map(|l| l * t).collect::<Vec<_>>()).mat
            }),
            None,
        )
        .unwrap()
    }

    #[test]
    fn standard_lattice_is_closed_and_integer_lattice_is_not() {
        for n in [1usize, 2] {
            let l = LatticeSpec::standard(n);
            let check = l.closure_check();
            assert!(check.closed);
            assert_eq!(check.pairs_checked, n * (2 * n + 1));
        }
        // Z-span{X1, Y1, Z}: (1/2)[X1, Y1] = Z/2 is not an integer vector
        let basis = vec![
            rational_basis_vector(1, 1),
            rational_basis_vector(1, 2),
            rational_basis_vector(1, 0),
        ];
        let check = lattice_closure_check(1, &basis).unwrap();
        assert!(!check.closed);
        let v = check.violation.unwrap();
        assert_eq!((v.i, v.j), (0, 1));
        assert_eq!(v.coordinate, "1/2");
        assert!(LatticeSpec::new(1, basis).is_err());
    }

    #[test]
    fn doubling_the_plane_directions_keeps_closure_only_with_a_fine_center() {
        // Z-span{2X1, 2Y1, (1/2)Z}: (1/2)[2X1, 2Y1] = 2Z = 4 * (Z/2), closed.
        let basis = vec![
            rational_basis_vector(1, 1).scale(&rat_int(2)),
            rational_basis_vector(1, 2).scale(&rat_int(2)),
            rational_basis_vector(1, 0).scale(&rat_i64(1, 2)),
        ];
        assert!(lattice_closure_check(1, &basis).unwrap().closed);
        // with the center generated by 3Z instead, 2Z is not an integer multiple
        let coarse = vec![
            rational_basis_vector(1, 1).scale(&rat_int(2)),
            rational_basis_vector(1, 2).scale(&rat_int(2)),
            rational_basis_vector(1, 0).scale(&rat_int(3)),
        ];
        let check = lattice_closure_check(1, &coarse).unwrap();
        assert!(!check.closed);
        assert_eq!(check.violation.unwrap().coordinate, "2/3");
    }

    #[test]
    fn dependent_basis_is_rejected() {
        let basis = vec![
            rational_basis_vector(1, 1),
            rational_basis_vector(1, 1),
            rational_basis_vector(1, 0),
        ];
        assert!(matches!(lattice_closure_check(1, &basis), Err(Error::RankDeficient(_))));
    }

    #[test]
    fn membership_and_coordinates_are_exact() {
        let l = LatticeSpec::standard(1);
        let v = l.element(&[3, -2, 7]).unwrap();
        assert!(l.contains(&v).unwrap());
        assert_eq!(
            l.coordinates(&v).unwrap(),
            vec![rat_int(3), rat_int(-2), rat_int(7)]
        );
        // Z itself is 2 * (Z/2), inside; Z/4 is not
        let z = rational_basis_vector(1, 0);
        assert!(l.contains(&z).unwrap());
        assert!(!l.contains(&z.scale(&rat_i64(1, 4))).unwrap());
    }

    #[test]
    fn quarter_turn_preserves_the_standard_lattice_and_eighth_turn_does_not() {
        let l = LatticeSpec::standard(1);
        let quarter = block_rotation(1, &[std::f64::consts::FRAC_PI_2]);
        assert!(lattice_preserved(&quarter, &l, 1e-9).unwrap().preserved);
        let eighth = block_rotation(1, &[std::f64::consts::FRAC_PI_4]);
        let check = lattice_preserved(&eighth, &l, 1e-9).unwrap();
        assert!(!check.preserved);
        assert_eq!(check.violation.unwrap().basis_index, 0);
    }

    #[test]
    fn exact_preservation_distinguishes_containment_from_equality() {
        let l = LatticeSpec::standard(1);
        // doubling the plane maps the lattice strictly inside itself: the
        // forward images are integral but the inverse images are not
        let mut m = RatMat::identity(3);
        m[(1, 1)] = rat_int(2);
        m[(2, 2)] = rat_int(2);
        let check = lattice_preserved_exact(&m, &l).unwrap();
        assert!(!check.preserved);
        assert!(check.violation.unwrap().inverse);
        assert!(lattice_preserved_exact(&RatMat::identity(3), &l).unwrap().preserved);
    }

    #[test]
    fn deck_action_is_a_right_action_with_exact_composition() {
        let p = homogeneous(1, vec![1.0]);
        let l = LatticeSpec::standard(1);
        let e1 = DeckElement::new(1, vec![2, -1, 3]);
        let e2 = DeckElement::new(-2, vec![0, 1, -2]);
        // alpha = 2 pi, phi_{q alpha} = identity exactly for the rotation path
        let composed = deck_compose_exact(&e1, &e2, &l, &RatMat::identity(3)).unwrap();
        assert_eq!(composed.q, -1);

        let x = SpacetimePoint::new(0.4, AlgebraVector::from_coords(&[0.3, -0.2, 0.5]).unwrap());
        let one_shot = deck_act(&composed, &p, &l, &x).unwrap();
        let two_step = deck_act(&e2, &p, &l, &deck_act(&e1, &p, &l, &x).unwrap()).unwrap();
        assert!((one_shot.t - two_step.t).abs() < 1e-12);
        assert!(one_shot.h.max_abs_diff(&two_step.h) < 1e-12);

        // identity acts trivially
        let id = DeckElement::identity(1);
        let fixed = deck_act(&id, &p, &l, &x).unwrap();
        assert!((fixed.t - x.t).abs() < 1e-15 && fixed.h.max_abs_diff(&x.h) < 1e-15);
    }

    #[test]
    fn deck_action_commutes_with_the_group_action() {
        let p = homogeneous(1, vec![1.0]);
        let l = LatticeSpec::standard(1);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let e = DeckElement::new(
                rng.gen_range(-2..3),
                (0..3).map(|_| rng.gen_range(-2..3)).collect(),
            );
            let k = AlgebraVector::from_coords(
                &(0..3).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>(),
            )
            .unwrap();
            let x = SpacetimePoint::new(
                rng.gen_range(-3.0..3.0),
                AlgebraVector::from_coords(
                    &(0..3).map(|_| rng.gen_range(-1.0..1.0)).collect::<Vec<_>>(),
                )
                .unwrap(),
            );
            let a = act(&p, &k, &deck_act(&e, &p, &l, &x).unwrap());
            let b = deck_act(&e, &p, &l, &act(&p, &k, &x)).unwrap();
            assert!((a.t - b.t).abs() < 1e-10);
            assert!(a.h.max_abs_diff(&b.h) < 1e-10, "differ by {}", a.h.max_abs_diff(&b.h));
        }
    }

    #[test]
    fn non_equivariant_paths_are_refused() {
        // phi_t = rotation by t^2 has a removable period but is not equivariant
        let quad = AutomorphismPath::new(
            1,
            "quadratic rotation",
            Some(1.0),
            std::sync::Arc::new(|t: f64| block_rotation(1, &[t * t]).mat.clone()),
            None,
        )
        .unwrap();
        let l = LatticeSpec::standard(1);
        let x = SpacetimePoint::new(0.7, AlgebraVector::zero(1));
        let e = DeckElement::new(1, vec![0, 0, 0]);
        assert!(matches!(deck_act(&e, &quad, &l, &x), Err(Error::Refused(_))));
        let s = Splitting::standard(1);
        assert!(matches!(
            deck_isometry_report(&quad, &s, &l, 16, 1e-6, 0),
            Err(Error::Refused(_))
        ));
    }

    #[test]
    fn homogeneous_deck_generators_act_isometrically() {
        let p = homogeneous(1, vec![1.0]);
        let s = Splitting::standard(1);
        let l = LatticeSpec::standard(1);
        let rep = deck_isometry_report(&p, &s, &l, 40, 1e-6, 3).unwrap();
        assert!(rep.pass, "report {rep:?}");
        assert!(rep.lattice_closed && rep.lattice_preserved);
        assert_eq!(rep.generators.len(), 4);
        assert!(rep.max_residual < 1e-6);
    }

    #[test]
    fn metric_block_is_periodic_over_the_deck_translation() {
        // nu-periodicity: the p-block of the metric at (t, 0) and (t + a, 0)
        let p = homogeneous(1, vec![1.0]);
        let s = Splitting::standard(1);
        let alpha = p.period().unwrap();
        for t in [0.0, 0.3, 1.7] {
            let a = crate::geometry::metric_at(&p, &s, &SpacetimePoint::new(t, AlgebraVector::zero(1)))
                .unwrap();
            let b = crate::geometry::metric_at(
                &p,
                &s,
                &SpacetimePoint::new(t + alpha, AlgebraVector::zero(1)),
            )
            .unwrap();
            let d = (&a.coord_form - &b.coord_form).norm();
            assert!(d < 1e-10, "metric block drifts by {d}");
        }
    }
}
