//! Small numerical kernels: adaptive quadrature, monotone inversion,
//! matrix exponentials, cubic splines, and an RK4 integrator with dense
//! output. Nothing here knows about Lie theory.

use nalgebra::DMatrix;
use nalgebra::DVector;

use crate::{Error, Result};

/// Adaptive Simpson quadrature of `f` over `[a, b]` to absolute tolerance `tol`.
///
/// Classic recursive bisection with the Richardson-style acceptance test
/// `|S_left + S_right - S| <= 15 tol`. Depth is capped so a pathological
/// integrand fails loudly instead of hanging.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Numerical("quadrature endpoints must be finite".into()));
    }
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, 48)
}

fn simpson(a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> f64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn recurse(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64> {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Numerical(format!(
            "adaptive quadrature failed to converge on [{a}, {b}]"
        )));
    }
    let half_tol = 0.5 * tol;
    Ok(recurse(f, a, m, fa, flm, fm, left, half_tol, depth - 1)?
        + recurse(f, m, b, fm, frm, fb, right, half_tol, depth - 1)?)
}

/// Invert a strictly increasing function: find `t` with `f(t) = target`.
///
/// Bisection from an expanding bracket, polished by Newton steps using the
/// supplied derivative (which must be positive). Converges to roughly
/// machine precision in `t`.
pub fn invert_increasing(
    f: &dyn Fn(f64) -> f64,
    df: &dyn Fn(f64) -> f64,
    target: f64,
    hint_lo: f64,
    hint_hi: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = (hint_lo.min(hint_hi), hint_lo.max(hint_hi));
    let mut width = (hi - lo).max(1.0);
    for _ in 0..128 {
        if f(lo) <= target {
            break;
        }
        lo -= width;
        width *= 2.0;
    }
    width = (hi - lo).max(1.0);
    for _ in 0..128 {
        if f(hi) >= target {
            break;
        }
        hi += width;
        width *= 2.0;
    }
    if f(lo) > target || f(hi) < target {
        return Err(Error::Numerical("could not bracket monotone inverse".into()));
    }
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 * (1.0 + hi.abs()) {
            break;
        }
    }
    let mut t = 0.5 * (lo + hi);
    for _ in 0..6 {
        let slope = df(t);
        if !(slope > 0.0) {
            break;
        }
        let step = (f(t) - target) / slope;
        let next = t - step;
        if next < lo || next > hi {
            break;
        }
        t = next;
        if step.abs() < 1e-15 * (1.0 + t.abs()) {
            break;
        }
    }
    Ok(t)
}

/// Matrix exponential by scaling and squaring with a Taylor core.
///
/// The scaled norm is brought below 1/2, the series is summed until terms
/// fall under f64 epsilon, and the result is squared back up. Fine for the
/// small well-conditioned matrices used here.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    assert_eq!(a.nrows(), a.ncols(), "expm needs a square matrix");
    let n = a.nrows();
    let norm = a.amax() * n as f64;
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a / 2f64.powi(squarings as i32);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = DMatrix::<f64>::identity(n, n);
    for k in 1..64 {
        term = (&term * &scaled) / k as f64;
        sum += &term;
        if term.amax() < f64::EPSILON {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Natural cubic spline through `(ts, ys)` with analytic first derivative.
///
/// Knots must be strictly increasing. Evaluation outside the knot range
/// extrapolates the boundary cubic.
pub struct CubicSpline {
    ts: Vec<f64>,
    ys: Vec<f64>,
    // second derivatives at the knots
    m2: Vec<f64>,
}

impl CubicSpline {
    pub fn new(ts: &[f64], ys: &[f64]) -> Result<Self> {
        if ts.len() != ys.len() || ts.len() < 2 {
            return Err(Error::DimensionMismatch("spline needs >= 2 matching knots".into()));
        }
        if ts.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Numerical("spline knots must be strictly increasing".into()));
        }
        let n = ts.len();
        // Thomas algorithm for the natural-spline tridiagonal system.
        let mut sub = vec![0.0; n];
        let mut diag = vec![1.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = ts[i] - ts[i - 1];
            let h1 = ts[i + 1] - ts[i];
            sub[i] = h0;
            diag[i] = 2.0 * (h0 + h1);
            sup[i] = h1;
            rhs[i] = 6.0 * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
        }
        for i in 1..n {
            let w = sub[i] / diag[i - 1];
            diag[i] -= w * sup[i - 1];
            rhs[i] -= w * rhs[i - 1];
        }
        let mut m2 = vec![0.0; n];
        m2[n - 1] = rhs[n - 1] / diag[n - 1];
        for i in (0..n - 1).rev() {
            m2[i] = (rhs[i] - sup[i] * m2[i + 1]) / diag[i];
        }
        Ok(Self { ts: ts.to_vec(), ys: ys.to_vec(), m2 })
    }

    fn segment(&self, t: f64) -> usize {
        match self.ts.binary_search_by(|k| k.partial_cmp(&t).unwrap()) {
            Ok(i) => i.min(self.ts.len() - 2),
            Err(i) => i.clamp(1, self.ts.len() - 1) - 1,
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.ts[i + 1] - self.ts[i];
        let a = (self.ts[i + 1] - t) / h;
        let b = (t - self.ts[i]) / h;
        a * self.ys[i]
            + b * self.ys[i + 1]
            + ((a * a * a - a) * self.m2[i] + (b * b * b - b) * self.m2[i + 1]) * h * h / 6.0
    }

    pub fn deriv(&self, t: f64) -> f64 {
        let i = self.segment(t);
        let h = self.ts[i + 1] - self.ts[i];
        let a = (self.ts[i + 1] - t) / h;
        let b = (t - self.ts[i]) / h;
        (self.ys[i + 1] - self.ys[i]) / h
            + ((1.0 - 3.0 * a * a) * self.m2[i] + (3.0 * b * b - 1.0) * self.m2[i + 1]) * h / 6.0
    }
}

/// Vector-valued curve integrated by RK4 on a fixed grid, with cubic Hermite
/// dense output between the stored nodes.
pub struct DenseCurve {
    ts: Vec<f64>,
    ys: Vec<DVector<f64>>,
    dys: Vec<DVector<f64>>,
}

impl DenseCurve {
    /// Integrate `y' = rhs(t, y)` from `(t0, y0)` to `t1` in `steps` RK4 steps.
    pub fn integrate(
        rhs: &dyn Fn(f64, &DVector<f64>) -> DVector<f64>,
        t0: f64,
        t1: f64,
        y0: DVector<f64>,
        steps: usize,
    ) -> Result<Self> {
        if steps == 0 || !t0.is_finite() || !t1.is_finite() {
            return Err(Error::Numerical("bad integration range".into()));
        }
        let h = (t1 - t0) / steps as f64;
        let mut ts = Vec::with_capacity(steps + 1);
        let mut ys = Vec::with_capacity(steps + 1);
        let mut dys = Vec::with_capacity(steps + 1);
        let mut y = y0;
        let mut dy = rhs(t0, &y);
        ts.push(t0);
        ys.push(y.clone());
        dys.push(dy.clone());
        for i in 0..steps {
            let t = t0 + i as f64 * h;
            let k1 = dy.clone();
            let k2 = rhs(t + 0.5 * h, &(&y + &k1 * (0.5 * h)));
            let k3 = rhs(t + 0.5 * h, &(&y + &k2 * (0.5 * h)));
            let k4 = rhs(t + h, &(&y + &k3 * h));
            y += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
            // land exactly on t1 at the last step so callers can trust end()
            let t_next = if i + 1 == steps { t1 } else { t0 + (i + 1) as f64 * h };
            dy = rhs(t_next, &y);
            ts.push(t_next);
            ys.push(y.clone());
            dys.push(dy.clone());
        }
        Ok(Self { ts, ys, dys })
    }

    pub fn start(&self) -> f64 {
        *self.ts.first().unwrap()
    }

    pub fn end(&self) -> f64 {
        *self.ts.last().unwrap()
    }

    /// Cubic Hermite interpolation at `t` (clamped to the integrated range).
    pub fn eval(&self, t: f64) -> DVector<f64> {
        let (lo, hi) = if self.ts[0] <= self.ts[self.ts.len() - 1] {
            (self.ts[0], self.ts[self.ts.len() - 1])
        } else {
            (self.ts[self.ts.len() - 1], self.ts[0])
        };
        let t = t.clamp(lo, hi);
        let increasing = self.ts[0] <= self.ts[self.ts.len() - 1];
        let mut i = 0;
        for k in 0..self.ts.len() - 1 {
            let (a, b) = (self.ts[k], self.ts[k + 1]);
            let inside = if increasing { a <= t && t <= b } else { b <= t && t <= a };
            if inside {
                i = k;
                break;
            }
        }
        let h = self.ts[i + 1] - self.ts[i];
        let s = (t - self.ts[i]) / h;
        let (s2, s3) = (s * s, s * s * s);
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        &self.ys[i] * h00
            + &self.dys[i] * (h10 * h)
            + &self.ys[i + 1] * h01
            + &self.dys[i + 1] * (h11 * h)
    }
}

/// Uniform sample grid over `[lo, hi]`, endpoints included.
pub fn uniform_grid(lo: f64, hi: f64, samples: usize) -> Vec<f64> {
    if samples <= 1 {
        return vec![lo];
    }
    (0..samples)
        .map(|i| lo + (hi - lo) * i as f64 / (samples - 1) as f64)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_matches_closed_forms() {
        let f = |t: f64| t.cos();
        let got = adaptive_simpson(&f, 0.0, 1.3, 1e-12).unwrap();
        assert!((got - 1.3f64.sin()).abs() < 1e-11);

        // kinked integrand still converges
        let g = |t: f64| (t - 0.3).abs();
        let got = adaptive_simpson(&g, 0.0, 1.0, 1e-12).unwrap();
        let expect = 0.5 * (0.3f64.powi(2) + 0.7f64.powi(2));
        assert!((got - expect).abs() < 1e-10);
    }

    #[test]
    fn monotone_inverse_round_trips() {
        let f = |t: f64| t + 0.5 * t.sin();
        let df = |t: f64| 1.0 + 0.5 * t.cos();
        for target in [-3.0, -0.2, 0.0, 1.7, 11.0] {
            let t = invert_increasing(&f, &df, target, 0.0, 1.0).unwrap();
            assert!((f(t) - target).abs() < 1e-12, "target {target}");
        }
    }

    #[test]
    fn expm_rotation_block() {
        // exp of a rotation generator is the rotation matrix
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -1.3, 1.3, 0.0]);
        let e = expm(&a);
        let expect = DMatrix::from_row_slice(
            2,
            2,
            &[1.3f64.cos(), -(1.3f64.sin()), 1.3f64.sin(), 1.3f64.cos()],
        );
        assert!((e - expect).amax() < 1e-14);
    }

    #[test]
    fn expm_hyperbolic_block() {
        // V = k*M with M^2 = I gives exp(V) = cosh(k) I + sinh(k) M
        let k = 0.7;
        let m = DMatrix::from_row_slice(2, 2, &[0.6, 0.8, 0.8, -0.6]);
        let e = expm(&(&m * k));
        let expect = DMatrix::identity(2, 2) * k.cosh() + &m * k.sinh();
        assert!((e - expect).amax() < 1e-14);
    }

    #[test]
    fn spline_reproduces_cubics_exactly_at_knots() {
        let ts: Vec<f64> = (0..9).map(|i| i as f64 * 0.5).collect();
        let ys: Vec<f64> = ts.iter().map(|t| t.sin()).collect();
        let s = CubicSpline::new(&ts, &ys).unwrap();
        for (&t, &y) in ts.iter().zip(&ys) {
            assert!((s.eval(t) - y).abs() < 1e-13);
        }
        // interior accuracy and derivative sanity for a smooth function
        assert!((s.eval(1.23) - 1.23f64.sin()).abs() < 2e-3);
        assert!((s.deriv(1.23) - 1.23f64.cos()).abs() < 2e-2);
    }

    #[test]
    fn rk4_dense_output_quadrature() {
        // y' = cos(t): dense output should track sin(t) closely
        let rhs = |t: f64, _y: &DVector<f64>| DVector::from_vec(vec![t.cos()]);
        let curve =
            DenseCurve::integrate(&rhs, 0.0, 3.0, DVector::zeros(1), 300).unwrap();
        for t in [0.0, 0.4, 1.33, 2.9, 3.0] {
            assert!((curve.eval(t)[0] - t.sin()).abs() < 1e-9, "t={t}");
        }
        assert_eq!(curve.start(), 0.0);
        assert_eq!(curve.end(), 3.0);
    }

    #[test]
    fn rk4_handles_reverse_time() {
        let rhs = |t: f64, _y: &DVector<f64>| DVector::from_vec(vec![t.cos()]);
        let curve =
            DenseCurve::integrate(&rhs, 0.0, -2.0, DVector::zeros(1), 200).unwrap();
        assert!((curve.eval(-1.5)[0] - (-1.5f64).sin()).abs() < 1e-9);
    }

    #[test]
    fn uniform_grid_endpoints() {
        let g = uniform_grid(-1.0, 2.0, 7);
        assert_eq!(g.len(), 7);
        assert_eq!(g[0], -1.0);
        assert_eq!(g[6], 2.0);
    }
}
