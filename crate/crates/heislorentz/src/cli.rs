//! Batch front-end: JSON configs in, JSON reports and CSV sweeps out.
//!
//! Every command is a pure function of `(config, seed, version)`: randomness
//! comes from one named seeded generator, sweeps collect in deterministic
//! order, and reports serialize with a fixed field order, so identical inputs
//! produce byte-identical reports.

use std::path::Path;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::examples::{
    adams_cross_check, adams_path, homogeneous_path, monodromy_bundle, AdamsSpec,
};
use crate::geometry::{
    killing_residual, metric_at, signature_of, RigidityProblem, SpacetimePoint, Tangent,
};
use crate::lie_core::{basis_vectors, AlgebraVector};
use crate::numeric::{expm, uniform_grid, CubicSpline};
use crate::paths::{verify_equivalence, AutomorphismPath, EquivalenceWitness};
use crate::quotient::{deck_isometry_report, LatticeSpec};
use crate::rational::{parse_rat, Rat};
use crate::symplectic::Splitting;
use crate::{Error, Result, CONVENTION, VERSION};

/// Schema stamp for reports.
pub const REPORT_SCHEMA: &str = "report_v1";

// ---------------------------------------------------------------------------
// configuration
// ---------------------------------------------------------------------------

/// Time grid for sweeps.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    pub t_min: f64,
    pub t_max: f64,
    pub samples: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { t_min: 0.0, t_max: std::f64::consts::TAU, samples: 256 }
    }
}

/// Named tolerances used across checks.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// For exact-in-principle algebraic identities.
    pub algebraic: f64,
    /// For residuals limited by finite differencing.
    pub fd: f64,
    /// Finite-difference step.
    pub step: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { algebraic: 1e-9, fd: 1e-6, step: 1e-5 }
    }
}

/// Raised-cosine bump parameters for the `adams` path kind.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BumpConfig {
    pub center: f64,
    pub width: f64,
    pub floor: f64,
    pub amplitude: f64,
    pub quad_tol: f64,
}

impl Default for BumpConfig {
    fn default() -> Self {
        Self { center: 1.0, width: 1.0, floor: 1.0, amplitude: 1.0, quad_tol: 1e-10 }
    }
}

/// Sampled-matrix table for the `custom` path kind; entries interpolate with
/// natural cubic splines.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampledConfig {
    pub ts: Vec<f64>,
    /// One row-major `(2n+1)^2` matrix per sample time.
    pub matrices: Vec<Vec<f64>>,
}

/// Which path the run is about.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PathConfig {
    /// `homogeneous`, `adams`, `monodromy`, `one_parameter`, or `custom`.
    pub kind: String,
    /// Rotation rates for `homogeneous`, rationals as strings.
    pub lambda: Option<Vec<String>>,
    /// Bump profile for `adams`.
    pub bump: Option<BumpConfig>,
    /// Row-major generator matrix for `one_parameter`: `phi_t = exp(t G)`.
    pub generator: Option<Vec<Vec<f64>>>,
    /// Sample table for `custom`.
    pub samples: Option<SampledConfig>,
    /// Declared period, where the kind does not determine one.
    pub period: Option<f64>,
}

impl Default for PathConfig {
    fn default() -> Self {
        Self {
            kind: "homogeneous".into(),
            lambda: None,
            bump: None,
            generator: None,
            samples: None,
            period: None,
        }
    }
}

/// Optional explicit splitting: `z0 = z0_coefficient * Z` plus complement
/// basis rows.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplittingConfig {
    pub z0_coefficient: f64,
    /// `2n` rows of `2n+1` coordinates each.
    pub p_basis: Vec<Vec<f64>>,
}

/// Optional lattice: rational basis rows of the log-lattice.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatticeConfig {
    /// `2n+1` rows of `2n+1` rational strings each.
    pub basis: Vec<Vec<String>>,
}

/// Second path plus optional witness for the `equivalence` command.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquivalenceConfig {
    pub path: PathConfig,
    #[serde(default)]
    pub splitting: Option<SplittingConfig>,
    #[serde(default)]
    pub witness: Option<WitnessConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessConfig {
    pub c: f64,
    pub d: f64,
}

/// One run's full configuration; all fields have deterministic defaults.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub n: usize,
    pub path: PathConfig,
    pub splitting: Option<SplittingConfig>,
    pub lattice: Option<LatticeConfig>,
    pub grid: GridConfig,
    pub tolerances: Tolerances,
    pub seed: u64,
    pub equivalence: Option<EquivalenceConfig>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 1,
            path: PathConfig::default(),
            splitting: None,
            lattice: None,
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            seed: 0,
            equivalence: None,
        }
    }
}

impl RunConfig {
    /// Parses a config from JSON, reporting schema violations with a JSON
    /// pointer to the offending field.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            Error::config(pointerize(&e.path().to_string()), e.inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::config("/n", "rank must be at least 1"));
        }
        if self.grid.samples < 2 {
            return Err(Error::config("/grid/samples", "need at least 2 samples"));
        }
        if !(self.grid.t_min < self.grid.t_max) {
            return Err(Error::config("/grid/t_max", "t_max must exceed t_min"));
        }
        for (value, name) in [
            (self.tolerances.algebraic, "algebraic"),
            (self.tolerances.fd, "fd"),
            (self.tolerances.step, "step"),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(Error::config(
                    format!("/tolerances/{name}"),
                    "tolerance must be positive and finite",
                ));
            }
        }
        if let Some(eq) = &self.equivalence {
            if let Some(w) = &eq.witness {
                if w.c == 0.0 || !w.c.is_finite() || !w.d.is_finite() {
                    return Err(Error::config(
                        "/equivalence/witness/c",
                        "time rescaling needs finite c != 0",
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Converts serde_path_to_error's dotted path (`a.b[3].c`) to a JSON pointer.
fn pointerize(dotted: &str) -> String {
    if dotted == "." || dotted.is_empty() {
        return "/".into();
    }
    let mut out = String::new();
    for seg in dotted.split('.') {
        if seg.is_empty() {
            continue;
        }
        let mut rest = seg;
        while let Some(open) = rest.find('[') {
            let head = &rest[..open];
            if !head.is_empty() {
                out.push('/');
                out.push_str(head);
            }
            let close = rest.find(']').unwrap_or(rest.len());
            out.push('/');
            out.push_str(&rest[open + 1..close]);
            rest = rest.get(close + 1..).unwrap_or("");
        }
        if !rest.is_empty() {
            out.push('/');
            out.push_str(rest);
        }
    }
    if out.is_empty() {
        "/".into()
    } else {
        out
    }
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

/// One named verification with its outcome.
#[derive(Clone, Debug, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub paper_conflict: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<serde_json::Value>,
    pub note: String,
}

impl CheckResult {
    fn new(name: &str, pass: bool, residual: Option<f64>, note: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            pass,
            max_residual: residual,
            paper_conflict: None,
            witness: None,
            note: note.into(),
        }
    }
}

/// One row of the positive-definite complement profile: the `p`-block Gram
/// of the metric along the time axis.
#[derive(Clone, Debug, Serialize)]
pub struct MetricProfileRow {
    pub t: f64,
    /// Row-major `2n x 2n` block.
    pub gram: Vec<f64>,
}

/// One row of the Killing-residual sweep.
#[derive(Clone, Debug, Serialize)]
pub struct KillingRow {
    pub t: f64,
    pub k_index: usize,
    pub residual: f64,
}

/// Everything a run produces. Field order is fixed; serialization is
/// deterministic given `(config, seed, version)`.
#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub schema: String,
    pub version: String,
    pub convention: String,
    pub command: String,
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<CheckResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub metric_profile: Option<Vec<MetricProfileRow>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub signature: Option<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub killing_sweep: Option<Vec<KillingRow>>,
    pub config: RunConfig,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        let mut text =
            serde_json::to_string_pretty(self).expect("reports contain only serializable data");
        text.push('\n');
        text
    }
}

// ---------------------------------------------------------------------------
// building blocks
// ---------------------------------------------------------------------------

fn default_lambda(n: usize) -> Vec<Rat> {
    vec![crate::rational::rat_int(1); n]
}

fn parse_lambda(n: usize, cfg: &PathConfig) -> Result<Vec<Rat>> {
    match &cfg.lambda {
        None => Ok(default_lambda(n)),
        Some(raw) => {
            if raw.len() != n {
                return Err(Error::config(
                    "/path/lambda",
                    format!("expected {n} rates, got {}", raw.len()),
                ));
            }
            raw.iter()
                .enumerate()
                .map(|(i, s)| {
                    parse_rat(s).map_err(|e| {
                        Error::config(format!("/path/lambda/{i}"), e.to_string())
                    })
                })
                .collect()
        }
    }
}

fn adams_spec(n: usize, cfg: &PathConfig) -> AdamsSpec {
    let bump = cfg.bump.clone().unwrap_or_default();
    AdamsSpec {
        n,
        center: bump.center,
        width: bump.width,
        floor: bump.floor,
        amplitude: bump.amplitude,
        quad_tol: bump.quad_tol,
    }
}

/// Builds the path a config describes.
pub fn build_path(n: usize, cfg: &PathConfig) -> Result<AutomorphismPath> {
    let dim = 2 * n + 1;
    match cfg.kind.as_str() {
        "homogeneous" => homogeneous_path(n, &parse_lambda(n, cfg)?),
        "adams" => {
            let spec = adams_spec(n, cfg);
            spec.validate()?;
            Ok(adams_path(&spec)?.path)
        }
        "monodromy" => Ok(monodromy_bundle(n)?.path),
        "one_parameter" => {
            let rows = cfg.generator.as_ref().ok_or_else(|| {
                Error::config("/path/generator", "one_parameter needs a generator matrix")
            })?;
            if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
                return Err(Error::config(
                    "/path/generator",
                    format!("expected a {dim} x {dim} matrix"),
                ));
            }
            let flat: Vec<f64> = rows.iter().flatten().copied().collect();
            let g = DMatrix::from_row_slice(dim, dim, &flat);
            let g2 = g.clone();
            AutomorphismPath::new(
                n,
                "one-parameter",
                cfg.period,
                Arc::new(move |t| expm(&(&g * t))),
                Some(Arc::new(move |t| expm(&(&g2 * t)) * &g2)),
            )
        }
        "custom" => {
            let table = cfg.samples.as_ref().ok_or_else(|| {
                Error::config("/path/samples", "custom needs a sampled-matrix table")
            })?;
            if table.ts.len() < 4 {
                return Err(Error::config("/path/samples/ts", "need at least 4 sample times"));
            }
            if table.matrices.len() != table.ts.len() {
                return Err(Error::config(
                    "/path/samples/matrices",
                    "one matrix per sample time",
                ));
            }
            if table.matrices.iter().any(|m| m.len() != dim * dim) {
                return Err(Error::config(
                    "/path/samples/matrices",
                    format!("each matrix needs {} row-major entries", dim * dim),
                ));
            }
            let mut splines = Vec::with_capacity(dim * dim);
            for e in 0..dim * dim {
                let ys: Vec<f64> = table.matrices.iter().map(|m| m[e]).collect();
                splines.push(
                    CubicSpline::new(&table.ts, &ys)
                        .map_err(|err| Error::config("/path/samples/ts", err.to_string()))?,
                );
            }
            let splines = Arc::new(splines);
            AutomorphismPath::new(
                n,
                "custom-sampled",
                cfg.period,
                Arc::new(move |t| {
                    DMatrix::from_fn(dim, dim, |r, c| splines[r * dim + c].eval(t))
                }),
                None,
            )
        }
        other => Err(Error::config("/path/kind", format!("unknown path kind `{other}`"))),
    }
}

fn build_splitting(n: usize, cfg: Option<&SplittingConfig>) -> Result<Splitting> {
    match cfg {
        None => Ok(Splitting::standard(n)),
        Some(sc) => {
            let dim = 2 * n + 1;
            if sc.z0_coefficient == 0.0 {
                return Err(Error::config("/splitting/z0_coefficient", "must be nonzero"));
            }
            if sc.p_basis.len() != 2 * n || sc.p_basis.iter().any(|r| r.len() != dim) {
                return Err(Error::config(
                    "/splitting/p_basis",
                    format!("expected {} rows of {dim} coordinates", 2 * n),
                ));
            }
            let z0 = AlgebraVector::z_basis(n).scale(&sc.z0_coefficient);
            let p = sc
                .p_basis
                .iter()
                .map(|r| AlgebraVector::from_coords(r))
                .collect::<Result<Vec<_>>>()?;
            Splitting::new(z0, p)
        }
    }
}

fn build_lattice(n: usize, cfg: Option<&LatticeConfig>) -> Result<LatticeSpec> {
    match cfg {
        None => Ok(LatticeSpec::standard(n)),
        Some(lc) => {
            let dim = 2 * n + 1;
            if lc.basis.len() != dim || lc.basis.iter().any(|r| r.len() != dim) {
                return Err(Error::config(
                    "/lattice/basis",
                    format!("expected {dim} rows of {dim} rational strings"),
                ));
            }
            let rows = lc
                .basis
                .iter()
                .enumerate()
                .map(|(i, row)| {
                    let coords = row
                        .iter()
                        .map(|s| {
                            parse_rat(s).map_err(|e| {
                                Error::config(format!("/lattice/basis/{i}"), e.to_string())
                            })
                        })
                        .collect::<Result<Vec<_>>>()?;
                    AlgebraVector::<Rat>::from_coords(&coords)
                })
                .collect::<Result<Vec<_>>>()?;
            LatticeSpec::new(n, rows)
        }
    }
}

fn grid_times(cfg: &RunConfig) -> Vec<f64> {
    uniform_grid(cfg.grid.t_min, cfg.grid.t_max, cfg.grid.samples)
}

fn seeded_points(cfg: &RunConfig, ts: &[f64], seed: u64) -> Vec<SpacetimePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = 2 * cfg.n + 1;
    ts.iter()
        .map(|&t| {
            let h = AlgebraVector::from_dvec(&DVector::from_fn(dim, |_, _| {
                rng.gen_range(-1.0..1.0)
            }))
            .expect("dimension matches rank");
            SpacetimePoint::new(t, h)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

/// The supported subcommands.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommandKind {
    Validate,
    Metric,
    Killing,
    Quotient,
    Equivalence,
    Example(String),
    Rigidity,
}

impl CommandKind {
    fn label(&self) -> String {
        match self {
            CommandKind::Validate => "validate".into(),
            CommandKind::Metric => "metric".into(),
            CommandKind::Killing => "killing".into(),
            CommandKind::Quotient => "quotient".into(),
            CommandKind::Equivalence => "equivalence".into(),
            CommandKind::Example(name) => format!("example {name}"),
            CommandKind::Rigidity => "rigidity".into(),
        }
    }
}

/// Runs one command against a validated config and collects the report.
pub fn run(command: &CommandKind, cfg: &RunConfig) -> Result<RunReport> {
    cfg.validate()?;
    let mut checks = Vec::new();
    let mut metric_profile = None;
    let mut signature = None;
    let mut killing_sweep = None;

    match command {
        CommandKind::Validate => {
            let path = build_path(cfg.n, &cfg.path)?;
            let splitting = cfg
                .splitting
                .as_ref()
                .map(|sc| build_splitting(cfg.n, Some(sc)))
                .transpose()?;
            let ts = grid_times(cfg);
            let v = path.validate_metric_defining(splitting.as_ref(), &ts, cfg.tolerances.algebraic)?;
            let first_bad = v.samples.iter().find(|s| !s.ok);
            let mut check = CheckResult::new(
                "metric_defining",
                v.ok,
                None,
                format!("{} samples over [{}, {}]", v.samples.len(), cfg.grid.t_min, cfg.grid.t_max),
            );
            if let Some(bad) = first_bad {
                check.witness = Some(serde_json::to_value(bad).expect("samples serialize"));
            }
            checks.push(check);
            if path.period().is_some() {
                let defect = path.check_z_equivariance(&ts)?;
                checks.push(CheckResult::new(
                    "z_equivariance",
                    defect < cfg.tolerances.fd,
                    Some(defect),
                    "grid defect of phi_(t+a) = phi_t phi_a",
                ));
            }
        }
        CommandKind::Metric => {
            let path = build_path(cfg.n, &cfg.path)?;
            let splitting = build_splitting(cfg.n, cfg.splitting.as_ref())?;
            let ts = grid_times(cfg);
            let k = 2 * cfg.n;
            let mut rows = Vec::with_capacity(ts.len());
            let mut worst_condition = 0.0f64;
            let mut signatures_ok = true;
            let mut sig = None;
            for &t in &ts {
                let sample =
                    metric_at(&path, &splitting, &SpacetimePoint::new(t, AlgebraVector::zero(cfg.n)))?;
                let block = sample.gram.view((2, 2), (k, k)).into_owned();
                rows.push(MetricProfileRow {
                    t,
                    gram: block.transpose().iter().copied().collect(),
                });
                let s = signature_of(&sample.coord_form)?;
                signatures_ok &= s == (1, 2 * cfg.n + 1);
                sig = Some(s);
                worst_condition = worst_condition.max(sample.condition);
            }
            checks.push(CheckResult::new(
                "signature",
                signatures_ok,
                None,
                format!("expected (1, {}) at every grid point", 2 * cfg.n + 1),
            ));
            checks.push(CheckResult::new(
                "frame_condition",
                worst_condition < 1e12,
                Some(worst_condition),
                "conditioning of the frame-to-coordinates matrix",
            ));
            signature = sig;
            metric_profile = Some(rows);
        }
        CommandKind::Killing => {
            let path = build_path(cfg.n, &cfg.path)?;
            let splitting = build_splitting(cfg.n, cfg.splitting.as_ref())?;
            let ts = grid_times(cfg);
            let points = seeded_points(cfg, &ts, cfg.seed);
            let dirs = basis_vectors(cfg.n);
            let dim = 2 * cfg.n + 1;
            let mut frame = vec![Tangent::new(1.0, AlgebraVector::zero(cfg.n))];
            for j in 0..dim {
                let mut coords = vec![0.0; dim];
                coords[j] = 1.0;
                frame.push(Tangent::new(0.0, AlgebraVector::from_coords(&coords)?));
            }
            let tasks: Vec<(usize, usize)> = (0..points.len())
                .flat_map(|pi| (0..dirs.len()).map(move |ki| (pi, ki)))
                .collect();
            use rayon::prelude::*;
            let rows: Vec<KillingRow> = tasks
                .par_iter()
                .map(|&(pi, ki)| {
                    let x = &points[pi];
                    let mut worst = 0.0f64;
                    for i in 0..frame.len() {
                        for j in i..frame.len() {
                            let r = killing_residual(
                                &path,
                                &splitting,
                                &dirs[ki],
                                x,
                                &frame[i],
                                &frame[j],
                                cfg.tolerances.step,
                            )?;
                            worst = worst.max(r);
                        }
                    }
                    Ok(KillingRow { t: x.t, k_index: ki, residual: worst })
                })
                .collect::<Result<Vec<_>>>()?;
            let max = rows.iter().map(|r| r.residual).fold(0.0f64, f64::max);
            checks.push(CheckResult::new(
                "killing_residual",
                max < cfg.tolerances.fd,
                Some(max),
                format!("{} basis directions at {} points", dirs.len(), points.len()),
            ));
            killing_sweep = Some(rows);
        }
        CommandKind::Quotient => {
            let path = build_path(cfg.n, &cfg.path)?;
            let splitting = build_splitting(cfg.n, cfg.splitting.as_ref())?;
            let lattice = build_lattice(cfg.n, cfg.lattice.as_ref())?;
            let rep = deck_isometry_report(
                &path,
                &splitting,
                &lattice,
                cfg.grid.samples,
                cfg.tolerances.fd,
                cfg.seed,
            )?;
            checks.push(CheckResult::new(
                "lattice_closure",
                rep.lattice_closed,
                None,
                "(1/2)[b_i, b_j] stays in the lattice, exactly",
            ));
            checks.push(CheckResult::new(
                "lattice_preserved",
                rep.lattice_preserved,
                None,
                "phi_alpha maps the lattice onto itself",
            ));
            checks.push(CheckResult::new(
                "z_equivariance",
                rep.equivariance_defect < cfg.tolerances.fd,
                Some(rep.equivariance_defect),
                "grid defect of phi_(t+a) = phi_t phi_a",
            ));
            for g in &rep.generators {
                checks.push(CheckResult::new(
                    &format!("deck_isometry {}", g.generator),
                    g.pass,
                    Some(g.max_residual),
                    format!("{} fundamental-domain points", rep.samples),
                ));
            }
            let ts = grid_times(cfg);
            let nu_period = path.check_nu_periodicity(&ts)?;
            checks.push(CheckResult::new(
                "nu_periodicity",
                nu_period < 1e-10,
                Some(nu_period),
                "log-derivative repeats after one period",
            ));
        }
        CommandKind::Equivalence => {
            let eq = cfg.equivalence.as_ref().ok_or_else(|| {
                Error::config("/equivalence", "the equivalence command needs a second path")
            })?;
            let path_a = build_path(cfg.n, &cfg.path)?;
            let split_a = build_splitting(cfg.n, cfg.splitting.as_ref())?;
            let path_b = build_path(cfg.n, &eq.path)?;
            let split_b = build_splitting(cfg.n, eq.splitting.as_ref())?;
            let witness = eq.witness.as_ref().map(|w| EquivalenceWitness { c: w.c, d: w.d });
            let ts = grid_times(cfg);
            let rep = verify_equivalence(
                &path_a,
                &split_a,
                &path_b,
                &split_b,
                witness,
                &ts,
                cfg.tolerances.algebraic,
            )?;
            let mut check = CheckResult::new(
                "equivalent",
                rep.equivalent,
                Some(rep.max_residual),
                rep.note.clone(),
            );
            if let Some(w) = rep.witness {
                check.witness = Some(serde_json::to_value(w).expect("witness serializes"));
            }
            checks.push(check);
        }
        CommandKind::Example(name) => {
            run_example(name, cfg, &mut checks)?;
        }
        CommandKind::Rigidity => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            for m in 3..=8 {
                let mut worst_dim = 0usize;
                for _ in 0..100 {
                    let prob = RigidityProblem::diagonal_model(m, 1)?.random_transport(&mut rng);
                    worst_dim = worst_dim.max(prob.rigidity_dimension()?.dimension);
                }
                checks.push(CheckResult::new(
                    &format!("rigidity dim {m}"),
                    worst_dim == 0,
                    Some(worst_dim as f64),
                    "lightlike hyperplane data admits no residual freedom",
                ));
            }
            let control = RigidityProblem::diagonal_model(5, 2)?
                .random_transport(&mut rng)
                .rigidity_dimension()?;
            checks.push(CheckResult::new(
                "codimension-2 control",
                control.dimension >= 1,
                Some(control.dimension as f64),
                "codimension-2 data must leave residual freedom",
            ));
        }
    }

    let passed = checks.iter().all(|c| c.pass);
    Ok(RunReport {
        schema: REPORT_SCHEMA.into(),
        version: VERSION.into(),
        convention: CONVENTION.into(),
        command: command.label(),
        seed: cfg.seed,
        passed,
        checks,
        metric_profile,
        signature,
        killing_sweep,
        config: cfg.clone(),
    })
}

fn run_example(name: &str, cfg: &RunConfig, checks: &mut Vec<CheckResult>) -> Result<()> {
    match name {
        "homogeneous" => {
            let path = homogeneous_path(cfg.n, &parse_lambda(cfg.n, &cfg.path)?)?;
            let splitting = build_splitting(cfg.n, cfg.splitting.as_ref())?;
            let ts = grid_times(cfg);
            let v = path.validate_metric_defining(Some(&splitting), &ts, cfg.tolerances.algebraic)?;
            checks.push(CheckResult::new("metric_defining", v.ok, None, "grid validation"));
            let defect = path.check_z_equivariance(&ts)?;
            checks.push(CheckResult::new(
                "z_equivariance",
                defect < 1e-8,
                Some(defect),
                "grid defect of phi_(t+a) = phi_t phi_a",
            ));
            let lattice = build_lattice(cfg.n, cfg.lattice.as_ref())?;
            let deck = deck_isometry_report(
                &path,
                &splitting,
                &lattice,
                cfg.grid.samples,
                cfg.tolerances.fd,
                cfg.seed,
            )?;
            checks.push(CheckResult::new(
                "deck_isometry",
                deck.pass,
                Some(deck.max_residual),
                format!("all generators over {} points", deck.samples),
            ));
        }
        "adams" => {
            let spec = adams_spec(cfg.n, &cfg.path);
            let report = adams_cross_check(&spec, cfg.grid.samples, cfg.tolerances.fd, cfg.seed)?;
            checks.push(CheckResult::new(
                "alpha_quadrature",
                report.alpha_error < 1e-9,
                Some(report.alpha_error),
                format!("alpha = {:.12}", report.alpha_quadrature),
            ));
            checks.push(CheckResult::new(
                "nu_display",
                report.nu_display_residual < 1e-8,
                Some(report.nu_display_residual),
                "log-derivative blocks equal J / m(t)",
            ));
            checks.push(CheckResult::new(
                "killing_norm_profile",
                report.killing_norm_residual < 1e-8,
                Some(report.killing_norm_residual),
                "<X1*, X1*> at (H(t), 0) equals m(t)",
            ));
            checks.push(CheckResult::new(
                "z_equivariance",
                report.z_equivariance_residual < 1e-8,
                Some(report.z_equivariance_residual),
                "grid defect over one period",
            ));
            checks.push(CheckResult::new(
                "warped_model_equivariance",
                report.f_equivariance_residual < 1e-9,
                Some(report.f_equivariance_residual),
                "point map intertwines the group actions",
            ));
            checks.push(CheckResult::new(
                "warped_model_isometry",
                report.f_isometry_residual < cfg.tolerances.fd,
                Some(report.f_isometry_residual),
                format!("{} random points", report.samples),
            ));
        }
        "monodromy" => {
            let bundle = monodromy_bundle(cfg.n)?;
            let r = &bundle.report;
            checks.push(CheckResult::new(
                "exponential",
                r.exp_error < 1e-9,
                Some(r.exp_error),
                "exp(V) equals the integer block",
            ));
            checks.push(CheckResult::new(
                "diagonalization",
                r.diagonalization_residual < 1e-12,
                Some(r.diagonalization_residual),
                "b^-1 a b is diagonal",
            ));
            checks.push(CheckResult::new(
                "unimodular",
                r.det_a == 1,
                None,
                format!("det a = {}", r.det_a),
            ));
            checks.push(CheckResult::new(
                "eigenvalues",
                r.eigenvalue_error < 1e-12,
                Some(r.eigenvalue_error),
                "(3 +- sqrt 5) / 2",
            ));
            checks.push(CheckResult::new(
                "one_parameter_group",
                r.one_parameter_residual < 1e-10,
                Some(r.one_parameter_residual),
                "phi_t phi_s = phi_(t+s)",
            ));
            checks.push(CheckResult::new(
                "lattice_closure",
                r.lattice_closure.closed,
                None,
                "exact BCH closure of the half-integer lattice",
            ));
            checks.push(CheckResult::new(
                "lattice_preserved",
                r.lattice_preserved_all,
                None,
                "phi_q preserves the lattice, exactly, for |q| <= 5",
            ));
            let mut definiteness = CheckResult::new(
                "definiteness",
                true,
                Some(r.definiteness.min_eigenvalue),
                format!(
                    "computed verdict: {:?} (min eigenvalue {:.10}); informational",
                    r.definiteness.verdict, r.definiteness.min_eigenvalue
                ),
            );
            definiteness.paper_conflict = Some(r.paper_conflict);
            definiteness.witness = r
                .definiteness
                .witness
                .as_ref()
                .map(|w| serde_json::to_value(w).expect("witness serializes"));
            checks.push(definiteness);
        }
        other => {
            return Err(Error::config(
                "/command",
                format!("unknown example `{other}` (expected homogeneous, adams, or monodromy)"),
            ));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

/// Writes `metric_profile.csv` and `killing_residuals.csv` into `dir` for the
/// sweeps the report carries; empty sweeps produce a warning and no file.
pub fn emit_csv(report: &RunReport, dir: &Path) -> Result<Vec<std::path::PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    match &report.metric_profile {
        Some(rows) if !rows.is_empty() => {
            let k = (rows[0].gram.len() as f64).sqrt().round() as usize;
            let mut text = String::from("t");
            for r in 0..k {
                for c in 0..k {
                    text.push_str(&format!(",g{r}{c}"));
                }
            }
            text.push('\n');
            for row in rows {
                text.push_str(&format!("{:.17e}", row.t));
                for v in &row.gram {
                    text.push_str(&format!(",{v:.17e}"));
                }
                text.push('\n');
            }
            let path = dir.join("metric_profile.csv");
            std::fs::write(&path, text)?;
            written.push(path);
        }
        Some(_) => eprintln!("warning: metric profile is empty; no CSV written"),
        None => {}
    }
    match &report.killing_sweep {
        Some(rows) if !rows.is_empty() => {
            let mut text = String::from("t,k_index,residual\n");
            for row in rows {
                text.push_str(&format!("{:.17e},{},{:.17e}\n", row.t, row.k_index, row.residual));
            }
            let path = dir.join("killing_residuals.csv");
            std::fs::write(&path, text)?;
            written.push(path);
        }
        Some(_) => eprintln!("warning: killing sweep is empty; no CSV written"),
        None => {}
    }
    Ok(written)
}

// ---------------------------------------------------------------------------
// binary entry point
// ---------------------------------------------------------------------------

use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "heislorentz",
    version,
    about = "Verify Lorentzian metrics on Heisenberg-group spacetimes"
)]
struct CliArgs {
    #[command(subcommand)]
    command: CliCommand,
}

#[derive(Args)]
struct CommonArgs {
    /// JSON configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<std::path::PathBuf>,
    /// Directory for CSV sweeps.
    #[arg(long)]
    csv: Option<std::path::PathBuf>,
    /// Print the full JSON report to stdout.
    #[arg(long)]
    json: bool,
    /// Override the config's random seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum CliCommand {
    /// Validate that the configured path defines a metric.
    Validate(CommonArgs),
    /// Sample the metric and emit the complement profile.
    Metric(CommonArgs),
    /// Sweep Killing residuals for every basis direction.
    Killing(CommonArgs),
    /// Check lattice compatibility and the deck action.
    Quotient(CommonArgs),
    /// Decide equivalence of two configured paths.
    Equivalence(CommonArgs),
    /// Run a named preset bundle with its cross-checks.
    Example {
        /// `homogeneous`, `adams`, or `monodromy`.
        name: String,
        #[command(flatten)]
        args: CommonArgs,
    },
    /// Solve randomized lightlike rigidity instances.
    Rigidity(CommonArgs),
}

fn load_config(args: &CommonArgs) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        None => RunConfig::default(),
        Some(path) => {
            let text = std::fs::read_to_string(path)?;
            RunConfig::from_json(&text)?
        }
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn apply_thread_cap() {
    if let Ok(raw) = std::env::var("HEISLORENTZ_THREADS") {
        if let Ok(k) = raw.trim().parse::<usize>() {
            if k >= 1 {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
            }
        }
    }
}

/// Full binary behavior; returns the process exit code.
pub fn main_impl() -> i32 {
    apply_thread_cap();
    let parsed = CliArgs::parse();
    let (kind, args) = match &parsed.command {
        CliCommand::Validate(a) => (CommandKind::Validate, a),
        CliCommand::Metric(a) => (CommandKind::Metric, a),
        CliCommand::Killing(a) => (CommandKind::Killing, a),
        CliCommand::Quotient(a) => (CommandKind::Quotient, a),
        CliCommand::Equivalence(a) => (CommandKind::Equivalence, a),
        CliCommand::Example { name, args } => (CommandKind::Example(name.clone()), args),
        CliCommand::Rigidity(a) => (CommandKind::Rigidity, a),
    };
    let cfg = match load_config(args) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("config error: {e}");
            return 2;
        }
    };
    let report = match run(&kind, &cfg) {
        Ok(report) => report,
        Err(e @ Error::Config { .. }) => {
            eprintln!("config error: {e}");
            return 2;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return 1;
        }
    };
    if args.json {
        print!("{}", report.to_json());
    } else {
        println!("{} ({} v{})", report.command, report.schema, report.version);
        for c in &report.checks {
            let mark = if c.pass { "pass" } else { "FAIL" };
            let residual = c
                .max_residual
                .map(|r| format!(" residual {r:.3e}"))
                .unwrap_or_default();
            let conflict = if c.paper_conflict == Some(true) { " [paper_conflict]" } else { "" };
            println!("  {mark}  {}{residual}{conflict} - {}", c.name, c.note);
        }
        println!("overall: {}", if report.passed { "pass" } else { "FAIL" });
    }
    if let Some(dir) = &args.csv {
        match emit_csv(&report, dir) {
            Ok(files) => {
                for f in files {
                    eprintln!("wrote {}", f.display());
                }
            }
            Err(e) => {
                eprintln!("error writing CSV: {e}");
                return 1;
            }
        }
    }
    if report.passed {
        0
    } else {
        1
    }
}
