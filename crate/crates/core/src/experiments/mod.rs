//! Config-driven experiments and their result records.

mod suite;

use crate::error::{LabError, Result};
use crate::measures::{
    build_cantor_product, build_cantor_product_centered, build_falconer_lattice, build_scale_averaged_cantor,
    build_sphere_measure, build_uniform_grid, cantor_dimension, read_measure_json, AtomicMeasure,
};
use crate::norms::ExponentFit;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

/// Version of the config layout reported by [`schema`].
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    FrostmanAudit,
    LpBounds,
    FixedTimeFit,
    GammaFit,
    BetaFit,
    ConeFit,
    MaximalEmbed,
    DistanceDensity,
    FalconerLatticeSweep,
    ExponentAtlas,
    NullformSuite,
    WeakTypeChain,
}

impl Experiment {
    pub const ALL: [Experiment; 12] = [
        Experiment::FrostmanAudit,
        Experiment::LpBounds,
        Experiment::FixedTimeFit,
        Experiment::GammaFit,
        Experiment::BetaFit,
        Experiment::ConeFit,
        Experiment::MaximalEmbed,
        Experiment::DistanceDensity,
        Experiment::FalconerLatticeSweep,
        Experiment::ExponentAtlas,
        Experiment::NullformSuite,
        Experiment::WeakTypeChain,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Experiment::FrostmanAudit => "frostman-audit",
            Experiment::LpBounds => "lp-bounds",
            Experiment::FixedTimeFit => "fixed-time-fit",
            Experiment::GammaFit => "gamma-fit",
            Experiment::BetaFit => "beta-fit",
            Experiment::ConeFit => "cone-fit",
            Experiment::MaximalEmbed => "maximal-embed",
            Experiment::DistanceDensity => "distance-density",
            Experiment::FalconerLatticeSweep => "falconer-lattice-sweep",
            Experiment::ExponentAtlas => "exponent-atlas",
            Experiment::NullformSuite => "nullform-suite",
            Experiment::WeakTypeChain => "weak-type-chain",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|e| e.name() == name)
    }

    /// The mathematical statement the experiment exercises.
    pub fn anchor(&self) -> &'static str {
        match self {
            Experiment::FrostmanAudit => "ball growth mu(B(x, r)) <= C r^alpha",
            Experiment::LpBounds => "||mu_k||_inf <= C 2^((n - alpha) k) for Littlewood-Paley pieces",
            Experiment::FixedTimeFit => "band trace ||f||_{L^2(mu)} <= C R^((n - alpha)/2) ||f||_2 and the fixed-time estimate",
            Experiment::GammaFit => "averaged Strichartz gain gamma_n(alpha) over the fixed-time exponent",
            Experiment::BetaFit => "spherical L^2 decay of mu^ at rate R^(-beta)",
            Experiment::ConeFit => "conical L^2 decay of the space-time transform",
            Experiment::MaximalEmbed => "maximal-in-time norm controlled by the space-time norm and its time derivative",
            Experiment::DistanceDensity => "push-forward of mu x mu under the distance map",
            Experiment::FalconerLatticeSweep => "lattice distance sets with vanishing thickened measure",
            Experiment::ExponentAtlas => "closed-form necessary and sufficient exponents",
            Experiment::NullformSuite => "null-form identity (d_tt - Lap)|u|^2 = 2(|d_t u|^2 - |grad u|^2) and its weighted pairing",
            Experiment::WeakTypeChain => "Bernstein cap, weak-type level sets and the layer-cake formula",
        }
    }

    /// Gate names accepted in `tolerances`.
    pub fn tolerance_keys(&self) -> &'static [&'static str] {
        match self {
            Experiment::FrostmanAudit => &["stability_factor", "max_constant"],
            Experiment::LpBounds => &["slope", "reconstruction"],
            Experiment::FixedTimeFit => &["slope"],
            Experiment::GammaFit => &["gamma_min", "residual"],
            Experiment::BetaFit => &["beta_expected", "beta_tol", "residual"],
            Experiment::ConeFit => &["residual"],
            Experiment::MaximalEmbed => &["slack", "ftc"],
            Experiment::DistanceDensity => &["total"],
            Experiment::FalconerLatticeSweep => &[],
            Experiment::ExponentAtlas => &["seam"],
            Experiment::NullformSuite => &["identity", "mean", "leibniz", "chain"],
            Experiment::WeakTypeChain => &["layer_cake", "weak_factor"],
        }
    }

    fn needs_measure(&self) -> bool {
        !matches!(self, Experiment::FalconerLatticeSweep | Experiment::ExponentAtlas)
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How to build the measure an experiment runs on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeasureSpec {
    Cantor {
        ratio: f64,
        depth: usize,
        n: usize,
        #[serde(default = "default_true")]
        centered: bool,
    },
    ScaleAveragedCantor {
        ratio: f64,
        depth: usize,
        n: usize,
        copies: usize,
    },
    /// Cantor set on the first axis, zero in the remaining coordinates.
    CantorLine {
        ratio: f64,
        depth: usize,
        n: usize,
    },
    Sphere {
        #[serde(default = "default_one")]
        radius: f64,
        n: usize,
        points: usize,
    },
    Lattice {
        q: usize,
        alpha: f64,
        n: usize,
    },
    UniformGrid {
        per_axis: usize,
        n: usize,
    },
    Json {
        path: PathBuf,
        alpha: f64,
        floor: f64,
    },
}

fn default_true() -> bool {
    true
}

fn default_one() -> f64 {
    1.0
}

impl MeasureSpec {
    pub fn build(&self) -> Result<AtomicMeasure> {
        match self {
            MeasureSpec::Cantor {
                ratio,
                depth,
                n,
                centered,
            } => {
                if *centered {
                    build_cantor_product_centered(*ratio, *depth, *n)
                } else {
                    build_cantor_product(*ratio, *depth, *n)
                }
            }
            MeasureSpec::ScaleAveragedCantor { ratio, depth, n, copies } => {
                build_scale_averaged_cantor(*ratio, *depth, *n, *copies)
            }
            MeasureSpec::CantorLine { ratio, depth, n } => {
                let line = build_cantor_product_centered(*ratio, *depth, 1)?;
                let coords = line
                    .cloud()
                    .iter()
                    .flat_map(|(p, _)| std::iter::once(p[0]).chain(std::iter::repeat_n(0.0, n - 1)))
                    .collect();
                let atoms = line.cloud().weights().to_vec();
                let doc = crate::measures::MeasureDocument::from_measure(&AtomicMeasure::new(*n, coords, atoms)?);
                // The centred line is symmetric, so the lift is even.
                crate::measures::MeasureDocument { is_even: true, diameter_hint: 1.0, ..doc }.into_measure()
            }
            MeasureSpec::Sphere { radius, n, points } => build_sphere_measure(*radius, *n, *points),
            MeasureSpec::Lattice { q, alpha, n } => build_falconer_lattice(*q, *alpha, *n),
            MeasureSpec::UniformGrid { per_axis, n } => build_uniform_grid(*per_axis, *n),
            MeasureSpec::Json { path, .. } => read_measure_json(path),
        }
    }

    /// Dimension the construction is designed to carry.
    pub fn natural_alpha(&self) -> f64 {
        match self {
            MeasureSpec::Cantor { ratio, n, .. } | MeasureSpec::ScaleAveragedCantor { ratio, n, .. } => {
                cantor_dimension(*ratio, *n)
            }
            MeasureSpec::CantorLine { ratio, .. } => cantor_dimension(*ratio, 1),
            MeasureSpec::Sphere { n, .. } => *n as f64 - 1.0,
            MeasureSpec::Lattice { alpha, .. } | MeasureSpec::Json { alpha, .. } => *alpha,
            MeasureSpec::UniformGrid { n, .. } => *n as f64,
        }
    }

    /// Finest scale at which the measure still looks like its limit.
    pub fn resolution_floor(&self) -> f64 {
        match self {
            MeasureSpec::Cantor { ratio, depth, .. } | MeasureSpec::CantorLine { ratio, depth, .. } => {
                ratio.powi(*depth as i32)
            }
            // The smallest copy is dilated by ratio^((copies - 1)/copies).
            MeasureSpec::ScaleAveragedCantor { ratio, depth, copies, .. } => {
                ratio.powf(*depth as f64 + (*copies as f64 - 1.0) / *copies as f64)
            }
            MeasureSpec::Sphere { radius, points, n } => {
                let per_ring = if *n == 3 { (*points as f64).sqrt() } else { *points as f64 };
                2.0 * std::f64::consts::PI * radius / per_ring
            }
            MeasureSpec::Lattice { q, .. } => 1.0 / *q as f64,
            MeasureSpec::UniformGrid { per_axis, .. } => 1.0 / *per_axis as f64,
            MeasureSpec::Json { floor, .. } => *floor,
        }
    }

    pub fn dimension(&self) -> Option<usize> {
        match self {
            MeasureSpec::Cantor { n, .. }
            | MeasureSpec::ScaleAveragedCantor { n, .. }
            | MeasureSpec::CantorLine { n, .. }
            | MeasureSpec::Sphere { n, .. }
            | MeasureSpec::Lattice { n, .. }
            | MeasureSpec::UniformGrid { n, .. } => Some(*n),
            MeasureSpec::Json { .. } => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub size: usize,
    pub box_len: f64,
}

/// Sweep ranges; each experiment reads the keys it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<[u32; 2]>,
    /// log2 R range for decay and band sweeps.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radii_log2: Option<[i32; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// [start, end, step].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time_intervals: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sphere_points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub floors: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trials: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packets: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub measure: Option<MeasureSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub sweep: Sweep,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Output directory; the FWLAB_OUT environment variable overrides it.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    /// Write GridField snapshots under `fields/` where an experiment has them.
    #[serde(default)]
    pub snapshots: bool,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn diag(path: &str, message: impl Into<String>) -> Diagnostic {
    Diagnostic {
        path: path.to_string(),
        message: message.into(),
    }
}

impl ExperimentConfig {
    /// The canonical setup of each experiment.
    pub fn default_for(experiment: Experiment) -> Self {
        suite::default_config(experiment)
    }

    pub fn from_json(text: &str) -> std::result::Result<Self, Vec<Diagnostic>> {
        serde_json::from_str(text).map_err(|e| vec![diag("$", e.to_string())])
    }

    pub fn load(path: &Path) -> std::result::Result<Self, Vec<Diagnostic>> {
        let text = std::fs::read_to_string(path).map_err(|e| vec![diag("$", format!("{}: {e}", path.display()))])?;
        Self::from_json(&text)
    }

    /// Semantic checks after parsing. An empty list means the config is valid.
    pub fn validate(&self) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let e = self.experiment;
        if e.needs_measure() && self.measure.is_none() {
            out.push(diag("measure", format!("experiment {e} needs a measure spec")));
        }
        if let Some(m) = &self.measure {
            match m {
                MeasureSpec::Cantor { ratio, depth, n, .. }
                | MeasureSpec::ScaleAveragedCantor { ratio, depth, n, .. }
                | MeasureSpec::CantorLine { ratio, depth, n } => {
                    if !(*ratio > 0.0 && *ratio <= 0.5) {
                        out.push(diag("measure.ratio", "must lie in (0, 1/2]"));
                    }
                    if *depth == 0 {
                        out.push(diag("measure.depth", "must be positive"));
                    }
                    if !(1..=3).contains(n) {
                        out.push(diag("measure.n", "must lie in 1..=3"));
                    }
                }
                MeasureSpec::Sphere { radius, n, points } => {
                    if !(*radius > 0.0) {
                        out.push(diag("measure.radius", "must be positive"));
                    }
                    if *n != 2 && *n != 3 {
                        out.push(diag("measure.n", "spheres exist for n in {2, 3}"));
                    }
                    if *points == 0 {
                        out.push(diag("measure.points", "must be positive"));
                    }
                }
                MeasureSpec::Lattice { q, alpha, n } => {
                    if *q < 2 {
                        out.push(diag("measure.q", "must be at least 2"));
                    }
                    if !(*alpha > 0.0 && *alpha < *n as f64) {
                        out.push(diag("measure.alpha", "must lie in (0, n)"));
                    }
                }
                MeasureSpec::UniformGrid { per_axis, n } => {
                    if *per_axis == 0 || *n == 0 {
                        out.push(diag("measure", "uniform grid needs positive size and dimension"));
                    }
                }
                MeasureSpec::Json { path, alpha, floor } => {
                    if !path.exists() {
                        out.push(diag("measure.path", format!("{} does not exist", path.display())));
                    }
                    if !(*alpha > 0.0) || !(*floor > 0.0) {
                        out.push(diag("measure", "alpha and floor must be positive"));
                    }
                }
            }
        }
        if let Some(g) = &self.grid {
            if !g.size.is_power_of_two() || g.size < 8 {
                out.push(diag("grid.size", "must be a power of two, at least 8"));
            }
            if !(g.box_len > 0.0 && g.box_len.is_finite()) {
                out.push(diag("grid.box_len", "must be positive"));
            }
        }
        let s = &self.sweep;
        if let Some([a, b]) = s.k {
            if a > b {
                out.push(diag("sweep.k", "start exceeds end"));
            }
        }
        if let Some([a, b]) = s.radii_log2 {
            if a > b {
                out.push(diag("sweep.radii_log2", "start exceeds end"));
            }
        }
        if let Some(p) = &s.p {
            if p.is_empty() || p.iter().any(|v| !(*v >= 1.0 && v.is_finite())) {
                out.push(diag("sweep.p", "needs values >= 1"));
            }
        }
        if let Some([a, b, step]) = s.alpha_grid {
            if !(step > 0.0) || a > b {
                out.push(diag("sweep.alpha_grid", "needs start <= end and a positive step"));
            }
        }
        if let Some(q) = &s.q {
            if q.len() < 2 || q.iter().any(|v| *v < 2) {
                out.push(diag("sweep.q", "needs at least two values >= 2"));
            }
        }
        if s.bins == Some(0) {
            out.push(diag("sweep.bins", "must be positive"));
        }
        if s.time_intervals == Some(0) {
            out.push(diag("sweep.time_intervals", "must be positive"));
        }
        let known = e.tolerance_keys();
        for (key, value) in &self.tolerances {
            if !known.contains(&key.as_str()) {
                out.push(diag(
                    &format!("tolerances.{key}"),
                    format!("unknown gate for {e}; known: {}", known.join(", ")),
                ));
            }
            if !value.is_finite() {
                out.push(diag(&format!("tolerances.{key}"), "must be finite"));
            }
        }
        out
    }

    pub fn tolerance(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }
}

/// One asserted tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub bound: f64,
    /// "<=", ">=" or "==".
    pub relation: &'static str,
    pub pass: bool,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            relation: "<=",
            pass: value <= bound,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self {
            name: name.into(),
            value,
            bound,
            relation: ">=",
            pass: value >= bound,
        }
    }

    /// A boolean property, recorded as 1 for true.
    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Self {
            name: name.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: 1.0,
            relation: "==",
            pass: ok,
        }
    }
}

/// Rows for samples.csv.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct SampleTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl SampleTable {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        writer.write_record(&self.columns)?;
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ResultRecord {
    pub schema_version: u32,
    pub experiment: Experiment,
    pub anchor: &'static str,
    pub seed: u64,
    /// The config as run, without the output directory.
    pub params: ExperimentConfig,
    pub samples: SampleTable,
    pub fits: BTreeMap<String, ExponentFit>,
    pub checks: Vec<Check>,
    pub details: Value,
    pub pass: bool,
}

impl ResultRecord {
    fn new(config: &ExperimentConfig, samples: SampleTable, fits: BTreeMap<String, ExponentFit>, checks: Vec<Check>, details: Value) -> Self {
        let mut params = config.clone();
        params.output = None;
        Self {
            schema_version: SCHEMA_VERSION,
            experiment: config.experiment,
            anchor: config.experiment.anchor(),
            seed: config.seed,
            pass: checks.iter().all(|c| c.pass),
            params,
            samples,
            fits,
            checks,
            details,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Writes result.json and samples.csv into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("result.json"), self.to_json()? + "\n")?;
        self.samples.write_csv(std::fs::File::create(dir.join("samples.csv"))?)?;
        Ok(())
    }
}

/// Validates and runs an experiment. Snapshots, when requested, go under
/// `out/fields`.
pub fn run(config: &ExperimentConfig, out: Option<&Path>) -> Result<ResultRecord> {
    let problems = config.validate();
    if !problems.is_empty() {
        let text: Vec<String> = problems.iter().map(|d| d.to_string()).collect();
        return Err(LabError::Config(text.join("; ")));
    }
    suite::run_experiment(config, out)
}

/// Exit code for an error: 3 for resource and I/O failures, 2 otherwise.
pub fn exit_code_for(err: &LabError) -> i32 {
    match err {
        LabError::Resource(_) | LabError::Io(_) => 3,
        _ => 2,
    }
}

/// Machine-readable description of the config layout.
pub fn schema() -> Value {
    let experiments: Vec<Value> = Experiment::ALL
        .iter()
        .map(|e| {
            json!({
                "name": e.name(),
                "anchor": e.anchor(),
                "needs_measure": e.needs_measure(),
                "tolerances": e.tolerance_keys(),
                "default": ExperimentConfig::default_for(*e),
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "format": "json",
        "unknown_keys": "rejected",
        "fields": {
            "experiment": "string, one of the experiment names",
            "measure": {
                "kind": ["cantor", "scale_averaged_cantor", "cantor_line", "sphere", "lattice", "uniform_grid", "json"],
                "cantor": {"ratio": "f64 in (0, 1/2]", "depth": "usize", "n": "1..=3", "centered": "bool, default true"},
                "scale_averaged_cantor": {"ratio": "f64", "depth": "usize", "n": "usize", "copies": "usize"},
                "cantor_line": {"ratio": "f64", "depth": "usize", "n": "usize"},
                "sphere": {"radius": "f64, default 1", "n": "2 or 3", "points": "usize"},
                "lattice": {"q": "usize >= 2", "alpha": "f64 in (0, n)", "n": "usize"},
                "uniform_grid": {"per_axis": "usize", "n": "usize"},
                "json": {"path": "file in the measure exchange format", "alpha": "f64", "floor": "f64"}
            },
            "grid": {"size": "power of two", "box_len": "f64 > 0"},
            "sweep": {
                "k": "[u32; 2]", "radii_log2": "[i32; 2]", "p": "[f64]", "alpha": "f64",
                "alpha_grid": "[start, end, step]", "n": "usize", "lambda": "f64", "bins": "usize",
                "q": "[usize]", "time_intervals": "usize", "sphere_points": "usize", "floors": "[f64]",
                "trials": "usize", "packets": "usize"
            },
            "tolerances": "map from gate name to f64; names depend on the experiment",
            "output": "directory; FWLAB_OUT overrides",
            "snapshots": "bool",
            "seed": "u64"
        },
        "experiments": experiments,
        "exit_codes": {"0": "all gates pass", "1": "a gate failed", "2": "config error", "3": "resource error"}
    })
}
