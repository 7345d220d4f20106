use std::path::PathBuf;

use bose2d::field::{validate_config, Grid2D, InteractionSpec, PotentialSpec, VectorPotentialSpec};
use bose2d::manybody::{ModeBasis, ModeBasisOptions, ModeSelection};
use bose2d::nls::a_star_shooting;
use serde::{Deserialize, Serialize};

use crate::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Hypothesis on the scaling exponent shared by every many-body task.
pub const BETA_RANGE: &str = "0 < beta < 1";

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema_version")]
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub problem: ProblemConfig,
    #[serde(default)]
    pub scan: ScanConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    pub task: Option<TaskConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

fn schema_version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub vector_potential: VectorPotentialConfig,
    #[serde(default)]
    pub interaction: InteractionConfig,
    #[serde(default)]
    pub basis: BasisConfig,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    pub half_width: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { n: 128, half_width: 6.0 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum PotentialConfig {
    Harmonic,
    Power { coefficient: f64, exponent: f64 },
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::Harmonic
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum VectorPotentialConfig {
    Zero,
    /// Symmetric gauge for a constant field.
    Uniform { field: f64 },
}

impl Default for VectorPotentialConfig {
    fn default() -> Self {
        VectorPotentialConfig::Zero
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionShape {
    Gaussian,
    CompactBump,
    Zero,
}

/// Pair potential; its attractive amplitude is set per scan point so that
/// `m⁻ = g·a*` for each multiplier `g` on the attraction axis.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionConfig {
    #[serde(default = "gaussian")]
    pub form: InteractionShape,
    #[serde(default = "one")]
    pub range: f64,
    #[serde(default)]
    pub repulsion: Option<RepulsionConfig>,
    /// Normalizer for the attraction axis; computed by radial shooting when
    /// absent.
    #[serde(default)]
    pub a_star: Option<f64>,
}

fn gaussian() -> InteractionShape {
    InteractionShape::Gaussian
}

fn one() -> f64 {
    1.0
}

impl Default for InteractionConfig {
    fn default() -> Self {
        Self { form: InteractionShape::Gaussian, range: 1.0, repulsion: None, a_star: None }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepulsionConfig {
    pub strength: f64,
    pub range: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BasisKind {
    /// Hermite functions when the trap is `|x|²` without field, grid
    /// eigenvectors otherwise.
    Auto,
    Harmonic,
    Numeric,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BasisConfig {
    #[serde(default = "auto")]
    pub kind: BasisKind,
    #[serde(default = "basis_cap")]
    pub cap: usize,
}

fn auto() -> BasisKind {
    BasisKind::Auto
}

fn basis_cap() -> usize {
    400
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self { kind: BasisKind::Auto, cap: basis_cap() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    #[serde(default = "default_particles")]
    pub particles: Vec<usize>,
    #[serde(default = "default_betas")]
    pub betas: Vec<f64>,
    /// Multipliers `g = m⁻/a*`.
    #[serde(default = "default_attraction")]
    pub attraction: Vec<f64>,
    #[serde(default = "default_modes")]
    pub modes: Vec<usize>,
}

fn default_particles() -> Vec<usize> {
    (2..=8).collect()
}

fn default_betas() -> Vec<f64> {
    vec![0.5]
}

fn default_attraction() -> Vec<f64> {
    vec![0.8]
}

fn default_modes() -> Vec<usize> {
    vec![8]
}

impl Default for ScanConfig {
    fn default() -> Self {
        Self {
            particles: default_particles(),
            betas: default_betas(),
            attraction: default_attraction(),
            modes: default_modes(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub lanczos: f64,
    pub nls: f64,
    pub gn: f64,
    pub gn_gap: f64,
    pub identity: f64,
    pub conservation: f64,
    /// Relative slack when checking that `|e_N - E^nls|` does not grow.
    pub gap_band: f64,
    /// Allowed distance of `min e_N` below the last `e_N`.
    pub lower_margin: f64,
    /// Largest admissible ratio between fitted constants across a sweep.
    pub constant_spread: f64,
    pub envelope_spread: f64,
    pub energy: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            lanczos: 1e-10,
            nls: 1e-9,
            gn: 1e-7,
            gn_gap: 1e-3,
            identity: 1e-10,
            conservation: 1e-8,
            gap_band: 0.05,
            lower_margin: 0.5,
            constant_spread: 5.0,
            envelope_spread: 2.0,
            energy: 1e-6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Json,
    Csv,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "out_dir")]
    pub dir: PathBuf,
    #[serde(default = "json")]
    pub format: OutputFormat,
}

fn out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn json() -> OutputFormat {
    OutputFormat::Json
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: out_dir(), format: OutputFormat::Json }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Gn,
    Nls,
    Ed,
    StabilityScan,
    Lemmas,
    Dynamics,
    Bootstrap,
}

impl TaskKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            TaskKind::Gn => "gn",
            TaskKind::Nls => "nls",
            TaskKind::Ed => "ed",
            TaskKind::StabilityScan => "stability-scan",
            TaskKind::Lemmas => "lemmas",
            TaskKind::Dynamics => "dynamics",
            TaskKind::Bootstrap => "bootstrap",
        }
    }

    pub fn default_task(&self) -> TaskConfig {
        let mut t = toml::Table::new();
        t.insert("kind".into(), toml::Value::String(self.as_str().into()));
        t.try_into().expect("every task has complete defaults")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "kebab-case")]
pub enum TaskConfig {
    Gn(GnTask),
    Nls(NlsTask),
    Ed(EdTask),
    StabilityScan(EdTask),
    Lemmas(LemmasTask),
    Dynamics(DynamicsTask),
    Bootstrap(BootstrapTask),
}

impl TaskConfig {
    pub fn kind(&self) -> TaskKind {
        match self {
            TaskConfig::Gn(_) => TaskKind::Gn,
            TaskConfig::Nls(_) => TaskKind::Nls,
            TaskConfig::Ed(_) => TaskKind::Ed,
            TaskConfig::StabilityScan(_) => TaskKind::StabilityScan,
            TaskConfig::Lemmas(_) => TaskKind::Lemmas,
            TaskConfig::Dynamics(_) => TaskKind::Dynamics,
            TaskConfig::Bootstrap(_) => TaskKind::Bootstrap,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GnTask {}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CouplingKind {
    /// Local limit `b = ∫w`.
    Delta,
    /// Scaled pair interaction at each `(N, β)` of the scan.
    Hartree,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NlsTask {
    #[serde(default = "delta")]
    pub coupling: CouplingKind,
    #[serde(default = "max_iter")]
    pub max_iter: usize,
    #[serde(default)]
    pub expected_energy: Option<f64>,
}

fn delta() -> CouplingKind {
    CouplingKind::Delta
}

fn max_iter() -> usize {
    20_000
}

impl Default for NlsTask {
    fn default() -> Self {
        Self { coupling: CouplingKind::Delta, max_iter: max_iter(), expected_energy: None }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdTask {
    /// One-body perturbation `ε`; the energy identity and the trend
    /// verdicts apply at `ε = 0` only.
    #[serde(default)]
    pub eps: f64,
    #[serde(default = "dim_cap")]
    pub dim_cap: usize,
}

fn dim_cap() -> usize {
    200_000
}

impl Default for EdTask {
    fn default() -> Self {
        Self { eps: 0.0, dim_cap: dim_cap() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LemmaPart {
    PlaneWave,
    Localization,
    Moments,
    Definetti,
    Tail,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LemmasTask {
    #[serde(default = "all_parts")]
    pub parts: Vec<LemmaPart>,
    #[serde(default = "cutoffs")]
    pub cutoffs: Vec<f64>,
    #[serde(default = "k_range")]
    pub k_range: [f64; 3],
    #[serde(default = "small_modes")]
    pub small_modes: Vec<usize>,
    #[serde(default = "localization_delta")]
    pub delta: f64,
    #[serde(default = "moment_eps")]
    pub eps: f64,
    #[serde(default = "definetti_restarts")]
    pub definetti_restarts: usize,
    #[serde(default = "definetti_atoms")]
    pub definetti_atoms: usize,
    #[serde(default = "tail_lambda")]
    pub tail_lambda: Vec<f64>,
    #[serde(default = "dim_cap")]
    pub dim_cap: usize,
}

fn all_parts() -> Vec<LemmaPart> {
    vec![LemmaPart::PlaneWave, LemmaPart::Localization, LemmaPart::Moments, LemmaPart::Definetti, LemmaPart::Tail]
}

fn cutoffs() -> Vec<f64> {
    vec![10.0, 20.0, 40.0]
}

fn k_range() -> [f64; 3] {
    [1.0, 50.0, 0.5]
}

fn small_modes() -> Vec<usize> {
    vec![3, 6]
}

fn localization_delta() -> f64 {
    0.75
}

fn moment_eps() -> f64 {
    0.3
}

fn definetti_restarts() -> usize {
    5
}

fn definetti_atoms() -> usize {
    8
}

fn tail_lambda() -> Vec<f64> {
    vec![10.0, 20.0]
}

impl Default for LemmasTask {
    fn default() -> Self {
        Self {
            parts: all_parts(),
            cutoffs: cutoffs(),
            k_range: k_range(),
            small_modes: small_modes(),
            delta: localization_delta(),
            eps: moment_eps(),
            definetti_restarts: definetti_restarts(),
            definetti_atoms: definetti_atoms(),
            tail_lambda: tail_lambda(),
            dim_cap: dim_cap(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DynamicsTask {
    #[serde(default = "one")]
    pub t_final: f64,
    #[serde(default = "dt")]
    pub dt: f64,
    /// Mode coefficients of the product initial state as `[re, im]` pairs,
    /// normalized before use; defaults to `0.6^k`.
    #[serde(default)]
    pub initial: Option<Vec<[f64; 2]>>,
    #[serde(default = "dynamics_cap")]
    pub dim_cap: usize,
}

fn dt() -> f64 {
    0.05
}

fn dynamics_cap() -> usize {
    20_000
}

impl Default for DynamicsTask {
    fn default() -> Self {
        Self { t_final: 1.0, dt: dt(), initial: None, dim_cap: dynamics_cap() }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BootstrapTask {
    #[serde(default = "eps0")]
    pub eps0: f64,
    #[serde(default = "resolution")]
    pub resolution: f64,
    #[serde(default = "max_steps")]
    pub max_steps: usize,
}

fn eps0() -> f64 {
    0.1
}

fn resolution() -> f64 {
    1e-3
}

fn max_steps() -> usize {
    1000
}

impl Default for BootstrapTask {
    fn default() -> Self {
        Self { eps0: eps0(), resolution: resolution(), max_steps: max_steps() }
    }
}

/// Parse a TOML document. Unknown keys and malformed values are reported
/// with their location; the physics checks run in [`validate`].
pub fn parse_str(text: &str) -> Result<RunConfig, CliError> {
    toml::from_str(text).map_err(|e| CliError::Parse(e.to_string()))
}

pub fn parse_config(path: &std::path::Path) -> Result<RunConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    parse_str(&text).and_then(|c| {
        validate(&c)?;
        Ok(c)
    })
}

/// Everything a task needs besides its own block, resolved once.
#[derive(Clone, Debug)]
pub struct Resolved {
    pub grid: Grid2D,
    pub potential: PotentialSpec,
    pub vector_potential: VectorPotentialSpec,
    pub a_star: f64,
}

impl RunConfig {
    pub fn task(&self) -> &TaskConfig {
        self.task.as_ref().expect("task filled before running")
    }

    /// Fill a missing task block with the defaults of `kind`; reject a block
    /// of a different kind.
    pub fn with_task(mut self, kind: TaskKind) -> Result<Self, CliError> {
        match &self.task {
            None => self.task = Some(kind.default_task()),
            Some(t) if t.kind() != kind => {
                return Err(CliError::Validation(format!(
                    "config task is {:?} but the {} subcommand was invoked",
                    t.kind().as_str(),
                    kind.as_str()
                )))
            }
            Some(_) => {}
        }
        Ok(self)
    }

    pub fn resolve(&self) -> Result<Resolved, CliError> {
        let p = &self.problem;
        let grid = Grid2D::new(p.grid.n, p.grid.half_width).map_err(|e| CliError::Validation(e.to_string()))?;
        let potential = match p.potential {
            PotentialConfig::Harmonic => PotentialSpec::harmonic(),
            PotentialConfig::Power { coefficient, exponent } => PotentialSpec::power(coefficient, exponent),
        };
        let vector_potential = match p.vector_potential {
            VectorPotentialConfig::Zero => VectorPotentialSpec::Zero,
            VectorPotentialConfig::Uniform { field } => VectorPotentialSpec::Uniform { field },
        };
        let a_star = match p.interaction.a_star {
            Some(a) => a,
            None => {
                let coarse = Grid2D::new(16, 8.0).expect("fixed grid");
                a_star_shooting(&coarse).map_err(|e| CliError::Validation(e.to_string()))?.a_star
            }
        };
        Ok(Resolved { grid, potential, vector_potential, a_star })
    }

    /// Attraction axis actually scanned; a zero interaction has the single
    /// multiplier 0.
    pub fn attraction_axis(&self) -> Vec<f64> {
        if self.problem.interaction.form == InteractionShape::Zero {
            vec![0.0]
        } else {
            self.scan.attraction.clone()
        }
    }

    /// Interaction with `m⁻ = g·a*`.
    pub fn interaction(&self, g: f64, a_star: f64) -> InteractionSpec {
        let ic = &self.problem.interaction;
        let build = |s: f64| {
            let base = match ic.form {
                InteractionShape::Zero => return InteractionSpec::zero(),
                InteractionShape::Gaussian => InteractionSpec::gaussian(s, ic.range),
                InteractionShape::CompactBump => InteractionSpec::compact_bump(s, ic.range),
            };
            match ic.repulsion {
                Some(r) => base.with_repulsion(r.strength, r.range),
                None => base,
            }
        };
        if ic.form == InteractionShape::Zero {
            return InteractionSpec::zero();
        }
        let target = g * a_star;
        if target <= 0.0 {
            return build(0.0);
        }
        if ic.repulsion.is_none() {
            return build(target / build(1.0).negative_mass());
        }
        // m⁻ grows monotonically with the attractive amplitude.
        let (mut lo, mut hi) = (0.0, 1.0);
        while build(hi).negative_mass() < target {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if build(mid).negative_mass() < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        build(0.5 * (lo + hi))
    }

    pub fn basis(&self, r: &Resolved, selection: ModeSelection) -> Result<ModeBasis, bose2d::Error> {
        let harmonic_trap = matches!(self.problem.potential, PotentialConfig::Harmonic)
            && matches!(self.problem.vector_potential, VectorPotentialConfig::Zero);
        let analytic = match self.problem.basis.kind {
            BasisKind::Auto => harmonic_trap,
            BasisKind::Harmonic => true,
            BasisKind::Numeric => false,
        };
        if analytic {
            ModeBasis::harmonic_oscillator(&r.grid, selection, self.problem.basis.cap)
        } else {
            let opts = ModeBasisOptions { cap: self.problem.basis.cap, seed: self.seed, ..Default::default() };
            ModeBasis::build(&r.potential, &r.vector_potential, &r.grid, selection, &opts)
        }
    }
}

fn has_duplicates(v: &[f64]) -> bool {
    v.iter().enumerate().any(|(i, x)| v[..i].contains(x))
}

fn uses_many_body(kind: TaskKind) -> bool {
    matches!(kind, TaskKind::Ed | TaskKind::StabilityScan | TaskKind::Lemmas | TaskKind::Dynamics)
}

/// Structural and physical checks. Errors name the violated assumption.
pub fn validate(c: &RunConfig) -> Result<(), CliError> {
    let bad = |m: String| Err(CliError::Validation(m));
    if c.schema_version != SCHEMA_VERSION {
        return bad(format!("schema_version {} is not supported (expected {SCHEMA_VERSION})", c.schema_version));
    }
    let Some(task) = &c.task else {
        return bad("no task block".into());
    };
    let kind = task.kind();
    let s = &c.scan;
    let needs_particles = uses_many_body(kind) || matches!(task, TaskConfig::Nls(t) if t.coupling == CouplingKind::Hartree);
    if needs_particles && s.particles.is_empty() {
        return bad("scan axis particles is empty".into());
    }
    if (needs_particles || kind == TaskKind::Bootstrap) && s.betas.is_empty() {
        return bad("scan axis betas is empty".into());
    }
    if matches!(kind, TaskKind::Nls | TaskKind::Ed | TaskKind::StabilityScan | TaskKind::Lemmas | TaskKind::Dynamics)
        && c.attraction_axis().is_empty()
    {
        return bad("scan axis attraction is empty".into());
    }
    if uses_many_body(kind) && s.modes.is_empty() {
        return bad("scan axis modes is empty".into());
    }
    if needs_particles || kind == TaskKind::Bootstrap {
        if let Some(b) = s.betas.iter().find(|b| !(**b > 0.0 && **b < 1.0)) {
            return bad(format!("beta = {b} violates the hypothesis {BETA_RANGE}"));
        }
    }
    if needs_particles {
        if let Some(n) = s.particles.iter().find(|n| **n < 1 || **n > 255) {
            return bad(format!("particle number {n} outside 1..=255"));
        }
    }
    if has_duplicates(&s.particles.iter().map(|n| *n as f64).collect::<Vec<_>>())
        || has_duplicates(&s.betas)
        || has_duplicates(&s.attraction)
        || has_duplicates(&s.modes.iter().map(|d| *d as f64).collect::<Vec<_>>())
    {
        return bad("scan axes must not repeat a value".into());
    }
    if uses_many_body(kind) && s.modes.iter().any(|d| *d == 0) {
        return bad("mode count 0 in scan axis modes".into());
    }
    if let Some(g) = c.attraction_axis().iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
        return bad(format!("attraction multiplier {g} must be finite and nonnegative"));
    }
    match task {
        TaskConfig::Lemmas(t) => {
            let [k0, k1, dk] = t.k_range;
            if !(k0 > 0.0 && k1 >= k0 && dk > 0.0) {
                return bad(format!("k_range {:?} must satisfy 0 < start <= stop and step > 0", t.k_range));
            }
            if !(t.delta > 0.5 && t.delta <= 1.0) {
                return bad(format!("delta = {} outside (1/2, 1]", t.delta));
            }
            if !(t.eps > 0.0) {
                return bad(format!("eps = {} must be positive", t.eps));
            }
            let d_max = s.modes.iter().copied().max().unwrap_or(0);
            if t.parts.contains(&LemmaPart::Localization) {
                if let Some(k) = t.small_modes.iter().find(|k| **k == 0 || **k >= d_max) {
                    return bad(format!("small_modes entry {k} must lie strictly between 0 and {d_max}"));
                }
            }
        }
        TaskConfig::Dynamics(t) => {
            if !(t.dt > 0.0 && t.t_final > 0.0) {
                return bad("dt and t_final must be positive".into());
            }
            if let Some(c0) = &t.initial {
                if s.modes.iter().any(|d| *d != c0.len()) {
                    return bad(format!("initial has {} coefficients but the modes axis is {:?}", c0.len(), s.modes));
                }
            }
        }
        TaskConfig::Bootstrap(t) => {
            if !(t.eps0 > 0.0 && t.eps0 < 1.0) {
                return bad(format!("eps0 = {} outside (0, 1)", t.eps0));
            }
            if !(t.resolution > 0.0 && t.resolution < 0.5) {
                return bad(format!("resolution = {} outside (0, 1/2)", t.resolution));
            }
        }
        _ => {}
    }
    if matches!(kind, TaskKind::Gn | TaskKind::Bootstrap) {
        return Ok(());
    }
    let r = c.resolve()?;
    let scalings: Vec<(usize, f64)> = if needs_particles {
        s.particles.iter().flat_map(|n| s.betas.iter().map(move |b| (*n, *b))).collect()
    } else {
        Vec::new()
    };
    for g in c.attraction_axis() {
        let w = c.interaction(g, r.a_star);
        let report = validate_config(&r.potential, &r.vector_potential, &w, &r.grid, &scalings);
        let failure = report.failures().next().map(|f| format!("{} violated: {}", f.name, f.detail));
        if let Some(m) = failure {
            return bad(m);
        }
    }
    Ok(())
}
