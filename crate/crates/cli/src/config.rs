//! JSON experiment configuration (schema version 1).

use std::path::Path;

use anyhow::{bail, Context, Result};
use bergman_lab::azd::ModelGeometry;
use bergman_lab::family::{default_d_max, FamilySpec, QuadratureConfig};
use bergman_lab::ns::NsOptimizerConfig;
use bergman_lab::ot::BudgetKind;
use bergman_lab::quadrature::{Domain, Scheme};
use bergman_lab::weight::WeightExpr;
use bergman_lab::C64;
use serde::Deserialize;

pub const SCHEMA_VERSION: u32 = 1;

/// A complex number as `[re, im]`.
pub type Cx = [f64; 2];

pub fn cx(v: Cx) -> C64 {
    C64::new(v[0], v[1])
}

pub fn cxs(v: &[Cx]) -> Vec<C64> {
    v.iter().copied().map(cx).collect()
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub schema_version: u32,
    #[serde(default)]
    pub seed: u64,
    pub experiments: Vec<Experiment>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "experiment", rename_all = "kebab-case")]
pub enum Experiment {
    ComputeKernel(ComputeKernel),
    VerifyPsh(VerifyPsh),
    ThickenLimit(ThickenLimit),
    DirectImageCurvature(DirectImageCurvature),
    AzdIterate(AzdIterate),
    NsPotential(NsPotential),
    OtExtend(OtExtend),
    Integrability(Integrability),
}

/// Experiment kinds, in output order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Kind {
    ComputeKernel,
    VerifyPsh,
    ThickenLimit,
    DirectImageCurvature,
    AzdIterate,
    NsPotential,
    OtExtend,
    Integrability,
}

impl Kind {
    pub const ALL: [Kind; 8] = [
        Kind::ComputeKernel,
        Kind::VerifyPsh,
        Kind::ThickenLimit,
        Kind::DirectImageCurvature,
        Kind::AzdIterate,
        Kind::NsPotential,
        Kind::OtExtend,
        Kind::Integrability,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::ComputeKernel => "compute-kernel",
            Kind::VerifyPsh => "verify-psh",
            Kind::ThickenLimit => "thicken-limit",
            Kind::DirectImageCurvature => "direct-image-curvature",
            Kind::AzdIterate => "azd-iterate",
            Kind::NsPotential => "ns-potential",
            Kind::OtExtend => "ot-extend",
            Kind::Integrability => "integrability",
        }
    }

    /// CSV file stem.
    pub fn file_stem(self) -> String {
        self.name().replace('-', "_")
    }
}

impl Experiment {
    pub fn kind(&self) -> Kind {
        match self {
            Experiment::ComputeKernel(_) => Kind::ComputeKernel,
            Experiment::VerifyPsh(_) => Kind::VerifyPsh,
            Experiment::ThickenLimit(_) => Kind::ThickenLimit,
            Experiment::DirectImageCurvature(_) => Kind::DirectImageCurvature,
            Experiment::AzdIterate(_) => Kind::AzdIterate,
            Experiment::NsPotential(_) => Kind::NsPotential,
            Experiment::OtExtend(_) => Kind::OtExtend,
            Experiment::Integrability(_) => Kind::Integrability,
        }
    }

    pub fn id(&self) -> &str {
        match self {
            Experiment::ComputeKernel(e) => &e.id,
            Experiment::VerifyPsh(e) => &e.id,
            Experiment::ThickenLimit(e) => &e.id,
            Experiment::DirectImageCurvature(e) => &e.id,
            Experiment::AzdIterate(e) => &e.id,
            Experiment::NsPotential(e) => &e.id,
            Experiment::OtExtend(e) => &e.id,
            Experiment::Integrability(e) => &e.id,
        }
    }
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Polar,
    TensorGauss,
    QuasiMonteCarlo,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Scheme {
        match s {
            SchemeName::Polar => Scheme::Polar,
            SchemeName::TensorGauss => Scheme::TensorGauss,
            SchemeName::QuasiMonteCarlo => Scheme::QuasiMonteCarlo,
        }
    }
}

fn default_scheme() -> SchemeName {
    SchemeName::Polar
}

fn default_order() -> usize {
    32
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureBlock {
    #[serde(default = "default_scheme")]
    pub scheme: SchemeName,
    /// Gauss order per axis, or the sample count for quasi-Monte Carlo.
    #[serde(default = "default_order")]
    pub order: usize,
}

impl Default for QuadratureBlock {
    fn default() -> Self {
        Self {
            scheme: default_scheme(),
            order: default_order(),
        }
    }
}

impl QuadratureBlock {
    pub fn build(&self, seed: u64) -> QuadratureConfig {
        QuadratureConfig {
            scheme: self.scheme.into(),
            order: self.order,
            seed,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DomainBlock {
    Polydisk {
        #[serde(default)]
        centers: Option<Vec<Cx>>,
        radii: Vec<f64>,
    },
    Region {
        n: usize,
        defining_fn: String,
        /// `[lo, hi]` per real coordinate.
        bounding_box: Vec<[f64; 2]>,
    },
}

impl DomainBlock {
    pub fn build(&self) -> Result<Domain> {
        match self {
            DomainBlock::Polydisk { centers, radii } => {
                let centers = match centers {
                    Some(c) => cxs(c),
                    None => vec![C64::new(0.0, 0.0); radii.len()],
                };
                Ok(Domain::polydisk(centers, radii.clone())?)
            }
            DomainBlock::Region {
                n,
                defining_fn,
                bounding_box,
            } => {
                let rho = parse_expr(defining_fn, "defining_fn")?;
                let bb = bounding_box.iter().map(|r| (r[0], r[1])).collect();
                Ok(Domain::new(*n, rho, bb)?)
            }
        }
    }
}

pub fn parse_expr(text: &str, field: &str) -> Result<WeightExpr> {
    text.parse::<WeightExpr>()
        .with_context(|| format!("{field}: cannot parse {text:?}"))
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilyBlock {
    #[serde(default)]
    pub k: usize,
    pub weight: String,
    pub domain: DomainBlock,
    #[serde(default)]
    pub d_max: Option<u32>,
    #[serde(default)]
    pub quadrature: QuadratureBlock,
}

impl FamilyBlock {
    pub fn build(&self, seed: u64) -> Result<FamilySpec> {
        let weight = parse_expr(&self.weight, "weight")?;
        let domain = self.domain.build()?;
        let d_max = self.d_max.unwrap_or_else(|| default_d_max(domain.n()));
        Ok(FamilySpec::new(weight, domain, self.k)?
            .with_d_max(d_max)
            .with_quadrature(self.quadrature.build(seed)))
    }
}

fn default_grid() -> usize {
    5
}

fn default_fd_step() -> f64 {
    1e-2
}

fn default_psh_tol() -> f64 {
    1e-4
}

fn default_directions() -> usize {
    8
}

fn default_kernel_tol() -> f64 {
    1e-4
}

/// Closed-form kernels for oracle comparisons.
#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Oracle {
    /// Unit polydisk, weight 0: `prod 1 / (pi (1 - |z_i|^2)^2)`.
    Disk,
    /// Weight `|z|^2` on `C^n`: `e^{|z|^2} / pi^n`.
    Fock,
}

impl Oracle {
    pub fn value(self, z: &[C64]) -> f64 {
        use std::f64::consts::PI;
        match self {
            Oracle::Disk => z
                .iter()
                .map(|v| 1.0 / (PI * (1.0 - v.norm_sqr()).powi(2)))
                .product(),
            Oracle::Fock => z.iter().map(|v| v.norm_sqr().exp() / PI).product(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComputeKernel {
    pub id: String,
    pub family: FamilyBlock,
    #[serde(default)]
    pub t: Vec<Cx>,
    pub points: Vec<Vec<Cx>>,
    #[serde(default)]
    pub oracle: Option<Oracle>,
    #[serde(default = "default_kernel_tol")]
    pub tol: f64,
}

/// What a PSH check samples.
#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    /// `log K(z, z, t)` of the family.
    #[default]
    LogKernel,
    /// The weight expression itself.
    Weight,
}

impl FieldKind {
    pub fn as_str(self) -> &'static str {
        match self {
            FieldKind::LogKernel => "log_kernel",
            FieldKind::Weight => "weight",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyPsh {
    pub id: String,
    pub family: FamilyBlock,
    #[serde(default)]
    pub field: FieldKind,
    /// `[lo, hi]` per real coordinate of `(z, t)`.
    #[serde(rename = "box")]
    pub sample_box: Vec<[f64; 2]>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_psh_tol")]
    pub tol: f64,
    #[serde(default = "default_directions")]
    pub directions: usize,
}

fn default_disk_radial() -> usize {
    8
}

fn default_disk_angular() -> usize {
    16
}

fn default_thicken_tol() -> f64 {
    1e-2
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ThickenLimit {
    pub id: String,
    pub family: FamilyBlock,
    pub t0: Cx,
    pub epsilons: Vec<f64>,
    pub probe: Vec<Cx>,
    #[serde(default)]
    pub d_max: Option<u32>,
    #[serde(default = "default_disk_radial")]
    pub disk_radial: usize,
    #[serde(default = "default_disk_angular")]
    pub disk_angular: usize,
    #[serde(default = "default_thicken_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectImageCurvature {
    pub id: String,
    pub family: FamilyBlock,
    pub t: Vec<Cx>,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_psh_tol")]
    pub tol: f64,
}

fn one_usize() -> usize {
    1
}

fn one_f64() -> f64 {
    1.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelBlock {
    #[serde(default = "one_usize")]
    pub n: usize,
    pub a: f64,
    #[serde(default)]
    pub c: f64,
    #[serde(default = "one_f64")]
    pub h0_scale: f64,
    pub truncation_radius: f64,
    pub d_max: u32,
}

impl ModelBlock {
    pub fn build(&self) -> ModelGeometry {
        ModelGeometry {
            n: self.n,
            a: self.a,
            c: self.c,
            h0_scale: self.h0_scale,
            truncation_radius: self.truncation_radius,
            d_max: self.d_max,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PshBlock {
    #[serde(rename = "box")]
    pub sample_box: Vec<[f64; 2]>,
    #[serde(default = "default_grid")]
    pub grid: usize,
    #[serde(default = "default_fd_step")]
    pub fd_step: f64,
    #[serde(default = "default_psh_tol")]
    pub tol: f64,
    #[serde(default = "default_directions")]
    pub directions: usize,
}

fn default_radial_order() -> usize {
    48
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AzdIterate {
    pub id: String,
    pub model: ModelBlock,
    pub m_max: usize,
    #[serde(default = "default_radial_order")]
    pub radial_order: usize,
    /// Numerical Kodaira dimension; estimated from the dimensions when absent.
    #[serde(default)]
    pub nu: Option<f64>,
    pub probes: Vec<Vec<Cx>>,
    #[serde(default)]
    pub psh: Option<PshBlock>,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum ReferenceName {
    /// The Bergman diagonal of the same space (meaningful for `m = 1`).
    Bergman,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum Reference {
    Value(f64),
    Named(ReferenceName),
}

fn default_starts() -> usize {
    16
}

fn default_ascent() -> usize {
    60
}

fn default_polish() -> usize {
    400
}

fn default_opt_tol() -> f64 {
    1e-12
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerBlock {
    #[serde(default = "default_starts")]
    pub starts: usize,
    #[serde(default = "default_ascent")]
    pub ascent_iters: usize,
    #[serde(default = "default_polish")]
    pub polish_iters: usize,
    #[serde(default = "default_opt_tol")]
    pub tol: f64,
}

impl Default for OptimizerBlock {
    fn default() -> Self {
        Self {
            starts: default_starts(),
            ascent_iters: default_ascent(),
            polish_iters: default_polish(),
            tol: default_opt_tol(),
        }
    }
}

impl OptimizerBlock {
    pub fn build(&self, seed: u64) -> NsOptimizerConfig {
        NsOptimizerConfig {
            starts: self.starts,
            ascent_iters: self.ascent_iters,
            polish_iters: self.polish_iters,
            tol: self.tol,
            seed,
            ..NsOptimizerConfig::default()
        }
    }
}

fn default_best_gap() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NsPotential {
    pub id: String,
    pub m: u32,
    pub weight: String,
    pub domain: DomainBlock,
    pub d_max: u32,
    #[serde(default)]
    pub k: usize,
    #[serde(default)]
    pub quadrature: QuadratureBlock,
    /// Parameter value for the point evaluations.
    #[serde(default)]
    pub t: Vec<Cx>,
    #[serde(default)]
    pub points: Vec<Vec<Cx>>,
    #[serde(default)]
    pub reference: Option<Reference>,
    #[serde(default = "default_kernel_tol")]
    pub tol: f64,
    #[serde(default = "default_best_gap")]
    pub best_gap_tol: f64,
    #[serde(default)]
    pub optimizer: OptimizerBlock,
    /// PSH sampling of `log K^NS` over `(z, t)`.
    #[serde(default)]
    pub psh: Option<PshBlock>,
}

#[derive(Debug, Clone, Copy, Default, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum BudgetName {
    #[default]
    Uniform,
    PshOperator,
}

impl From<BudgetName> for BudgetKind {
    fn from(b: BudgetName) -> BudgetKind {
        match b {
            BudgetName::Uniform => BudgetKind::Uniform,
            BudgetName::PshOperator => BudgetKind::PshOperator,
        }
    }
}

fn default_ot_degree() -> u32 {
    4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OtExtend {
    pub id: String,
    pub domain: DomainBlock,
    pub c: Cx,
    pub psi: String,
    pub g_coeffs: Vec<Cx>,
    #[serde(default = "default_ot_degree")]
    pub d_max: u32,
    #[serde(default)]
    pub quadrature: QuadratureBlock,
    #[serde(default)]
    pub budget: BudgetName,
}

#[derive(Debug, Clone, Copy, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub enum Expectation {
    Integrable,
    Divergent,
}

impl Expectation {
    pub fn as_str(self) -> &'static str {
        match self {
            Expectation::Integrable => "integrable",
            Expectation::Divergent => "divergent",
        }
    }
}

fn default_int_radial() -> usize {
    24
}

fn default_int_angular() -> usize {
    32
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Integrability {
    pub id: String,
    pub weight: String,
    pub center: Vec<Cx>,
    pub radii: Vec<f64>,
    #[serde(default = "default_int_radial")]
    pub radial_order: usize,
    #[serde(default = "default_int_angular")]
    pub angular_points: usize,
    #[serde(default)]
    pub expect: Option<Expectation>,
}

impl Config {
    /// Parse and check a configuration; errors name the offending field.
    pub fn from_json(text: &str) -> Result<Config> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: Config = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow::anyhow!("invalid config at {path}: {}", e.into_inner())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Config> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read {}", path.display()))?;
        Self::from_json(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != SCHEMA_VERSION {
            bail!(
                "schema_version: expected {SCHEMA_VERSION}, found {}",
                self.schema_version
            );
        }
        if self.experiments.is_empty() {
            bail!("experiments: at least one experiment is required");
        }
        let mut ids: Vec<(Kind, &str)> = self
            .experiments
            .iter()
            .map(|e| (e.kind(), e.id()))
            .collect();
        ids.sort();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            bail!(
                "experiments: duplicate id {:?} for {}",
                w[0].1,
                w[0].0.name()
            );
        }
        Ok(())
    }

    /// Keep only experiments of one kind.
    pub fn restrict_to(&mut self, kind: Kind) -> Result<()> {
        self.experiments.retain(|e| e.kind() == kind);
        if self.experiments.is_empty() {
            bail!("the config has no {} experiment", kind.name());
        }
        Ok(())
    }
}
