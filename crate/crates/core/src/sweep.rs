//! Declarative parameter sweeps over the beam and link models.
//!
//! A [`SweepSpec`] fixes a base parameter set ([`FixedParams`], in display
//! units), up to two swept [`Axis`] values and a list of [`Metric`]s.
//! [`run_sweep`] evaluates every grid point in parallel and returns the rows
//! in grid order (outer axis slow, inner axis fast). A failing metric never
//! aborts the sweep; it becomes a [`Cell::Sentinel`] carrying a [`Reason`].

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::beam::{self, MetasurfacePattern, SourceGeometry, Wave, C0, ETA0};
use crate::error::{Error, Result};
use crate::link::{LinkGeometry, LinkModel, Ratio, ReceiverPose};
use crate::quad::Settings;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    Pattern,
    MSweep,
    FreqSweep,
    MisalignMap,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    /// Radiation pattern `G(phi)`.
    G,
    /// `G(phi) |H0(k0 a)|^2`.
    #[serde(rename = "G_scaled")]
    GScaled,
    /// Received signal power per unit length.
    #[serde(rename = "P_W_per_m")]
    Power,
    #[serde(rename = "P_over_Pmax")]
    PowerOverPmax,
    #[serde(rename = "SIR")]
    Sir,
    #[serde(rename = "SIR0")]
    Sir0,
    #[serde(rename = "SIR_enh")]
    SirEnhancement,
    /// Also the SNR enhancement.
    #[serde(rename = "P_over_P0")]
    PowerOverP0,
    /// Number of pattern maxima.
    V,
    /// Null-to-null main-lobe width in radians.
    #[serde(rename = "beamwidth")]
    Beamwidth,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::G => "G",
            Metric::GScaled => "G_scaled",
            Metric::Power => "P_W_per_m",
            Metric::PowerOverPmax => "P_over_Pmax",
            Metric::Sir => "SIR",
            Metric::Sir0 => "SIR0",
            Metric::SirEnhancement => "SIR_enh",
            Metric::PowerOverP0 => "P_over_P0",
            Metric::V => "V",
            Metric::Beamwidth => "beamwidth",
        }
    }

    fn is_link(self) -> bool {
        matches!(
            self,
            Metric::Power
                | Metric::PowerOverPmax
                | Metric::Sir
                | Metric::Sir0
                | Metric::SirEnhancement
                | Metric::PowerOverP0
        )
    }

    fn needs_gmax(self) -> bool {
        matches!(self, Metric::PowerOverPmax | Metric::PowerOverP0)
    }
}

/// A sweepable parameter. Values are in the unit carried by the name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AxisParam {
    #[serde(rename = "phi_rad")]
    Phi,
    #[serde(rename = "k0L")]
    K0L,
    M,
    #[serde(rename = "f_THz")]
    Frequency,
    #[serde(rename = "a_nm")]
    A,
    #[serde(rename = "d_mm")]
    D,
    #[serde(rename = "h_mm")]
    H,
    #[serde(rename = "b_mm")]
    B,
    /// Receiver half-aperture relative to `d`.
    #[serde(rename = "b_over_d")]
    BOverD,
    #[serde(rename = "D_mm")]
    BigD,
    #[serde(rename = "D_over_d")]
    BigDOverD,
    #[serde(rename = "beta_deg")]
    Beta,
    #[serde(rename = "l_over_d")]
    LOverD,
}

impl AxisParam {
    pub fn name(self) -> &'static str {
        match self {
            AxisParam::Phi => "phi_rad",
            AxisParam::K0L => "k0L",
            AxisParam::M => "M",
            AxisParam::Frequency => "f_THz",
            AxisParam::A => "a_nm",
            AxisParam::D => "d_mm",
            AxisParam::H => "h_mm",
            AxisParam::B => "b_mm",
            AxisParam::BOverD => "b_over_d",
            AxisParam::BigD => "D_mm",
            AxisParam::BigDOverD => "D_over_d",
            AxisParam::Beta => "beta_deg",
            AxisParam::LOverD => "l_over_d",
        }
    }

    /// Output column header; tilt is reported in radians.
    pub fn column(self) -> &'static str {
        match self {
            AxisParam::Beta => "beta_rad",
            other => other.name(),
        }
    }

    fn column_value(self, v: f64) -> f64 {
        match self {
            AxisParam::Beta => v.to_radians(),
            _ => v,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    #[default]
    Linear,
    Log,
    /// Explicit values taken from [`Axis::values`].
    List,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub param: AxisParam,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default)]
    pub spacing: Spacing,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<f64>,
}

impl Axis {
    pub fn linear(param: AxisParam, start: f64, stop: f64, count: usize) -> Self {
        Axis { param, start: Some(start), stop: Some(stop), count: Some(count), spacing: Spacing::Linear, values: vec![] }
    }

    pub fn log(param: AxisParam, start: f64, stop: f64, count: usize) -> Self {
        Axis { spacing: Spacing::Log, ..Axis::linear(param, start, stop, count) }
    }

    pub fn list(param: AxisParam, values: Vec<f64>) -> Self {
        Axis { param, start: None, stop: None, count: None, spacing: Spacing::List, values }
    }

    pub fn len(&self) -> usize {
        match self.spacing {
            Spacing::List => self.values.len(),
            _ => self.count.unwrap_or(0),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn problems(&self, out: &mut Vec<String>) {
        let name = self.param.name();
        match self.spacing {
            Spacing::List => {
                if self.values.len() < 2 {
                    out.push(format!("axis {name}: a list needs at least 2 values"));
                }
                if self.values.iter().any(|v| !v.is_finite()) {
                    out.push(format!("axis {name}: values must be finite"));
                }
            }
            spacing => {
                match (self.start, self.stop) {
                    (Some(a), Some(b)) => {
                        if !a.is_finite() || !b.is_finite() {
                            out.push(format!("axis {name}: start and stop must be finite"));
                        }
                        if spacing == Spacing::Log && !(a > 0.0 && b > 0.0) {
                            out.push(format!("axis {name}: log spacing needs positive start and stop"));
                        }
                    }
                    _ => out.push(format!("axis {name}: start and stop are required for {spacing:?} spacing")),
                }
                match self.count {
                    Some(n) if n >= 2 => {}
                    _ => out.push(format!("axis {name}: count must be at least 2")),
                }
            }
        }
    }

    /// Grid values in axis units; `M` values are rounded to integers.
    pub fn grid(&self) -> Vec<f64> {
        let raw: Vec<f64> = match self.spacing {
            Spacing::List => self.values.clone(),
            spacing => {
                let (a, b, n) = (self.start.unwrap_or(0.0), self.stop.unwrap_or(0.0), self.count.unwrap_or(0));
                (0..n)
                    .map(|i| {
                        if i + 1 == n {
                            return b;
                        }
                        let t = i as f64 / (n - 1) as f64;
                        match spacing {
                            Spacing::Log => (a.ln() + (b.ln() - a.ln()) * t).exp(),
                            _ => a + (b - a) * t,
                        }
                    })
                    .collect()
            }
        };
        if self.param == AxisParam::M {
            raw.into_iter().map(f64::round).collect()
        } else {
            raw
        }
    }
}

/// Base parameter set in display units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    pub a_nm: f64,
    pub d_mm: f64,
    pub h_mm: f64,
    pub b_mm: f64,
    #[serde(rename = "D_mm")]
    pub big_d_mm: f64,
    #[serde(rename = "f_THz")]
    pub f_thz: f64,
    #[serde(rename = "M")]
    pub m: u32,
    /// Total slit count `2M+1`; overrides `M` when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub slits: Option<u32>,
    /// Electrical pitch; when present the pitch is `k0L / k0` instead of `d / M`.
    #[serde(default, rename = "k0L", skip_serializing_if = "Option::is_none")]
    pub k0l: Option<f64>,
    #[serde(default = "broadside")]
    pub phi_rad: f64,
    #[serde(default)]
    pub beta_deg: f64,
    #[serde(default)]
    pub l_over_d: f64,
}

fn broadside() -> f64 {
    FRAC_PI_2
}

impl Default for FixedParams {
    fn default() -> Self {
        FixedParams {
            a_nm: 25.0,
            d_mm: 2.5,
            h_mm: 1000.0,
            b_mm: 2.5,
            big_d_mm: 5.0,
            f_thz: 600.0,
            m: 1000,
            slits: None,
            k0l: None,
            phi_rad: FRAC_PI_2,
            beta_deg: 0.0,
            l_over_d: 0.0,
        }
    }
}

impl FixedParams {
    fn problems(&self, out: &mut Vec<String>) {
        let positive = [("a_nm", self.a_nm), ("d_mm", self.d_mm), ("h_mm", self.h_mm), ("b_mm", self.b_mm), ("f_THz", self.f_thz)];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                out.push(format!("fixed.{name} must be positive and finite, got {v}"));
            }
        }
        if !(self.big_d_mm >= 0.0) {
            out.push(format!("fixed.D_mm must be non-negative, got {}", self.big_d_mm));
        }
        if let Some(s) = self.slits {
            if s % 2 == 0 {
                out.push(format!("fixed.slits must be odd (2M+1), got {s}"));
            }
        }
        if let Some(k) = self.k0l {
            if !(k > 0.0) || !k.is_finite() {
                out.push(format!("fixed.k0L must be positive, got {k}"));
            }
        }
        if !(self.beta_deg.abs() < 90.0) {
            out.push(format!("fixed.beta_deg must lie strictly between -90 and 90, got {}", self.beta_deg));
        }
        if !self.phi_rad.is_finite() || !self.l_over_d.is_finite() {
            out.push("fixed.phi_rad and fixed.l_over_d must be finite".into());
        }
    }

    fn with(&self, axes: &[Axis], values: &[f64]) -> FixedParams {
        let mut p = self.clone();
        let mut relative = Vec::new();
        for (axis, &v) in axes.iter().zip(values) {
            match axis.param {
                AxisParam::Phi => p.phi_rad = v,
                AxisParam::K0L => p.k0l = Some(v),
                AxisParam::M => {
                    p.m = v.max(0.0) as u32;
                    p.slits = None;
                }
                AxisParam::Frequency => p.f_thz = v,
                AxisParam::A => p.a_nm = v,
                AxisParam::D => p.d_mm = v,
                AxisParam::H => p.h_mm = v,
                AxisParam::B => p.b_mm = v,
                AxisParam::BigD => p.big_d_mm = v,
                AxisParam::Beta => p.beta_deg = v,
                AxisParam::LOverD => p.l_over_d = v,
                AxisParam::BOverD | AxisParam::BigDOverD => relative.push((axis.param, v)),
            }
        }
        for (param, v) in relative {
            match param {
                AxisParam::BOverD => p.b_mm = v * p.d_mm,
                _ => p.big_d_mm = v * p.d_mm,
            }
        }
        p
    }

    fn m_effective(&self) -> u32 {
        match self.slits {
            Some(s) => s.saturating_sub(1) / 2,
            None => self.m,
        }
    }

    pub fn wave(&self) -> Result<Wave> {
        Wave::new(self.f_thz * 1e12)
    }

    /// Emitter geometry in SI units.
    pub fn geometry(&self) -> Result<SourceGeometry> {
        let a = self.a_nm * 1e-9;
        let m = self.m_effective();
        if m == 0 {
            return SourceGeometry::single_slit(a);
        }
        match self.k0l {
            Some(k0l) => SourceGeometry::from_pitch(a, k0l / self.wave()?.k0(), m),
            None => SourceGeometry::from_half_length(a, self.d_mm * 1e-3, m),
        }
    }

    pub fn link(&self) -> Result<LinkGeometry> {
        LinkGeometry::new(self.h_mm * 1e-3, self.b_mm * 1e-3, self.big_d_mm * 1e-3)
    }

    pub fn pose(&self) -> Result<ReceiverPose> {
        ReceiverPose::new(self.l_over_d * self.d_mm * 1e-3, self.beta_deg.to_radians())
    }
}

/// Quadrature knobs exposed to configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadConfig {
    pub rel_tol: f64,
    /// Initial panels per oscillation lobe.
    pub density: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        let s = Settings::default();
        QuadConfig { rel_tol: s.rel_tol, density: s.density }
    }
}

impl QuadConfig {
    pub fn settings(&self) -> Settings {
        Settings { rel_tol: self.rel_tol, density: self.density, ..Settings::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub kind: SweepKind,
    pub metrics: Vec<Metric>,
    #[serde(default)]
    pub fixed: FixedParams,
    #[serde(default)]
    pub quadrature: QuadConfig,
    #[serde(default)]
    pub axis: Vec<Axis>,
    /// Free-form remarks echoed into result metadata (e.g. which values are defaults).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

impl SweepSpec {
    /// Every violation of the spec invariants, empty when valid.
    pub fn problems(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.axis.len() > 2 {
            out.push(format!("at most 2 axes are supported, got {}", self.axis.len()));
        }
        for axis in &self.axis {
            axis.problems(&mut out);
        }
        for (i, a) in self.axis.iter().enumerate() {
            if self.axis[..i].iter().any(|b| b.param == a.param) {
                out.push(format!("axis {} appears twice", a.param.name()));
            }
        }
        if self.metrics.is_empty() {
            out.push("at least one metric is required".into());
        }
        self.fixed.problems(&mut out);
        if !(self.quadrature.rel_tol > 0.0 && self.quadrature.rel_tol < 1.0) {
            out.push(format!("quadrature.rel_tol must lie in (0, 1), got {}", self.quadrature.rel_tol));
        }
        if self.quadrature.density == 0 {
            out.push("quadrature.density must be at least 1".into());
        }
        let has = |p: AxisParam| self.axis.iter().any(|a| a.param == p);
        match self.kind {
            SweepKind::Pattern => {
                if !has(AxisParam::Phi) {
                    out.push("pattern sweeps need a phi_rad axis".into());
                }
                for m in &self.metrics {
                    if m.is_link() {
                        out.push(format!("metric {} is not available for pattern sweeps", m.name()));
                    }
                }
            }
            SweepKind::MSweep if !has(AxisParam::M) => out.push("m_sweep needs an M axis".into()),
            SweepKind::FreqSweep if !has(AxisParam::Frequency) => out.push("freq_sweep needs an f_THz axis".into()),
            SweepKind::MisalignMap => {
                let params: Vec<AxisParam> = self.axis.iter().map(|a| a.param).collect();
                if params != [AxisParam::Beta, AxisParam::LOverD] {
                    out.push("misalign_map needs exactly the axes beta_deg (outer) and l_over_d (inner)".into());
                }
            }
            _ => {}
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let problems = self.problems();
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::Validation(problems))
        }
    }

    pub fn row_count(&self) -> usize {
        self.axis.iter().map(Axis::len).product()
    }
}

/// Machine-readable reason attached to a sentinel cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reason {
    /// The interference vanished; the ratio is unbounded.
    InfiniteSir,
    NonConvergence,
    InvalidGeometry,
    InvalidParameter,
    UnsupportedRegime,
    BeamFillsHalfSpace,
    DomainError,
    SingularPoint,
}

impl Reason {
    pub fn code(self) -> &'static str {
        match self {
            Reason::InfiniteSir => "infinite_sir",
            Reason::NonConvergence => "non_convergence",
            Reason::InvalidGeometry => "invalid_geometry",
            Reason::InvalidParameter => "invalid_parameter",
            Reason::UnsupportedRegime => "unsupported_regime",
            Reason::BeamFillsHalfSpace => "beam_fills_half_space",
            Reason::DomainError => "domain_error",
            Reason::SingularPoint => "singular_point",
        }
    }

    fn of(err: &Error) -> Reason {
        match err {
            Error::Convergence { .. } => Reason::NonConvergence,
            Error::Geometry(_) => Reason::InvalidGeometry,
            Error::UnsupportedRegime { .. } => Reason::UnsupportedRegime,
            Error::BeamFillsHalfSpace { .. } => Reason::BeamFillsHalfSpace,
            Error::Domain { .. } | Error::FarZone { .. } => Reason::DomainError,
            Error::SingularPoint => Reason::SingularPoint,
            Error::InvalidParameter(_) | Error::Validation(_) => Reason::InvalidParameter,
        }
    }
}

impl fmt::Display for Reason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Value(f64),
    Sentinel(Reason),
}

impl Cell {
    pub fn value(&self) -> Option<f64> {
        match *self {
            Cell::Value(v) => Some(v),
            Cell::Sentinel(_) => None,
        }
    }

    fn from_result(r: Result<f64>) -> Cell {
        match r {
            Ok(v) => Cell::Value(v),
            Err(e) => Cell::Sentinel(Reason::of(&e)),
        }
    }

    fn from_ratio(r: Result<Ratio>) -> Cell {
        match r {
            Ok(Ratio::Finite(v)) if v.is_finite() => Cell::Value(v),
            Ok(_) => Cell::Sentinel(Reason::InfiniteSir),
            Err(e) => Cell::Sentinel(Reason::of(&e)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub cells: Vec<Cell>,
    /// First sentinel reason in the row.
    pub reason: Option<Reason>,
}

/// Constants and tolerances a result was produced with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Provenance {
    pub library: &'static str,
    pub version: &'static str,
    pub speed_of_light_m_per_s: f64,
    pub vacuum_impedance_ohm: f64,
    pub rel_tol: f64,
    pub density: u32,
    pub max_depth: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub spec: SweepSpec,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Row>,
    /// Whether a trailing `sentinel_reason` column belongs to the table.
    pub reason_column: bool,
    pub provenance: Provenance,
}

impl SweepResult {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }

    /// Values of one column, `None` for sentinels.
    pub fn series(&self, name: &str) -> Option<Vec<Option<f64>>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| r.cells[i].value()).collect())
    }

    pub fn has_reason(&self, reason: Reason) -> bool {
        self.rows.iter().any(|r| r.cells.contains(&Cell::Sentinel(reason)))
    }
}

#[derive(Clone, Copy)]
enum Echo {
    Phi,
    K0L,
    M,
}

#[derive(Clone, Copy)]
enum Column {
    Axis(usize, AxisParam),
    Echo(Echo),
    Metric(Metric),
}

fn layout(spec: &SweepSpec) -> Vec<Column> {
    let mut cols: Vec<Column> = if spec.kind == SweepKind::Pattern {
        vec![Column::Echo(Echo::Phi), Column::Echo(Echo::K0L), Column::Echo(Echo::M)]
    } else {
        spec.axis.iter().enumerate().map(|(i, a)| Column::Axis(i, a.param)).collect()
    };
    cols.extend(spec.metrics.iter().map(|&m| Column::Metric(m)));
    cols
}

fn column_name(c: Column) -> &'static str {
    match c {
        Column::Axis(_, p) => p.column(),
        Column::Echo(Echo::Phi) => "phi_rad",
        Column::Echo(Echo::K0L) => "k0L",
        Column::Echo(Echo::M) => "M",
        Column::Metric(m) => m.name(),
    }
}

fn grid_points(spec: &SweepSpec) -> Vec<Vec<f64>> {
    let grids: Vec<Vec<f64>> = spec.axis.iter().map(Axis::grid).collect();
    let mut points = vec![Vec::new()];
    for grid in &grids {
        points = points
            .into_iter()
            .flat_map(|prefix| {
                grid.iter().map(move |&v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    points
}

type GmaxKey = (u64, u64, u64);

fn gmax_key(geom: &SourceGeometry, wave: &Wave) -> GmaxKey {
    (geom.a().to_bits(), geom.d().to_bits(), wave.frequency().to_bits())
}

struct Evaluator<'a> {
    spec: &'a SweepSpec,
    settings: Settings,
    columns: &'a [Column],
    gmax: &'a BTreeMap<GmaxKey, Result<f64>>,
}

impl Evaluator<'_> {
    fn row(&self, values: &[f64]) -> Row {
        let p = self.spec.fixed.with(&self.spec.axis, values);
        let geom = p.geometry();
        let wave = p.wave();
        let model = self.model(&p, &geom, &wave);
        let pose = p.pose();
        let mut cells = Vec::with_capacity(self.columns.len());
        for &col in self.columns {
            let cell = match col {
                Column::Axis(i, param) => Cell::Value(param.column_value(values[i])),
                Column::Echo(Echo::Phi) => Cell::Value(p.phi_rad),
                Column::Echo(Echo::M) => Cell::Value(f64::from(p.m_effective())),
                Column::Echo(Echo::K0L) => Cell::from_result(match (&geom, &wave) {
                    (Ok(g), Ok(w)) => Ok(p.k0l.unwrap_or(w.k0() * g.pitch())),
                    (Err(e), _) | (_, Err(e)) => Err(e.clone()),
                }),
                Column::Metric(m) => self.metric(m, &p, &geom, &wave, &model, &pose),
            };
            cells.push(cell);
        }
        let reason = cells.iter().find_map(|c| match c {
            Cell::Sentinel(r) => Some(*r),
            Cell::Value(_) => None,
        });
        Row { cells, reason }
    }

    fn model(&self, p: &FixedParams, geom: &Result<SourceGeometry>, wave: &Result<Wave>) -> Result<LinkModel> {
        if !self.spec.metrics.iter().any(|m| m.is_link()) {
            return Err(Error::InvalidParameter("no link metrics requested".into()));
        }
        let (geom, wave) = (geom.clone()?, wave.clone()?);
        let link = p.link()?;
        link.check_against(&geom)?;
        let model = LinkModel::new(geom, wave, link, self.settings)?;
        Ok(match self.gmax.get(&gmax_key(&geom, &wave)) {
            Some(Ok(g)) => model.with_gmax(*g),
            _ => model,
        })
    }

    fn metric(
        &self,
        metric: Metric,
        p: &FixedParams,
        geom: &Result<SourceGeometry>,
        wave: &Result<Wave>,
        model: &Result<LinkModel>,
        pose: &Result<ReceiverPose>,
    ) -> Cell {
        let geo = || -> Result<(SourceGeometry, Wave)> { Ok((geom.clone()?, wave.clone()?)) };
        let link = || -> Result<(&LinkModel, ReceiverPose)> {
            match (model, pose) {
                (Ok(m), Ok(pose)) => Ok((m, *pose)),
                (Err(e), _) | (_, Err(e)) => Err(e.clone()),
            }
        };
        match metric {
            Metric::G => Cell::from_result(geo().and_then(|(g, w)| beam::radiation_pattern(&g, &w, p.phi_rad))),
            Metric::GScaled => Cell::from_result(
                geo().and_then(|(g, w)| MetasurfacePattern::new(&g, &w)).map(|pat| pat.scaled(p.phi_rad)),
            ),
            Metric::V => Cell::from_result(geo().map(|(g, w)| beam::lobe_count(&g, &w) as f64)),
            Metric::Beamwidth => Cell::from_result(geo().and_then(|(g, w)| beam::beamwidth(&g, &w))),
            Metric::Power => Cell::from_result(link().and_then(|(m, pose)| m.received_power(&pose))),
            Metric::PowerOverPmax => Cell::from_result(
                link().and_then(|(m, pose)| Ok(m.received_power(&pose)? / m.p_max()?)),
            ),
            Metric::PowerOverP0 => Cell::from_ratio(link().and_then(|(m, pose)| m.snr_enhancement(&pose))),
            Metric::Sir => Cell::from_ratio(link().and_then(|(m, pose)| sir(m, &pose))),
            Metric::Sir0 => Cell::from_ratio(link().and_then(|(m, pose)| sir0(m, &pose))),
            Metric::SirEnhancement => Cell::from_ratio(link().and_then(|(m, pose)| {
                match (sir(m, &pose)?, sir0(m, &pose)?) {
                    (Ratio::Finite(s), Ratio::Finite(s0)) if s0 > 0.0 => Ok(Ratio::Finite(s / s0)),
                    _ => Ok(Ratio::Unbounded),
                }
            })),
        }
    }
}

fn sir(model: &LinkModel, pose: &ReceiverPose) -> Result<Ratio> {
    if pose.is_aligned() {
        model.sir()
    } else {
        model.sir_posed(pose)
    }
}

fn sir0(model: &LinkModel, pose: &ReceiverPose) -> Result<Ratio> {
    if pose.is_aligned() {
        let v = model.sir0()?;
        Ok(if v.is_finite() { Ratio::Finite(v) } else { Ratio::Unbounded })
    } else {
        model.sir0_posed(pose)
    }
}

/// Evaluates every metric at every grid point.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let settings = spec.quadrature.settings();
    let columns = layout(spec);
    let points = grid_points(spec);

    // g_max depends only on (a, d, f): evaluate each distinct key once
    let mut gmax = BTreeMap::new();
    if spec.metrics.iter().any(|m| m.needs_gmax()) {
        let keys: BTreeMap<GmaxKey, (SourceGeometry, Wave)> = points
            .iter()
            .filter_map(|v| {
                let p = spec.fixed.with(&spec.axis, v);
                let (g, w) = (p.geometry().ok()?, p.wave().ok()?);
                Some((gmax_key(&g, &w), (g, w)))
            })
            .collect();
        let computed: Vec<(GmaxKey, Result<f64>)> = keys
            .into_par_iter()
            .map(|(k, (g, w))| (k, beam::g_max_with(&g, &w, &settings)))
            .collect();
        gmax.extend(computed);
    }

    let eval = Evaluator { spec, settings, columns: &columns, gmax: &gmax };
    let rows: Vec<Row> = points.par_iter().map(|v| eval.row(v)).collect();
    Ok(SweepResult {
        spec: spec.clone(),
        columns: columns.iter().map(|&c| column_name(c)).collect(),
        rows,
        reason_column: spec.kind != SweepKind::Pattern,
        provenance: Provenance {
            library: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            speed_of_light_m_per_s: C0,
            vacuum_impedance_ohm: ETA0,
            rel_tol: settings.rel_tol,
            density: settings.density,
            max_depth: settings.max_depth,
        },
    })
}

/// Named parameter sets for the reference figures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Fig2a,
    Fig2b,
    Fig3,
    Fig4,
    Fig5Small,
    Fig5Large,
}

impl Preset {
    pub const ALL: [Preset; 6] = [Preset::Fig2a, Preset::Fig2b, Preset::Fig3, Preset::Fig4, Preset::Fig5Small, Preset::Fig5Large];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Fig2a => "fig2a",
            Preset::Fig2b => "fig2b",
            Preset::Fig3 => "fig3",
            Preset::Fig4 => "fig4",
            Preset::Fig5Small => "fig5_small",
            Preset::Fig5Large => "fig5_large",
        }
    }

    pub fn from_name(name: &str) -> Result<Preset> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown preset {name:?}")))
    }
}

const PATTERN_POINTS: usize = 4001;

/// The parameter set of a named preset.
pub fn preset(which: Preset) -> SweepSpec {
    let base = FixedParams::default();
    let link_metrics = vec![Metric::Power, Metric::PowerOverPmax, Metric::Sir, Metric::Sir0, Metric::SirEnhancement];
    let phi_axis = Axis::linear(AxisParam::Phi, 0.0, PI, PATTERN_POINTS);
    match which {
        Preset::Fig2a | Preset::Fig2b => {
            // a = 10 nm keeps the pitch at k0L = 0.1 pi (25 nm at 600 THz) above the slit width
            let fixed = FixedParams { a_nm: 10.0, m: 1000, k0l: Some(0.1 * PI), ..base };
            let (series, note) = if which == Preset::Fig2a {
                (Axis::list(AxisParam::K0L, vec![0.1 * PI, 0.5 * PI, PI]), "default k0L set {0.1pi, 0.5pi, pi}")
            } else {
                (Axis::list(AxisParam::M, vec![10.0, 100.0, 1000.0]), "default M set {10, 100, 1000}")
            };
            SweepSpec {
                kind: SweepKind::Pattern,
                metrics: vec![Metric::GScaled, Metric::G],
                fixed,
                quadrature: QuadConfig::default(),
                axis: vec![series, phi_axis],
                notes: vec![note.into(), "default a = 10 nm, f = 600 THz".into()],
            }
        }
        Preset::Fig3 => SweepSpec {
            kind: SweepKind::MSweep,
            metrics: link_metrics,
            fixed: FixedParams { b_mm: 2.5, big_d_mm: 5.0, ..base },
            quadrature: QuadConfig::default(),
            axis: vec![
                Axis::list(AxisParam::Frequency, vec![450.0, 550.0, 650.0]),
                Axis::log(AxisParam::M, 1.0, 20000.0, 121),
            ],
            notes: vec!["default frequency set {450, 550, 650} THz".into()],
        },
        Preset::Fig4 => SweepSpec {
            kind: SweepKind::FreqSweep,
            metrics: link_metrics,
            fixed: FixedParams { m: 12000, big_d_mm: 5.0, ..base },
            quadrature: QuadConfig::default(),
            axis: vec![
                Axis::list(AxisParam::BOverD, vec![1.0 / 35.0, 0.2, 0.5, 1.0]),
                Axis::linear(AxisParam::Frequency, 400.0, 800.0, 33),
            ],
            notes: vec!["default b set {d/35, 0.2d, 0.5d, d}".into()],
        },
        Preset::Fig5Small | Preset::Fig5Large => {
            let b_over_d = if which == Preset::Fig5Small { 0.2 } else { 0.8 };
            SweepSpec {
                kind: SweepKind::MisalignMap,
                metrics: vec![Metric::PowerOverPmax, Metric::SirEnhancement],
                fixed: FixedParams { m: 5000, b_mm: b_over_d * base.d_mm, big_d_mm: 5.0, ..base },
                quadrature: QuadConfig::default(),
                axis: vec![
                    Axis::linear(AxisParam::Beta, -75.0, 75.0, 41),
                    Axis::linear(AxisParam::LOverD, -2.0, 2.0, 41),
                ],
                notes: vec![],
            }
        }
    }
}
