//! Receiver side: Poynting flux through a (possibly misaligned) photodiode
//! aperture, signal-to-interference ratios with and without the metasurface,
//! and noise bookkeeping.
//!
//! Coordinates: the own transmitter is centred at the origin of the emitter
//! plane `y = 0`, the identical interferer at `x = -2D`. The photodiode is a
//! segment of half-length `b` centred at `(-l, h)` and tilted by `beta`:
//! `y(x) = h - (x + l) tan(beta)` for `|x + l| < b cos(beta)`, with normal
//! `n = (sin(beta), cos(beta))`. Powers are per unit length along `z` (W/m)
//! for a unit (1 V/m) slit field.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::sync::OnceLock;

use crate::beam::{self, LambertianPattern, MetasurfacePattern, RadiationPattern, SourceGeometry, Wave, ETA0};
use crate::error::{Error, Result};
use crate::quad::{self, Settings};

/// Interference below this is treated as absent.
pub const INTERFERENCE_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkGeometry {
    h: f64,
    b: f64,
    big_d: f64,
}

impl LinkGeometry {
    /// `h`: emitter-to-receiver distance, `b`: receiver half-aperture,
    /// `big_d`: half the interferer offset (may be `+inf` for no interferer).
    pub fn new(h: f64, b: f64, big_d: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Geometry(format!("receiver distance h must be positive, got {h}")));
        }
        if !(b > 0.0) || !b.is_finite() {
            return Err(Error::Geometry(format!("receiver half-aperture b must be positive, got {b}")));
        }
        if !(big_d >= 0.0) {
            return Err(Error::Geometry(format!("interferer offset D must be non-negative, got {big_d}")));
        }
        Ok(LinkGeometry { h, b, big_d })
    }

    /// Checks `b <= d` and `D >= d` against the emitter.
    pub fn check_against(&self, geom: &SourceGeometry) -> Result<()> {
        let d = geom.d() * (1.0 + 1e-12);
        if self.b > d {
            return Err(Error::Geometry(format!("b = {} exceeds emitter half-length d = {}", self.b, geom.d())));
        }
        if self.big_d * (1.0 + 1e-12) < geom.d() {
            return Err(Error::Geometry(format!("D = {} is below emitter half-length d = {}", self.big_d, geom.d())));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn big_d(&self) -> f64 {
        self.big_d
    }

    /// Horizontal position of the interfering emitter centre.
    pub fn interferer_x(&self) -> f64 {
        -2.0 * self.big_d
    }

    fn has_interferer(&self) -> bool {
        self.big_d.is_finite()
    }
}

/// Receiver misalignment: horizontal shift `l` and tilt `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ReceiverPose {
    offset: f64,
    tilt: f64,
}

impl ReceiverPose {
    pub const ALIGNED: ReceiverPose = ReceiverPose { offset: 0.0, tilt: 0.0 };

    pub fn new(offset: f64, tilt: f64) -> Result<Self> {
        if !offset.is_finite() || !(tilt.abs() < FRAC_PI_2) {
            return Err(Error::InvalidParameter(format!("pose needs finite l and |beta| < pi/2, got ({offset}, {tilt})")));
        }
        Ok(ReceiverPose { offset, tilt })
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn tilt(&self) -> f64 {
        self.tilt
    }

    pub fn is_aligned(&self) -> bool {
        self.offset == 0.0 && self.tilt == 0.0
    }

    /// Point at arc length `s` from the aperture centre.
    fn point(&self, h: f64, s: f64) -> (f64, f64) {
        let (sb, cb) = self.tilt.sin_cos();
        (-self.offset + s * cb, h - s * sb)
    }

    fn normal(&self) -> [f64; 2] {
        let (sb, cb) = self.tilt.sin_cos();
        [sb, cb]
    }
}

/// White receiver noise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Unilateral spectral density (W/Hz).
    pub density: f64,
    /// Half-bandwidth of the signal (rad/s).
    pub half_bandwidth: f64,
}

impl NoiseModel {
    pub fn new(density: f64, half_bandwidth: f64) -> Result<Self> {
        if !(density >= 0.0) || !(half_bandwidth >= 0.0) {
            return Err(Error::InvalidParameter("noise density and bandwidth must be non-negative".into()));
        }
        Ok(NoiseModel { density, half_bandwidth })
    }
}

/// `Pn = 2 n dw`. The product is taken literally: W/Hz times rad/s.
pub fn noise_power(noise: &NoiseModel) -> f64 {
    2.0 * noise.density * noise.half_bandwidth
}

/// A power ratio that may be unbounded when its denominator vanishes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Finite(f64),
    /// Denominator below [`INTERFERENCE_FLOOR`] or structurally absent.
    Unbounded,
}

impl Ratio {
    fn of(num: f64, den: f64) -> Ratio {
        if den.abs() < INTERFERENCE_FLOOR || den.is_nan() {
            Ratio::Unbounded
        } else {
            Ratio::Finite(num / den)
        }
    }

    /// `+inf` for [`Ratio::Unbounded`].
    pub fn value(&self) -> f64 {
        match *self {
            Ratio::Finite(v) => v,
            Ratio::Unbounded => f64::INFINITY,
        }
    }

    pub fn finite(&self) -> Option<f64> {
        match *self {
            Ratio::Finite(v) => Some(v),
            Ratio::Unbounded => None,
        }
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ratio::Finite(v) => write!(f, "{v}"),
            Ratio::Unbounded => f.write_str("inf"),
        }
    }
}

fn density_at<P: RadiationPattern + ?Sized>(
    pattern: &P,
    k0: f64,
    source_x: f64,
    x: f64,
    y: f64,
    normal: [f64; 2],
) -> Result<f64> {
    let (dx, dy) = (x - source_x, y);
    let r = dx.hypot(dy);
    if r == 0.0 {
        return Err(Error::SingularPoint);
    }
    if !(y > 0.0) {
        return Err(Error::Geometry(format!("point ({x}, {y}) is not above the emitter")));
    }
    let phi = dy.atan2(dx);
    let cos_incidence = (dx * normal[0] + dy * normal[1]) / r;
    Ok(pattern.intensity(phi) / (ETA0 * PI * k0 * r) * cos_incidence)
}

/// Normal component of the far-zone Poynting vector of an emitter centred at
/// `source_x`, evaluated at `(x, y)`.
pub fn poynting_normal_density(
    geom: &SourceGeometry,
    wave: &Wave,
    source_x: f64,
    x: f64,
    y: f64,
    normal: [f64; 2],
) -> Result<f64> {
    let pattern = MetasurfacePattern::new(geom, wave)?;
    density_at(&pattern, wave.k0(), source_x, x, y, normal)
}

/// Flux of `pattern` (emitter at `source_x`) through the posed aperture.
pub fn segment_flux<P: RadiationPattern + ?Sized>(
    pattern: &P,
    k0: f64,
    source_x: f64,
    pose: &ReceiverPose,
    link: &LinkGeometry,
    settings: &Settings,
) -> Result<f64> {
    let (h, b) = (link.h(), link.b());
    if h - b * pose.tilt().sin().abs() <= 0.0 {
        return Err(Error::Geometry("tilted aperture reaches the emitter plane".into()));
    }
    let normal = pose.normal();
    // closest approach bounds the angular sweep rate along the segment
    let (cx, cy) = pose.point(h, 0.0);
    let (sb, cb) = pose.tilt().sin_cos();
    let s_star = ((source_x - cx) * cb - cy * sb).clamp(-b, b);
    let (px, py) = pose.point(h, s_star);
    let r_min = (px - source_x).hypot(py);
    let spec = settings.spec_for(pattern.lobe_width(), 0.0, 2.0 * b / r_min);
    let est = quad::integrate(
        |s| {
            let (x, y) = pose.point(h, s);
            density_at(pattern, k0, source_x, x, y, normal).unwrap_or(f64::NAN)
        },
        -b,
        b,
        &spec,
    )?;
    if est.value.is_nan() {
        return Err(Error::Geometry("aperture leaves the upper half-plane".into()));
    }
    Ok(est.value)
}

/// Flux of the metasurface emitter at `source_x` through the posed aperture.
pub fn flux_through_segment(
    geom: &SourceGeometry,
    wave: &Wave,
    source_x: f64,
    pose: &ReceiverPose,
    link: &LinkGeometry,
) -> Result<f64> {
    let pattern = MetasurfacePattern::new(geom, wave)?;
    segment_flux(&pattern, wave.k0(), source_x, pose, link, &Settings::default())
}

/// `int_lo^hi G(atan2(h, x)) / (x^2 + h^2) dx`, the aligned-aperture flux
/// integral without its `h / (eta0 pi k0)` prefactor.
fn aligned_integral<P: RadiationPattern + ?Sized>(
    pattern: &P,
    h: f64,
    lo: f64,
    hi: f64,
    settings: &Settings,
) -> Result<f64> {
    let sweep = (h.atan2(lo) - h.atan2(hi)).abs();
    let spec = settings.spec_for(pattern.lobe_width(), 0.0, sweep);
    let est = quad::integrate(|x| pattern.intensity(h.atan2(x)) / (x * x + h * h), lo, hi, &spec)?;
    Ok(est.value)
}

/// Signal-to-interference ratio of the aligned receiver for any pattern:
/// `2 int_0^b I / int_{2D-b}^{2D+b} I` with `I = G(atan(h/x)) / (x^2 + h^2)`.
pub fn sir_for_pattern<P: RadiationPattern + ?Sized>(pattern: &P, link: &LinkGeometry, settings: &Settings) -> Result<Ratio> {
    let (h, b, big_d) = (link.h(), link.b(), link.big_d());
    if !link.has_interferer() {
        return Ok(Ratio::Unbounded);
    }
    if 2.0 * big_d - b <= 0.0 {
        return Err(Error::Geometry("interferer window overlaps the receiver column (2D - b <= 0)".into()));
    }
    let signal = 2.0 * aligned_integral(pattern, h, 0.0, b, settings)?;
    let interference = aligned_integral(pattern, h, 2.0 * big_d - b, 2.0 * big_d + b, settings)?;
    Ok(Ratio::of(signal, interference))
}

/// Closed-form SIR of the bare Lambertian LEDs (aligned receiver).
pub fn sir0(link: &LinkGeometry) -> Result<f64> {
    let (h, b, big_d) = (link.h(), link.b(), link.big_d());
    if 2.0 * big_d - b <= 0.0 {
        return Err(Error::Geometry("interferer window overlaps the receiver column (2D - b <= 0)".into()));
    }
    if !link.has_interferer() {
        return Ok(f64::INFINITY);
    }
    let (far, near) = (2.0 * big_d + b, 2.0 * big_d - b);
    let window = far / (h * h + far * far).sqrt() - near / (h * h + near * near).sqrt();
    Ok(2.0 * b / ((h * h + b * b).sqrt() * window))
}

/// Evaluates every receiver metric of one transmitter/receiver configuration,
/// caching the pattern and the bare-LED flux `g_max`.
#[derive(Debug)]
pub struct LinkModel {
    geom: SourceGeometry,
    wave: Wave,
    link: LinkGeometry,
    settings: Settings,
    pattern: MetasurfacePattern,
    gmax: OnceLock<Result<f64>>,
}

impl LinkModel {
    pub fn new(geom: SourceGeometry, wave: Wave, link: LinkGeometry, settings: Settings) -> Result<Self> {
        if geom.m() < 1 {
            return Err(Error::Geometry("link metrics need M >= 1".into()));
        }
        Ok(LinkModel {
            pattern: MetasurfacePattern::new(&geom, &wave)?,
            geom,
            wave,
            link,
            settings,
            gmax: OnceLock::new(),
        })
    }

    /// Seeds `g_max` computed elsewhere (it depends only on `a`, `d`, `k0`).
    pub fn with_gmax(self, gmax: f64) -> Self {
        let _ = self.gmax.set(Ok(gmax));
        self
    }

    pub fn geometry(&self) -> &SourceGeometry {
        &self.geom
    }

    pub fn wave(&self) -> &Wave {
        &self.wave
    }

    pub fn link(&self) -> &LinkGeometry {
        &self.link
    }

    pub fn pattern(&self) -> &MetasurfacePattern {
        &self.pattern
    }

    pub fn g_max(&self) -> Result<f64> {
        self.gmax
            .get_or_init(|| beam::g_max_with(&self.geom, &self.wave, &self.settings))
            .clone()
    }

    /// Total bare-LED power `g_max / (eta0 pi k0)`.
    pub fn p_max(&self) -> Result<f64> {
        Ok(self.g_max()? / (ETA0 * PI * self.wave.k0()))
    }

    fn flux<P: RadiationPattern>(&self, pattern: &P, source_x: f64, pose: &ReceiverPose) -> Result<f64> {
        segment_flux(pattern, self.wave.k0(), source_x, pose, &self.link, &self.settings)
    }

    /// Signal power from the own transmitter.
    pub fn received_power(&self, pose: &ReceiverPose) -> Result<f64> {
        self.flux(&self.pattern, 0.0, pose)
    }

    /// Power from the interfering transmitter (zero when there is none).
    pub fn interference_power(&self, pose: &ReceiverPose) -> Result<f64> {
        if !self.link.has_interferer() {
            return Ok(0.0);
        }
        self.flux(&self.pattern, self.link.interferer_x(), pose)
    }

    /// Signal power `P0` without the metasurface (Lambertian emitter).
    pub fn received_power_lambertian(&self, pose: &ReceiverPose) -> Result<f64> {
        let bare = LambertianPattern { gmax: self.g_max()? };
        self.flux(&bare, 0.0, pose)
    }

    /// Aligned SIR via the aperture integrals over `x`.
    pub fn sir(&self) -> Result<Ratio> {
        sir_for_pattern(&self.pattern, &self.link, &self.settings)
    }

    /// SIR for a misaligned receiver; both emitters illuminate the same posed aperture.
    pub fn sir_posed(&self, pose: &ReceiverPose) -> Result<Ratio> {
        if !self.link.has_interferer() {
            return Ok(Ratio::Unbounded);
        }
        let signal = self.received_power(pose)?;
        let interference = self.interference_power(pose)?;
        Ok(Ratio::of(signal, interference))
    }

    /// Closed-form aligned SIR without the metasurface.
    pub fn sir0(&self) -> Result<f64> {
        sir0(&self.link)
    }

    /// Lambertian SIR for a misaligned receiver (`g_max` cancels).
    pub fn sir0_posed(&self, pose: &ReceiverPose) -> Result<Ratio> {
        if !self.link.has_interferer() {
            return Ok(Ratio::Unbounded);
        }
        let bare = LambertianPattern { gmax: 1.0 };
        let signal = self.flux(&bare, 0.0, pose)?;
        let interference = self.flux(&bare, self.link.interferer_x(), pose)?;
        Ok(Ratio::of(signal, interference))
    }

    /// `SNR / SNR0 = P / P0`; the noise power cancels.
    pub fn snr_enhancement(&self, pose: &ReceiverPose) -> Result<Ratio> {
        let p = self.received_power(pose)?;
        let p0 = self.received_power_lambertian(pose)?;
        Ok(Ratio::of(p, p0))
    }
}

fn model(geom: &SourceGeometry, wave: &Wave, link: &LinkGeometry) -> Result<LinkModel> {
    LinkModel::new(*geom, *wave, *link, Settings::default())
}

/// Aligned signal-to-interference ratio of the metasurface link.
pub fn sir(geom: &SourceGeometry, wave: &Wave, link: &LinkGeometry) -> Result<Ratio> {
    model(geom, wave, link)?.sir()
}

/// Total emitted power of the bare LED.
pub fn p_max(geom: &SourceGeometry, wave: &Wave) -> Result<f64> {
    Ok(beam::g_max(geom, wave)? / (ETA0 * PI * wave.k0()))
}

pub fn received_power(geom: &SourceGeometry, wave: &Wave, link: &LinkGeometry, pose: &ReceiverPose) -> Result<f64> {
    model(geom, wave, link)?.received_power(pose)
}

pub fn received_power_lambertian(
    geom: &SourceGeometry,
    wave: &Wave,
    link: &LinkGeometry,
    pose: &ReceiverPose,
) -> Result<f64> {
    model(geom, wave, link)?.received_power_lambertian(pose)
}

pub fn snr_enhancement(geom: &SourceGeometry, wave: &Wave, link: &LinkGeometry, pose: &ReceiverPose) -> Result<Ratio> {
    model(geom, wave, link)?.snr_enhancement(pose)
}
