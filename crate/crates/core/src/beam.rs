//! Transmitter model: a row of `2M+1` equispaced nanoslits on an opaque
//! screen in front of the LED, each radiating as an omnidirectional line
//! source with unit field at its rim.
//!
//! Far from the screen the slits add up to the Dirichlet kernel
//!
//! ```text
//! G(phi) = [sin((2M+1) u) / sin(u)]^2 / |H0(k0 a)|^2,   u = (k0 L / 2) cos(phi)
//! ```
//!
//! which peaks at broadside (`phi = pi/2`) with value `(2M+1)^2 / |H0(k0 a)|^2`.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quad::{self, Settings};
use crate::specfun::{hankel0, hankel0_abs2, ComplexValue};

/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;
/// Wave impedance of free space (ohm).
pub const ETA0: f64 = 376.730313668;

/// Lower edge of the visible band (Hz).
pub const VISIBLE_MIN_HZ: f64 = 400e12;
/// Upper edge of the visible band (Hz).
pub const VISIBLE_MAX_HZ: f64 = 800e12;

/// Distance from a multiple of pi below which the Dirichlet kernel and the
/// flux integrand switch to their Taylor expansions.
const REMOVABLE_EPS: f64 = 1e-8;

/// Time-harmonic excitation at a single frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    frequency: f64,
}

impl Wave {
    /// Any positive frequency in Hz.
    pub fn new(frequency: f64) -> Result<Self> {
        if !(frequency > 0.0) || !frequency.is_finite() {
            return Err(Error::InvalidParameter(format!("frequency must be positive, got {frequency}")));
        }
        Ok(Wave { frequency })
    }

    /// A frequency restricted to the visible band, 400..=800 THz.
    pub fn visible(frequency: f64) -> Result<Self> {
        let slack = 1e-9 * VISIBLE_MAX_HZ;
        if !(frequency >= VISIBLE_MIN_HZ - slack && frequency <= VISIBLE_MAX_HZ + slack) {
            return Err(Error::InvalidParameter(format!(
                "frequency {frequency} Hz is outside the visible band"
            )));
        }
        Wave::new(frequency)
    }

    pub fn from_wavelength(wavelength: f64) -> Result<Self> {
        if !(wavelength > 0.0) || !wavelength.is_finite() {
            return Err(Error::InvalidParameter(format!("wavelength must be positive, got {wavelength}")));
        }
        Wave::new(C0 / wavelength)
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn omega(&self) -> f64 {
        2.0 * PI * self.frequency
    }

    pub fn k0(&self) -> f64 {
        self.omega() / C0
    }

    pub fn wavelength(&self) -> f64 {
        C0 / self.frequency
    }
}

/// Slit array geometry. All lengths in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceGeometry {
    a: f64,
    d: f64,
    m: u32,
    pitch: f64,
}

impl SourceGeometry {
    /// Emitter half-length `d` fixed, pitch `L = d / M`.
    pub fn from_half_length(a: f64, d: f64, m: u32) -> Result<Self> {
        if m < 1 {
            return Err(Error::Geometry("slit count parameter M must be at least 1".into()));
        }
        Self::checked(a, d, m, d / f64::from(m))
    }

    /// Pitch `L` fixed, half-length `d = M L`.
    pub fn from_pitch(a: f64, pitch: f64, m: u32) -> Result<Self> {
        if m < 1 {
            return Err(Error::Geometry("slit count parameter M must be at least 1".into()));
        }
        Self::checked(a, f64::from(m) * pitch, m, pitch)
    }

    /// A lone slit (`M = 0`), whose pattern is omnidirectional. Only meaningful
    /// for radiation patterns; the link metrics need `M >= 1`.
    pub fn single_slit(a: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Geometry(format!("slit half-width must be positive, got {a}")));
        }
        Ok(SourceGeometry { a, d: 0.0, m: 0, pitch: 2.0 * a })
    }

    fn checked(a: f64, d: f64, m: u32, pitch: f64) -> Result<Self> {
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Geometry(format!("slit half-width must be positive, got {a}")));
        }
        if !(pitch > 0.0) || !pitch.is_finite() {
            return Err(Error::Geometry(format!("pitch must be positive, got {pitch}")));
        }
        if pitch < 2.0 * a * (1.0 - 1e-12) {
            return Err(Error::Geometry(format!(
                "pitch {pitch} m is below the slit width {} m: slits overlap",
                2.0 * a
            )));
        }
        let geom = SourceGeometry { a, d, m, pitch };
        if u64::from(m) > geom.capacity() {
            return Err(Error::Geometry(format!("M = {m} exceeds the slit capacity N = {}", geom.capacity())));
        }
        Ok(geom)
    }

    /// Slit half-width `a`.
    pub fn a(&self) -> f64 {
        self.a
    }

    /// Emitter half-length `d`.
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Slit count parameter `M`; the array has `2M+1` slits.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// Slit pitch `L`.
    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn slits(&self) -> u64 {
        2 * u64::from(self.m) + 1
    }

    /// `N = ceil((d - a) / 2a)`: how many slits fit with zero gap.
    pub fn capacity(&self) -> u64 {
        let n = ((self.d - self.a) / (2.0 * self.a) * (1.0 - 1e-12)).ceil();
        if n > 0.0 {
            n as u64
        } else {
            0
        }
    }

    fn slit_positions(&self) -> impl Iterator<Item = f64> + '_ {
        let m = i64::from(self.m);
        (-m..=m).map(move |i| i as f64 * self.pitch)
    }
}

/// `sin((2M+1) u) / sin(u)`, with the removable singularities at `u = w pi`
/// replaced by their second-order expansion `(2M+1) (1 - ((2M+1)^2 - 1) e^2 / 6)`.
pub fn array_factor(m: u32, u: f64) -> f64 {
    let n = 2.0 * f64::from(m) + 1.0;
    let w = (u / PI).round();
    let eps = u - w * PI;
    if eps.abs() < REMOVABLE_EPS {
        // (2M+1) is odd so the sign flips of numerator and denominator cancel
        n * (1.0 - (n * n - 1.0) * eps * eps / 6.0)
    } else {
        (n * u).sin() / u.sin()
    }
}

/// An angular intensity profile in the upper half-plane.
pub trait RadiationPattern: Sync {
    /// Intensity at azimuth `phi` (radians, `0..=pi`).
    fn intensity(&self, phi: f64) -> f64;

    /// Angular width of one oscillation lobe, if the pattern oscillates.
    fn lobe_width(&self) -> Option<f64> {
        None
    }
}

/// The metasurface pattern `G(phi)` with its normalisation cached.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetasurfacePattern {
    m: u32,
    half_k0l: f64,
    inv_h0_abs2: f64,
}

impl MetasurfacePattern {
    pub fn new(geom: &SourceGeometry, wave: &Wave) -> Result<Self> {
        let k0 = wave.k0();
        Self::from_electrical(geom.m(), k0 * geom.pitch(), k0 * geom.a())
    }

    /// Built directly from the electrical sizes `k0 L` and `k0 a`.
    pub fn from_electrical(m: u32, k0l: f64, k0a: f64) -> Result<Self> {
        if !(k0l > 0.0) || !k0l.is_finite() {
            return Err(Error::InvalidParameter(format!("k0 L must be positive, got {k0l}")));
        }
        Ok(MetasurfacePattern {
            m,
            half_k0l: 0.5 * k0l,
            inv_h0_abs2: 1.0 / hankel0_abs2(k0a)?,
        })
    }

    /// `G(phi) |H0(k0 a)|^2`, the normalisation-free array factor power.
    pub fn scaled(&self, phi: f64) -> f64 {
        array_factor(self.m, self.half_k0l * phi.cos()).powi(2)
    }

    /// `1 / |H0(k0 a)|^2`.
    pub fn normalisation(&self) -> f64 {
        self.inv_h0_abs2
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn k0l(&self) -> f64 {
        2.0 * self.half_k0l
    }
}

impl RadiationPattern for MetasurfacePattern {
    fn intensity(&self, phi: f64) -> f64 {
        self.scaled(phi) * self.inv_h0_abs2
    }

    /// `lambda / ((2M+1) L)` in direction cosine, which bounds the lobe width in angle.
    fn lobe_width(&self) -> Option<f64> {
        let n = 2.0 * f64::from(self.m) + 1.0;
        Some(PI / (n * self.half_k0l))
    }
}

/// Bare-LED Lambertian emission with total flux `g_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambertianPattern {
    pub gmax: f64,
}

impl RadiationPattern for LambertianPattern {
    fn intensity(&self, phi: f64) -> f64 {
        lambertian_pattern(self.gmax, phi)
    }
}

/// `G(phi)`, dimensionless intensity.
pub fn radiation_pattern(geom: &SourceGeometry, wave: &Wave, phi: f64) -> Result<f64> {
    Ok(MetasurfacePattern::new(geom, wave)?.intensity(phi))
}

/// Exact field of the slit array: `sum_m H0(k0 |r - r_m|) / H0(k0 a)`.
pub fn near_field(geom: &SourceGeometry, wave: &Wave, x: f64, y: f64) -> Result<ComplexValue> {
    if !(y > 0.0) || !x.is_finite() || !y.is_finite() {
        return Err(Error::Domain { function: "near_field", x: y });
    }
    let k0 = wave.k0();
    let norm = hankel0(k0 * geom.a())?;
    let mut sum = Complex64::new(0.0, 0.0);
    for xm in geom.slit_positions() {
        sum += hankel0(k0 * (x - xm).hypot(y))?;
    }
    Ok(sum / norm)
}

/// Far-zone field in polar coordinates about the array centre.
pub fn far_field(geom: &SourceGeometry, wave: &Wave, r: f64, phi: f64) -> Result<ComplexValue> {
    let k0 = wave.k0();
    let k0r = k0 * r;
    if !(k0r > 100.0) {
        return Err(Error::FarZone { k0r });
    }
    let radial = (2.0 / (PI * k0r)).sqrt() * Complex64::from_polar(1.0, FRAC_PI_4 - k0r);
    let af = array_factor(geom.m(), 0.5 * k0 * geom.pitch() * phi.cos());
    Ok(radial * af / hankel0(k0 * geom.a())?)
}

fn floor_tolerant(x: f64) -> f64 {
    (x + x.abs() * 1e-12).floor()
}

/// Number of pattern maxima, `floor(2 floor((2M+1) L / lambda) 2M / (2M+1))`.
pub fn lobe_count(geom: &SourceGeometry, wave: &Wave) -> u64 {
    let n = geom.slits();
    let inner = floor_tolerant(n as f64 * geom.pitch() / wave.wavelength()).max(0.0) as u64;
    // 2 K (2M / (2M+1)) evaluated exactly in integers
    (4 * inner * u64::from(geom.m())) / n
}

/// The large-array approximation `floor(4 d / lambda)`.
pub fn lobe_count_simplified(geom: &SourceGeometry, wave: &Wave) -> u64 {
    floor_tolerant(4.0 * geom.d() / wave.wavelength()).max(0.0) as u64
}

/// Null-to-null width of the main lobe, `2 asin(2 pi / (k0 L (2M+1)))`.
pub fn beamwidth(geom: &SourceGeometry, wave: &Wave) -> Result<f64> {
    let argument = 2.0 * PI / (wave.k0() * geom.pitch() * geom.slits() as f64);
    if argument > 1.0 + 1e-12 {
        return Err(Error::BeamFillsHalfSpace { argument });
    }
    Ok(2.0 * argument.min(1.0).asin())
}

/// Smallest `M` whose main lobe stays within a receiver at distance `h`:
/// `2M+1 > (2 pi / (k0 L)) (h / d)`.
pub fn min_slits(wave: &Wave, pitch: f64, h: f64, d: f64) -> Result<u64> {
    if !(pitch > 0.0 && h > 0.0 && d > 0.0) {
        return Err(Error::InvalidParameter("min_slits needs positive lengths".into()));
    }
    let bound = 2.0 * PI / (wave.k0() * pitch) * (h / d);
    let m = ((bound - 1.0) / 2.0).floor() + 1.0;
    Ok(m.max(1.0) as u64)
}

/// The flux integrand `sin^2(k0 d cos phi) / sin^2(k0 a cos phi)`.
pub fn gmax_integrand(k0a: f64, k0d: f64, phi: f64) -> f64 {
    let c = phi.cos();
    let (num, den) = (k0d * c, k0a * c);
    if den.abs() < REMOVABLE_EPS {
        let ratio = k0d / k0a;
        ratio * ratio * (1.0 - (num * num - den * den) / 3.0)
    } else {
        (num.sin() / den.sin()).powi(2)
    }
}

/// Total flux of the fully perforated aperture, used as the bare-LED reference.
pub fn g_max(geom: &SourceGeometry, wave: &Wave) -> Result<f64> {
    g_max_with(geom, wave, &Settings::default())
}

pub fn g_max_with(geom: &SourceGeometry, wave: &Wave, settings: &Settings) -> Result<f64> {
    let k0 = wave.k0();
    let (k0a, k0d) = (k0 * geom.a(), k0 * geom.d());
    if k0a >= PI {
        return Err(Error::UnsupportedRegime { k0a });
    }
    let half = 0.5 * PI;
    let lobe = PI / k0d.max(k0a);
    let spec = settings.spec_for(Some(lobe), 0.0, half);
    let est = quad::integrate(|phi| gmax_integrand(k0a, k0d, phi), 0.0, half, &spec)?;
    Ok(2.0 * est.value / hankel0_abs2(k0a)?)
}

/// `G0(phi) = (g_max / 2) sin(phi)`.
pub fn lambertian_pattern(gmax: f64, phi: f64) -> f64 {
    0.5 * gmax * phi.sin()
}
