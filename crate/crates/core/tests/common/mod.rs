//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use std::f64::consts::PI;
use std::io::Write;

use metaslit::beam::{near_field, SourceGeometry, Wave, ETA0};
use metaslit::quad::{integrate, QuadSpec};
use metaslit::{LinkGeometry, ReceiverPose};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Prints the one-line verdict and returns it.
///
/// Goes to the raw stderr handle so the line survives output capture.
pub fn verdict(id: u32, title: &str, pass: bool, detail: &str) -> bool {
    let line = format!("criterion {id:>2} {title}: {} ({detail})\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    pass
}

/// `|sum_n exp(j k0 L n cos phi)|^2` over the `2M+1` slits, summed term by term.
pub fn slit_sum_intensity(m: u32, k0l: f64, phi: f64) -> f64 {
    let m = i64::from(m);
    let c = phi.cos();
    let sum: Complex64 = (-m..=m).map(|n| Complex64::from_polar(1.0, k0l * n as f64 * c)).sum();
    sum.norm_sqr()
}

/// Position of the maximum of a unimodal `f` on `[lo, hi]`.
pub fn golden_max(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..200 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) > f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    0.5 * (a + b)
}

/// Time-averaged Poynting vector of the summed slit field, from
/// `S = Im(E grad E*) / (2 k0 eta0)` with central differences.
pub fn field_poynting(geom: &SourceGeometry, wave: &Wave, x: f64, y: f64) -> [f64; 2] {
    let k0 = wave.k0();
    let h = 1e-3 * wave.wavelength();
    let e = |x, y| near_field(geom, wave, x, y).unwrap();
    let e0 = e(x, y);
    let dx = (e(x + h, y) - e(x - h, y)) / (2.0 * h);
    let dy = (e(x, y + h) - e(x, y - h)) / (2.0 * h);
    let s = |d: Complex64| (e0 * d.conj()).im / (2.0 * k0 * ETA0);
    [s(dx), s(dy)]
}

/// Flux of the summed slit field (emitter centred at `source_x`) through the posed aperture.
pub fn field_flux(geom: &SourceGeometry, wave: &Wave, source_x: f64, pose: &ReceiverPose, link: &LinkGeometry) -> f64 {
    let (sb, cb) = pose.tilt().sin_cos();
    let normal = [sb, cb];
    let f = |s: f64| {
        let (x, y) = (-pose.offset() + s * cb, link.h() - s * sb);
        let p = field_poynting(geom, wave, x - source_x, y);
        p[0] * normal[0] + p[1] * normal[1]
    };
    let spec = QuadSpec { rel_tol: 1e-6, ..QuadSpec::default() }.with_panels(400);
    integrate(f, -link.b(), link.b(), &spec).unwrap().value
}

/// `J0`, `Y0` reference values computed at 40 significant digits.
pub fn bessel_table() -> Vec<(f64, f64, f64)> {
    include_str!("../data/bessel_j0_y0.csv")
        .lines()
        .skip(1)
        .map(|line| {
            let v: Vec<f64> = line.split(',').map(|t| t.parse().unwrap()).collect();
            (v[0], v[1], v[2])
        })
        .collect()
}

/// Local maxima of `f` on an even grid over `(0, pi)`.
pub fn count_maxima(f: impl Fn(f64) -> f64, samples: usize) -> usize {
    let g: Vec<f64> = (1..samples).map(|i| f(PI * i as f64 / samples as f64)).collect();
    g.windows(3).filter(|w| w[1] > w[0] && w[1] >= w[2]).count()
}
