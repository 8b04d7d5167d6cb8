//! The ten acceptance criteria. Each test prints one PASS/FAIL line
//! (`cargo test --test acceptance -- --nocapture` shows them) and then asserts.

mod common;

use std::f64::consts::{FRAC_PI_2, PI};
use std::time::{Duration, Instant};

use common::{bessel_table, count_maxima, field_flux, golden_max, rng, slit_sum_intensity, verdict};
use metaslit::beam::{lobe_count, MetasurfacePattern, SourceGeometry, Wave};
use metaslit::link::{segment_flux, sir0, sir_for_pattern};
use metaslit::quad::Settings;
use metaslit::specfun::{bessel_j0, bessel_y0, hankel0_abs2};
use metaslit::sweep::{preset, run_sweep, Axis, AxisParam, Preset, SweepResult};
use metaslit::{LambertianPattern, LinkGeometry, ReceiverPose, RadiationPattern};
use rand::Rng;

fn within(start: Instant, limit: Duration) -> (bool, String) {
    let t = start.elapsed();
    (t <= limit, format!("{:.2?} of {:?}", t, limit))
}

#[test]
fn criterion_01_peak_identity() {
    let start = Instant::now();
    let mut r = rng(1);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let m: u32 = r.gen_range(1..=5000);
        let k0l = 2.0 * PI * (1.0 - r.gen::<f64>());
        let a = r.gen_range(10e-9..=50e-9);
        let k0a = Wave::new(600e12).unwrap().k0() * a;
        let p = MetasurfacePattern::from_electrical(m, k0l, k0a).unwrap();
        let scaled = p.intensity(FRAC_PI_2) * hankel0_abs2(k0a).unwrap();
        let n2 = (2.0 * f64::from(m) + 1.0).powi(2);
        worst = worst.max((scaled / n2 - 1.0).abs());
    }
    let (fast, time) = within(start, Duration::from_secs(1));
    let pass = worst < 1e-9 && fast;
    assert!(verdict(1, "peak identity", pass, &format!("max rel err {worst:.1e}, {time}")));
}

#[test]
fn criterion_02_sidelobe_law() {
    let start = Instant::now();
    let k0l = 0.1 * PI;
    let mut worst = 0.0f64;
    let mut ratio_1000 = 0.0;
    for m in [10u32, 100, 1000] {
        let p = MetasurfacePattern::from_electrical(m, k0l, 0.1).unwrap();
        let n = 2.0 * f64::from(m) + 1.0;
        // second lobe lies between the first two nulls, N u in (pi, 2 pi)
        let lo = (2.0 * PI / (0.5 * k0l * n)).acos();
        let hi = (PI / (0.5 * k0l * n)).acos();
        let phi = golden_max(|x| p.scaled(x), lo, hi);
        let peak = p.scaled(phi);
        let law = (3.0 * PI / (2.0 * n)).sin().powi(-2);
        worst = worst.max((peak / law - 1.0).abs());
        if m == 1000 {
            ratio_1000 = p.scaled(FRAC_PI_2) / peak;
        }
    }
    let limit = 9.0 * PI * PI / 4.0;
    let ratio_err = (ratio_1000 / limit - 1.0).abs();
    let (fast, time) = within(start, Duration::from_secs(5));
    let pass = worst < 0.005 && ratio_err < 0.02 && fast;
    let detail = format!(
        "peak vs csc^2 law max dev {:.2}% (limit 0.5%), main/second at M=1000 {ratio_1000:.3} vs 9pi^2/4 = {limit:.3} ({:.2}%, limit 2%), {time}",
        100.0 * worst,
        100.0 * ratio_err
    );
    assert!(verdict(2, "sidelobe law", pass, &detail));
}

#[test]
fn criterion_03_field_oracles() {
    let start = Instant::now();
    let mut r = rng(3);
    let mut worst_pattern = 0.0f64;
    for _ in 0..1000 {
        let m: u32 = r.gen_range(1..=50);
        let k0l = r.gen_range(0.05..2.0 * PI);
        let phi = r.gen_range(0.0..PI);
        let p = MetasurfacePattern::from_electrical(m, k0l, 0.3).unwrap();
        let closed = p.scaled(phi);
        let brute = slit_sum_intensity(m, k0l, phi);
        worst_pattern = worst_pattern.max((closed - brute).abs() / closed.max(brute));
    }

    let wave = Wave::new(600e12).unwrap();
    let geom = SourceGeometry::from_pitch(25e-9, 250e-9, 5).unwrap();
    let h = 1e3 * geom.d();
    let pattern = MetasurfacePattern::new(&geom, &wave).unwrap();
    let tight = Settings { rel_tol: 1e-10, ..Settings::default() };
    let mut worst_flux = 0.0f64;
    for (b, l, beta) in [(0.5 * h, 0.0, 0.0), (0.2 * h, 0.3 * h, 0.4), (0.3 * h, -0.5 * h, -0.7)] {
        let link = LinkGeometry::new(h, b, f64::INFINITY).unwrap();
        let pose = ReceiverPose::new(l, beta).unwrap();
        let from_g = segment_flux(&pattern, wave.k0(), 0.0, &pose, &link, &tight).unwrap();
        let from_field = field_flux(&geom, &wave, 0.0, &pose, &link);
        worst_flux = worst_flux.max((from_field / from_g - 1.0).abs());
    }
    let (fast, time) = within(start, Duration::from_secs(10));
    let pass = worst_pattern < 1e-10 && worst_flux < 0.01 && fast;
    let detail = format!("pattern vs slit sum max rel {worst_pattern:.1e}, field flux vs G flux max rel {worst_flux:.1e}, {time}");
    assert!(verdict(3, "oracle equivalence (fields)", pass, &detail));
}

#[test]
fn criterion_04_lobe_count() {
    let start = Instant::now();
    let mut r = rng(4);
    let wave = Wave::new(600e12).unwrap();
    let lambda = wave.wavelength();
    // worst |counted - V| for k0L <= pi and for k0L > pi
    let mut worst = [0i64; 2];
    let mut cases = 0;
    while cases < 20 {
        let k0l = r.gen_range(0.1 * PI..2.0 * PI);
        let pitch = k0l / wave.k0();
        let m: u32 = r.gen_range(1..=400);
        if f64::from(m) * pitch / lambda > 50.0 {
            continue;
        }
        let geom = SourceGeometry::from_pitch(10e-9, pitch, m).unwrap();
        let p = MetasurfacePattern::new(&geom, &wave).unwrap();
        let counted = count_maxima(|phi| p.scaled(phi), 400_000) as i64;
        let eq = lobe_count(&geom, &wave) as i64;
        let regime = usize::from(k0l > PI);
        worst[regime] = worst[regime].max((counted - eq).abs());
        cases += 1;
    }
    let (fast, time) = within(start, Duration::from_secs(10));
    let pass = worst[0].max(worst[1]) <= 2 && fast;
    let detail = format!("max |counted - V| over 20 cases: {} for k0L <= pi, {} for k0L > pi, {time}", worst[0], worst[1]);
    assert!(verdict(4, "lobe count", pass, &detail));
}

#[test]
fn criterion_05_sir0_consistency() {
    let start = Instant::now();
    let mut r = rng(5);
    let tight = Settings { rel_tol: 1e-12, ..Settings::default() };
    let bare = LambertianPattern { gmax: 1.0 };
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let h = r.gen_range(0.1..3.0);
        let b = r.gen_range(1e-4..5e-3);
        let big_d = b + r.gen_range(1e-4..0.05);
        let link = LinkGeometry::new(h, b, big_d).unwrap();
        let numeric = sir_for_pattern(&bare, &link, &tight).unwrap().value();
        worst = worst.max((numeric / sir0(&link).unwrap() - 1.0).abs());
    }
    let desk = sir0(&LinkGeometry::new(1.0, 2.5e-3, 5e-3).unwrap()).unwrap();
    let (fast, time) = within(start, Duration::from_secs(5));
    let pass = worst < 1e-8 && (desk - 1.0001).abs() <= 1e-4 && fast;
    let detail = format!("closed vs numeric max rel {worst:.1e}, desk case {desk:.6}, {time}");
    assert!(verdict(5, "SIR0 consistency", pass, &detail));
}

fn column(r: &SweepResult, name: &str) -> Vec<f64> {
    r.series(name).unwrap().into_iter().map(|v| v.unwrap_or(f64::NAN)).collect()
}

#[test]
fn criterion_06_fig3b() {
    let start = Instant::now();
    let mut spec = preset(Preset::Fig3);
    spec.axis[1] = Axis::list(AxisParam::M, vec![300.0, 1000.0, 3000.0]);
    let r = run_sweep(&spec).unwrap();
    let enh = column(&r, "SIR_enh");
    let min = enh.iter().copied().fold(f64::INFINITY, f64::min);
    let (fast, time) = within(start, Duration::from_secs(120));
    let pass = enh.len() == 9 && min >= 5e2 && fast;
    assert!(verdict(6, "fig3 SIR enhancement", pass, &format!("min SIR/SIR0 {min:.4e} over 3 f x 3 M, {time}")));
}

#[test]
fn criterion_07_fig4() {
    let start = Instant::now();
    let spec = preset(Preset::Fig4);
    let r = run_sweep(&spec).unwrap();
    let nf = spec.axis[1].len();
    let nb = spec.axis[0].len();
    assert_eq!(nf, 33);
    let enh = column(&r, "SIR_enh");
    let p = column(&r, "P_W_per_m");
    let by_b = |v: &[f64], ib: usize| v[ib * nf..(ib + 1) * nf].to_vec();
    let max_small = by_b(&enh, 0).into_iter().fold(0.0, f64::max);
    let means: Vec<f64> = (0..nb).map(|ib| by_b(&enh, ib).iter().sum::<f64>() / nf as f64).collect();
    let monotone = means.windows(2).all(|w| w[1] <= w[0]);
    let (small, large) = (by_b(&p, 0), by_b(&p, nb - 1));
    let gain = large.iter().zip(&small).map(|(l, s)| l / s).sum::<f64>() / nf as f64;
    let (fast, time) = within(start, Duration::from_secs(600));
    let pass = max_small >= 1e4 && monotone && gain <= 1.25 && fast;
    let detail = format!(
        "(a) max SIR/SIR0 at b=d/35 {max_small:.3e}; (b) mean SIR/SIR0 by b {:?}; (c) mean P(d)/P(d/35) {gain:.4}; {time}",
        means.iter().map(|m| format!("{m:.3e}")).collect::<Vec<_>>()
    );
    assert!(verdict(7, "fig4 aperture sweep", pass, &detail));
}

#[test]
fn criterion_08_fig5() {
    let start = Instant::now();
    let small_spec = preset(Preset::Fig5Small);
    let small = run_sweep(&small_spec).unwrap();
    let large = run_sweep(&preset(Preset::Fig5Large)).unwrap();
    let betas = small_spec.axis[0].grid();
    let ls = small_spec.axis[1].grid();
    let nl = ls.len();
    let idx = |ib: usize, il: usize| ib * nl + il;
    let find = |grid: &[f64], v: f64| grid.iter().position(|g| (g - v).abs() < 1e-9).unwrap();
    let (b0, l0) = (find(&betas, 0.0), find(&ls, 0.0));

    let mut notes = Vec::new();
    let mut pass = true;
    for (name, r) in [("b=0.2d", &small), ("b=0.8d", &large)] {
        let p = column(r, "P_over_Pmax");
        let best = (0..p.len()).max_by(|&i, &j| p[i].total_cmp(&p[j])).unwrap();
        let at_origin = best == idx(b0, l0);
        let peak = p[idx(b0, l0)];
        let tilted = [-60.0, 60.0].map(|b| p[idx(find(&betas, b), l0)] / peak);
        let tilt_ok = tilted.iter().all(|&t| t >= 0.35);
        pass &= at_origin && tilt_ok;
        notes.push(format!("{name}: argmax at (0,0) {at_origin}, P(+-60deg)/P(0,0) {:.3}/{:.3}", tilted[0], tilted[1]));
    }

    // asymmetry: SIR/SIR0 falls faster towards the interferer (l > 0)
    let enh = column(&small, "SIR_enh");
    let mut asym_ok = true;
    for (il, &l) in ls.iter().enumerate().filter(|(_, &l)| l > 1e-9 && l <= 0.5 + 1e-9) {
        let im = find(&ls, -l);
        let mean: f64 = (0..betas.len()).map(|ib| enh[idx(ib, il)] - enh[idx(ib, im)]).sum::<f64>() / betas.len() as f64;
        asym_ok &= mean < 0.0;
    }
    pass &= asym_ok;
    notes.push(format!("b=0.2d asymmetry mean[SIR_enh(+l) - SIR_enh(-l)] < 0 for l/d in (0, 0.5]: {asym_ok}"));

    // footprint: outside b cos(beta) + h tan(theta) the power is below 1% of the peak
    let fixed = &small_spec.fixed;
    let geom = SourceGeometry::from_half_length(fixed.a_nm * 1e-9, fixed.d_mm * 1e-3, fixed.m).unwrap();
    let wave = Wave::new(fixed.f_thz * 1e12).unwrap();
    let theta = 0.5 * metaslit::beam::beamwidth(&geom, &wave).unwrap();
    let allowance = fixed.h_mm * theta.tan() / fixed.d_mm;
    let p = column(&large, "P_over_Pmax");
    let peak = p[idx(b0, l0)];
    let (mut violations, mut worst) = (0, 0.0f64);
    for (ib, beta) in betas.iter().enumerate() {
        for (il, l) in ls.iter().enumerate() {
            if l.abs() > 0.8 * beta.to_radians().cos() + allowance {
                let rel = p[idx(ib, il)] / peak;
                worst = worst.max(rel);
                violations += usize::from(rel >= 0.01);
            }
        }
    }
    pass &= violations == 0;
    notes.push(format!("b=0.8d beyond footprint: {violations} points at or above 1% of peak (worst {:.2}%)", 100.0 * worst));

    let (fast, time) = within(start, Duration::from_secs(600));
    pass &= fast;
    notes.push(time);
    assert!(verdict(8, "fig5 misalignment map", pass, &notes.join("; ")));
}

#[test]
fn criterion_09_special_functions() {
    let start = Instant::now();
    let table = bessel_table();
    assert_eq!(table.len(), 1000);
    let mut worst = 0.0f64;
    let mut worst_wronskian = 0.0f64;
    for &(x, j, y) in &table {
        assert!(x > 1e-6 && x <= 50.0);
        worst = worst.max((bessel_j0(x).unwrap() - j).abs()).max((bessel_y0(x).unwrap() - y).abs());
        // W[J0, Y0] = 2 / (pi x); five-point derivatives with a step relative to x
        let step = 1e-3 * x.min(1.0);
        let d = |f: &dyn Fn(f64) -> f64| {
            (f(x - 2.0 * step) - 8.0 * f(x - step) + 8.0 * f(x + step) - f(x + 2.0 * step)) / (12.0 * step)
        };
        let dj = d(&|t| bessel_j0(t).unwrap());
        let dy = d(&|t| bessel_y0(t).unwrap());
        let w = bessel_j0(x).unwrap() * dy - dj * bessel_y0(x).unwrap();
        worst_wronskian = worst_wronskian.max((w * PI * x / 2.0 - 1.0).abs());
    }
    let (fast, time) = within(start, Duration::from_secs(1));
    let pass = worst < 1e-12 && worst_wronskian < 1e-10 && fast;
    let detail = format!("max abs err {worst:.1e} over 1000 points, Wronskian max rel residual {worst_wronskian:.1e}, {time}");
    assert!(verdict(9, "special functions", pass, &detail));
}

#[test]
fn criterion_10_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let mut identical = true;
    let mut sizes = Vec::new();
    for p in Preset::ALL {
        let command = match p {
            Preset::Fig2a | Preset::Fig2b => "pattern",
            Preset::Fig3 | Preset::Fig4 => "link",
            Preset::Fig5Small | Preset::Fig5Large => "map",
        };
        let mut outputs = Vec::new();
        for run in 0..2 {
            let path = dir.path().join(format!("{}-{run}.csv", p.name()));
            let args = ["metaslit", command, "--preset", p.name(), "--out", path.to_str().unwrap()];
            let code = metaslit::cli::run(args, &mut std::io::sink(), &mut std::io::stderr());
            assert_eq!(code, 0, "{} exited with {code}", p.name());
            outputs.push(std::fs::read(&path).unwrap());
        }
        identical &= outputs[0] == outputs[1];
        sizes.push(format!("{} {} B", p.name(), outputs[0].len()));
    }
    assert!(verdict(10, "determinism", identical, &sizes.join(", ")));
}
