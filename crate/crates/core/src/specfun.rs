//! Zero-order Bessel functions of real, positive argument.
//!
//! The field of a single nanoslit is the zero-order Hankel function of the
//! second kind, `H0(x) = J0(x) - j Y0(x)`, so `J0` and `Y0` are the only
//! special functions the model needs.
//!
//! Two regimes are used:
//!
//! * `x <= SERIES_LIMIT`: the ascending power series, summed in double-double
//!   arithmetic. The alternating terms grow to ~1e7 before they decay, which
//!   would cost about seven digits in plain `f64`.
//! * `x > SERIES_LIMIT`: the Hankel asymptotic expansion, truncated at its
//!   smallest term (below 1e-19 relative for `x > 20`).

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Crossover between the ascending series and the asymptotic expansion.
pub const SERIES_LIMIT: f64 = 20.0;

/// Complex field value.
pub type ComplexValue = Complex64;

/// Bessel function of the first kind, order zero.
pub fn bessel_j0(x: f64) -> Result<f64> {
    if !x.is_finite() || x < 0.0 {
        return Err(Error::Domain { function: "bessel_j0", x });
    }
    if x <= SERIES_LIMIT {
        Ok(series::j0(x))
    } else {
        Ok(asymptotic::j0_y0(x).0)
    }
}

/// Bessel function of the second kind, order zero.
pub fn bessel_y0(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain { function: "bessel_y0", x });
    }
    if x <= SERIES_LIMIT {
        Ok(series::j0_y0(x).1)
    } else {
        Ok(asymptotic::j0_y0(x).1)
    }
}

/// `(J0(x), Y0(x))` in one pass.
pub fn bessel_j0_y0(x: f64) -> Result<(f64, f64)> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain { function: "bessel_j0_y0", x });
    }
    if x <= SERIES_LIMIT {
        Ok(series::j0_y0(x))
    } else {
        Ok(asymptotic::j0_y0(x))
    }
}

/// Hankel function of the second kind, order zero: `J0(x) - j Y0(x)`.
pub fn hankel0(x: f64) -> Result<ComplexValue> {
    let (j, y) = bessel_j0_y0(x).map_err(|_| Error::Domain { function: "hankel0", x })?;
    Ok(Complex64::new(j, -y))
}

/// `|H0(x)|^2 = J0(x)^2 + Y0(x)^2`.
pub fn hankel0_abs2(x: f64) -> Result<f64> {
    let (j, y) = bessel_j0_y0(x).map_err(|_| Error::Domain { function: "hankel0_abs2", x })?;
    Ok(j * j + y * y)
}

/// Direct access to each evaluation regime, for cross-checking at the crossover.
pub mod regimes {
    /// `(J0, Y0)` from the ascending series. Accurate for `0 < x <= ~25`.
    pub fn series(x: f64) -> (f64, f64) {
        super::series::j0_y0(x)
    }

    /// `(J0, Y0)` from the asymptotic expansion. Accurate for `x >= ~15`.
    pub fn asymptotic(x: f64) -> (f64, f64) {
        super::asymptotic::j0_y0(x)
    }
}

mod series {
    use super::dd::Dd;
    use super::{EULER_GAMMA, PI};

    /// Returns the partial sums `sum_k t_k` and `sum_{k>=1} -H_k t_k`,
    /// where `t_k = (-x^2/4)^k / (k!)^2` and `H_k` is the harmonic number.
    fn sums(x: f64, with_harmonic: bool) -> (Dd, Dd) {
        let q = Dd::two_prod(x, x).scale(0.25);
        let mut term = Dd::from(1.0);
        let mut j_sum = Dd::from(1.0);
        let mut y_sum = Dd::from(0.0);
        let mut harmonic = Dd::from(0.0);
        let mut k = 1u32;
        loop {
            let kf = f64::from(k);
            term = (term * q).div_f64(kf * kf).neg();
            j_sum = j_sum + term;
            if with_harmonic {
                harmonic = harmonic + Dd::from(1.0).div_f64(kf);
                y_sum = y_sum - term * harmonic;
            }
            // terms grow until k ~ x/2, then fall off factorially
            if kf > 0.5 * x && term.hi.abs() < 1e-24 {
                break;
            }
            k += 1;
        }
        (j_sum, y_sum)
    }

    pub fn j0(x: f64) -> f64 {
        sums(x, false).0.to_f64()
    }

    pub fn j0_y0(x: f64) -> (f64, f64) {
        let (j, s) = sums(x, true);
        let j0 = j.to_f64();
        let log_term = (0.5 * x).ln() + EULER_GAMMA;
        let y0 = (2.0 / PI) * (log_term * j0 + s.to_f64());
        (j0, y0)
    }
}

mod asymptotic {
    use super::{FRAC_1_SQRT_2, PI};

    /// Hankel expansion `J0 = A (P cos chi - Q sin chi)`,
    /// `Y0 = A (P sin chi + Q cos chi)` with `chi = x - pi/4`, `A = sqrt(2/(pi x))`.
    pub fn j0_y0(x: f64) -> (f64, f64) {
        let mut p = 1.0;
        let mut q = 0.0;
        let mut a = 1.0_f64;
        let mut k = 1u32;
        loop {
            let kf = f64::from(k);
            let next = a * (2.0 * kf - 1.0).powi(2) / (kf * 8.0 * x);
            // asymptotic: stop at the smallest term
            if next >= a || next < 1e-18 {
                break;
            }
            a = next;
            match k % 4 {
                0 => p += a,
                1 => q -= a,
                2 => p -= a,
                _ => q += a,
            }
            k += 1;
        }
        let (s, c) = x.sin_cos();
        let cos_chi = (c + s) * FRAC_1_SQRT_2;
        let sin_chi = (s - c) * FRAC_1_SQRT_2;
        let amp = (2.0 / (PI * x)).sqrt();
        (
            amp * (p * cos_chi - q * sin_chi),
            amp * (p * sin_chi + q * cos_chi),
        )
    }
}

/// Minimal double-double arithmetic for the ascending series.
mod dd {
    use std::ops::{Add, Mul, Sub};

    #[derive(Debug, Clone, Copy)]
    pub struct Dd {
        pub hi: f64,
        pub lo: f64,
    }

    impl From<f64> for Dd {
        fn from(hi: f64) -> Self {
            Dd { hi, lo: 0.0 }
        }
    }

    fn two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        let bb = s - a;
        (s, (a - (s - bb)) + (b - bb))
    }

    fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
        let s = a + b;
        (s, b - (s - a))
    }

    impl Dd {
        pub fn two_prod(a: f64, b: f64) -> Dd {
            let p = a * b;
            Dd { hi: p, lo: a.mul_add(b, -p) }
        }

        /// Exact for powers of two.
        pub fn scale(self, s: f64) -> Dd {
            Dd { hi: self.hi * s, lo: self.lo * s }
        }

        pub fn neg(self) -> Dd {
            Dd { hi: -self.hi, lo: -self.lo }
        }

        pub fn div_f64(self, b: f64) -> Dd {
            let q1 = self.hi / b;
            let r = self - Dd::two_prod(q1, b);
            let q2 = r.hi / b;
            let r = r - Dd::two_prod(q2, b);
            let q3 = r.hi / b;
            let (hi, lo) = quick_two_sum(q1, q2);
            Dd { hi, lo } + Dd::from(q3)
        }

        pub fn to_f64(self) -> f64 {
            self.hi + self.lo
        }
    }

    impl Add for Dd {
        type Output = Dd;
        fn add(self, o: Dd) -> Dd {
            let (s1, s2) = two_sum(self.hi, o.hi);
            let (t1, t2) = two_sum(self.lo, o.lo);
            let (s1, s2) = quick_two_sum(s1, s2 + t1);
            let (hi, lo) = quick_two_sum(s1, s2 + t2);
            Dd { hi, lo }
        }
    }

    impl Sub for Dd {
        type Output = Dd;
        #[allow(clippy::suspicious_arithmetic_impl)]
        fn sub(self, o: Dd) -> Dd {
            self + o.neg()
        }
    }

    impl Mul for Dd {
        type Output = Dd;
        fn mul(self, o: Dd) -> Dd {
            let p = Dd::two_prod(self.hi, o.hi);
            let lo = p.lo + (self.hi * o.lo + self.lo * o.hi);
            let (hi, lo) = quick_two_sum(p.hi, lo);
            Dd { hi, lo }
        }
    }
}
