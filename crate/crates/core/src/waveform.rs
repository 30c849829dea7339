//! Zadoff-Chu sounding sequences.
//!
//! A root-`u` sequence of length `N` is `x[n] = exp(-j*pi*u*n*(n+c)/N)`
//! for `0 <= n < N`, valid when `0 < u < N` and `gcd(N, u) = 1`, where
//! `c = N mod 2`. Odd lengths use `n*(n+1)`; even lengths such as 2048 need
//! `n*n`, since `n*(n+1)` is not N-periodic there and loses the zero
//! autocorrelation property. Every
//! cyclic shift of one base sequence is orthogonal to every other shift
//! under periodic correlation, which is what lets two transmit chains share
//! one capture window.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::{fft, Complex, Error, Result};

/// Default root index.
pub const DEFAULT_ROOT: usize = 1;
/// Sequence length used by the sounder.
pub const DEFAULT_LENGTH: usize = 2048;
/// Sample (symbol) period in nanoseconds.
pub const DEFAULT_SYMBOL_PERIOD_NS: f64 = 1.0;

/// A unit-modulus Zadoff-Chu sequence, possibly cyclically shifted.
#[derive(Debug, Clone, PartialEq)]
pub struct ZcSequence {
    root: usize,
    length: usize,
    shift: usize,
    symbol_period_ns: f64,
    samples: Vec<Complex>,
}

impl ZcSequence {
    pub fn root(&self) -> usize {
        self.root
    }

    pub fn length(&self) -> usize {
        self.length
    }

    pub fn shift(&self) -> usize {
        self.shift
    }

    pub fn symbol_period_ns(&self) -> f64 {
        self.symbol_period_ns
    }

    pub fn samples(&self) -> &[Complex] {
        &self.samples
    }

    /// Duration of one full period in nanoseconds.
    pub fn period_ns(&self) -> f64 {
        self.length as f64 * self.symbol_period_ns
    }

    pub fn with_symbol_period(mut self, ns: f64) -> Result<Self> {
        if !(ns > 0.0 && ns.is_finite()) {
            return Err(Error::NonPositive {
                quantity: "symbol period",
                value: ns,
            });
        }
        self.symbol_period_ns = ns;
        Ok(self)
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Generate the root-`root` sequence of the given length with a 1 ns symbol
/// period and zero shift.
pub fn generate_zc(root: usize, length: usize) -> Result<ZcSequence> {
    if length < 2 {
        return Err(Error::InvalidLength(length));
    }
    if root == 0 || root >= length || gcd(length, root) != 1 {
        return Err(Error::InvalidRoot { root, length });
    }
    let two_n = 2 * length as u128;
    let c = (length % 2) as u128;
    let samples = (0..length)
        .map(|n| {
            // reduce u*n*(n+c) modulo 2N so the phase is exact for large n
            let m = (root as u128 * n as u128 * (n as u128 + c)) % two_n;
            let phase = -core::f64::consts::PI * m as f64 / length as f64;
            let (s, c) = libm::sincos(phase);
            Complex::new(c, s)
        })
        .collect();
    Ok(ZcSequence {
        root,
        length,
        shift: 0,
        symbol_period_ns: DEFAULT_SYMBOL_PERIOD_NS,
        samples,
    })
}

/// `out[n] = seq[(n + offset) mod N]`; the shift field accumulates modulo N.
pub fn cyclic_shift(seq: &ZcSequence, offset: usize) -> Result<ZcSequence> {
    let n = seq.length;
    if offset >= n {
        return Err(Error::ShiftOutOfRange { offset, length: n });
    }
    let mut samples = seq.samples.clone();
    samples.rotate_left(offset);
    Ok(ZcSequence {
        shift: (seq.shift + offset) % n,
        samples,
        ..seq.clone()
    })
}

/// Periodic cross-correlation `profile[k] = sum_n a[n] * conj(b[(n + k) mod N])`,
/// computed in the transform domain.
pub fn periodic_xcorr(a: &[Complex], b: &[Complex]) -> Result<Vec<Complex>> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Ok(Vec::new());
    }
    // sum_n a[n] conj(b[n+k]) = conj( sum_n b[n+k] conj(a[n]) ) and the
    // inner sum is the circular correlation IDFT(B * conj(A)).
    let mut fa = a.to_vec();
    let mut fb = b.to_vec();
    fft::forward(&mut fa);
    fft::forward(&mut fb);
    let mut prod: Vec<Complex> = fb.iter().zip(&fa).map(|(x, y)| x * y.conj()).collect();
    fft::inverse(&mut prod);
    Ok(prod.into_iter().map(|c| c.conj()).collect())
}

/// Outcome of a constant-amplitude / zero-autocorrelation check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CazacReport {
    /// max |(|x[n]| - 1)|
    pub max_modulus_deviation: f64,
    /// max over k != 0 of |R[k]| / N
    pub max_offpeak_autocorr: f64,
    pub tolerance: f64,
    pub amplitude_ok: bool,
    pub autocorrelation_ok: bool,
}

impl CazacReport {
    pub fn passed(&self) -> bool {
        self.amplitude_ok && self.autocorrelation_ok
    }
}

pub fn validate_cazac(seq: &ZcSequence, tolerance: f64) -> CazacReport {
    cazac_report(seq.samples(), tolerance)
}

/// CAZAC check on an arbitrary sample vector.
pub fn cazac_report(samples: &[Complex], tolerance: f64) -> CazacReport {
    let n = samples.len();
    let max_modulus_deviation = samples
        .iter()
        .map(|x| (x.norm() - 1.0).abs())
        .fold(0.0, f64::max);
    let max_offpeak_autocorr = if n < 2 {
        0.0
    } else {
        let r = periodic_xcorr(samples, samples).unwrap_or_default();
        r.iter().skip(1).map(|c| c.norm()).fold(0.0, f64::max) / n as f64
    };
    CazacReport {
        max_modulus_deviation,
        max_offpeak_autocorr,
        tolerance,
        amplitude_ok: max_modulus_deviation <= tolerance,
        autocorrelation_ok: max_offpeak_autocorr <= tolerance,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Direct O(N^2) periodic correlation, the oracle for the transform path.
    fn xcorr_direct(a: &[Complex], b: &[Complex]) -> Vec<Complex> {
        let n = a.len();
        (0..n)
            .map(|k| (0..n).map(|i| a[i] * b[(i + k) % n].conj()).sum())
            .collect()
    }

    fn max_rel_err(x: &[Complex], y: &[Complex]) -> f64 {
        let scale = y.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-300);
        x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale
    }

    #[test]
    fn length_3_root_1_by_hand() {
        // n=0: 0, n=1: -pi*2/3, n=2: -pi*6/3 = -2pi
        let z = generate_zc(1, 3).unwrap();
        let want = [
            Complex::new(1.0, 0.0),
            Complex::from_polar(1.0, -2.0 * core::f64::consts::PI / 3.0),
            Complex::new(1.0, 0.0),
        ];
        for (a, b) in z.samples().iter().zip(&want) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn odd_form_breaks_at_even_length() {
        // n*(n+1) at N = 2048 flips sign every period, so the periodic
        // autocorrelation is not ideal; the generator must not use it there.
        let n = 64usize;
        let odd_form: Vec<Complex> = (0..n)
            .map(|k| Complex::from_polar(1.0, -core::f64::consts::PI * (k * (k + 1)) as f64 / n as f64))
            .collect();
        let r = xcorr_direct(&odd_form, &odd_form);
        assert!(r[1..].iter().any(|c| c.norm() > 1.0));
        let z = generate_zc(1, n).unwrap();
        let r = xcorr_direct(z.samples(), z.samples());
        assert!(r[1..].iter().all(|c| c.norm() < 1e-9 * n as f64));
    }

    #[test]
    fn default_length_and_first_sample() {
        let z = generate_zc(1, 2048).unwrap();
        assert_eq!(z.length(), 2048);
        assert_eq!(z.symbol_period_ns(), 1.0);
        assert_eq!(z.period_ns(), 2048.0);
        assert_eq!(z.shift(), 0);
        for root in [1, 3, 5, 2047] {
            let z = generate_zc(root, 2048).unwrap();
            assert_eq!(z.samples()[0], Complex::new(1.0, 0.0));
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert_eq!(generate_zc(2, 2048), Err(Error::InvalidRoot { root: 2, length: 2048 }));
        assert!(matches!(generate_zc(0, 2048), Err(Error::InvalidRoot { .. })));
        assert!(matches!(generate_zc(2048, 2048), Err(Error::InvalidRoot { .. })));
        assert_eq!(generate_zc(1, 1), Err(Error::InvalidLength(1)));
    }

    #[test]
    fn shifting() {
        let z = generate_zc(1, 64).unwrap();
        assert_eq!(cyclic_shift(&z, 0).unwrap(), z);
        assert_eq!(
            cyclic_shift(&z, 64),
            Err(Error::ShiftOutOfRange { offset: 64, length: 64 })
        );
        let s = cyclic_shift(&z, 5).unwrap();
        assert_eq!(s.shift(), 5);
        assert_eq!(s.samples()[0], z.samples()[5]);
        assert_eq!(s.samples()[63], z.samples()[4]);
    }

    #[test]
    fn autocorrelation_at_2048() {
        let z = generate_zc(1, 2048).unwrap();
        let direct = xcorr_direct(z.samples(), z.samples());
        assert!((direct[0].norm() - 2048.0).abs() < 1e-9);
        for c in &direct[1..] {
            assert!(c.norm() <= 1e-6 * 2048.0);
        }
        let fast = periodic_xcorr(z.samples(), z.samples()).unwrap();
        assert!(max_rel_err(&fast, &direct) < 1e-6);
    }

    #[test]
    fn half_length_shift_peaks_at_1024() {
        let z = generate_zc(1, 2048).unwrap();
        let s = cyclic_shift(&z, 1024).unwrap();
        let direct = xcorr_direct(z.samples(), s.samples());
        let (k, _) = direct
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .unwrap();
        assert_eq!(k, 1024);
        let fast = periodic_xcorr(z.samples(), s.samples()).unwrap();
        assert!(max_rel_err(&fast, &direct) < 1e-6);
    }

    #[test]
    fn constant_input() {
        let ones = [Complex::new(1.0, 0.0); 4];
        let r = periodic_xcorr(&ones, &ones).unwrap();
        for c in r {
            assert!((c - Complex::new(4.0, 0.0)).norm() < 1e-12);
        }
        assert!(periodic_xcorr(&ones, &ones[..3]).is_err());
    }

    #[test]
    fn cazac_validation() {
        for root in [1, 3] {
            let z = generate_zc(root, 2048).unwrap();
            let rep = validate_cazac(&z, 1e-9);
            assert!(rep.passed(), "{rep:?}");
        }
        let mut bad = generate_zc(1, 2048).unwrap().samples().to_vec();
        bad[17] = Complex::new(0.0, 0.0);
        let rep = cazac_report(&bad, 1e-9);
        assert!(!rep.amplitude_ok);
        assert!(!rep.passed());
    }

    fn coprime_pair() -> impl Strategy<Value = (usize, usize)> {
        (2usize..=4096)
            .prop_flat_map(|n| (1..n, Just(n)))
            .prop_filter("coprime", |(u, n)| gcd(*n, *u) == 1)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn unit_modulus((u, n) in coprime_pair()) {
            let z = generate_zc(u, n).unwrap();
            for x in z.samples() {
                prop_assert!((x.norm() - 1.0).abs() <= 1e-12);
            }
        }

        #[test]
        fn zero_autocorrelation((u, n) in coprime_pair()) {
            let z = generate_zc(u, n).unwrap();
            let rep = validate_cazac(&z, 1e-9);
            prop_assert!(rep.autocorrelation_ok, "{:?}", rep);
        }

        #[test]
        fn shifts_compose((u, n) in coprime_pair(), a in 0usize..4096, b in 0usize..4096) {
            let z = generate_zc(u, n).unwrap();
            let (a, b) = (a % n, b % n);
            let ab = cyclic_shift(&cyclic_shift(&z, a).unwrap(), b).unwrap();
            let once = cyclic_shift(&z, (a + b) % n).unwrap();
            prop_assert_eq!(ab.samples(), once.samples());
            prop_assert_eq!(ab.shift(), once.shift());
        }

        #[test]
        fn transform_matches_direct_sum(n in 2usize..=600, seed in any::<u64>()) {
            let mut s = seed;
            let mut next = || {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            };
            let a: Vec<Complex> = (0..n).map(|_| Complex::new(next(), next())).collect();
            let b: Vec<Complex> = (0..n).map(|_| Complex::new(next(), next())).collect();
            let fast = periodic_xcorr(&a, &b).unwrap();
            let direct = xcorr_direct(&a, &b);
            prop_assert!(max_rel_err(&fast, &direct) < 1e-6);
        }

        #[test]
        fn two_shifts_separate(s1 in 0usize..2048, s2 in 0usize..2048) {
            prop_assume!(s1 != s2);
            let z = generate_zc(1, 2048).unwrap();
            let a = cyclic_shift(&z, s1).unwrap();
            let b = cyclic_shift(&z, s2).unwrap();
            let sum: Vec<Complex> = a.samples().iter().zip(b.samples()).map(|(x, y)| x + y).collect();
            let r = periodic_xcorr(&sum, z.samples()).unwrap();
            for (k, c) in r.iter().enumerate() {
                if k == s1 || k == s2 {
                    prop_assert!((c.norm() - 2048.0).abs() < 1e-6);
                } else {
                    prop_assert!(c.norm() <= 1e-6 * 2048.0);
                }
            }
        }
    }
}
