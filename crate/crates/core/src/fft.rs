//! In-place radix-2 FFT with a Bluestein fallback for other lengths.

use alloc::vec;
use alloc::vec::Vec;

use crate::Complex;

fn twiddle(k: usize, n: usize, inverse: bool) -> Complex {
    let sign = if inverse { 1.0 } else { -1.0 };
    let ang = sign * 2.0 * core::f64::consts::PI * k as f64 / n as f64;
    let (s, c) = libm::sincos(ang);
    Complex::new(c, s)
}

fn radix2(buf: &mut [Complex], inverse: bool) {
    let n = buf.len();
    debug_assert!(n.is_power_of_two());
    let bits = n.trailing_zeros();
    if bits == 0 {
        return;
    }
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if j > i {
            buf.swap(i, j);
        }
    }
    // full twiddle table, indexed with stride per stage
    let table: Vec<Complex> = (0..n / 2).map(|k| twiddle(k, n, inverse)).collect();
    let mut len = 2;
    while len <= n {
        let half = len / 2;
        let stride = n / len;
        for start in (0..n).step_by(len) {
            for k in 0..half {
                let w = table[k * stride];
                let a = buf[start + k];
                let b = buf[start + k + half] * w;
                buf[start + k] = a + b;
                buf[start + k + half] = a - b;
            }
        }
        len <<= 1;
    }
}

fn bluestein(buf: &mut [Complex], inverse: bool) {
    let n = buf.len();
    let m = (2 * n - 1).next_power_of_two();
    let sign = if inverse { 1.0 } else { -1.0 };
    // chirp[k] = exp(sign * j*pi*k^2/n); k^2 reduced mod 2n keeps the phase exact
    let chirp: Vec<Complex> = (0..n)
        .map(|k| {
            let k2 = (k as u128 * k as u128) % (2 * n as u128);
            let ang = sign * core::f64::consts::PI * k2 as f64 / n as f64;
            let (s, c) = libm::sincos(ang);
            Complex::new(c, s)
        })
        .collect();
    let mut a = vec![Complex::new(0.0, 0.0); m];
    for k in 0..n {
        a[k] = buf[k] * chirp[k];
    }
    let mut b = vec![Complex::new(0.0, 0.0); m];
    b[0] = chirp[0].conj();
    for k in 1..n {
        b[k] = chirp[k].conj();
        b[m - k] = chirp[k].conj();
    }
    radix2(&mut a, false);
    radix2(&mut b, false);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= *y;
    }
    radix2(&mut a, true);
    let scale = 1.0 / m as f64;
    for k in 0..n {
        buf[k] = a[k] * scale * chirp[k];
    }
}

/// Unnormalized forward transform.
pub(crate) fn forward(buf: &mut [Complex]) {
    transform(buf, false);
}

/// Inverse transform including the 1/N factor.
pub(crate) fn inverse(buf: &mut [Complex]) {
    transform(buf, true);
    let scale = 1.0 / buf.len() as f64;
    for x in buf.iter_mut() {
        *x *= scale;
    }
}

fn transform(buf: &mut [Complex], inverse: bool) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    if n.is_power_of_two() {
        radix2(buf, inverse);
    } else {
        bluestein(buf, inverse);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dft(x: &[Complex]) -> Vec<Complex> {
        let n = x.len();
        (0..n)
            .map(|k| (0..n).map(|t| x[t] * twiddle((k * t) % n, n, false)).sum())
            .collect()
    }

    #[test]
    fn matches_naive_dft() {
        for &n in &[1usize, 2, 8, 12, 17, 64, 100] {
            let x: Vec<Complex> = (0..n)
                .map(|i| Complex::new((i as f64 * 0.37).sin(), (i as f64 * 1.3).cos()))
                .collect();
            let want = dft(&x);
            let mut got = x.clone();
            forward(&mut got);
            for (a, b) in got.iter().zip(&want) {
                assert!((a - b).norm() < 1e-9 * n as f64, "n={n}");
            }
            inverse(&mut got);
            for (a, b) in got.iter().zip(&x) {
                assert!((a - b).norm() < 1e-12 * n as f64);
            }
        }
    }
}
