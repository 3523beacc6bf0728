//! Orthonormal DCT-II of arbitrary length in `O(m log m)`.
//!
//! The transform is computed through a complex FFT of the same length using
//! the even/odd reordering `v = (x₀, x₂, x₄, …, x₅, x₃, x₁)`. Power-of-two
//! lengths use an iterative radix-2 FFT; every other length goes through
//! Bluestein's chirp-z convolution.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct Complex {
    re: f64,
    im: f64,
}

impl Complex {
    const ZERO: Self = Self { re: 0.0, im: 0.0 };

    fn cis(theta: f64) -> Self {
        Self {
            re: libm::cos(theta),
            im: libm::sin(theta),
        }
    }

    fn conj(self) -> Self {
        Self {
            re: self.re,
            im: -self.im,
        }
    }

    fn scale(self, s: f64) -> Self {
        Self {
            re: self.re * s,
            im: self.im * s,
        }
    }
}

impl Add for Complex {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            re: self.re + o.re,
            im: self.im + o.im,
        }
    }
}

impl Sub for Complex {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Self {
            re: self.re - o.re,
            im: self.im - o.im,
        }
    }
}

impl Mul for Complex {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Self {
            re: self.re * o.re - self.im * o.im,
            im: self.re * o.im + self.im * o.re,
        }
    }
}

#[derive(Debug, Clone)]
struct Radix2 {
    n: usize,
    twiddles: Vec<Complex>,
}

impl Radix2 {
    fn new(n: usize) -> Self {
        debug_assert!(n.is_power_of_two());
        let twiddles = (0..n / 2)
            .map(|k| Complex::cis(-2.0 * PI * k as f64 / n as f64))
            .collect();
        Self { n, twiddles }
    }

    fn forward(&self, x: &mut [Complex]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n);
        if n <= 1 {
            return;
        }
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                x.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let half = len / 2;
            let stride = n / len;
            for start in (0..n).step_by(len) {
                for k in 0..half {
                    let w = self.twiddles[k * stride];
                    let a = x[start + k];
                    let b = x[start + k + half] * w;
                    x[start + k] = a + b;
                    x[start + k + half] = a - b;
                }
            }
            len <<= 1;
        }
    }

    fn inverse(&self, x: &mut [Complex]) {
        for v in x.iter_mut() {
            *v = v.conj();
        }
        self.forward(x);
        let s = 1.0 / self.n as f64;
        for v in x.iter_mut() {
            *v = v.conj().scale(s);
        }
    }
}

#[derive(Debug, Clone)]
enum Fft {
    Radix2(Radix2),
    Bluestein {
        n: usize,
        chirp: Vec<Complex>,
        filter: Vec<Complex>,
        inner: Radix2,
    },
}

impl Fft {
    fn new(n: usize) -> Self {
        if n.is_power_of_two() {
            return Self::Radix2(Radix2::new(n));
        }
        let size = (2 * n - 1).next_power_of_two();
        let inner = Radix2::new(size);
        // k² is reduced modulo 2n so the chirp angle stays accurate for large n.
        let chirp: Vec<Complex> = (0..n)
            .map(|k| {
                let k2 = ((k as u128 * k as u128) % (2 * n as u128)) as f64;
                Complex::cis(-PI * k2 / n as f64)
            })
            .collect();
        let mut filter = vec![Complex::ZERO; size];
        filter[0] = chirp[0].conj();
        for k in 1..n {
            filter[k] = chirp[k].conj();
            filter[size - k] = chirp[k].conj();
        }
        inner.forward(&mut filter);
        Self::Bluestein {
            n,
            chirp,
            filter,
            inner,
        }
    }

    fn forward(&self, x: &mut [Complex], work: &mut Vec<Complex>) {
        match self {
            Self::Radix2(r) => r.forward(x),
            Self::Bluestein {
                n,
                chirp,
                filter,
                inner,
            } => {
                work.clear();
                work.resize(inner.n, Complex::ZERO);
                for k in 0..*n {
                    work[k] = x[k] * chirp[k];
                }
                inner.forward(work);
                for (w, f) in work.iter_mut().zip(filter) {
                    *w = *w * *f;
                }
                inner.inverse(work);
                for k in 0..*n {
                    x[k] = work[k] * chirp[k];
                }
            }
        }
    }
}

/// Precomputed orthonormal DCT-II of a fixed length.
#[derive(Debug, Clone)]
pub struct DctPlan {
    m: usize,
    fft: Fft,
    post: Vec<Complex>,
}

impl DctPlan {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "DCT length must be positive");
        let s0 = libm::sqrt(1.0 / m as f64);
        let sk = libm::sqrt(2.0 / m as f64);
        let post = (0..m)
            .map(|k| {
                let scale = if k == 0 { s0 } else { sk };
                Complex::cis(-PI * k as f64 / (2.0 * m as f64)).scale(scale)
            })
            .collect();
        Self {
            m,
            fft: Fft::new(m),
            post,
        }
    }

    pub fn len(&self) -> usize {
        self.m
    }

    pub fn is_empty(&self) -> bool {
        self.m == 0
    }

    /// Overwrites `x` with its orthonormal DCT-II,
    /// `X_k = c_k Σ_j x_j cos(π(2j+1)k / 2m)` with `c_0 = √(1/m)`, `c_k = √(2/m)`.
    pub fn transform(&self, x: &mut [f64]) {
        let mut buf = Vec::new();
        let mut work = Vec::new();
        self.transform_with(x, &mut buf, &mut work);
    }

    pub(crate) fn transform_with(
        &self,
        x: &mut [f64],
        buf: &mut Vec<Complex>,
        work: &mut Vec<Complex>,
    ) {
        let m = self.m;
        assert_eq!(x.len(), m);
        buf.clear();
        buf.resize(m, Complex::ZERO);
        for j in 0..m.div_ceil(2) {
            buf[j].re = x[2 * j];
        }
        for j in 0..m / 2 {
            buf[m - 1 - j].re = x[2 * j + 1];
        }
        self.fft.forward(buf, work);
        for k in 0..m {
            x[k] = (self.post[k] * buf[k]).re;
        }
    }
}

/// Scratch buffers reused across columns.
#[derive(Default)]
pub(crate) struct DctScratch {
    pub(crate) buf: Vec<Complex>,
    pub(crate) work: Vec<Complex>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense_dct(x: &[f64]) -> Vec<f64> {
        let m = x.len();
        (0..m)
            .map(|k| {
                let c = if k == 0 {
                    libm::sqrt(1.0 / m as f64)
                } else {
                    libm::sqrt(2.0 / m as f64)
                };
                c * x
                    .iter()
                    .enumerate()
                    .map(|(j, &xj)| {
                        xj * libm::cos(PI * (2 * j + 1) as f64 * k as f64 / (2 * m) as f64)
                    })
                    .sum::<f64>()
            })
            .collect()
    }

    #[test]
    fn matches_dense_definition_for_many_lengths() {
        for m in [1usize, 2, 3, 5, 7, 8, 12, 16, 31, 100, 127] {
            let x: Vec<f64> = (0..m).map(|j| libm::sin(1.3 * j as f64 + 0.2)).collect();
            let mut y = x.clone();
            DctPlan::new(m).transform(&mut y);
            let expected = dense_dct(&x);
            for (a, b) in y.iter().zip(&expected) {
                assert!((a - b).abs() < 1e-12, "m = {m}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn constant_vector_concentrates_in_first_coefficient() {
        let m = 10;
        let mut x = vec![1.0; m];
        DctPlan::new(m).transform(&mut x);
        assert!((x[0] - libm::sqrt(m as f64)).abs() < 1e-13);
        assert!(x[1..].iter().all(|v| v.abs() < 1e-13));
    }
}
