//! Mixed-radix discrete Fourier transform.
//!
//! Sizes whose prime factors are all in {2, 3, 5} are handled by a recursive
//! decimation-in-time Cooley-Tukey transform using radix-4, 2, 3 and 5
//! butterflies. Every other size falls back to direct O(N²) evaluation.
//!
//! Forward: `X[m] = Σ x[k] e^{-j2πkm/N}`. Inverse: `x[k] = (1/N) Σ X[m] e^{+j2πkm/N}`.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FftError {
    #[error("transform size must be at least 1")]
    InvalidSize,
    #[error("input length {got} does not match plan size {expected}")]
    Dimension { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factorization {
    /// Ordered radices, outermost stage first. Empty for size 1.
    Radices(Vec<usize>),
    /// Size has a prime factor outside {2, 3, 5}.
    Direct,
}

/// Immutable, shareable transform plan.
#[derive(Debug, Clone)]
pub struct TransformPlan {
    size: usize,
    direction: Direction,
    factorization: Factorization,
    // twiddles[k] = exp(sign·j2πk/N), sign = -1 forward, +1 inverse
    twiddles: Vec<Complex64>,
}

fn factorize(n: usize) -> Factorization {
    let mut rest = n;
    let mut radices = Vec::new();
    while rest % 4 == 0 {
        radices.push(4);
        rest /= 4;
    }
    for p in [2usize, 3, 5] {
        while rest % p == 0 {
            radices.push(p);
            rest /= p;
        }
    }
    if rest == 1 {
        Factorization::Radices(radices)
    } else {
        Factorization::Direct
    }
}

impl TransformPlan {
    pub fn new(size: usize, direction: Direction) -> Result<Self, FftError> {
        if size == 0 {
            return Err(FftError::InvalidSize);
        }
        let sign = match direction {
            Direction::Forward => -1.0,
            Direction::Inverse => 1.0,
        };
        let twiddles = (0..size)
            .map(|k| {
                let t = 2.0 * PI * k as f64 / size as f64;
                Complex64::new(t.cos(), sign * t.sin())
            })
            .collect();
        Ok(Self {
            size,
            direction,
            factorization: factorize(size),
            twiddles,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn radices(&self) -> Option<&[usize]> {
        match &self.factorization {
            Factorization::Radices(r) => Some(r),
            Factorization::Direct => None,
        }
    }

    /// Transform `x` using the plan's selected path.
    pub fn transform(&self, x: &[Complex64]) -> Result<Vec<Complex64>, FftError> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.size];
        self.transform_into(x, &mut out)?;
        Ok(out)
    }

    /// Like [`transform`](Self::transform) but writes into a caller buffer.
    pub fn transform_into(&self, x: &[Complex64], out: &mut [Complex64]) -> Result<(), FftError> {
        self.check(x.len())?;
        self.check(out.len())?;
        match &self.factorization {
            Factorization::Radices(r) => {
                self.recurse(x, 0, 1, out, r, 1);
            }
            Factorization::Direct => self.direct_into(x, out),
        }
        self.scale(out);
        Ok(())
    }

    /// Direct O(N²) evaluation regardless of factorization.
    pub fn transform_direct(&self, x: &[Complex64]) -> Result<Vec<Complex64>, FftError> {
        self.check(x.len())?;
        let mut out = vec![Complex64::new(0.0, 0.0); self.size];
        self.direct_into(x, &mut out);
        self.scale(&mut out);
        Ok(out)
    }

    fn check(&self, len: usize) -> Result<(), FftError> {
        if len != self.size {
            return Err(FftError::Dimension {
                expected: self.size,
                got: len,
            });
        }
        Ok(())
    }

    fn scale(&self, out: &mut [Complex64]) {
        if self.direction == Direction::Inverse && self.size > 1 {
            let s = 1.0 / self.size as f64;
            for v in out.iter_mut() {
                *v *= s;
            }
        }
    }

    fn direct_into(&self, x: &[Complex64], out: &mut [Complex64]) {
        let n = self.size;
        for (m, o) in out.iter_mut().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            let mut idx = 0usize;
            for xk in x {
                acc += xk * self.twiddles[idx];
                idx += m;
                if idx >= n {
                    idx -= n;
                }
            }
            *o = acc;
        }
    }

    // Sub-transform of length out.len() over x[offset + i*stride].
    // tw_step maps this level's roots of unity onto the master table.
    fn recurse(
        &self,
        x: &[Complex64],
        offset: usize,
        stride: usize,
        out: &mut [Complex64],
        radices: &[usize],
        tw_step: usize,
    ) {
        let n = out.len();
        if radices.is_empty() {
            out[0] = x[offset];
            return;
        }
        let p = radices[0];
        let m = n / p;
        for j in 0..p {
            self.recurse(
                x,
                offset + j * stride,
                stride * p,
                &mut out[j * m..(j + 1) * m],
                &radices[1..],
                tw_step * p,
            );
        }
        let mut t = [Complex64::new(0.0, 0.0); 5];
        for q in 0..m {
            t[0] = out[q];
            for (j, tj) in t.iter_mut().enumerate().take(p).skip(1) {
                *tj = out[j * m + q] * self.twiddles[j * q * tw_step];
            }
            let y = self.butterfly(&t[..p], m * tw_step);
            for (s, ys) in y.iter().take(p).enumerate() {
                out[q + s * m] = *ys;
            }
        }
    }

    // Size-p DFT of t; `root` indexes W_p in the master table.
    fn butterfly(&self, t: &[Complex64], root: usize) -> [Complex64; 5] {
        let zero = Complex64::new(0.0, 0.0);
        let mut y = [zero; 5];
        match t.len() {
            2 => {
                y[0] = t[0] + t[1];
                y[1] = t[0] - t[1];
            }
            4 => {
                // multiply by W_4 = ∓j
                let rot = |c: Complex64| match self.direction {
                    Direction::Forward => Complex64::new(c.im, -c.re),
                    Direction::Inverse => Complex64::new(-c.im, c.re),
                };
                let a = t[0] + t[2];
                let b = t[0] - t[2];
                let c = t[1] + t[3];
                let d = rot(t[1] - t[3]);
                y[0] = a + c;
                y[1] = b + d;
                y[2] = a - c;
                y[3] = b - d;
            }
            p => {
                let n = self.size;
                for (s, ys) in y.iter_mut().enumerate().take(p) {
                    let mut acc = zero;
                    for (j, tj) in t.iter().enumerate() {
                        acc += tj * self.twiddles[(j * s * root) % n];
                    }
                    *ys = acc;
                }
            }
        }
        y
    }
}

/// Convenience wrapper: plan and run once.
pub fn dft(x: &[Complex64], direction: Direction) -> Result<Vec<Complex64>, FftError> {
    TransformPlan::new(x.len(), direction)?.transform(x)
}
