//! Truncated convolutions of probability vectors (direct for small inputs, FFT above).

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// Products above this size go through the FFT.
const DIRECT_LIMIT: usize = 1 << 22;

/// `(a * b)[0..=cap]`.
pub(crate) fn convolve(a: &[f64], b: &[f64], cap: usize) -> Vec<f64> {
    let a = &a[..a.len().min(cap + 1)];
    let b = &b[..b.len().min(cap + 1)];
    if a.is_empty() || b.is_empty() {
        return vec![0.0; cap + 1];
    }
    let out_len = (a.len() + b.len() - 1).min(cap + 1);
    let mut out = if a.len().min(b.len()) <= 32 || a.len() * b.len() <= DIRECT_LIMIT {
        direct(a, b, out_len)
    } else {
        fft(a, b, out_len)
    };
    out.resize(cap + 1, 0.0);
    out
}

fn direct(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    let mut out = vec![0.0; out_len];
    for (i, &x) in a.iter().enumerate() {
        if x == 0.0 {
            continue;
        }
        let hi = (out_len - i).min(b.len());
        for (o, &y) in out[i..i + hi].iter_mut().zip(&b[..hi]) {
            *o += x * y;
        }
    }
    out
}

fn fft(a: &[f64], b: &[f64], out_len: usize) -> Vec<f64> {
    let size = (a.len() + b.len() - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(size);
    let inverse = planner.plan_fft_inverse(size);
    let mut fa: Vec<Complex<f64>> = a.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fa.resize(size, Complex::new(0.0, 0.0));
    let mut fb: Vec<Complex<f64>> = b.iter().map(|&x| Complex::new(x, 0.0)).collect();
    fb.resize(size, Complex::new(0.0, 0.0));
    forward.process(&mut fa);
    forward.process(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    inverse.process(&mut fa);
    let scale = 1.0 / size as f64;
    // pointwise round-off of an FFT product is about eps * log2(size) * |a|_2 * |b|_2;
    // values below that floor are indistinguishable from zero
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let floor = 4.0 * f64::EPSILON * (size as f64).log2() * norm(a) * norm(b);
    fa[..out_len]
        .iter()
        .map(|z| {
            let v = z.re * scale;
            if v < floor {
                0.0
            } else {
                v
            }
        })
        .collect()
}

/// Law of the sum of `m` i.i.d. copies of `p`, restricted to `0..=cap`.
pub(crate) fn power(p: &[f64], m: usize, cap: usize) -> Vec<f64> {
    let mut result = vec![0.0; cap + 1];
    result[0] = 1.0;
    let mut base: Vec<f64> = p.iter().take(cap + 1).cloned().collect();
    base.resize(cap + 1, 0.0);
    let mut e = m;
    while e > 0 {
        if e & 1 == 1 {
            result = convolve(&result, &base, cap);
        }
        e >>= 1;
        if e > 0 {
            base = convolve(&base, &base, cap);
        }
    }
    result
}
