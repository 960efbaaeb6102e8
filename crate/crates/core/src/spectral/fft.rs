//! Cubic 3D FFTs built from batched 1D `rustfft` passes.
//!
//! Normalisation: the forward transform divides by N³ so that the stored
//! coefficients satisfy `u(x) = Σ_k û(k) e^{ik·x}`; the inverse is unscaled.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    work: RefCell<Work>,
}

#[derive(Default)]
struct Work {
    lines: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Clone for Fft3 {
    fn clone(&self) -> Self {
        Self::new(self.n)
    }
}

impl std::fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

// lines gathered per batch for the strided axes
const BATCH: usize = 64;

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let scratch_len = forward.get_inplace_scratch_len().max(inverse.get_inplace_scratch_len());
        let work = Work { lines: vec![Complex64::new(0.0, 0.0); BATCH * n], scratch: vec![Complex64::new(0.0, 0.0); scratch_len] };
        Self { n, forward, inverse, work: RefCell::new(work) }
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Physical → spectral, scaled by 1/N³.
    pub fn forward(&self, data: &mut [Complex64]) {
        let all = vec![true; self.n];
        self.forward_band(data, &all);
    }

    /// Spectral → physical, unscaled.
    pub fn inverse(&self, data: &mut [Complex64]) {
        let all = vec![true; self.n];
        self.inverse_band(data, &all);
    }

    /// Inverse transform of data that vanishes unless every axis index is
    /// marked in `keep`; skips the lines that are identically zero.
    pub fn inverse_band(&self, data: &mut [Complex64], keep: &[bool]) {
        let plan = &self.inverse;
        self.pass(data, 2, plan, |a, b| keep[a] && keep[b]);
        self.pass(data, 1, plan, |a, _| keep[a]);
        self.pass(data, 0, plan, |_, _| true);
    }

    /// Forward transform, scaled by 1/N³, correct only at indices whose axis
    /// indices are all marked in `keep`; other entries are left unspecified.
    pub fn forward_band(&self, data: &mut [Complex64], keep: &[bool]) {
        let plan = &self.forward;
        self.pass(data, 2, plan, |_, _| true);
        self.pass(data, 1, plan, |_, c| keep[c]);
        self.pass(data, 0, plan, |b, c| keep[b] && keep[c]);
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    /// 1D transforms along `axis` on the lines selected by `select`, which
    /// receives the two remaining axis indices in increasing axis order.
    fn pass(&self, data: &mut [Complex64], axis: usize, plan: &Arc<dyn Fft<f64>>, select: impl Fn(usize, usize) -> bool) {
        let n = self.n;
        assert_eq!(data.len(), self.len(), "fft buffer length mismatch");
        let mut work = self.work.borrow_mut();
        let Work { lines, scratch } = &mut *work;
        if axis == 2 {
            for (row, line) in data.chunks_mut(n).enumerate() {
                if select(row / n, row % n) {
                    plan.process_with_scratch(line, scratch);
                }
            }
            return;
        }
        // lines run along `axis` with stride n² (axis 0) or n (axis 1); a batch
        // is a run of lines with consecutive last-axis index
        let stride = if axis == 0 { n * n } else { n };
        for outer in 0..n {
            let mut c = 0;
            while c < n {
                if !select(outer, c) {
                    c += 1;
                    continue;
                }
                let mut end = c;
                while end < n && end - c < BATCH && select(outer, end) {
                    end += 1;
                }
                let count = end - c;
                let base = if axis == 0 { outer * n + c } else { outer * n * n + c };
                let buf = &mut lines[..count * n];
                for j in 0..n {
                    let row = &data[base + j * stride..base + j * stride + count];
                    for (l, v) in row.iter().enumerate() {
                        buf[l * n + j] = *v;
                    }
                }
                plan.process_with_scratch(buf, scratch);
                for j in 0..n {
                    let row = &mut data[base + j * stride..base + j * stride + count];
                    for (l, v) in row.iter_mut().enumerate() {
                        *v = buf[l * n + j];
                    }
                }
                c = end;
            }
        }
    }
}
