//! Multidimensional complex FFT over row-major buffers.
//!
//! Planners are kept per thread, so concurrent callers never share workspace.

use std::cell::RefCell;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(n, direction))
}

/// Unnormalized in-place transform of a `n^dims` row-major buffer.
pub(crate) fn transform(data: &mut [Complex64], dims: usize, n: usize, direction: FftDirection) {
    debug_assert_eq!(data.len(), n.pow(dims as u32));
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let total = data.len();
    let mut lines: Vec<Complex64> = Vec::new();
    for axis in 0..dims {
        let stride = n.pow((dims - 1 - axis) as u32);
        if stride == 1 {
            fft.process_with_scratch(data, &mut scratch);
            continue;
        }
        // Gather every line along `axis` into a contiguous buffer.
        lines.resize(total, Complex64::new(0.0, 0.0));
        let block = stride * n;
        let mut line = 0;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                let dst = &mut lines[line * n..(line + 1) * n];
                for (j, d) in dst.iter_mut().enumerate() {
                    *d = data[base + j * stride];
                }
                line += 1;
            }
        }
        fft.process_with_scratch(&mut lines, &mut scratch);
        let mut line = 0;
        for outer in (0..total).step_by(block) {
            for inner in 0..stride {
                let base = outer + inner;
                let src = &lines[line * n..(line + 1) * n];
                for (j, s) in src.iter().enumerate() {
                    data[base + j * stride] = *s;
                }
                line += 1;
            }
        }
    }
}

/// Forward transform normalized by `N^{-n}`.
pub(crate) fn forward(data: &mut [Complex64], dims: usize, n: usize) {
    transform(data, dims, n, FftDirection::Forward);
    let scale = 1.0 / data.len() as f64;
    for v in data.iter_mut() {
        *v *= scale;
    }
}

/// Unnormalized inverse transform (synthesis from coefficients).
pub(crate) fn inverse(data: &mut [Complex64], dims: usize, n: usize) {
    transform(data, dims, n, FftDirection::Inverse);
}
