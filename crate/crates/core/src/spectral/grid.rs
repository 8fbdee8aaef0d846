//! Padded collocation grids and d-dimensional FFT plumbing for the
//! pseudo-spectral products. Grid sizes are chosen so polynomial
//! nonlinearities of the stated degree are alias-free on the retained band.

use super::{Complex, SpectralField};
use crate::{Error, Result};
use rustfft::{Fft, FftDirection, FftPlanner};
use std::collections::HashMap;
use std::sync::Arc;

/// Hard cap on padded grid size (points per transform). Desk-scale guard:
/// a request beyond this is almost certainly a mis-configured degree/cutoff.
const MAX_GRID_POINTS: usize = 1 << 24;

/// Smallest 2^a 3^b 5^c size >= n; keeps every FFT on a fast path.
pub(crate) fn fast_size(n: usize) -> usize {
    let mut m = n.max(2);
    loop {
        let mut r = m;
        for f in [2usize, 3, 5] {
            while r % f == 0 {
                r /= f;
            }
        }
        if r == 1 {
            return m;
        }
        m += 1;
    }
}

/// Grid size for computing coefficients of a degree-`deg` pointwise product
/// exactly on the band `|m_i| <= kmax`: requires M >= (deg+1)*kmax + 1.
pub fn dealias_grid_size(kmax: i32, deg: usize, dim: usize) -> Result<usize> {
    let target = (deg + 1) * kmax as usize + 1;
    let m = fast_size(target);
    check_budget(m, dim)?;
    Ok(m)
}

/// Grid size for exact trapezoid quadrature of a degree-`deg` integrand:
/// requires M >= deg*kmax + 1 (only the zero mode must be alias-free).
pub fn quadrature_grid_size(kmax: i32, deg: usize, oversample: f64, dim: usize) -> Result<usize> {
    let base = deg * kmax as usize + 1;
    let target = ((base as f64) * oversample.max(1.0)).ceil() as usize;
    let m = fast_size(target);
    check_budget(m, dim)?;
    Ok(m)
}

fn check_budget(msize: usize, dim: usize) -> Result<()> {
    let pts = msize.pow(dim as u32);
    if pts > MAX_GRID_POINTS {
        return Err(Error::Resource(format!(
            "padded grid {msize}^{dim} = {pts} points exceeds the {MAX_GRID_POINTS}-point budget"
        )));
    }
    Ok(())
}

/// Scratch space plus cached FFT plans for one (dim, msize) grid geometry.
pub(crate) struct GridWorkspace {
    dim: usize,
    msize: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    line: Vec<Complex>,
}

thread_local! {
    static PLANNERS: std::cell::RefCell<HashMap<(usize, bool), Arc<dyn Fft<f64>>>> =
        std::cell::RefCell::new(HashMap::new());
}

fn plan(msize: usize, forward: bool) -> Arc<dyn Fft<f64>> {
    PLANNERS.with(|p| {
        p.borrow_mut()
            .entry((msize, forward))
            .or_insert_with(|| {
                let mut planner = FftPlanner::new();
                let dir = if forward { FftDirection::Forward } else { FftDirection::Inverse };
                planner.plan_fft(msize, dir)
            })
            .clone()
    })
}

impl GridWorkspace {
    pub fn new(dim: usize, msize: usize) -> Self {
        GridWorkspace {
            dim,
            msize,
            fwd: plan(msize, true),
            inv: plan(msize, false),
            line: vec![Complex::new(0.0, 0.0); msize],
        }
    }

    pub fn msize(&self) -> usize {
        self.msize
    }

    pub fn points(&self) -> usize {
        self.msize.pow(self.dim as u32)
    }

    pub fn quad_weight(&self) -> f64 {
        (2.0 * std::f64::consts::PI / self.msize as f64).powi(self.dim as i32)
    }

    #[inline]
    fn wrap(&self, k: i32) -> usize {
        k.rem_euclid(self.msize as i32) as usize
    }

    fn grid_index(&self, m: &[i32; 3]) -> usize {
        let mut idx = 0usize;
        for i in 0..self.dim {
            idx = idx * self.msize + self.wrap(m[i]);
        }
        idx
    }

    /// Physical-space samples of one component: scatter retained coefficients
    /// into the padded spectrum and apply the (unnormalized) inverse DFT, so
    /// grid[j] = sum_m c(m) exp(i m . x_j) with x_j = 2 pi j / M.
    pub fn to_grid(&mut self, f: &SpectralField, comp: usize) -> Vec<Complex> {
        let mut data = vec![Complex::new(0.0, 0.0); self.points()];
        for m in f.modes() {
            data[self.grid_index(&m)] = f.coeff(comp, &m);
        }
        self.fft_all_axes(&mut data, false);
        data
    }

    /// Same but applying a per-mode multiplier before the transform.
    pub fn to_grid_with(
        &mut self,
        f: &SpectralField,
        comp: usize,
        mult: impl Fn(&[i32; 3]) -> Complex,
    ) -> Vec<Complex> {
        let mut data = vec![Complex::new(0.0, 0.0); self.points()];
        for m in f.modes() {
            data[self.grid_index(&m)] = f.coeff(comp, &m) * mult(&m);
        }
        self.fft_all_axes(&mut data, false);
        data
    }

    /// Forward transform of grid samples; writes the retained band into
    /// component `comp` of `out` and returns the zero-mode (spatial mean).
    /// The zero mode itself is dropped from `out` (zero-mean invariant).
    pub fn from_grid(&mut self, grid: &[Complex], out: &mut SpectralField, comp: usize) -> f64 {
        let mut data = grid.to_vec();
        self.fft_all_axes(&mut data, true);
        let scale = 1.0 / self.points() as f64;
        let mean = data[0].re * scale;
        for m in out.modes() {
            let v = data[self.grid_index(&m)] * scale;
            let idx = out.comp_offset(comp) + out.cube_index(&m);
            out.coeffs[idx] = v;
        }
        mean
    }

    fn fft_all_axes(&mut self, data: &mut [Complex], forward: bool) {
        let m = self.msize;
        let fft = if forward { self.fwd.clone() } else { self.inv.clone() };
        match self.dim {
            1 => fft.process(data),
            2 => {
                // axis 1 (contiguous rows)
                for row in data.chunks_exact_mut(m) {
                    fft.process(row);
                }
                // axis 0 (strided columns)
                for col in 0..m {
                    for i in 0..m {
                        self.line[i] = data[i * m + col];
                    }
                    fft.process(&mut self.line);
                    for i in 0..m {
                        data[i * m + col] = self.line[i];
                    }
                }
            }
            3 => {
                let m2 = m * m;
                for row in data.chunks_exact_mut(m) {
                    fft.process(row);
                }
                for plane in 0..m {
                    for col in 0..m {
                        let base = plane * m2 + col;
                        for i in 0..m {
                            self.line[i] = data[base + i * m];
                        }
                        fft.process(&mut self.line);
                        for i in 0..m {
                            data[base + i * m] = self.line[i];
                        }
                    }
                }
                for col_plane in 0..m2 {
                    for i in 0..m {
                        self.line[i] = data[col_plane + i * m2];
                    }
                    fft.process(&mut self.line);
                    for i in 0..m {
                        data[col_plane + i * m2] = self.line[i];
                    }
                }
            }
            _ => unreachable!(),
        }
    }
}
