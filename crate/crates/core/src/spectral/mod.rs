//! Spectral state representation: truncated Fourier fields on the d-torus and
//! complex shell-coefficient vectors, together with the projections, inner
//! products and norms the rest of the laboratory is built on.
//!
//! Conventions (all tests pin these):
//! * torus fields are expanded in `e_m = exp(i m.x)` with coefficients stored
//!   over the full symmetric mode cube; reality means `c(-m) = conj(c(m))`;
//! * the truncation parameter `N` is an eigenvalue cutoff: retained modes
//!   satisfy `0 < |m|^2 <= N` (the zero mode is excluded everywhere);
//! * physical-space integrals carry the full `(2pi)^d` volume, so
//!   `<u,v> = (2pi)^d sum_m Re(c_u(m) conj(c_v(m)))`;
//! * shell states carry multipliers `k_n = k0 * lambda^n`, `n = 1..=N`, and
//!   use plain `Re sum u_n conj(v_n)` as inner product.

mod grid;

pub(crate) use grid::GridWorkspace;
pub use grid::{dealias_grid_size, quadrature_grid_size};

use crate::{Error, Result};
use rand::Rng;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

pub type Complex = Complex64;

/// Mode index: up to three integer components for torus states, or a single
/// positive shell number stored in the first slot.
pub type Mode = [i32; 3];

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum FieldKind {
    TorusScalar,
    TorusVector,
    Shell,
}

#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub struct ShellParams {
    pub k0: f64,
    pub lambda: f64,
}

impl ShellParams {
    pub fn wavenumber(&self, n: u32) -> f64 {
        self.k0 * self.lambda.powi(n as i32)
    }
}

/// Norm families used by the dissipation potential and the diagnostics.
///
/// `SobolevH(0)` coincides with the L2 norm. `LebesgueW { k, p }` is the
/// homogeneous collocation form matched to the dissipation operator:
/// `k = 1` measures `|grad u|` in L^p, `k = 2` measures `|lap u|` in L^p,
/// and even/odd higher `k` iterate the Laplacian accordingly. `p` must be
/// even so the integrand is a polynomial and the padded quadrature is exact.
#[derive(Clone, Copy, PartialEq, Debug, Serialize, Deserialize)]
pub enum NormSpec {
    SobolevH { s: f64 },
    LebesgueW { k: u32, p: u32, oversample: f64 },
}

impl NormSpec {
    pub fn h(s: f64) -> Self {
        NormSpec::SobolevH { s }
    }

    pub fn w(k: u32, p: u32) -> Self {
        NormSpec::LebesgueW { k, p, oversample: 1.0 }
    }
}

/// A truncated spectral state: either a real scalar/vector field on the
/// d-torus or a complex shell vector. Values are immutable in spirit; the
/// mutating helpers preserve the reality/zero-mean/divergence invariants.
#[derive(Clone, Debug)]
pub struct SpectralField {
    kind: FieldKind,
    dim: usize,
    components: usize,
    trunc: u32,
    kmax: i32,
    side: usize,
    coeffs: Vec<Complex>,
    shell: Option<ShellParams>,
}

impl SpectralField {
    pub fn zero_torus_scalar(dim: usize, trunc: u32) -> Result<Self> {
        Self::zero_torus(FieldKind::TorusScalar, dim, 1, trunc)
    }

    pub fn zero_torus_vector(dim: usize, trunc: u32) -> Result<Self> {
        Self::zero_torus(FieldKind::TorusVector, dim, dim, trunc)
    }

    fn zero_torus(kind: FieldKind, dim: usize, components: usize, trunc: u32) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::ShapeMismatch(format!("torus dimension {dim} not in 1..=3")));
        }
        if trunc == 0 {
            return Err(Error::ShapeMismatch("truncation N must be >= 1".into()));
        }
        let kmax = (trunc as f64).sqrt().floor() as i32;
        let side = (2 * kmax + 1) as usize;
        let len = components * side.pow(dim as u32);
        Ok(SpectralField {
            kind,
            dim,
            components,
            trunc,
            kmax,
            side,
            coeffs: vec![Complex::new(0.0, 0.0); len],
            shell: None,
        })
    }

    pub fn zero_shell(n_shells: u32, params: ShellParams) -> Result<Self> {
        if n_shells == 0 {
            return Err(Error::ShapeMismatch("shell count must be >= 1".into()));
        }
        if params.lambda <= 1.0 || params.k0 <= 0.0 {
            return Err(Error::ShapeMismatch(format!(
                "shell parameters need lambda > 1 and k0 > 0, got lambda={}, k0={}",
                params.lambda, params.k0
            )));
        }
        Ok(SpectralField {
            kind: FieldKind::Shell,
            dim: 1,
            components: 1,
            trunc: n_shells,
            kmax: 0,
            side: 0,
            coeffs: vec![Complex::new(0.0, 0.0); n_shells as usize],
            shell: Some(params),
        })
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> usize {
        self.components
    }

    /// Eigenvalue cutoff N for torus states, shell count for shell states.
    pub fn truncation(&self) -> u32 {
        self.trunc
    }

    pub fn kmax(&self) -> i32 {
        self.kmax
    }

    pub fn shell_params(&self) -> Option<ShellParams> {
        self.shell
    }

    pub fn is_torus(&self) -> bool {
        matches!(self.kind, FieldKind::TorusScalar | FieldKind::TorusVector)
    }

    pub fn volume(&self) -> f64 {
        (2.0 * std::f64::consts::PI).powi(self.dim as i32)
    }

    pub fn assert_compatible(&self, other: &Self) -> Result<()> {
        if self.kind != other.kind
            || self.dim != other.dim
            || self.components != other.components
            || self.trunc != other.trunc
            || self.shell != other.shell
        {
            return Err(Error::ShapeMismatch(format!(
                "incompatible fields: {:?}(d={},k={},N={}) vs {:?}(d={},k={},N={})",
                self.kind, self.dim, self.components, self.trunc, other.kind, other.dim,
                other.components, other.trunc
            )));
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn in_ball(&self, m: &Mode) -> bool {
        let sq: i64 = (0..self.dim).map(|i| (m[i] as i64) * (m[i] as i64)).sum();
        sq > 0 && sq <= self.trunc as i64
    }

    #[inline]
    fn cube_index(&self, m: &Mode) -> usize {
        let mut idx = 0usize;
        for i in 0..self.dim {
            debug_assert!(m[i].abs() <= self.kmax);
            idx = idx * self.side + (m[i] + self.kmax) as usize;
        }
        idx
    }

    #[inline]
    fn comp_offset(&self, comp: usize) -> usize {
        comp * self.side.pow(self.dim as u32)
    }

    /// Coefficient of `e_m` in component `comp` (torus) or of shell `m[0]`
    /// (1-based) for shell states.
    pub fn coeff(&self, comp: usize, m: &Mode) -> Complex {
        match self.kind {
            FieldKind::Shell => self.coeffs[(m[0] - 1) as usize],
            _ => {
                if !self.in_ball(m) {
                    return Complex::new(0.0, 0.0);
                }
                self.coeffs[self.comp_offset(comp) + self.cube_index(m)]
            }
        }
    }

    pub fn shell_coeff(&self, n: u32) -> Complex {
        self.coeffs[(n - 1) as usize]
    }

    pub fn set_shell_coeff(&mut self, n: u32, value: Complex) {
        self.coeffs[(n - 1) as usize] = value;
    }

    /// Sets the coefficient at `m` only, without touching the mirror mode.
    /// Callers looping over both half-spaces use this; the values they write
    /// must be conjugate-symmetric themselves.
    pub fn set_coeff(&mut self, comp: usize, m: &Mode, value: Complex) {
        if self.kind == FieldKind::Shell {
            self.coeffs[(m[0] - 1) as usize] = value;
            return;
        }
        if !self.in_ball(m) {
            return;
        }
        let idx = self.comp_offset(comp) + self.cube_index(m);
        self.coeffs[idx] = value;
    }

    /// Sets the coefficient at `+m` and its conjugate mirror at `-m`,
    /// maintaining the reality invariant. No-op outside the retained ball.
    pub fn set_pair(&mut self, comp: usize, m: &Mode, value: Complex) {
        if self.kind == FieldKind::Shell {
            self.coeffs[(m[0] - 1) as usize] = value;
            return;
        }
        if !self.in_ball(m) {
            return;
        }
        let neg = [-m[0], -m[1], -m[2]];
        let off = self.comp_offset(comp);
        let ip = self.cube_index(m);
        let iq = self.cube_index(&neg);
        self.coeffs[off + ip] = value;
        self.coeffs[off + iq] = value.conj();
    }

    /// Iterates every retained mode of a torus state (both half-spaces).
    pub fn modes(&self) -> Vec<Mode> {
        let mut out = Vec::new();
        if self.kind == FieldKind::Shell {
            for n in 1..=self.trunc as i32 {
                out.push([n, 0, 0]);
            }
            return out;
        }
        let k = self.kmax;
        let r = |_d: usize| -k..=k;
        match self.dim {
            1 => {
                for a in r(0) {
                    let m = [a, 0, 0];
                    if self.in_ball(&m) {
                        out.push(m);
                    }
                }
            }
            2 => {
                for a in r(0) {
                    for b in r(1) {
                        let m = [a, b, 0];
                        if self.in_ball(&m) {
                            out.push(m);
                        }
                    }
                }
            }
            3 => {
                for a in r(0) {
                    for b in r(1) {
                        for c in r(2) {
                            let m = [a, b, c];
                            if self.in_ball(&m) {
                                out.push(m);
                            }
                        }
                    }
                }
            }
            _ => unreachable!(),
        }
        out
    }

    /// Canonical representatives of the +-m pairs: lexicographically positive
    /// modes (first nonzero coordinate positive).
    pub fn canonical_modes(&self) -> Vec<Mode> {
        self.modes().into_iter().filter(is_canonical).collect()
    }

    pub fn mode_count(&self) -> usize {
        self.modes().len()
    }

    /// |m|^2 as f64, or k_n^2 for shell states.
    pub fn eigenvalue(&self, m: &Mode) -> f64 {
        match self.kind {
            FieldKind::Shell => {
                let k = self.shell.expect("shell params").wavenumber(m[0] as u32);
                k * k
            }
            _ => (0..self.dim).map(|i| (m[i] as f64) * (m[i] as f64)).sum(),
        }
    }

    pub fn scale(&mut self, c: f64) {
        for z in &mut self.coeffs {
            *z *= c;
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.scale(c);
        out
    }

    /// `self += a * x`, shapes must match.
    pub fn axpy(&mut self, a: f64, x: &Self) {
        debug_assert!(self.assert_compatible(x).is_ok());
        for (z, w) in self.coeffs.iter_mut().zip(x.coeffs.iter()) {
            *z += a * w;
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.assert_compatible(other)?;
        let mut out = self.clone();
        out.axpy(1.0, other);
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.assert_compatible(other)?;
        let mut out = self.clone();
        out.axpy(-1.0, other);
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Applies a per-mode multiplier `f(m) -> Complex` to every retained
    /// coefficient of every component (shells receive `m = [n,0,0]`).
    pub fn apply_multiplier(&self, f: impl Fn(&Mode) -> Complex) -> Self {
        let mut out = self.clone();
        match self.kind {
            FieldKind::Shell => {
                for n in 1..=self.trunc {
                    let m = [n as i32, 0, 0];
                    out.coeffs[(n - 1) as usize] = self.coeffs[(n - 1) as usize] * f(&m);
                }
            }
            _ => {
                for m in self.modes() {
                    let mult = f(&m);
                    let idx = self.cube_index(&m);
                    for c in 0..self.components {
                        let off = self.comp_offset(c);
                        out.coeffs[off + idx] = self.coeffs[off + idx] * mult;
                    }
                }
            }
        }
        out
    }

    // ------------------------------------------------------------------
    // Projections
    // ------------------------------------------------------------------

    /// Galerkin projection onto the smaller cutoff `n_prime` (mode set
    /// `|m|^2 <= n_prime`, or the first `n_prime` shells).
    pub fn galerkin_project(&self, n_prime: u32) -> Result<Self> {
        if n_prime > self.trunc {
            return Err(Error::Truncation { requested: n_prime, actual: self.trunc });
        }
        match self.kind {
            FieldKind::Shell => {
                let mut out = SpectralField::zero_shell(n_prime, self.shell.unwrap())?;
                out.coeffs.copy_from_slice(&self.coeffs[..n_prime as usize]);
                Ok(out)
            }
            FieldKind::TorusScalar => {
                let mut out = SpectralField::zero_torus_scalar(self.dim, n_prime)?;
                for m in out.modes() {
                    let v = self.coeff(0, &m);
                    let idx = out.comp_offset(0) + out.cube_index(&m);
                    out.coeffs[idx] = v;
                }
                Ok(out)
            }
            FieldKind::TorusVector => {
                let mut out = SpectralField::zero_torus_vector(self.dim, n_prime)?;
                for m in out.modes() {
                    let idx = out.cube_index(&m);
                    for c in 0..self.components {
                        let off = out.comp_offset(c);
                        out.coeffs[off + idx] = self.coeff(c, &m);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Embeds the field into a larger cutoff (new modes zero). Inverse-ish of
    /// `galerkin_project`; used by the convergence study to compare against a
    /// reference resolution.
    pub fn embed(&self, n_bigger: u32) -> Result<Self> {
        if n_bigger < self.trunc {
            return Err(Error::Truncation { requested: n_bigger, actual: self.trunc });
        }
        let mut out = match self.kind {
            FieldKind::Shell => SpectralField::zero_shell(n_bigger, self.shell.unwrap())?,
            FieldKind::TorusScalar => SpectralField::zero_torus_scalar(self.dim, n_bigger)?,
            FieldKind::TorusVector => SpectralField::zero_torus_vector(self.dim, n_bigger)?,
        };
        match self.kind {
            FieldKind::Shell => {
                out.coeffs[..self.trunc as usize].copy_from_slice(&self.coeffs);
            }
            _ => {
                for m in self.modes() {
                    let idx = out.cube_index(&m);
                    for c in 0..self.components {
                        let off = out.comp_offset(c);
                        out.coeffs[off + idx] = self.coeff(c, &m);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Leray projection onto divergence-free fields:
    /// `c(m) <- c(m) - m (m . c(m)) / |m|^2` per retained mode. Idempotent.
    pub fn leray_project(&self) -> Result<Self> {
        if self.kind != FieldKind::TorusVector {
            return Err(Error::Unsupported(
                "Leray projection applies to torus vector fields".into(),
            ));
        }
        let mut out = self.clone();
        for m in self.modes() {
            let idx = self.cube_index(&m);
            let msq: f64 = self.eigenvalue(&m);
            let mut dot = Complex::new(0.0, 0.0);
            for c in 0..self.components {
                dot += (m[c] as f64) * self.coeffs[self.comp_offset(c) + idx];
            }
            for c in 0..self.components {
                let off = self.comp_offset(c);
                out.coeffs[off + idx] -= (m[c] as f64) * dot / msq;
            }
        }
        Ok(out)
    }

    /// Max over retained modes of `|sum_l m_l c_l(m)|`, the coefficient-level
    /// divergence. Zero (to roundoff) for divergence-free fields.
    pub fn max_divergence(&self) -> f64 {
        if self.kind != FieldKind::TorusVector {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for m in self.modes() {
            let idx = self.cube_index(&m);
            let mut dot = Complex::new(0.0, 0.0);
            for c in 0..self.components {
                dot += (m[c] as f64) * self.coeffs[self.comp_offset(c) + idx];
            }
            worst = worst.max(dot.norm());
        }
        worst
    }

    /// Largest deviation from the reality invariant `c(-m) = conj(c(m))`.
    pub fn max_reality_defect(&self) -> f64 {
        if self.kind == FieldKind::Shell {
            return 0.0;
        }
        let mut worst = 0.0f64;
        for m in self.modes() {
            let neg = [-m[0], -m[1], -m[2]];
            for c in 0..self.components {
                let d = (self.coeff(c, &m) - self.coeff(c, &neg).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    // ------------------------------------------------------------------
    // Inner products and norms
    // ------------------------------------------------------------------

    /// Real inner product `Re integral u conj(v)`; Parseval evaluation.
    pub fn inner_product(&self, other: &Self) -> Result<f64> {
        self.assert_compatible(other)?;
        let mut acc = 0.0;
        for (a, b) in self.coeffs.iter().zip(other.coeffs.iter()) {
            acc += a.re * b.re + a.im * b.im;
        }
        if self.is_torus() {
            acc *= self.volume();
        }
        Ok(acc)
    }

    pub fn l2_norm_sq(&self) -> f64 {
        let mut acc: f64 = self.coeffs.iter().map(|z| z.norm_sqr()).sum();
        if self.is_torus() {
            acc *= self.volume();
        }
        acc
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm_sq().sqrt()
    }

    /// Sobolev H^s norm via the eigenvalue multiplier `|m|^(2s)` (torus) or
    /// `k_n^(2s)` (shells).
    pub fn hs_norm(&self, s: f64) -> f64 {
        if s == 0.0 {
            return self.l2_norm();
        }
        let mut acc = 0.0;
        match self.kind {
            FieldKind::Shell => {
                let p = self.shell.unwrap();
                for n in 1..=self.trunc {
                    let k = p.wavenumber(n);
                    acc += k.powf(2.0 * s) * self.coeffs[(n - 1) as usize].norm_sqr();
                }
            }
            _ => {
                for m in self.modes() {
                    let lam = self.eigenvalue(&m);
                    let idx = self.cube_index(&m);
                    let mut e = 0.0;
                    for c in 0..self.components {
                        e += self.coeffs[self.comp_offset(c) + idx].norm_sqr();
                    }
                    acc += lam.powf(s) * e;
                }
                acc *= self.volume();
            }
        }
        acc.sqrt()
    }

    pub fn norm(&self, spec: &NormSpec) -> Result<f64> {
        match *spec {
            NormSpec::SobolevH { s } => {
                if s < 0.0 {
                    return Err(Error::Domain(format!("H^s norm needs s >= 0, got {s}")));
                }
                Ok(self.hs_norm(s))
            }
            NormSpec::LebesgueW { k, p, oversample } => self.w_norm(k, p, oversample),
        }
    }

    /// Homogeneous W^{k,p} collocation norm (torus only): the L^p norm of the
    /// pointwise magnitude of the k-th derivative stack used by the
    /// dissipation operator. Exact for even p via degree-matched padding.
    fn w_norm(&self, k: u32, p: u32, oversample: f64) -> Result<f64> {
        if !self.is_torus() {
            return Err(Error::Unsupported(
                "W^{k,p} norms are defined for torus states only (shells use H^s)".into(),
            ));
        }
        if p < 2 || p % 2 != 0 {
            return Err(Error::Domain(format!("W^{{k,p}} needs even p >= 2, got p={p}")));
        }
        if k == 0 {
            return Err(Error::Domain("W^{0,p} not used; request k >= 1".into()));
        }
        let fields = self.derivative_stack(k);
        let msize = quadrature_grid_size(self.kmax, p as usize, oversample, self.dim)?;
        let mut ws = GridWorkspace::new(self.dim, msize);
        let ngrid = msize.pow(self.dim as u32);
        // |D^k u|^2 summed over components and derivative directions
        let mut magsq = vec![0.0f64; ngrid];
        for f in &fields {
            for c in 0..f.components {
                let g = ws.to_grid(f, c);
                for (m, z) in magsq.iter_mut().zip(g.iter()) {
                    *m += z.re * z.re;
                }
            }
        }
        let weight = (2.0 * std::f64::consts::PI / msize as f64).powi(self.dim as i32);
        let ph = p / 2;
        let mut integral = 0.0;
        for m in &magsq {
            integral += m.powi(ph as i32);
        }
        integral *= weight;
        Ok(integral.powf(1.0 / p as f64))
    }

    /// The derivative fields whose pointwise magnitude defines W^{k,p}:
    /// `k=1 -> grad u`, `k=2 -> lap u`, higher k iterate the Laplacian with a
    /// final gradient when k is odd.
    fn derivative_stack(&self, k: u32) -> Vec<SpectralField> {
        let laps = k / 2;
        let grad = k % 2 == 1;
        let mut base = self.clone();
        for _ in 0..laps {
            base = base.apply_multiplier(|m| {
                let lam: f64 = (0..3).map(|i| (m[i] as f64) * (m[i] as f64)).sum();
                Complex::new(-lam, 0.0)
            });
        }
        if grad {
            (0..self.dim)
                .map(|axis| {
                    base.apply_multiplier(|m| Complex::new(0.0, m[axis] as f64))
                })
                .collect()
        } else {
            vec![base]
        }
    }

    /// Sup norm of the field evaluated on a 2x-oversampled collocation grid.
    pub fn linf_norm(&self) -> Result<f64> {
        if !self.is_torus() {
            return Err(Error::Unsupported("L^inf norm applies to torus states".into()));
        }
        let msize = quadrature_grid_size(self.kmax, 2, 2.0, self.dim)?;
        let mut ws = GridWorkspace::new(self.dim, msize);
        let mut worst = 0.0f64;
        for c in 0..self.components {
            let g = ws.to_grid(self, c);
            for z in &g {
                worst = worst.max(z.re.abs());
            }
        }
        Ok(worst)
    }

    // ------------------------------------------------------------------
    // Random states
    // ------------------------------------------------------------------

    /// Random torus scalar with smooth decay `exp(-decay |m|)`, reality
    /// enforced by construction.
    pub fn random_torus_scalar(
        dim: usize,
        trunc: u32,
        decay: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let mut f = Self::zero_torus_scalar(dim, trunc)?;
        f.fill_random(decay, rng);
        Ok(f)
    }

    /// Random divergence-free torus vector field.
    pub fn random_torus_vector(
        dim: usize,
        trunc: u32,
        decay: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let mut f = Self::zero_torus_vector(dim, trunc)?;
        f.fill_random(decay, rng);
        f.leray_project()
    }

    pub fn random_shell(
        n_shells: u32,
        params: ShellParams,
        decay: f64,
        rng: &mut impl Rng,
    ) -> Result<Self> {
        let mut f = Self::zero_shell(n_shells, params)?;
        for n in 1..=n_shells {
            let a = gaussian(rng);
            let b = gaussian(rng);
            let amp = (-decay * n as f64).exp() / std::f64::consts::SQRT_2;
            f.set_shell_coeff(n, Complex::new(a * amp, b * amp));
        }
        Ok(f)
    }

    fn fill_random(&mut self, decay: f64, rng: &mut impl Rng) {
        let canon = self.canonical_modes();
        for m in canon {
            let nm = self.eigenvalue(&m).sqrt();
            let amp = (-decay * nm).exp() / std::f64::consts::SQRT_2;
            for c in 0..self.components {
                let a = gaussian(rng);
                let b = gaussian(rng);
                self.set_pair(c, &m, Complex::new(a * amp, b * amp));
            }
        }
    }

    // ------------------------------------------------------------------
    // Pointwise (de-aliased) products
    // ------------------------------------------------------------------

    /// Exact de-aliased pointwise product of two scalar torus fields,
    /// truncated back to the common mode set with the zero mode dropped.
    pub fn quadratic_product(&self, other: &Self) -> Result<Self> {
        let (field, _mean) = self.quadratic_product_with_mean(other)?;
        Ok(field)
    }

    /// Same as `quadratic_product` but also reports the zero-mode (spatial
    /// mean) of the un-truncated product.
    pub fn quadratic_product_with_mean(&self, other: &Self) -> Result<(Self, f64)> {
        self.assert_compatible(other)?;
        if self.kind != FieldKind::TorusScalar {
            return Err(Error::Unsupported(
                "quadratic_product is defined for torus scalar fields".into(),
            ));
        }
        let msize = dealias_grid_size(self.kmax, 2, self.dim)?;
        let mut ws = GridWorkspace::new(self.dim, msize);
        let ga = ws.to_grid(self, 0);
        let gb = ws.to_grid(other, 0);
        let prod: Vec<Complex> =
            ga.iter().zip(gb.iter()).map(|(a, b)| Complex::new(a.re * b.re, 0.0)).collect();
        let mut out = SpectralField::zero_torus_scalar(self.dim, self.trunc)?;
        let mean = ws.from_grid(&prod, &mut out, 0);
        Ok((out, mean))
    }
}

#[inline]
pub(crate) fn is_canonical(m: &Mode) -> bool {
    for &x in m.iter() {
        if x > 0 {
            return true;
        }
        if x < 0 {
            return false;
        }
    }
    false
}

#[inline]
pub(crate) fn gaussian(rng: &mut impl Rng) -> f64 {
    // Box-Muller; two uniforms per call keeps the draw count deterministic.
    let u1: f64 = rng.random::<f64>().max(1e-300);
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests;
