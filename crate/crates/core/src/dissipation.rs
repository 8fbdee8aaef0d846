//! The concrete dissipation operator and its potential:
//!
//! ```text
//! A(u) = exp(rho(||u||_{H^{s*}})) ( a1 (-lap)^{s1*} u
//!                                 + a2 lap(|lap u|^{q-2} lap u)
//!                                 - a3 div(|grad u|^{2q-2} grad u) )
//! G(u) = exp(rho(||u||_{H^{s*}})) ( a1 ||u||_{H^{s1*}}^2
//!                                 + a2 ||u||_{W^{2,q}}^q
//!                                 + a3 ||u||_{W^{1,2q}}^{2q} )
//! ```
//!
//! with `rho` strictly increasing and convex. The duality `<A(u),u> = G(u)`
//! is the central consistency requirement; `apply_a` evaluates the operator
//! pseudo-spectrally while `g_potential` goes through the independent norm
//! quadratures, and the tests tie the two together. Shell states support the
//! `a1` term only (their W-norms are not defined), with the multiplier
//! `k_n^{2 s1*}`.

use crate::spectral::{
    dealias_grid_size, Complex, FieldKind, GridWorkspace, NormSpec, SpectralField,
};
use crate::{Error, Result};
use serde::{Deserialize, Serialize};

/// Strictly increasing convex weight `rho` with `rho(0) = 0`; `Linear` is the
/// default (`slope >= delta > 0`), `AffineExp` adds an exponential ramp.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Rho {
    Linear { slope: f64 },
    AffineExp { slope: f64, scale: f64, rate: f64 },
}

impl Default for Rho {
    fn default() -> Self {
        Rho::Linear { slope: 1.0 }
    }
}

impl Rho {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Rho::Linear { slope } => {
                if slope <= 0.0 {
                    return Err(Error::Config(format!("rho slope must be > 0, got {slope}")));
                }
            }
            Rho::AffineExp { slope, scale, rate } => {
                if slope < 0.0 || scale < 0.0 || rate <= 0.0 || (slope == 0.0 && scale == 0.0) {
                    return Err(Error::Config(format!(
                        "affine-exp rho needs slope >= 0, scale >= 0, rate > 0 and not both zero; \
                         got slope={slope}, scale={scale}, rate={rate}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Rho::Linear { slope } => slope * x,
            Rho::AffineExp { slope, scale, rate } => slope * x + scale * ((rate * x).exp() - 1.0),
        }
    }

    /// Inverse on [0, inf); closed form for the linear family, monotone
    /// bisection + Newton polish otherwise.
    pub fn inverse(&self, y: f64) -> Result<f64> {
        if y < 0.0 {
            return Err(Error::Domain(format!("rho^-1 needs y >= 0, got {y}")));
        }
        match *self {
            Rho::Linear { slope } => Ok(y / slope),
            Rho::AffineExp { slope, scale, rate } => {
                if y == 0.0 {
                    return Ok(0.0);
                }
                let mut hi = 1.0f64;
                while self.eval(hi) < y {
                    hi *= 2.0;
                    if hi > 1e300 {
                        return Err(Error::Domain("rho^-1 overflow".into()));
                    }
                }
                let mut lo = 0.0f64;
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if self.eval(mid) < y {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                let mut x = 0.5 * (lo + hi);
                for _ in 0..4 {
                    let fx = self.eval(x) - y;
                    let dfx = slope + scale * rate * (rate * x).exp();
                    if dfx > 0.0 {
                        x -= fx / dfx;
                    }
                }
                Ok(x.max(0.0))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DissipationSpec {
    pub s_star: f64,
    pub s1_star: f64,
    pub q: u32,
    pub a1: bool,
    pub a2: bool,
    pub a3: bool,
    pub rho: Rho,
}

impl Default for DissipationSpec {
    fn default() -> Self {
        // q >= 6 is what the high-order moment estimates require; s1* = 5
        // matches the fifth-power Laplacian appearing in those bounds.
        DissipationSpec {
            s_star: 4.0,
            s1_star: 5.0,
            q: 6,
            a1: true,
            a2: true,
            a3: true,
            rho: Rho::default(),
        }
    }
}

impl DissipationSpec {
    /// Defaults with only the diagonal `a1` term, the shell-state
    /// configuration.
    pub fn linear_only() -> Self {
        DissipationSpec { a2: false, a3: false, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_star < 4.0 {
            return Err(Error::Config(format!("s_star must be >= 4, got {}", self.s_star)));
        }
        if self.s1_star <= self.s_star {
            return Err(Error::Config(format!(
                "s1_star must exceed s_star, got s1_star={} <= s_star={}",
                self.s1_star, self.s_star
            )));
        }
        if self.q < 2 || self.q % 2 != 0 {
            return Err(Error::Config(format!(
                "q must be an even integer >= 2 (the W-norm quadratures are exact only then), got {}",
                self.q
            )));
        }
        if !(self.a1 || self.a2 || self.a3) {
            return Err(Error::Config("dissipation flags a1,a2,a3 must not all be zero".into()));
        }
        self.rho.validate()
    }

    fn check_flags_for(&self, u: &SpectralField) -> Result<()> {
        if u.kind() == FieldKind::Shell && (self.a2 || self.a3) {
            return Err(Error::Unsupported(
                "shell states support only the a1 dissipation term".into(),
            ));
        }
        Ok(())
    }

    /// The exponential prefactor `exp(rho(||u||_{H^{s*}}))`.
    pub fn prefactor(&self, u: &SpectralField) -> f64 {
        self.rho.eval(u.hs_norm(self.s_star)).exp()
    }

    /// `Pi_N A(u)`.
    pub fn apply_a(&self, u: &SpectralField) -> Result<SpectralField> {
        self.check_flags_for(u)?;
        let theta = self.prefactor(u);
        let mut out = u.scaled(0.0);
        if self.a1 {
            let lin = u.apply_multiplier(|m| {
                Complex::new(u_eigen(u, m).powf(self.s1_star), 0.0)
            });
            out.axpy(1.0, &lin);
        }
        if self.a2 {
            out.axpy(1.0, &self.p_laplacian_order2(u)?);
        }
        if self.a3 {
            out.axpy(1.0, &self.p_laplacian_order1(u)?);
        }
        out.scale(theta);
        if !out.is_finite() {
            return Err(Error::Divergence("A(u) produced non-finite coefficients".into()));
        }
        Ok(out)
    }

    /// `lap(|lap u|^{q-2} lap u)` evaluated with degree-matched padding.
    fn p_laplacian_order2(&self, u: &SpectralField) -> Result<SpectralField> {
        let d = u.dim();
        let q = self.q as usize;
        let msize = dealias_grid_size(u.kmax(), q - 1, d)?;
        let mut ws = GridWorkspace::new(d, msize);
        let ncomp = u.components();
        let laps: Vec<Vec<Complex>> = (0..ncomp)
            .map(|c| ws.to_grid_with(u, c, |m| Complex::new(-u_eigen(u, m), 0.0)))
            .collect();
        let npts = laps[0].len();
        let mut magsq = vec![0.0f64; npts];
        for l in &laps {
            for (mg, z) in magsq.iter_mut().zip(l.iter()) {
                *mg += z.re * z.re;
            }
        }
        let half = (q - 2) / 2;
        let mut out = u.scaled(0.0);
        for c in 0..ncomp {
            let prod: Vec<Complex> = (0..npts)
                .map(|p| Complex::new(magsq[p].powi(half as i32) * laps[c][p].re, 0.0))
                .collect();
            ws.from_grid(&prod, &mut out, c);
        }
        // outer Laplacian in coefficient space
        Ok(out.apply_multiplier(|m| Complex::new(-u_eigen(u, m), 0.0)))
    }

    /// `-div(|grad u|^{2q-2} grad u)` evaluated with degree-matched padding.
    fn p_laplacian_order1(&self, u: &SpectralField) -> Result<SpectralField> {
        let d = u.dim();
        let q2 = 2 * self.q as usize;
        let msize = dealias_grid_size(u.kmax(), q2 - 1, d)?;
        let mut ws = GridWorkspace::new(d, msize);
        let ncomp = u.components();
        let i = Complex::new(0.0, 1.0);
        // grads[c][axis]
        let mut grads: Vec<Vec<Vec<Complex>>> = Vec::with_capacity(ncomp);
        for c in 0..ncomp {
            grads.push(
                (0..d).map(|ax| ws.to_grid_with(u, c, |m| i * (m[ax] as f64))).collect(),
            );
        }
        let npts = grads[0][0].len();
        let mut magsq = vec![0.0f64; npts];
        for comp in &grads {
            for axis in comp {
                for (mg, z) in magsq.iter_mut().zip(axis.iter()) {
                    *mg += z.re * z.re;
                }
            }
        }
        let half = (q2 - 2) / 2;
        let mut out = u.scaled(0.0);
        let mut flux = u.scaled(0.0);
        for c in 0..ncomp {
            let mut div_accum = vec![Complex::new(0.0, 0.0); out.mode_count()];
            let _ = &mut div_accum;
            let mut total: Option<SpectralField> = None;
            for ax in 0..d {
                let prod: Vec<Complex> = (0..npts)
                    .map(|p| Complex::new(magsq[p].powi(half as i32) * grads[c][ax][p].re, 0.0))
                    .collect();
                ws.from_grid(&prod, &mut flux, c);
                let term = flux.apply_multiplier(|m| i * (m[ax] as f64));
                match &mut total {
                    None => total = Some(term),
                    Some(t) => t.axpy(1.0, &term),
                }
            }
            // copy component c of -div into out
            let t = total.unwrap();
            for m in u.modes() {
                out.set_coeff(c, &m, -t.coeff(c, &m));
            }
        }
        Ok(out)
    }

    /// The potential evaluated through the norm quadratures, independent of
    /// `apply_a`.
    pub fn g_potential(&self, u: &SpectralField) -> Result<f64> {
        self.check_flags_for(u)?;
        let theta = self.prefactor(u);
        let mut acc = 0.0;
        if self.a1 {
            let h = u.hs_norm(self.s1_star);
            acc += h * h;
        }
        if self.a2 {
            let w = u.norm(&NormSpec::w(2, self.q))?;
            acc += w.powi(self.q as i32);
        }
        if self.a3 {
            let w = u.norm(&NormSpec::w(1, 2 * self.q))?;
            acc += w.powi(2 * self.q as i32);
        }
        Ok(theta * acc)
    }

    /// `xi(x) = rho^{-1}(3x)`, the increasing concave companion of `rho` used
    /// by the ensemble bounds.
    pub fn xi(&self, x: f64) -> Result<f64> {
        if x < 0.0 {
            return Err(Error::Domain(format!("xi needs x >= 0, got {x}")));
        }
        self.rho.inverse(3.0 * x)
    }

    /// Inverse of `xi`: `xi^{-1}(y) = rho(y) / 3`.
    pub fn xi_inverse(&self, y: f64) -> Result<f64> {
        if y < 0.0 {
            return Err(Error::Domain(format!("xi^-1 needs y >= 0, got {y}")));
        }
        Ok(self.rho.eval(y) / 3.0)
    }
}

fn u_eigen(u: &SpectralField, m: &crate::spectral::Mode) -> f64 {
    u.eigenvalue(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelSpec;
    use crate::spectral::ShellParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn torus_spec() -> DissipationSpec {
        DissipationSpec::default()
    }

    #[test]
    fn zero_field_maps_to_zero() {
        let spec = torus_spec();
        let u = SpectralField::zero_torus_scalar(2, 9).unwrap();
        let a = spec.apply_a(&u).unwrap();
        assert_eq!(a.l2_norm(), 0.0);
        assert_eq!(spec.g_potential(&u).unwrap(), 0.0);
    }

    #[test]
    fn single_mode_linear_term_multiplier() {
        // a = (1,0,0), single mode m: A(u) = exp(rho(|m|^{s*} ||u||)) |m|^{2 s1*} u
        let spec = DissipationSpec { a2: false, a3: false, ..Default::default() };
        let mut u = SpectralField::zero_torus_scalar(2, 9).unwrap();
        u.set_pair(0, &[2, 1, 0], Complex::new(0.2, -0.1));
        let msq: f64 = 5.0;
        let theta = (msq.powf(spec.s_star / 2.0) * u.l2_norm()).exp();
        let a = spec.apply_a(&u).unwrap();
        let expect = theta * msq.powf(spec.s1_star);
        let got = a.coeff(0, &[2, 1, 0]) / u.coeff(0, &[2, 1, 0]);
        assert!((got.re - expect).abs() < 1e-9 * expect, "{got:?} vs {expect}");
        assert!(got.im.abs() < 1e-12 * expect);
    }

    #[test]
    fn duality_random_fields() {
        // <A(u), u> = G(u) within 1e-8 relative, the pairing that defines G
        let spec = torus_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let u = SpectralField::random_torus_scalar(2, 6, 0.6, &mut rng).unwrap();
            let a = spec.apply_a(&u).unwrap();
            let pair = a.inner_product(&u).unwrap();
            let g = spec.g_potential(&u).unwrap();
            assert!(
                (pair - g).abs() <= 1e-8 * (1.0 + g),
                "duality violated: <Au,u>={pair}, G={g}"
            );
        }
    }

    #[test]
    fn duality_vector_field() {
        let spec = torus_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..10 {
            let u = SpectralField::random_torus_vector(3, 4, 0.6, &mut rng).unwrap();
            let a = spec.apply_a(&u).unwrap();
            let pair = a.inner_product(&u).unwrap();
            let g = spec.g_potential(&u).unwrap();
            assert!((pair - g).abs() <= 1e-8 * (1.0 + g), "<Au,u>={pair}, G={g}");
        }
    }

    #[test]
    fn duality_shell_linear_term() {
        let spec = DissipationSpec::linear_only();
        let params = ShellParams { k0: 1.0, lambda: 2.0 };
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            // amplitudes must beat the k_n^{s*} growth or exp(rho(H^4)) blows up
            let u = SpectralField::random_shell(8, params, 4.0, &mut rng).unwrap();
            let a = spec.apply_a(&u).unwrap();
            let pair = a.inner_product(&u).unwrap();
            let g = spec.g_potential(&u).unwrap();
            assert!((pair - g).abs() <= 1e-8 * (1.0 + g));
        }
    }

    #[test]
    fn shell_rejects_nonlinear_terms() {
        let spec = torus_spec();
        let u = SpectralField::zero_shell(8, ShellParams { k0: 1.0, lambda: 2.0 }).unwrap();
        assert!(matches!(spec.apply_a(&u), Err(Error::Unsupported(_))));
        assert!(matches!(spec.g_potential(&u), Err(Error::Unsupported(_))));
    }

    #[test]
    fn monotone_under_galerkin_projection() {
        // G(Pi_N' u) <= G(u) and nondecreasing along nested truncations
        let spec = torus_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        let model = ModelSpec::Euler2dVorticity;
        let mut u = model.random_state(16, 0.4, &mut rng).unwrap();
        let h4 = u.hs_norm(spec.s_star);
        u.scale(1.0 / h4);
        let mut last = 0.0;
        for n in [1u32, 2, 4, 8, 16] {
            let g = spec.g_potential(&u.galerkin_project(n).unwrap()).unwrap();
            assert!(g + 1e-12 >= last, "not monotone at N={n}: {g} < {last}");
            last = g;
        }
        let g_full = spec.g_potential(&u).unwrap();
        assert!((last - g_full).abs() <= 1e-12 * g_full);
    }

    #[test]
    fn superquadratic_scaling() {
        // G(cu) >= c^2 G(u) for c >= 1 (the p-Laplacian parts grow faster)
        let spec = torus_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut u = SpectralField::random_torus_scalar(2, 6, 0.6, &mut rng).unwrap();
        u.scale(0.3 / u.hs_norm(spec.s_star));
        let g1 = spec.g_potential(&u).unwrap();
        for c in [1.0f64, 1.5, 2.0, 3.0] {
            let gc = spec.g_potential(&u.scaled(c)).unwrap();
            assert!(gc >= c * c * g1 * (1.0 - 1e-12), "c={c}: {gc} < {}", c * c * g1);
        }
    }

    #[test]
    fn coercivity_lower_bound_estimate() {
        // empirical kappa_N: min over random directions of G(u)/||u||_{H^{s*}}^4
        // must be strictly positive on a fixed Galerkin space
        let spec = torus_spec();
        let mut rng = ChaCha8Rng::seed_from_u64(29);
        let mut kappa = f64::INFINITY;
        for _ in 0..50 {
            let u = SpectralField::random_torus_scalar(2, 4, 0.2, &mut rng).unwrap();
            let g = spec.g_potential(&u).unwrap();
            let h4 = u.hs_norm(spec.s_star);
            kappa = kappa.min(g / h4.powi(4));
        }
        assert!(kappa.is_finite() && kappa > 0.0, "kappa estimate {kappa}");
    }

    #[test]
    fn xi_linear_default_and_roundtrip() {
        // rho(x) = 3x makes xi the identity
        let spec = DissipationSpec { rho: Rho::Linear { slope: 3.0 }, ..Default::default() };
        for x in [0.0, 0.3, 1.7, 10.0] {
            assert!((spec.xi(x).unwrap() - x).abs() < 1e-12);
        }
        // round-trip xi(xi^{-1}(y)) = y for the default and the affine-exp rho
        let specs = [
            DissipationSpec::default(),
            DissipationSpec {
                rho: Rho::AffineExp { slope: 0.5, scale: 0.2, rate: 0.9 },
                ..Default::default()
            },
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for spec in &specs {
            for _ in 0..100 {
                let y: f64 = rand::Rng::random::<f64>(&mut rng) * 20.0;
                let x = spec.xi_inverse(y).unwrap();
                let back = spec.xi(x).unwrap();
                assert!((back - y).abs() <= 1e-12 * (1.0 + y), "{back} vs {y}");
            }
        }
        assert_eq!(spec.xi(0.0).unwrap(), 0.0);
        assert!(matches!(spec.xi(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn validation_rules() {
        let mut s = DissipationSpec::default();
        s.q = 5;
        assert!(matches!(s.validate(), Err(Error::Config(_))));
        let mut s = DissipationSpec::default();
        s.s1_star = 4.0;
        assert!(matches!(s.validate(), Err(Error::Config(_))));
        let mut s = DissipationSpec::default();
        s.a1 = false;
        s.a2 = false;
        s.a3 = false;
        assert!(matches!(s.validate(), Err(Error::Config(_))));
        assert!(DissipationSpec::default().validate().is_ok());
    }
}
